"""
Tests for the oracle: rank intervals, search workers, checkpoints and the master's searches
"""

import json
from itertools import combinations
from math import comb

import pytest

from bounds import Verdict
from errors import RangeError, ScaleError, ValidationError
from family_core import SetFamily, complement_family, layers, make_rng, permute_family
from oracle import OracleMaster, Witness, audit_prop1, max_p_free, min_copies, verify_witness
from oracle_worker import (SearchWorker, _search_range, family_key, rank_combination,
                           unrank_combination, universe)
from poset_engine import BUTTERFLY, contains_poset, count_butterflies, parse_poset_spec, poset_from_json


# ---- combination ranks ----

def test_rank_follows_lexicographic_order():
    N, s = 7, 3
    for expected, combo in enumerate(combinations(range(N), s)):
        assert rank_combination(combo, N) == expected
        assert unrank_combination(expected, N, s) == list(combo)


def test_unrank_rejects_out_of_range():
    with pytest.raises(RangeError):
        unrank_combination(comb(6, 2), 6, 2)


def test_universe_is_canonical():
    assert universe(2) == [0b00, 0b01, 0b10, 0b11]
    assert len(universe(4)) == 16


# ---- workers ----

def test_worker_identity():
    worker = SearchWorker(3, 5, BUTTERFLY, 0, 10)
    identity = worker.get_identity()
    assert identity["poset"] == "butterfly"
    assert (identity["rank_start"], identity["rank_end"]) == (0, 10)


def test_worker_rejects_bad_interval():
    with pytest.raises(RangeError):
        SearchWorker(3, 5, BUTTERFLY, 0, comb(8, 5) + 1)


def test_worker_finds_the_interval_minimum():
    n, size = 3, 6
    worker = SearchWorker(n, size, BUTTERFLY, 0, comb(8, size)).run()
    brute = min(count_butterflies(SetFamily(n, combo)) for combo in combinations(universe(n), size))
    assert worker.best_objective == brute
    assert count_butterflies(worker.best_family) == brute


def test_split_intervals_agree_with_a_single_interval():
    n, size = 3, 5
    total = comb(8, size)
    whole = SearchWorker(n, size, BUTTERFLY, 0, total).run()
    parts = [SearchWorker(n, size, BUTTERFLY, a, min(a + 9, total)).run() for a in range(0, total, 9)]
    assert min(p.best_objective for p in parts) == whole.best_objective


def test_checkpoint_round_trip(tmp_path):
    path = tmp_path / "interval.json"
    done = SearchWorker(3, 6, BUTTERFLY, 0, 20).run()
    done.save_checkpoint(path)

    fresh = SearchWorker(3, 6, BUTTERFLY, 0, 20)
    assert fresh.load_checkpoint(path)
    assert fresh.done
    assert fresh.best_objective == done.best_objective
    assert fresh.best_family == done.best_family

    other = SearchWorker(3, 6, BUTTERFLY, 5, 20)
    assert not other.load_checkpoint(path)


VEE_JSON = {"size": 3, "lt": [[0, 1], [0, 2]]}
CHAIN3_JSON = {"size": 3, "lt": [[0, 1], [1, 2]]}


def test_checkpoint_belongs_to_one_search(tmp_path):
    path = tmp_path / "interval.json"
    vee, chain = poset_from_json(VEE_JSON), poset_from_json(CHAIN3_JSON)
    SearchWorker(3, 6, vee, 0, 20).run().save_checkpoint(path)

    assert SearchWorker(3, 6, vee, 0, 20).load_checkpoint(path)
    assert not SearchWorker(3, 6, chain, 0, 20).load_checkpoint(path)
    assert not SearchWorker(3, 5, vee, 0, 20).load_checkpoint(path)
    assert not SearchWorker(4, 6, vee, 0, 20).load_checkpoint(path)


def test_checkpoint_must_be_an_object(tmp_path):
    path = tmp_path / "interval.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ValidationError):
        SearchWorker(3, 6, BUTTERFLY, 0, 20).load_checkpoint(path)


def test_custom_posets_do_not_share_checkpoints(tmp_path):
    vee, chain = poset_from_json(VEE_JSON), poset_from_json(CHAIN3_JSON)
    assert vee.name == chain.name == "custom"
    assert vee.digest() != chain.digest()

    first = OracleMaster(checkpoint_dir=tmp_path).min_copies(3, 6, vee)
    assert first.objective == min_copies(3, 6, vee).objective
    second = OracleMaster(checkpoint_dir=tmp_path).min_copies(3, 6, chain)
    assert second.objective == min_copies(3, 6, chain).objective == 0


def test_corrupt_checkpoint(tmp_path):
    path = tmp_path / "interval.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError):
        SearchWorker(3, 6, BUTTERFLY, 0, 20).load_checkpoint(path)


def test_search_range_writes_its_checkpoint(tmp_path):
    path = tmp_path / "interval.json"
    result = _search_range((3, 4, BUTTERFLY, 0, comb(8, 4), str(path)))
    assert json.loads(path.read_text(encoding="utf-8")) == result
    assert result["best_objective"] == 0


# ---- largest P-free families ----

def test_max_free_butterfly_n4():
    witness = max_p_free(4, BUTTERFLY)
    assert witness.objective == 10
    assert len(witness.family) == 10
    assert not contains_poset(witness.family, BUTTERFLY)
    assert not witness.heuristic


def test_max_free_small_cases():
    assert max_p_free(2, BUTTERFLY).objective == 4
    assert max_p_free(3, parse_poset_spec("chain:2")).objective == 3


def test_max_free_greedy_above_the_exhaustive_limit():
    witness = max_p_free(7, parse_poset_spec("chain:2"))
    assert witness.heuristic
    assert verify_witness(witness, parse_poset_spec("chain:2"))


def test_max_free_scale_limits():
    with pytest.raises(ScaleError):
        max_p_free(11, BUTTERFLY)
    with pytest.raises(RangeError):
        max_p_free(0, BUTTERFLY)


# ---- fewest copies ----

def test_min_copies_examples():
    assert min_copies(4, 11, BUTTERFLY).objective <= 3
    assert min_copies(4, 10, BUTTERFLY).objective == 0
    assert min_copies(2, 4, BUTTERFLY).objective == 0


def test_min_copies_is_nondecreasing_in_size():
    objectives = [min_copies(4, size, BUTTERFLY).objective for size in range(9, 13)]
    assert objectives == [0, 0, 3, 6]
    assert objectives == sorted(objectives)


def test_objectives_survive_relabelling_the_ground_set():
    rng = make_rng(61)
    fewest = min_copies(4, 11, BUTTERFLY)
    largest = max_p_free(4, BUTTERFLY)
    assert fewest.objective == 3
    for _ in range(5):
        perm = (rng.permutation(4) + 1).tolist()
        assert count_butterflies(permute_family(fewest.family, perm)) == fewest.objective
        relabelled = permute_family(largest.family, perm)
        assert len(relabelled) == largest.objective
        assert not contains_poset(relabelled, BUTTERFLY)


def test_complemented_witness_keeps_the_objective():
    for size in (10, 11, 12):
        witness = min_copies(4, size, BUTTERFLY)
        assert count_butterflies(complement_family(witness.family)) == witness.objective


def test_min_copies_witness_verifies():
    witness = min_copies(3, 7, BUTTERFLY)
    assert isinstance(witness, Witness)
    assert witness.size == 7
    assert verify_witness(witness, BUTTERFLY)


def test_min_copies_does_not_depend_on_threads():
    serial = min_copies(3, 6, BUTTERFLY, threads=1)
    pooled = min_copies(3, 6, BUTTERFLY, threads=2)
    assert serial.objective == pooled.objective
    assert family_key(serial.family) == family_key(pooled.family)


def test_min_copies_reuses_checkpoints(tmp_path):
    master = OracleMaster(checkpoint_dir=tmp_path)
    first = master.min_copies(3, 5, BUTTERFLY)
    files = sorted(tmp_path.glob(f"min_copies_n3_s5_butterfly-{BUTTERFLY.digest()}_*.json"))
    assert files
    second = OracleMaster(checkpoint_dir=tmp_path).min_copies(3, 5, BUTTERFLY)
    assert second == first


def test_min_copies_scale_gates():
    with pytest.raises(ScaleError):
        min_copies(5, 10, BUTTERFLY)
    with pytest.raises(ScaleError):
        min_copies(7, 3, BUTTERFLY, allow_large=True)
    with pytest.raises(RangeError):
        min_copies(3, 9, BUTTERFLY)


def test_master_rejects_zero_threads():
    with pytest.raises(RangeError):
        OracleMaster(threads=0)


# ---- construction audit ----

def test_audit_n4():
    rows = audit_prop1(4, 1, seed=20240601)
    assert [row.name for row in rows] == ["superset_lower", "construction_exact"] * 2
    assert all(row.verdict == Verdict.HOLDS for row in rows)
    assert rows[-1].lhs == 3


def test_audit_n6():
    rows = audit_prop1(6, 2, seed=7, trials=3)
    exact = [row for row in rows if row.name == "construction_exact"]
    assert [row.lhs for row in exact] == [0, 12, 24]
    assert not [row for row in rows if row.failed]


def test_audit_reports_capacity_shortfall():
    rows = audit_prop1(4, 2, seed=1, trials=2)
    assert rows[-1].name == "construction_exact"
    assert rows[-1].verdict == Verdict.HYPOTHESIS_NOT_MET


def test_format_witness():
    witness = Witness(layers(4, [1, 2]), 0, "min-copies", "butterfly")
    text = OracleMaster.format_witness(witness)
    assert "min-copies n=4 poset=butterfly" in text
    assert "Objective: 0" in text
