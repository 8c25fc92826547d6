"""
End-to-end suites: construction exactness, counter agreement, oracle calibration, LYM sums,
shadow bounds, compression, the x/g grid, the census bounds and byte-identical reports
"""

from itertools import combinations
from math import comb, sqrt

import numpy as np
import pytest

from bounds import Verdict, lovasz_shadow_lb, prop_change_grid, shadow_audit, stability_check
from extremal import build_construction, code_layer_capacity, f, sigma, sigma_star
from family_core import (SetFamily, is_left_shifted, layer, lubell_sum, make_rng, random_family,
                         random_k_sperner_family, random_uniform_family, save_family, shadow, shift)
from isoperimetry import bad_superset_census, edges_via_rank, hamming_edges, is_downset_encoding
from main import run
from oracle import max_p_free, min_copies
from poset_engine import BUTTERFLY, count_butterflies, count_copies, count_injections, improved_lym_sum

SEED = 20240601


# ---- constructions and counters ----

@pytest.mark.parametrize("n", range(4, 13))
def test_construction_exactness(n):
    for E in range(code_layer_capacity(n, "residue") + 1):
        assert count_butterflies(build_construction(n, E)) == E * f(n)


def test_counters_agree_on_random_families():
    rng = make_rng(SEED, stream=2)
    for _ in range(200):
        n = int(rng.integers(3, 9))
        F = random_family(n, int(rng.integers(0, min(40, 1 << n) + 1)), rng)
        fast = count_butterflies(F)
        assert fast == count_copies(F, BUTTERFLY)
        assert 4 * fast == count_injections(F, BUTTERFLY)


def test_oracle_calibration():
    assert max_p_free(4, BUTTERFLY).objective == 10 == sigma(4, 2)
    assert max_p_free(2, BUTTERFLY).objective == 4
    assert min_copies(4, 11, BUTTERFLY).objective <= 3


# ---- LYM suites ----

def test_lubell_sums_of_two_sperner_families():
    rng = make_rng(SEED, stream=4)
    for _ in range(500):
        n = int(rng.integers(2, 11))
        assert lubell_sum(random_k_sperner_family(n, 2, rng)) <= 2
    for n in range(2, 13):
        for family in sigma_star(n, 2):
            assert lubell_sum(family) == 2


def test_improved_lym_on_every_butterfly_free_family_of_the_cube():
    proper = [m for m in range(1, 7)]
    checked = 0
    for size in range(len(proper) + 1):
        for chosen in combinations(proper, size):
            F = SetFamily(3, chosen)
            if count_butterflies(F) == 0:
                assert improved_lym_sum(F) <= 2
                checked += 1
    assert checked > 0


def _greedy_butterfly_free(n, rng):
    """Scan the proper nonempty subsets in random order, keeping each set that adds no butterfly."""
    size = 1 << n
    universe = np.arange(size, dtype=np.int64)
    # common[c, d] = members strictly below both c and d
    common = np.zeros((size, size), dtype=np.int16)
    member = np.zeros(size, dtype=bool)
    for G in rng.permutation(size).tolist():
        if G in (0, size - 1):
            continue
        if (common[G, member] >= 2).any():
            continue
        up = universe[((universe & G) == G) & (universe != G)]
        tops = up[member[up]]
        if len(tops) > 1:
            shared = common[np.ix_(tops, tops)]
            np.fill_diagonal(shared, 0)
            if shared.any():
                continue
        member[G] = True
        common[np.ix_(up, up)] += 1
    return SetFamily(n, tuple(universe[member].tolist()))


@pytest.mark.parametrize("n", range(8, 13))
def test_greedy_butterfly_free_families(n):
    rng = make_rng(SEED, stream=n)
    for _ in range(40):
        F = _greedy_butterfly_free(n, rng)
        assert count_butterflies(F) == 0
        assert improved_lym_sum(F) <= 2
        assert stability_check("cor_butt", F).verdict == Verdict.HOLDS


# ---- shadows ----

def test_shadow_bound_over_every_family_of_three_sets_of_six():
    rows = shadow_audit(6, 3)
    assert len(rows) == 21
    assert all(row.verdict == Verdict.HOLDS for row in rows)


def test_shadow_bound_on_random_three_uniform_families():
    rng = make_rng(SEED, stream=5)
    for _ in range(1000):
        n = int(rng.integers(4, 13))
        G = random_uniform_family(n, 3, int(rng.integers(1, min(60, comb(n, 3)) + 1)), rng)
        assert lovasz_shadow_lb(3, len(G)) <= len(shadow(G, 2)) + 1e-9


# ---- compression ----

def test_shifting_never_loses_edges():
    rng = make_rng(SEED, stream=6)
    for _ in range(1000):
        n = int(rng.integers(4, 8))
        k = int(rng.integers(2, n))
        F = random_uniform_family(n, k, int(rng.integers(1, min(9, comb(n, k) + 1))), rng)
        j = int(rng.integers(2, n + 1))
        i = int(rng.integers(1, j))
        G = shift(F, i, j)
        assert hamming_edges(F, k) <= hamming_edges(G, k)
        if is_left_shifted(G):
            assert edges_via_rank(G, k) == hamming_edges(G, k)


def test_downset_iff_left_shifted_exhaustive():
    masks = layer(5, 2).sets
    for bits in range(1 << len(masks)):
        F = SetFamily(5, tuple(m for t, m in enumerate(masks) if bits >> t & 1))
        assert is_downset_encoding(F, 2) == is_left_shifted(F)


# ---- x and g ----

def test_property_grid():
    rows = prop_change_grid(3, 60)
    assert not [row for row in rows if row.failed]
    assert {row.params["l"] for row in rows} == set(range(3, 61))
    exact = [row for row in rows if row.name == "g_at_least_2m"]
    assert any(row.verdict == Verdict.HOLDS for row in exact)


# ---- censuses ----

@pytest.mark.parametrize("n", [10, 12, 14])
def test_census_bounds_with_planted_missing_sets(n):
    k = n // 2
    rng = make_rng(SEED, stream=100 + n)
    for _ in range(50):
        m = int(rng.integers(1, k * k + 1))
        missing = random_uniform_family(n, k, m, rng)
        census = bad_superset_census(layer(n, k).difference(missing), k, "sqrt")
        assert census.bad_count <= sqrt(m)
        assert census.cumulative_bad <= 2 * sqrt(m)


# ---- determinism ----

@pytest.fixture
def report_inputs(tmp_path):
    rng = make_rng(SEED, stream=9)
    paths = {
        "random": random_family(8, 40, rng),
        "sperner": random_k_sperner_family(10, 2, rng),
        "greedy": _greedy_butterfly_free(8, rng),
        "census": layer(10, 5).difference(random_uniform_family(10, 5, 12, rng)),
    }
    for name, family in paths.items():
        save_family(family, tmp_path / f"{name}.json")
    return {name: str(tmp_path / f"{name}.json") for name in paths}


def _reports(argv_list, threads, capsys):
    outputs = []
    for argv in argv_list:
        code = run(["--threads", str(threads), "--format", "json", *argv])
        captured = capsys.readouterr()
        outputs.append((code, captured.out, captured.err))
    return outputs


def test_reports_are_byte_identical_across_threads(report_inputs, capsys):
    argv_list = [
        ["construct", "--n", "10", "--extra", "3"],
        ["count", "--family", report_inputs["random"]],
        ["count", "--family", report_inputs["random"], "--method", "injections"],
        ["oracle", "max-free", "--n", "4"],
        ["oracle", "min-copies", "--n", "4", "--size", "11"],
        ["lym", "--family", report_inputs["sperner"]],
        ["lym", "--family", report_inputs["greedy"], "--improved"],
        ["bounds", "--shadow-audit", "5:3"],
        ["bounds", "--grid", "3:60"],
        ["iso", "--family", report_inputs["census"], "--k", "5", "--sqrt"],
        ["audit", "prop1", "--n", "6", "--e-max", "2", "--trials", "3"],
    ]
    serial = _reports(argv_list, 1, capsys)
    assert [code for code, _, _ in serial] == [0] * len(argv_list)
    assert _reports(argv_list, 4, capsys) == serial
