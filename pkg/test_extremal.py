"""
Tests for extremal: Sigma(n,k), the maximum k-Sperner families, f(n), code layers and the
extra-set construction
"""

import pytest

from errors import CapacityError, RangeError
from extremal import (ExtremalParams, build_construction, code_layer_capacity, f,
                      greedy_code_layer, max_pair_intersection, random_superset,
                      residue_code_layer, sigma, sigma_star)
from family_core import SetFamily, complement_family, is_k_sperner, layers, make_rng
from poset_engine import count_butterflies


@pytest.mark.parametrize("n, k, expected", [(4, 2, 10), (5, 2, 20), (3, 1, 3), (10, 2, 462)])
def test_sigma(n, k, expected):
    assert sigma(n, k) == expected


def test_sigma_rejects_k_above_n():
    with pytest.raises(RangeError):
        sigma(3, 4)


def test_sigma_star_two_families_when_n_plus_k_even():
    families = sigma_star(4, 2)
    assert families == [layers(4, [1, 2]), layers(4, [2, 3])]


def test_sigma_star_single_family_when_n_plus_k_odd():
    assert sigma_star(5, 2) == [layers(5, [2, 3])]


def test_sigma_star_n3_k1():
    # both index formulas give distinct layers 1 and 2
    assert sigma_star(3, 1) == [layers(3, [1]), layers(3, [2])]


@pytest.mark.parametrize("n", range(2, 9))
def test_sigma_star_families_are_extremal(n):
    for family in sigma_star(n, 2):
        assert len(family) == sigma(n, 2)
        assert is_k_sperner(family, 2)
        assert count_butterflies(family) == 0


@pytest.mark.parametrize("n, expected", [(4, 3), (5, 12), (7, 30), (2, 0)])
def test_f(n, expected):
    assert f(n) == expected


def test_extremal_params():
    assert ExtremalParams(7).h == 4
    with pytest.raises(RangeError):
        ExtremalParams(4, 2, -1)


# ---- code layers ----

def test_residue_code_layer_examples():
    code = residue_code_layer(5, 3)
    assert code.members == SetFamily.from_lists(5, [[1, 4, 5], [2, 3, 5]])
    assert code.max_pair_intersection == 1
    assert len(residue_code_layer(4, 3)) == 1
    six = residue_code_layer(6, 3)
    assert len(six) >= 3
    assert six.max_pair_intersection <= 1


@pytest.mark.parametrize("n, w", [(6, 4), (7, 5), (8, 5), (9, 6)])
def test_residue_code_layers_are_codes(n, w):
    code = residue_code_layer(n, w)
    assert max_pair_intersection(code.members) <= w - 2


def test_greedy_code_layer_examples():
    assert len(greedy_code_layer(4, 3, 2)) == 1
    five = greedy_code_layer(5, 3, 2)
    assert len(five) == 2
    assert five.max_pair_intersection <= 1
    assert len(greedy_code_layer(6, 3, 0)) == 0


def test_capacity():
    assert code_layer_capacity(4, "residue") == 1
    assert code_layer_capacity(6, "greedy") >= 2


# ---- construction ----

def test_construction_n4():
    family = build_construction(4, 1)
    assert len(family) == 11
    assert count_butterflies(family) == 3


def test_construction_n6_two_extra_sets():
    family = build_construction(6, 2)
    assert len(family) == sigma(6, 2) + 2
    assert count_butterflies(family) == 24


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_construction_without_extra_sets_is_butterfly_free(n):
    family = build_construction(n, 0)
    assert family in sigma_star(n, 2)
    assert count_butterflies(family) == 0


@pytest.mark.parametrize("n, E, strategy", [(6, 3, "residue"), (7, 2, "greedy"), (8, 4, "residue")])
def test_construction_count_is_exactly_e_times_f(n, E, strategy):
    family = build_construction(n, E, strategy)
    assert count_butterflies(family) == E * f(n)


def test_mirrored_construction():
    family = build_construction(6, 2, mirrored=True)
    assert family == complement_family(build_construction(6, 2))
    assert count_butterflies(family) == 24


def test_construction_capacity_error_names_the_maximum():
    with pytest.raises(CapacityError) as excinfo:
        build_construction(4, 2)
    assert excinfo.value.achieved == 1


def test_random_superset():
    base = layers(5, [2, 3])
    family = random_superset(base, 3, make_rng(9))
    assert len(family) == len(base) + 3
    assert base.union(family) == family
    assert count_butterflies(family) >= 3 * f(5)
