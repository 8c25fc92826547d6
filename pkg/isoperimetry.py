"""
Isoperimetry - edges of the Hamming graph H(n,k), the gap-vector encoding of k-sets,
and the censuses of sets above a layer that see too few members of it
"""

from collections import Counter
from dataclasses import dataclass, field
from math import ceil, comb, floor, sqrt
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from bounds import BoundReport, Verdict, report
from errors import HypothesisError, PreconditionError, RangeError
from family_core import SetFamily, elements_of, is_left_shifted, layer, layer_masks, mask_of


def _require_uniform(F: SetFamily, k: int, what: str):
    if not F.is_uniform(k):
        sizes = sorted(F.layer_sizes())
        raise PreconditionError(f"{what} needs a {k}-uniform family (member sizes {sizes})")


def hamming_edges(F: SetFamily, k: int) -> int:
    """
    Number of pairs {A, B} in F with |A & B| = k-1.

    Two adjacent k-sets share exactly one (k-1)-set, so the edges are counted as
    sum over (k-1)-sets S of C(d(S), 2), d(S) = members containing S.
    """
    _require_uniform(F, k, "hamming_edges")
    degrees: Counter = Counter()
    for mask in F.sets:
        for element in elements_of(mask):
            degrees[mask & ~(1 << (element - 1))] += 1
    return sum(comb(d, 2) for d in degrees.values())


@dataclass(frozen=True)
class HarperVector:
    """
    Gap vector of a k-set of [n]: y(j) counts the non-members below the j-th member.
    Entries are nondecreasing and lie in [0, n-k].
    """
    y: Tuple[int, ...]
    n: int

    def __post_init__(self):
        k = len(self.y)
        if any(a > b for a, b in zip(self.y, self.y[1:])):
            raise PreconditionError(f"Gap vector must be nondecreasing: {self.y}")
        if self.y and (self.y[0] < 0 or self.y[-1] > self.n - k):
            raise PreconditionError(f"Gap vector entries must lie in [0, {self.n - k}]: {self.y}")

    @property
    def k(self) -> int:
        return len(self.y)

    def to_mask(self) -> int:
        return mask_of(value + j for j, value in enumerate(self.y, start=1))


def harper_vector(S: Union[int, Iterable[int]], n: int, k: int) -> HarperVector:
    """
    Args:
        S: A k-subset of [n], as a mask or as 1-based elements
        n: Ground size
        k: Expected size of S

    Raises:
        PreconditionError: |S| != k
    """
    elements = elements_of(S) if isinstance(S, int) else sorted(S)
    if len(elements) != k:
        raise PreconditionError(f"Expected a {k}-set, got {elements}")
    if elements and (elements[0] < 1 or elements[-1] > n):
        raise RangeError(f"Elements must lie in 1..{n}: {elements}")
    return HarperVector(tuple(element - j for j, element in enumerate(elements, start=1)), n)


def rank(y: HarperVector) -> int:
    return sum(y.y)


def is_downset_encoding(F: SetFamily, k: int) -> bool:
    """True iff the gap vectors of F are closed downward in the coordinatewise order."""
    _require_uniform(F, k, "is_downset_encoding")
    vectors = {harper_vector(mask, F.n, k).y for mask in F.sets}
    for y in vectors:
        for j in range(k):
            # lowering coordinate j stays nondecreasing only above the previous entry
            if y[j] == 0 or (j > 0 and y[j - 1] == y[j]):
                continue
            lower = y[:j] + (y[j] - 1,) + y[j + 1:]
            if lower not in vectors:
                return False
    return True


def edges_via_rank(F: SetFamily, k: int) -> int:
    """
    Edge count of a left-shifted k-uniform family as the sum of gap-vector ranks.

    Raises:
        PreconditionError: F is not k-uniform or not left shifted
    """
    _require_uniform(F, k, "edges_via_rank")
    if not is_left_shifted(F):
        raise PreconditionError("edges_via_rank needs a left-shifted family")
    return sum(rank(harper_vector(mask, F.n, k)) for mask in F.sets)


def isoperi_check(F: SetFamily, k: int, delta: float) -> BoundReport:
    """e(F) <= delta * m * n^2 for a k-uniform F of size m < C(floor(delta n), floor(delta n / 2))."""
    _require_uniform(F, k, "isoperi_check")
    if not 0 < delta <= 1:
        raise RangeError(f"delta must lie in (0, 1] (got {delta})")
    n, m = F.n, len(F)
    top = floor(delta * n)
    limit = comb(top, floor(delta * n / 2))
    hypotheses = {"m < C(floor(delta n), floor(delta n / 2))": m < limit, "limit": limit}
    return report("isoperi", hamming_edges(F, k), delta * m * n * n,
                  {"n": n, "k": k, "m": m, "delta": delta}, "<=",
                  hypothesis_met=m < limit, hypotheses=hypotheses)


def union_lower_bound(l: int, u: int) -> float:
    """
    Union of l sets of size u, pairwise meeting in at most one element, has at least
    l(2u-l)/2 elements.

    Raises:
        HypothesisError: l > u
    """
    if l > u:
        raise HypothesisError(f"The union bound needs l <= u (got l={l}, u={u})")
    return l * (2 * u - l) / 2


def missing_family(F_layer: SetFamily, k: int) -> SetFamily:
    """binom([n], k) minus F_layer."""
    _require_uniform(F_layer, k, "missing_family")
    return layer(F_layer.n, k).difference(F_layer)


# ---- bad superset census ----

@dataclass(frozen=True)
class CensusLayer:
    layer: int
    threshold: float
    bad_count: int


@dataclass
class CensusReport:
    """
    Bad sets per layer above k: a set is bad when fewer than `threshold` of its
    maximal subsets lie in the good part of the layer below (F_layer itself for layer k+1).
    """
    mode: str
    n: int
    k: int
    m: int
    param: Optional[float]
    layers: List[CensusLayer]
    bound: float
    cumulative_bad: int
    cumulative_bound: Optional[float]
    verdict: Verdict
    hypotheses: Dict[str, Any] = field(default_factory=dict)

    @property
    def layer(self) -> int:
        return self.layers[0].layer if self.layers else self.k + 1

    @property
    def threshold(self) -> float:
        return self.layers[0].threshold if self.layers else 0.0

    @property
    def bad_count(self) -> int:
        return self.layers[0].bad_count if self.layers else 0


def _parse_mode(mode: Union[str, Tuple[str, float]]) -> Tuple[str, Optional[float]]:
    if mode == "sqrt":
        return "sqrt", None
    if isinstance(mode, tuple) and len(mode) == 2 and mode[0] == "epsilon":
        eps = float(mode[1])
        if not 0 < eps < 1:
            raise RangeError(f"epsilon must lie in (0, 1) (got {eps})")
        return "epsilon", eps
    raise RangeError(f"Census mode must be 'sqrt' or ('epsilon', eps), got {mode!r}")


def _layer_threshold(mode: str, eps: Optional[float], l: int, m: int) -> float:
    if mode == "sqrt":
        return l - 2 * sqrt(m)
    return (1 - eps) * (l - 1)


def _bad_sets(n: int, l: int, threshold: float, missing_below: set) -> List[int]:
    bad = []
    for mask in layer_masks(n, l):
        present = l
        for element in elements_of(mask):
            if mask & ~(1 << (element - 1)) in missing_below:
                present -= 1
        if present < threshold:
            bad.append(mask)
    return bad


def _epsilon_first_bound(F_missing: SetFamily, k: int, threshold: float) -> float:
    if threshold <= 0:
        return 0
    # a bad set misses at least q of its k+1 maximal subsets, pairwise adjacent in H(n,k)
    q = k + 2 - ceil(threshold)
    if q <= 1:
        return len(F_missing) * (F_missing.n - k)
    return hamming_edges(F_missing, k) // comb(q, 2)


def bad_superset_census(F_layer: SetFamily, k: int,
                        mode: Union[str, Tuple[str, float]] = "sqrt") -> CensusReport:
    """
    Census the sets of layers k+1..n that see too few members of F_layer.

    Layer k+1 is measured against F_layer; every higher layer l against the good
    (non-bad) part of layer l-1. Thresholds are l - 2 sqrt(m) in sqrt mode and
    (1-eps)(l-1) in epsilon mode, m = C(n,k) - |F_layer|.

    Args:
        F_layer: A k-uniform family
        k: Its layer
        mode: 'sqrt' or ('epsilon', eps)

    Returns:
        CensusReport whose verdict compares the first layer (and in sqrt mode the
        cumulative count) against the hard bounds
    """
    _require_uniform(F_layer, k, "bad_superset_census")
    n = F_layer.n
    if not 0 <= k < n:
        raise RangeError(f"Census needs 0 <= k < n (got n={n}, k={k})")
    kind, eps = _parse_mode(mode)
    F_missing = missing_family(F_layer, k)
    m = len(F_missing)

    census: List[CensusLayer] = []
    missing_below = set(F_missing.sets)
    for l in range(k + 1, n + 1):
        threshold = _layer_threshold(kind, eps, l, m)
        bad = _bad_sets(n, l, threshold, missing_below)
        census.append(CensusLayer(l, threshold, len(bad)))
        if not bad:
            break
        missing_below = set(bad)
    cumulative = sum(entry.bad_count for entry in census)

    if kind == "sqrt":
        bound, cumulative_bound = sqrt(m), 2 * sqrt(m)
        hypotheses = {"m <= k^2": m <= k * k,
                      "n/2 - sqrt(n) <= k <= n/2 + sqrt(n)": n / 2 - sqrt(n) <= k <= n / 2 + sqrt(n)}
        first = report("census", census[0].bad_count, bound, {}, "<=",
                       hypothesis_met=all(hypotheses.values()))
        total = report("census", cumulative, cumulative_bound, {}, "<=",
                       hypothesis_met=all(hypotheses.values()))
        verdict = first.verdict if first.verdict != Verdict.HOLDS else total.verdict
    else:
        bound = _epsilon_first_bound(F_missing, k, census[0].threshold)
        cumulative_bound = None
        hypotheses = {"epsilon": eps}
        verdict = report("census", census[0].bad_count, bound, {}, "<=").verdict

    return CensusReport(kind, n, k, m, eps, census, bound, cumulative, cumulative_bound,
                        verdict, hypotheses)


def census_rows(census: CensusReport) -> List[BoundReport]:
    """Flatten a census into report rows: one per censused layer plus the bound checks."""
    param = census.param if census.mode == "epsilon" else "sqrt"
    rows = [BoundReport(f"census_layer_{entry.layer}", entry.bad_count, entry.threshold,
                        {"n": census.n, "k": census.k, "m": census.m, "param": param},
                        Verdict.EVALUATED, informational=True)
            for entry in census.layers]
    rows.append(report("census_first", census.bad_count, census.bound,
                       {"n": census.n, "k": census.k, "m": census.m, "param": param}, "<=",
                       hypothesis_met=census.verdict != Verdict.HYPOTHESIS_NOT_MET,
                       hypotheses=census.hypotheses))
    if census.cumulative_bound is not None:
        rows.append(report("census_cumulative", census.cumulative_bad, census.cumulative_bound,
                           {"n": census.n, "k": census.k, "m": census.m, "param": param}, "<=",
                           hypothesis_met=census.verdict != Verdict.HYPOTHESIS_NOT_MET,
                           hypotheses=census.hypotheses))
    return rows
