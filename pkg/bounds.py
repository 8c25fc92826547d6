"""
Bounds - generalized binomials, x(l,m), g(l,m), the Lovasz shadow bound and the
evaluators for every stability inequality, reported as BoundReport rows
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from numbers import Rational
from typing import Any, Dict, List, Optional, Union

import numpy as np

from errors import ArgumentError, RangeError
from extremal import ceil_half, sigma, sigma_star
from family_core import SetFamily, is_k_sperner, layer_masks, mask_of, shadow, shade
from poset_engine import count_butterflies, middle_sets

REL_TOL = 1e-12
CHECK_TOL = 1e-9
MAX_BISECTION_STEPS = 200


class Verdict(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    HYPOTHESIS_NOT_MET = "hypothesis-not-met"
    EVALUATED = "evaluated"


Number = Union[int, float, Any]


@dataclass
class BoundReport:
    """
    One evaluated inequality: measured lhs, evaluated rhs, the inputs and a verdict.

    Informational rows document literal thresholds of the source statements and
    never count as failures.
    """
    name: str
    lhs: Optional[Number]
    rhs: Optional[Number]
    params: Dict[str, Any]
    verdict: Verdict
    hypotheses: Dict[str, Any] = field(default_factory=dict)
    informational: bool = False

    @property
    def failed(self) -> bool:
        return self.verdict == Verdict.VIOLATED and not self.informational


def _le(a: float, b: float, scale: float = 1.0) -> bool:
    return a <= b + CHECK_TOL * max(1.0, abs(a), abs(b), abs(scale))


def compare(lhs: Number, rhs: Number, relation: str = "<=", scale: float = 1.0) -> Verdict:
    """
    Verdict for lhs <= rhs (or >=). Integers and rationals compare exactly; reals get a
    relative tolerance of 1e-9 against the larger of the operands and `scale`.
    """
    exact = isinstance(lhs, Rational) and isinstance(rhs, Rational)
    if relation == "<=":
        ok = lhs <= rhs if exact else _le(float(lhs), float(rhs), scale)
    elif relation == ">=":
        ok = lhs >= rhs if exact else _le(float(rhs), float(lhs), scale)
    elif relation == "==":
        ok = lhs == rhs
    else:
        raise ArgumentError(f"Unknown relation '{relation}'")
    return Verdict.HOLDS if ok else Verdict.VIOLATED


def report(name: str, lhs, rhs, params: Dict[str, Any], relation: str = "<=",
           hypothesis_met: bool = True, hypotheses: Optional[Dict[str, Any]] = None,
           informational: bool = False, scale: float = 1.0) -> BoundReport:
    verdict = compare(lhs, rhs, relation, scale) if hypothesis_met else Verdict.HYPOTHESIS_NOT_MET
    return BoundReport(name, lhs, rhs, params, verdict, hypotheses or {}, informational)


# ---- generalized binomials ----

def gen_binom(x: float, l: int) -> float:
    """
    binom(x, l) = x(x-1)...(x-l+1)/l! for real x.

    Integer x >= 0 goes through the exact integer binomial. Otherwise x = num/den is
    taken exactly, the falling factorial is multiplied out in integers and the one
    division rounds, so the result carries a single rounding error whatever l is.
    """
    if l < 0:
        raise RangeError(f"binomial order must be >= 0 (got {l})")
    if l == 0:
        return 1.0
    if float(x).is_integer() and x >= 0:
        try:
            return float(comb(int(x), l))
        except OverflowError:
            return float("inf")
    num, den = Fraction(x).as_integer_ratio()
    value = 1
    for i in range(l):
        value *= num - i * den
    try:
        return value / (den ** l * factorial(l))
    except OverflowError:
        return float("inf") if value > 0 else float("-inf")


def x_of(l: int, m: Number) -> float:
    """
    The unique root x >= l-1 of binom(x, l) = m, by bisection to relative tolerance 1e-12.
    Snaps to the integer root when one exists. x_of(l, 0) = l-1.
    """
    if l < 1:
        raise RangeError(f"x(l, m) needs l >= 1 (got {l})")
    if m < 0:
        raise RangeError(f"x(l, m) needs m >= 0 (got {m})")
    if m == 0:
        return float(l - 1)
    target = float(m)
    # binom(l+m, l) >= m and binom(l + l*m^(1/l), l) >= l^l m / l! >= m bound the root from above
    lo, hi = float(l - 1), min(float(l) + target, l + l * target ** (1 / l))
    for _ in range(MAX_BISECTION_STEPS):
        mid = (lo + hi) / 2
        if gen_binom(mid, l) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= REL_TOL * hi:
            break
    x = (lo + hi) / 2
    r = round(x)
    if r >= l and isinstance(m, (int, np.integer)) and comb(r, l) == int(m):
        return float(r)
    return x


def g_of(l: int, m: Number) -> float:
    """g(l, m) = binom(x, l-1) - m with x = x(l, m); g(l, 0) = 0."""
    if m == 0:
        return 0.0
    return gen_binom(x_of(l, m), l - 1) - float(m)


def g_of_identity(l: int, m: Number) -> float:
    """The equivalent rational form ((2l - x - 1) / (x - l + 1)) * m."""
    if m == 0:
        return 0.0
    x = x_of(l, m)
    return (2 * l - x - 1) / (x - l + 1) * float(m)


def lovasz_shadow_lb(l: int, m: Number) -> float:
    """Lower bound binom(x, l-1) on the (l-1)-shadow of any m-member l-uniform family."""
    if m == 0:
        return 0.0
    return gen_binom(x_of(l, m), l - 1)


def lovasz_shade_lb(n: int, k: int, m: Number) -> float:
    """
    Lower bound on the (k+1)-shade of any m-member k-uniform family over [n],
    through complements: binom(x, n-k-1) with binom(x, n-k) = m.
    """
    if not 0 <= k < n:
        raise RangeError(f"Shade bound needs 0 <= k < n (got n={n}, k={k})")
    return lovasz_shadow_lb(n - k, m)


def g_argmax(l: int) -> float:
    """Maximiser of x -> binom(x, l-1) - binom(x, l) on [l-1, 2l-1] (concave there)."""
    lo, hi = float(l - 1), float(2 * l - 1)

    def g(x: float) -> float:
        return gen_binom(x, l - 1) - gen_binom(x, l)

    for _ in range(MAX_BISECTION_STEPS):
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        if g(a) < g(b):
            lo = a
        else:
            hi = b
        if hi - lo <= REL_TOL * hi:
            break
    return (lo + hi) / 2


def genshadow_check(F: SetFamily, k: int) -> BoundReport:
    """
    Shadow bound for Sperner families living in layers >= k with floor(n/2) <= k:
    |shadow_{k-1}(F)| >= binom(x, k-1) where binom(x, k) = |F|.
    """
    n = F.n
    hypotheses = {
        "sperner": is_k_sperner(F, 1),
        "layers_at_least_k": all(mask.bit_count() >= k for mask in F.sets),
        "k_at_least_half": n // 2 <= k,
    }
    lhs = len(shadow(F, k - 1)) if k >= 1 else 0
    rhs = lovasz_shadow_lb(k, len(F)) if k >= 1 else 0.0
    return report("genshadow", lhs, rhs, {"n": n, "k": k, "m": len(F)}, ">=",
                  hypothesis_met=all(hypotheses.values()), hypotheses=hypotheses)


def shade_check(F: SetFamily, k: int) -> BoundReport:
    """The shade bound for a k-uniform family: |shade_{k+1}(F)| >= binom(x, n-k-1)."""
    hypotheses = {"uniform": F.is_uniform(k)}
    lhs = len(shade(F, k + 1))
    rhs = lovasz_shade_lb(F.n, k, len(F))
    return report("shade", lhs, rhs, {"n": F.n, "k": k, "m": len(F)}, ">=",
                  hypothesis_met=hypotheses["uniform"], hypotheses=hypotheses)


def shadow_audit(n: int, l: int) -> List[BoundReport]:
    """
    Exhaustive audit of the Lovasz bound over every subfamily of binom([n], l).

    Shadows are built for all 2^C(n,l) subfamilies at once by doubling a numpy array
    of shadow bitmasks; one report per family size m with lhs = smallest shadow.
    """
    tops = layer_masks(n, l)
    if len(tops) > 24:
        raise RangeError(f"binom([{n}], {l}) has {len(tops)} sets; exhaustive audit allows 24")
    lows = {mask: i for i, mask in enumerate(layer_masks(n, l - 1))}
    if len(lows) > 63:
        raise RangeError(f"Shadow layer has {len(lows)} sets; bitmask audit allows 63")
    shadow_bits = []
    for top in tops:
        bits = 0
        for sub in combinations([e for e in range(n) if top >> e & 1], l - 1):
            bits |= 1 << lows[mask_of(e + 1 for e in sub)]
        shadow_bits.append(bits)

    shadows = np.zeros(1, dtype=np.uint64)
    sizes = np.zeros(1, dtype=np.int64)
    for bits in shadow_bits:
        shadows = np.concatenate([shadows, shadows | np.uint64(bits)])
        sizes = np.concatenate([sizes, sizes + 1])
    counts = _popcount64(shadows)

    reports = []
    for m in range(len(tops) + 1):
        smallest = int(counts[sizes == m].min())
        rhs = lovasz_shadow_lb(l, m)
        reports.append(report("lovasz_shadow", smallest, rhs,
                              {"n": n, "l": l, "m": m, "families": comb(len(tops), m)}, ">="))
    return reports


def _popcount64(values: np.ndarray) -> np.ndarray:
    counts = np.zeros(values.shape, dtype=np.int64)
    work = values.copy()
    for _ in range(8):
        counts += _BYTE_POPCOUNT[(work & np.uint64(0xFF)).astype(np.int64)]
        work >>= np.uint64(8)
    return counts


_BYTE_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


# ---- properties of x(l,m) and g(l,m) ----

def prop_change_report(l: int, m: int, m1: int) -> List[BoundReport]:
    """
    Evaluate the monotonicity and growth properties of x(l,m) and g(l,m) at (l, m, m1).

    Rows whose hypotheses fail are reported as hypothesis-not-met. g >= 2m is
    reported twice: under the exact threshold x <= (4l-3)/3 and, informationally,
    under the looser threshold x <= 4l/3, which fails at l=3, m=4.
    """
    if not 0 <= m1 <= m:
        raise RangeError(f"Need 0 <= m1 <= m (got m={m}, m1={m1})")
    x = x_of(l, m)
    g = g_of(l, m)
    params = {"l": l, "m": m, "m1": m1, "x": x}
    rows = []

    rows.append(report("x_monotone_in_l", x, x_of(l + 1, m), params, "<=",
                       hypothesis_met=m <= comb(2 * l, l),
                       hypotheses={"m <= C(2l,l)": m <= comb(2 * l, l)}))

    below_2l = _le(x, 2 * l - 1)
    rows.append(report("g_nonnegative", g, 0.0, params, ">=",
                       hypothesis_met=below_2l, hypotheses={"x <= 2l-1": below_2l}, scale=m))

    rows.append(report("g_superadditive", g_of(l, m1) + g_of(l, m - m1), g, params, ">=",
                       hypothesis_met=below_2l, hypotheses={"x <= 2l-1": below_2l}, scale=m))

    rows.append(report("g_monotone_in_l", g, g_of(l + 1, m), params, "<=",
                       hypothesis_met=m <= comb(2 * l - 1, l),
                       hypotheses={"m <= C(2l-1,l)": m <= comb(2 * l - 1, l)}, scale=m))

    rows.append(_monotone_row(l, m, params))

    exact = _le(x, (4 * l - 3) / 3)
    rows.append(report("g_at_least_2m", g, 2.0 * m, params, ">=", hypothesis_met=exact,
                       hypotheses={"x <= (4l-3)/3": exact}, scale=m))
    literal = _le(x, 4 * l / 3)
    rows.append(report("g_at_least_2m_literal", g, 2.0 * m, params, ">=", hypothesis_met=literal,
                       hypotheses={"x <= 4l/3": literal}, informational=True, scale=m))
    return rows


def _monotone_row(l: int, m: int, params: Dict[str, Any], points: int = 12) -> BoundReport:
    """g(l, .) sampled on a log-spaced grid of [1, m] must be nondecreasing while x <= argmax."""
    peak = g_argmax(l)
    hypotheses = {"x <= argmax g": _le(x_of(l, m), peak), "epsilon": 2 - peak / l}
    grid = _log_grid(1, m, points) if m >= 1 else []
    values = [g_of(l, v) for v in grid]
    worst = min((b - a for a, b in zip(values, values[1:])), default=0.0)
    scale = max((abs(v) for v in values), default=1.0)
    return report("g_monotone_in_m", worst, 0.0, {**params, "samples": len(grid)}, ">=",
                  hypothesis_met=hypotheses["x <= argmax g"], hypotheses=hypotheses, scale=scale)


def _log_grid(lo: int, hi: int, points: int) -> List[int]:
    if hi <= lo:
        return [int(hi)]
    values = {int(round(v)) for v in np.geomspace(float(lo), float(hi), num=points)}
    values.update({int(lo), int(hi)})
    return sorted(v for v in values if lo <= v <= hi)


def prop_change_grid(l_min: int, l_max: int, points: int = 12) -> List[BoundReport]:
    """All six properties over l in [l_min, l_max] and log-spaced m in [1, C(2l,l)]."""
    if not 1 <= l_min <= l_max:
        raise RangeError(f"Grid needs 1 <= l_min <= l_max (got {l_min}:{l_max})")
    rows = []
    for l in range(l_min, l_max + 1):
        for m in _log_grid(1, comb(2 * l, l), points):
            rows.extend(prop_change_report(l, m, m // 3))
    return rows


# ---- stability inequalities ----

STABILITY_NAMES = ("weakstab", "spernerstab", "butterflystab_4", "butterflystab_6",
                   "butterflystab_2", "cor_butt")

_STABILITY_HYPOTHESES = {
    "weakstab": {"family": "2-Sperner", "m": "missing middle sets or members off the middle layers"},
    "spernerstab": {"family": "2-Sperner", "m": "m <= C((1-eps)n, floor(n/2)), n >= n0(eps)"},
    "butterflystab_4": {"family": "butterfly-free", "m": "log m = o(n)"},
    "butterflystab_6": {"family": "butterfly-free", "m": "m=o(\\binom{n/2+\\log n}{n/2})"},
    "butterflystab_2": {"family": "butterfly-free", "m": "m=o(\\binom{n/2+\\log n}{n/2})"},
    "cor_butt": {"family": "butterfly-free, empty set and [n] excluded", "m": "|M|, n >= 8"},
}


def stability_rhs(name: str, n: int, m: Number) -> BoundReport:
    """
    Evaluate the right-hand side of a stability inequality. Hypotheses are recorded,
    not enforced; for cor_butt, m is the number of middle sets.
    """
    if name not in STABILITY_NAMES:
        raise ArgumentError(f"Unknown inequality '{name}' (expected one of {STABILITY_NAMES})")
    if n < 2 or m < 0:
        raise RangeError(f"Need n >= 2 and m >= 0 (got n={n}, m={m})")
    base = sigma(n, 2)
    if name == "weakstab":
        rhs = base - 1.9 * m / n
    elif name == "spernerstab":
        rhs = base - g_of(ceil_half(n) + 1, m)
    elif name == "butterflystab_4":
        rhs = base - m / 4
    elif name == "butterflystab_6":
        rhs = base - m / 6
    elif name == "butterflystab_2":
        rhs = base - m / 2
    else:
        rhs = base - m / 3
    return BoundReport(name, None, rhs, {"n": n, "m": m, "sigma": base}, Verdict.EVALUATED,
                       dict(_STABILITY_HYPOTHESES[name]))


def distance_to_sigma_star(F: SetFamily) -> int:
    """min over the Sigma*(n,2) families S of |F - S|."""
    return min(len(F.difference(S)) for S in sigma_star(F.n, 2))


def stability_check(name: str, F: SetFamily) -> BoundReport:
    """
    Measure a stability inequality on an actual family: lhs = |F|, m measured from F,
    and the structural hypothesis (2-Sperner / butterfly-free) checked directly.
    """
    if name == "cor_butt":
        m = len(middle_sets(F))
        structural = count_butterflies(F) == 0 and 0 not in F and F.full_mask not in F and F.n >= 8
    else:
        m = distance_to_sigma_star(F)
        if name in ("weakstab", "spernerstab"):
            structural = is_k_sperner(F, 2)
        else:
            structural = count_butterflies(F) == 0
    evaluated = stability_rhs(name, F.n, m)
    hypotheses = {**evaluated.hypotheses, "structural": structural}
    return report(name, len(F), evaluated.rhs, evaluated.params, "<=",
                  hypothesis_met=structural, hypotheses=hypotheses)
