"""
Extremal quantities and constructions
Sigma(n,k), f(n), the maximum k-Sperner layer unions, distance-4 constant-weight code
layers and the supersaturation-optimal families built from them
"""

from dataclasses import dataclass
from math import comb
from typing import Dict, List

import numpy as np

from errors import ArgumentError, CapacityError, RangeError
from family_core import SetFamily, complement_family, layer_masks, layers

STRATEGIES = ("residue", "greedy")


def ceil_half(n: int) -> int:
    return (n + 1) // 2


def sigma(n: int, k: int) -> int:
    """Sigma(n,k): total size of the k middle layers, the maximum size of a k-Sperner family."""
    if not 1 <= k <= n:
        raise RangeError(f"sigma(n, k) needs 1 <= k <= n (got n={n}, k={k})")
    base = (n - k) // 2
    return sum(comb(n, base + i) for i in range(1, k + 1))


def sigma_star(n: int, k: int) -> List[SetFamily]:
    """
    The maximum k-Sperner families: the union of layers floor((n-k)/2)+1 .. floor((n-k)/2)+k
    and the union of layers ceil((n-k)/2) .. ceil((n-k)/2)+k-1. They coincide iff n+k is odd.

    Returns:
        One or two families, ordered by their lowest layer
    """
    if not 1 <= k <= n:
        raise RangeError(f"sigma_star(n, k) needs 1 <= k <= n (got n={n}, k={k})")
    low = (n - k) // 2 + 1
    high = -(-(n - k) // 2)
    starts = sorted({low, high})
    return [layers(n, range(start, start + k)) for start in starts]


def f(n: int) -> int:
    """Marginal butterfly cost of one extra set on a Sigma*(n,2) family."""
    if n < 1:
        raise RangeError(f"f(n) needs n >= 1 (got {n})")
    h = ceil_half(n)
    return (h + 1) * comb(h, 2)


@dataclass(frozen=True)
class ExtremalParams:
    """Parameters of an extremal construction; h is derived as ceil(n/2)."""
    n: int
    k: int = 2
    E: int = 0

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise RangeError(f"Need 1 <= k <= n (got n={self.n}, k={self.k})")
        if self.E < 0:
            raise RangeError(f"Number of extra sets must be >= 0 (got {self.E})")

    @property
    def h(self) -> int:
        return ceil_half(self.n)


@dataclass(frozen=True)
class CodeLayer:
    """
    A w-uniform family whose members pairwise meet in at most w-2 elements
    (a distance-4 constant-weight code).
    """
    w: int
    members: SetFamily
    max_pair_intersection: int

    def __len__(self) -> int:
        return len(self.members)


def max_pair_intersection(F: SetFamily) -> int:
    """Largest |A & B| over distinct members (-1 for fewer than two members)."""
    masks = F.sets
    best = -1
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            best = max(best, (masks[i] & masks[j]).bit_count())
    return best


def _code_layer(n: int, w: int, masks: List[int]) -> CodeLayer:
    members = SetFamily(n, tuple(masks))
    return CodeLayer(w, members, max_pair_intersection(members))


def _residue_classes(n: int, w: int) -> Dict[int, List[int]]:
    masks = layer_masks(n, w)
    # element i sits in bit i-1, so the weights are 1..n
    weights = np.arange(1, n + 1, dtype=np.int64)
    bits = (np.array(masks, dtype=np.uint64)[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
    residues = (bits.astype(np.int64) @ weights) % n
    classes: Dict[int, List[int]] = {c: [] for c in range(n)}
    for mask, c in zip(masks, residues.tolist()):
        classes[int(c)].append(mask)
    return classes


def residue_code_layer(n: int, w: int) -> CodeLayer:
    """
    The largest residue class {S in binom([n], w) : sum(S) = c mod n}, ties to the
    smallest c. Two w-sets sharing w-1 elements differ by a swap a -> b with
    0 < |b - a| < n, so they fall in different classes.
    """
    if not 1 <= w <= n:
        raise RangeError(f"Code layer needs 1 <= w <= n (got n={n}, w={w})")
    classes = _residue_classes(n, w)
    best = max(range(n), key=lambda c: (len(classes[c]), -c))
    return _code_layer(n, w, classes[best])


def greedy_code_layer(n: int, w: int, target: int) -> CodeLayer:
    """
    Scan binom([n], w) in colex order, admitting a set iff it meets every admitted
    set in at most w-2 elements; stop at `target` members or when the layer runs out.
    """
    if target < 0:
        raise RangeError(f"Target size must be >= 0 (got {target})")
    if not 1 <= w <= n:
        raise RangeError(f"Code layer needs 1 <= w <= n (got n={n}, w={w})")
    admitted: List[int] = []
    if target == 0:
        return _code_layer(n, w, admitted)
    for mask in layer_masks(n, w):
        if all((mask & other).bit_count() <= w - 2 for other in admitted):
            admitted.append(mask)
            if len(admitted) == target:
                break
    return _code_layer(n, w, admitted)


def _e_layer(n: int, E: int, strategy: str) -> List[int]:
    h = ceil_half(n)
    if h + 1 > n:
        if E > 0:
            raise CapacityError(f"Layer {h + 1} does not exist for n={n}; capacity is 0", achieved=0)
        return []
    if strategy == "residue":
        members = list(residue_code_layer(n, h + 1).members.sets)
    elif strategy == "greedy":
        members = list(greedy_code_layer(n, h + 1, E).members.sets)
    else:
        raise ArgumentError(f"Unknown strategy '{strategy}' (expected one of {STRATEGIES})")
    if E > len(members):
        raise CapacityError(
            f"Strategy '{strategy}' supplies at most {len(members)} sets in layer {h + 1} "
            f"for n={n}; {E} requested", achieved=len(members))
    return members[:E]


def code_layer_capacity(n: int, strategy: str) -> int:
    """How many E-layer sets the strategy can supply at layer ceil(n/2)+1."""
    h = ceil_half(n)
    if h + 1 > n:
        return 0
    if strategy == "residue":
        return len(residue_code_layer(n, h + 1))
    if strategy == "greedy":
        return len(greedy_code_layer(n, h + 1, comb(n, h + 1)))
    raise ArgumentError(f"Unknown strategy '{strategy}' (expected one of {STRATEGIES})")


def build_construction(n: int, E: int, strategy: str = "residue", mirrored: bool = False) -> SetFamily:
    """
    Layers ceil(n/2)-1 and ceil(n/2) of [n] plus E sets of layer ceil(n/2)+1 that
    pairwise meet in fewer than ceil(n/2) elements. The result has sigma(n,2)+E
    members and exactly E*f(n) butterflies.

    Args:
        n: Ground size
        E: Number of extra sets
        strategy: 'residue' or 'greedy' E-layer
        mirrored: Return the complement image (E-layer below the middle)

    Raises:
        CapacityError: E exceeds what the strategy supplies, naming the maximum
    """
    params = ExtremalParams(n, 2, E)
    extra = _e_layer(n, params.E, strategy)
    base = layers(n, [params.h - 1, params.h])
    family = SetFamily(n, base.sets + tuple(extra))
    return complement_family(family) if mirrored else family


def random_superset(S: SetFamily, E: int, rng: np.random.Generator) -> SetFamily:
    """S plus E distinct non-members chosen uniformly at random."""
    if S.n > 24:
        raise RangeError(f"random_superset samples from 2^{S.n} subsets; n must be <= 24")
    outside = [m for m in range(1 << S.n) if m not in S]
    if E > len(outside):
        raise RangeError(f"Only {len(outside)} non-members available, {E} requested")
    picked = rng.choice(len(outside), size=E, replace=False)
    return SetFamily(S.n, S.sets + tuple(outside[int(i)] for i in picked))
