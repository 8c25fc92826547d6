"""
Family core - set families over [n] and the elementary operators on them
Shadow, shade, shift, Lubell sums and Sperner checks; every other module builds on these
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from errors import ArgumentError, FamilyParseError, RangeError

MAX_N = 63

# Lubell sums and LYM weights are exact rationals
ExactRational = Fraction


def mask_of(elements: Iterable[int]) -> int:
    """Encode a set of 1-based elements as a bitmask (element i lives in the i-th bit)."""
    mask = 0
    for element in elements:
        mask |= 1 << (element - 1)
    return mask


def elements_of(mask: int) -> List[int]:
    """Decode a bitmask into its sorted list of 1-based elements."""
    elements = []
    while mask:
        low = mask & -mask
        elements.append(low.bit_length())
        mask ^= low
    return elements


def canonical_key(mask: int) -> Tuple[int, int]:
    """Sort key of the canonical order: popcount first, then colex value."""
    return (mask.bit_count(), mask)


def is_strict_subset(a: int, b: int) -> bool:
    return a & b == a and a != b


def _check_ground_size(n: int):
    if not 1 <= n <= MAX_N:
        raise RangeError(f"Ground set size must lie in 1..{MAX_N} (got {n})")


@dataclass(frozen=True)
class LayerSpec:
    """A layer index k of the subset lattice of [n]."""
    k: int

    def validate(self, n: int) -> int:
        if not 0 <= self.k <= n:
            raise RangeError(f"Layer index {self.k} outside 0..{n}")
        return self.k


def _layer_index(k: Union[int, LayerSpec], n: int) -> int:
    spec = k if isinstance(k, LayerSpec) else LayerSpec(int(k))
    return spec.validate(n)


@dataclass(frozen=True)
class SetFamily:
    """
    A duplicate-free family of subsets of [n], kept in canonical order.

    Sets are bitmasks; the canonical order is ascending (popcount, colex value),
    which is also a linear extension of inclusion.
    """
    n: int
    sets: Tuple[int, ...] = ()

    def __post_init__(self):
        _check_ground_size(self.n)
        full = (1 << self.n) - 1
        masks = tuple(int(m) for m in self.sets)
        for mask in masks:
            if mask < 0 or mask & ~full:
                raise RangeError(f"Set {elements_of(mask)} uses elements outside [1..{self.n}]")
        ordered = tuple(sorted(masks, key=canonical_key))
        for a, b in zip(ordered, ordered[1:]):
            if a == b:
                raise ArgumentError(f"Duplicate set {elements_of(a)} in family")
        object.__setattr__(self, 'sets', ordered)

    @classmethod
    def from_lists(cls, n: int, lists: Iterable[Iterable[int]]) -> "SetFamily":
        return cls(n, tuple(mask_of(s) for s in lists))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self) -> Iterator[int]:
        return iter(self.sets)

    def __contains__(self, mask: int) -> bool:
        return mask in self.mask_set

    @property
    def mask_set(self) -> frozenset:
        cached = self.__dict__.get('_mask_set')
        if cached is None:
            cached = frozenset(self.sets)
            object.__setattr__(self, '_mask_set', cached)
        return cached

    def to_lists(self) -> List[List[int]]:
        return [elements_of(m) for m in self.sets]

    def with_set(self, mask: int) -> "SetFamily":
        if mask in self:
            return self
        return SetFamily(self.n, self.sets + (mask,))

    def without_set(self, mask: int) -> "SetFamily":
        return SetFamily(self.n, tuple(m for m in self.sets if m != mask))

    def union(self, other: "SetFamily") -> "SetFamily":
        _same_ground(self, other)
        return SetFamily(self.n, tuple(self.mask_set | other.mask_set))

    def difference(self, other: "SetFamily") -> "SetFamily":
        _same_ground(self, other)
        return SetFamily(self.n, tuple(m for m in self.sets if m not in other))

    def layer_sizes(self) -> Dict[int, int]:
        sizes: Dict[int, int] = {}
        for mask in self.sets:
            sizes[mask.bit_count()] = sizes.get(mask.bit_count(), 0) + 1
        return sizes

    def is_uniform(self, k: int) -> bool:
        return all(m.bit_count() == k for m in self.sets)

    def restrict_to_layers(self, ks: Iterable[int]) -> "SetFamily":
        """Members whose size is one of ks."""
        wanted = set(ks)
        return SetFamily(self.n, tuple(m for m in self.sets if m.bit_count() in wanted))

    def __repr__(self):
        return f"SetFamily(n={self.n}, sets={self.to_lists()})"


def _same_ground(a: SetFamily, b: SetFamily):
    if a.n != b.n:
        raise ArgumentError(f"Families live on different ground sets ({a.n} vs {b.n})")


def layer_masks(n: int, k: int) -> List[int]:
    """All k-subsets of [n] as masks, in colex order."""
    masks = [mask_of(c) for c in combinations(range(1, n + 1), k)]
    masks.sort()
    return masks


def layer(n: int, k: Union[int, LayerSpec]) -> SetFamily:
    """The full layer binom([n], k)."""
    _check_ground_size(n)
    return SetFamily(n, tuple(layer_masks(n, _layer_index(k, n))))


def layers(n: int, ks: Iterable[int]) -> SetFamily:
    """Union of full layers of [n]."""
    _check_ground_size(n)
    masks: List[int] = []
    for k in sorted(set(ks)):
        masks.extend(layer_masks(n, _layer_index(k, n)))
    return SetFamily(n, tuple(masks))


def power_set(n: int) -> SetFamily:
    """All 2^n subsets of [n]."""
    if n > 24:
        raise RangeError(f"Refusing to materialise 2^{n} sets")
    _check_ground_size(n)
    return SetFamily(n, tuple(range(1 << n)))


def shadow(F: SetFamily, k: Union[int, LayerSpec]) -> SetFamily:
    """
    The k-shadow: all k-sets strictly contained in some member of F.

    Args:
        F: The family
        k: Target layer, 0 <= k <= n

    Returns:
        The shadow as a canonical SetFamily
    """
    k = _layer_index(k, F.n)
    found = set()
    for mask in F.sets:
        if mask.bit_count() <= k:
            continue
        for sub in combinations(elements_of(mask), k):
            found.add(mask_of(sub))
    return SetFamily(F.n, tuple(found))


def shade(F: SetFamily, k: Union[int, LayerSpec]) -> SetFamily:
    """
    The k-shade: all k-subsets of [n] strictly containing some member of F.

    Args:
        F: The family (its ground size n is the ambient set)
        k: Target layer, 0 <= k <= n

    Returns:
        The shade as a canonical SetFamily
    """
    k = _layer_index(k, F.n)
    found = set()
    for mask in F.sets:
        size = mask.bit_count()
        if size >= k:
            continue
        outside = elements_of(F.full_mask & ~mask)
        for extra in combinations(outside, k - size):
            found.add(mask | mask_of(extra))
    return SetFamily(F.n, tuple(found))


def _check_shift_pair(F: SetFamily, i: int, j: int):
    if i >= j:
        raise ArgumentError(f"Only left shifts are performed: need i < j (got i={i}, j={j})")
    if i < 1 or j > F.n:
        raise RangeError(f"Shift elements must lie in 1..{F.n} (got i={i}, j={j})")


def shift(F: SetFamily, i: int, j: int) -> SetFamily:
    """
    Apply the shift tau_{i,j} setwise.

    A member S moves to S - {j} + {i} when j is in S, i is not, and the target is
    not already a member; otherwise it stays.
    """
    _check_shift_pair(F, i, j)
    bit_i, bit_j = 1 << (i - 1), 1 << (j - 1)
    members = F.mask_set
    shifted = []
    for mask in F.sets:
        if mask & bit_j and not mask & bit_i:
            target = (mask & ~bit_j) | bit_i
            if target not in members:
                shifted.append(target)
                continue
        shifted.append(mask)
    return SetFamily(F.n, tuple(shifted))


def is_left_shifted(F: SetFamily) -> bool:
    """True iff every shift tau_{i,j} with i < j fixes F."""
    members = F.mask_set
    for mask in F.sets:
        for j in elements_of(mask):
            bit_j = 1 << (j - 1)
            for i in range(1, j):
                bit_i = 1 << (i - 1)
                if mask & bit_i:
                    continue
                if (mask & ~bit_j) | bit_i not in members:
                    return False
    return True


def lubell_sum(F: SetFamily) -> Fraction:
    """Exact Lubell sum: sum of 1/C(n, |S|) over members S."""
    total = Fraction(0)
    for size, count in F.layer_sizes().items():
        total += Fraction(count, comb(F.n, size))
    return total


def chain_depths(F: SetFamily) -> List[int]:
    """
    For each member (canonical order), the length of the longest strict chain
    in F ending at it. Canonical order is topological for inclusion.
    """
    depths: List[int] = []
    masks = F.sets
    for t, top in enumerate(masks):
        best = 0
        size = top.bit_count()
        for s in range(t):
            low = masks[s]
            if low.bit_count() >= size:
                break
            if low & top == low and depths[s] > best:
                best = depths[s]
        depths.append(best + 1)
    return depths


def longest_chain(F: SetFamily) -> int:
    """Number of members in the longest strict chain of F (0 for the empty family)."""
    return max(chain_depths(F), default=0)


def is_k_sperner(F: SetFamily, k: int) -> bool:
    """True iff F contains no chain of k+1 nested members."""
    if k < 1:
        raise RangeError(f"k-Sperner needs k >= 1 (got {k})")
    return longest_chain(F) <= k


def complement_family(F: SetFamily) -> SetFamily:
    """The family of complements [n] - S; an involution."""
    full = F.full_mask
    return SetFamily(F.n, tuple(full & ~m for m in F.sets))


def permute_family(F: SetFamily, perm: Sequence[int]) -> SetFamily:
    """
    Relabel the ground set: element i becomes perm[i-1].

    Args:
        F: The family
        perm: A permutation of 1..n given as a sequence of length n
    """
    if sorted(perm) != list(range(1, F.n + 1)):
        raise ArgumentError(f"Not a permutation of 1..{F.n}: {list(perm)}")
    return SetFamily(F.n, tuple(mask_of(perm[e - 1] for e in elements_of(m)) for m in F.sets))


# ---- randomness ----

def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """A counter-based Philox generator keyed by (seed, stream)."""
    sequence = np.random.SeedSequence([int(seed) & (2**64 - 1), int(stream)])
    return np.random.Generator(np.random.Philox(sequence))


def random_family(n: int, size: int, rng: np.random.Generator) -> SetFamily:
    """A uniformly random family of `size` distinct subsets of [n]."""
    _check_ground_size(n)
    if n > 24:
        raise RangeError(f"random_family samples from 2^{n} subsets; n must be <= 24")
    if not 0 <= size <= 1 << n:
        raise RangeError(f"Family size {size} outside 0..2^{n}")
    picked = rng.choice(1 << n, size=size, replace=False)
    return SetFamily(n, tuple(int(m) for m in picked))


def random_uniform_family(n: int, k: int, size: int, rng: np.random.Generator) -> SetFamily:
    """A uniformly random family of `size` distinct k-subsets of [n]."""
    candidates = layer_masks(n, _layer_index(k, n))
    if not 0 <= size <= len(candidates):
        raise RangeError(f"Cannot pick {size} sets from a layer of {len(candidates)}")
    picked = rng.choice(len(candidates), size=size, replace=False)
    return SetFamily(n, tuple(candidates[int(i)] for i in picked))


def random_k_sperner_family(n: int, k: int, rng: np.random.Generator,
                            max_candidates: int = 120) -> SetFamily:
    """
    A random k-Sperner family: a random candidate family filtered in canonical
    order, keeping a set only while the longest chain ending at it stays <= k.
    """
    size = int(rng.integers(0, min(max_candidates, 1 << n) + 1))
    candidates = random_family(n, size, rng)
    kept: List[int] = []
    depths: List[int] = []
    for mask in candidates.sets:
        depth = 1 + max((d for m, d in zip(kept, depths) if is_strict_subset(m, mask)), default=0)
        if depth <= k:
            kept.append(mask)
            depths.append(depth)
    return SetFamily(n, tuple(kept))


# ---- family JSON ----

def serialize_family(F: SetFamily) -> str:
    """Canonical family JSON text (one line, trailing newline)."""
    return json.dumps({"n": F.n, "sets": F.to_lists()}) + "\n"


def parse_family(text: str, source: str = "<family>") -> SetFamily:
    """
    Parse family JSON {"n": <int>, "sets": [[sorted 1-based elements], ...]}.

    Raises:
        FamilyParseError: naming the line (syntax errors) or the field (content errors)
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FamilyParseError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from e

    if not isinstance(data, dict):
        raise FamilyParseError(f"{source}: top level must be an object")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool):
        raise FamilyParseError(f"{source}: field 'n' must be an integer")
    if not 1 <= n <= MAX_N:
        raise FamilyParseError(f"{source}: field 'n' must lie in 1..{MAX_N} (got {n})")
    sets = data.get("sets")
    if not isinstance(sets, list):
        raise FamilyParseError(f"{source}: field 'sets' must be a list")

    masks = []
    seen = set()
    for idx, members in enumerate(sets):
        if not isinstance(members, list):
            raise FamilyParseError(f"{source}: field 'sets[{idx}]' must be a list")
        mask = 0
        for pos, element in enumerate(members):
            if not isinstance(element, int) or isinstance(element, bool):
                raise FamilyParseError(f"{source}: field 'sets[{idx}][{pos}]' must be an integer")
            if not 1 <= element <= n:
                raise FamilyParseError(
                    f"{source}: field 'sets[{idx}][{pos}]' = {element} outside 1..{n}")
            bit = 1 << (element - 1)
            if mask & bit:
                raise FamilyParseError(f"{source}: field 'sets[{idx}]' repeats element {element}")
            mask |= bit
        if mask in seen:
            raise FamilyParseError(f"{source}: field 'sets[{idx}]' duplicates an earlier set")
        seen.add(mask)
        masks.append(mask)

    return SetFamily(n, tuple(masks))


def load_family(path: Union[str, Path]) -> SetFamily:
    """Load a family JSON file."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except FileNotFoundError as e:
        raise FamilyParseError(f"Family file not found: {path}") from e
    return parse_family(text, source=str(path))


def save_family(F: SetFamily, path: Union[str, Path]):
    Path(path).write_text(serialize_family(F), encoding='utf-8')
