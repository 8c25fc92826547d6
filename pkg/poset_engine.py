"""
Poset engine - containment and copy counting of posets in set families
The generic injection search is the oracle; butterflies and chains have fast counters
"""

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from multiprocessing.pool import ThreadPool
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from errors import ArgumentError, PreconditionError, RangeError, ValidationError
from family_core import SetFamily, is_strict_subset, lubell_sum

# Width of the inclusion-column blocks built by count_butterflies and middle_sets
_BLOCK_ROWS = 512


@dataclass(frozen=True)
class Poset:
    """
    A finite strict partial order on elements 0..size-1.

    lt[a][b] is True iff a <_P b. The relation is irreflexive, acyclic and
    transitively closed.
    """
    size: int
    lt: Tuple[Tuple[bool, ...], ...]
    name: str = "custom"

    def relations(self) -> List[Tuple[int, int]]:
        return [(a, b) for a in range(self.size) for b in range(self.size) if self.lt[a][b]]

    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.size))
        graph.add_edges_from(self.relations())
        return graph

    def digest(self) -> str:
        """Hash of (size, relations); equal posets with the same labels share it."""
        payload = json.dumps([self.size, self.relations()])
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def is_chain(self) -> bool:
        return len(self.relations()) == self.size * (self.size - 1) // 2

    def is_butterfly(self) -> bool:
        """True for any labelling of the butterfly."""
        cached = self.__dict__.get('_is_butterfly')
        if cached is None:
            cached = (self.size == 4 and len(self.relations()) == 4
                      and nx.is_isomorphic(self.graph(), BUTTERFLY.graph()))
            object.__setattr__(self, '_is_butterfly', cached)
        return cached

    def linear_extension(self) -> List[int]:
        """Elements in an order where every element follows everything below it."""
        cached = self.__dict__.get('_linear_extension')
        if cached is None:
            cached = list(nx.lexicographical_topological_sort(self.graph()))
            object.__setattr__(self, '_linear_extension', cached)
        return cached

    def predecessors(self, p: int) -> List[int]:
        return [q for q in range(self.size) if self.lt[q][p]]

    def dual(self) -> "Poset":
        """The reversed order (V and wedge are duals; the butterfly is self-dual up to relabelling)."""
        flipped = tuple(tuple(self.lt[b][a] for b in range(self.size)) for a in range(self.size))
        names = {"vee": "wedge", "wedge": "vee"}
        return Poset(self.size, flipped, names.get(self.name, f"dual({self.name})"))

    def __repr__(self):
        return f"Poset({self.name}, size={self.size}, relations={len(self.relations())})"


def _poset_from_pairs(size: int, pairs: Iterable[Tuple[int, int]], name: str) -> Poset:
    """Close a relation transitively and validate it as a strict partial order."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(size))
    for a, b in pairs:
        if not (0 <= a < size and 0 <= b < size):
            raise ValidationError(f"Relation ({a}, {b}) mentions an element outside 0..{size - 1}")
        if a == b:
            raise ValidationError(f"Relation ({a}, {a}) is reflexive; the order must be strict")
        graph.add_edge(a, b)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        raise ValidationError(f"Relation is cyclic: {cycle}")
    closure = nx.transitive_closure_dag(graph)
    lt = tuple(tuple(closure.has_edge(a, b) for b in range(size)) for a in range(size))
    return Poset(size, lt, name)


def make_poset(kind: str, k: Optional[int] = None,
               matrix: Optional[Sequence[Sequence[bool]]] = None,
               pairs: Optional[Iterable[Tuple[int, int]]] = None,
               size: Optional[int] = None) -> Poset:
    """
    Build a named poset.

    Args:
        kind: 'butterfly', 'chain', 'vee', 'wedge' or 'custom'
        k: Length of the chain for kind='chain'
        matrix: Boolean relation matrix for kind='custom'
        pairs: Alternatively, strict relation pairs for kind='custom'
        size: Number of elements when pairs are given

    Returns:
        The transitively closed Poset
    """
    if kind == "butterfly":
        # a, b below both c and d
        return _poset_from_pairs(4, [(0, 2), (0, 3), (1, 2), (1, 3)], "butterfly")
    if kind == "chain":
        if k is None or k < 1:
            raise ArgumentError(f"chain needs a length k >= 1 (got {k})")
        return _poset_from_pairs(k, [(i, i + 1) for i in range(k - 1)], f"chain:{k}")
    if kind == "vee":
        return _poset_from_pairs(3, [(0, 1), (0, 2)], "vee")
    if kind == "wedge":
        return _poset_from_pairs(3, [(0, 2), (1, 2)], "wedge")
    if kind == "custom":
        if matrix is not None:
            size = len(matrix)
            if any(len(row) != size for row in matrix):
                raise ValidationError("Relation matrix must be square")
            pairs = [(a, b) for a in range(size) for b in range(size) if matrix[a][b]]
        if pairs is None or size is None:
            raise ArgumentError("custom poset needs a matrix or (pairs, size)")
        return _poset_from_pairs(size, pairs, "custom")
    raise ArgumentError(f"Unknown poset kind '{kind}'")


def parse_poset_spec(text: str) -> Poset:
    """Parse the CLI notation: butterfly | chain:k | vee | wedge."""
    if text.startswith("chain:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError as e:
            raise ArgumentError(f"Bad chain length in '{text}'") from e
        return make_poset("chain", k=k)
    return make_poset(text)


def poset_to_json(P: Poset) -> Dict:
    return {"size": P.size, "lt": [list(pair) for pair in P.relations()]}


def poset_from_json(data: Dict) -> Poset:
    """Load {"size": p, "lt": [[a, b], ...]}, applying transitive closure."""
    try:
        size = int(data["size"])
        pairs = [(int(a), int(b)) for a, b in data["lt"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Malformed poset JSON: {e}") from e
    return _poset_from_pairs(size, pairs, "custom")


BUTTERFLY = make_poset("butterfly")


# ---- generic injection search ----

def _injections(masks: Sequence[int], P: Poset, fixed: Optional[Tuple[int, int]] = None) -> Iterator[Tuple[int, ...]]:
    """
    Yield every order-preserving injection P -> masks as a tuple indexed by P's elements.

    Elements are placed along a linear extension, so only predecessors need checking.
    `fixed` = (p, mask) pins element p to mask.
    """
    order = P.linear_extension()
    preds = [P.predecessors(p) for p in range(P.size)]
    image: List[Optional[int]] = [None] * P.size
    used = set()

    def place(depth: int):
        if depth == P.size:
            yield tuple(image)
            return
        p = order[depth]
        options = masks if fixed is None or fixed[0] != p else (fixed[1],)
        for mask in options:
            if mask in used:
                continue
            if all(is_strict_subset(image[q], mask) for q in preds[p]):
                image[p] = mask
                used.add(mask)
                yield from place(depth + 1)
                used.discard(mask)
                image[p] = None

    yield from place(0)


def contains_poset(F: SetFamily, P: Poset) -> bool:
    """True iff some injection P -> F maps every p < q to a strict inclusion."""
    if P.size > len(F):
        return False
    for _ in _injections(F.sets, P):
        return True
    return False


def contains_poset_through(F: SetFamily, G: int, P: Poset) -> bool:
    """True iff F + {G} contains P via an injection that uses G."""
    masks = tuple(m for m in F.sets if m != G) + (G,)
    for p in range(P.size):
        for _ in _injections(masks, P, fixed=(p, G)):
            return True
    return False


def count_injections(F: SetFamily, P: Poset) -> int:
    """Number of order-preserving injections P -> F (cross-check statistic)."""
    return sum(1 for _ in _injections(F.sets, P))


def _copy_images(masks: Sequence[int], P: Poset, fixed=None) -> set:
    return {frozenset(image) for image in _injections(masks, P, fixed)}


def count_copies(F: SetFamily, P: Poset, method: str = "injections") -> int:
    """
    Number of distinct image sets of order-preserving injections P -> F.

    Args:
        F: The family
        P: The poset
        method: 'injections' enumerates injections and deduplicates by image;
                'subsets' tests every |P|-subset of F (the reference algorithm)
    """
    if P.size > len(F):
        return 0
    if method == "injections":
        return len(_copy_images(F.sets, P))
    if method == "subsets":
        count = 0
        for subset in combinations(F.sets, P.size):
            for _ in _injections(subset, P):
                count += 1
                break
        return count
    raise ArgumentError(f"Unknown counting method '{method}'")


def count_copies_through(F: SetFamily, G: int, P: Poset) -> int:
    """Number of copies of P in F + {G} that use G (G must not be in F)."""
    if G in F:
        raise ArgumentError("Pivot set is already a member of the base family")
    masks = F.sets + (G,)
    images = set()
    for p in range(P.size):
        images |= _copy_images(masks, P, fixed=(p, G))
    return len(images)


# ---- fast paths ----

def _inclusion_columns(masks: np.ndarray, start: int, stop: int) -> np.ndarray:
    """below[a, c - start] is True iff member a is a strict subset of member c, for c in [start, stop)."""
    tops = masks[start:stop]
    return ((masks[:, None] & tops[None, :]) == masks[:, None]) & (masks[:, None] != tops[None, :])


def _butterfly_block(masks: np.ndarray, start: int, stop: int) -> int:
    # pairs c < d with c in [start, stop); one column block of d at a time
    left = _inclusion_columns(masks, start, stop).astype(np.float64)
    total = 0
    for d_start in range(start, len(masks), _BLOCK_ROWS):
        d_stop = min(d_start + _BLOCK_ROWS, len(masks))
        right = left if d_start == start else _inclusion_columns(masks, d_start, d_stop).astype(np.float64)
        # common[c, d] = number of members strictly below both c and d
        common = np.rint(left.T @ right).astype(np.int64)
        pairs = common * (common - 1) // 2
        if d_start == start:
            pairs = np.triu(pairs, k=1)
        total += int(pairs.sum())
    return total


def count_butterflies(F: SetFamily, threads: int = 1) -> int:
    """
    Number of butterfly copies in F.

    Every copy has a unique unordered top pair {C, D}, so the count is the sum over
    pairs of C(|L(C, D)|, 2) where L(C, D) are the members strictly below both.
    Row blocks are independent and their integer sums commute, so the result does
    not depend on `threads`. Each block builds only the inclusion columns it
    multiplies, so memory stays proportional to the block width times |F|.
    """
    if len(F) < 4:
        return 0
    masks = np.array(F.sets, dtype=np.uint64)
    size = len(masks)
    blocks = [(start, min(start + _BLOCK_ROWS, size)) for start in range(0, size, _BLOCK_ROWS)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPool(processes=min(threads, len(blocks))) as pool:
            parts = pool.starmap(_butterfly_block, [(masks, a, b) for a, b in blocks])
    else:
        parts = [_butterfly_block(masks, a, b) for a, b in blocks]
    return sum(parts)


def count_butterflies_with_pivot(base: SetFamily, G: int) -> int:
    """
    Number of butterflies in base + {G} that contain G.

    G is either in the top pair (partner D in base, two common strict subsets from
    base) or in the bottom pair (tops C, D in base strictly above G, second bottom
    from base).
    """
    if G in base:
        raise ArgumentError("Pivot set is already a member of the base family")
    masks = base.sets
    total = 0

    # G as a top
    below_g = [a for a in masks if is_strict_subset(a, G)]
    for d in masks:
        common = sum(1 for a in below_g if is_strict_subset(a, d))
        total += common * (common - 1) // 2

    # G as a bottom
    above_g = [c for c in masks if is_strict_subset(G, c)]
    for c, d in combinations(above_g, 2):
        total += sum(1 for a in masks if is_strict_subset(a, c) and is_strict_subset(a, d))

    return total


def count_chains(F: SetFamily, k: int) -> int:
    """
    Number of k-chains (copies of chain:k) in F, by dynamic programming over the
    inclusion DAG in popcount order.
    """
    if k < 1:
        raise RangeError(f"Chain length must be >= 1 (got {k})")
    masks = F.sets
    below = [[s for s in range(t) if is_strict_subset(masks[s], masks[t])] for t in range(len(masks))]
    ways = [1] * len(masks)
    for _ in range(k - 1):
        ways = [sum(ways[s] for s in below[t]) for t in range(len(masks))]
    return sum(ways)


def count(F: SetFamily, P: Poset, threads: int = 1) -> int:
    """Production copy counter: fast path for butterflies and chains, else the oracle."""
    if P.is_butterfly():
        return count_butterflies(F, threads)
    if P.size >= 1 and P.is_chain():
        return count_chains(F, P.size)
    return count_copies(F, P)


# ---- weighted LYM ----

def middle_sets(F: SetFamily) -> SetFamily:
    """Members with both a strict subset and a strict superset inside F."""
    if len(F) < 3:
        return SetFamily(F.n)
    masks = np.array(F.sets, dtype=np.uint64)
    has_below = np.zeros(len(masks), dtype=bool)
    has_above = np.zeros(len(masks), dtype=bool)
    for start in range(0, len(masks), _BLOCK_ROWS):
        below = _inclusion_columns(masks, start, min(start + _BLOCK_ROWS, len(masks)))
        has_below[start:start + below.shape[1]] = below.any(axis=0)
        has_above |= below.any(axis=1)
    keep = (has_below & has_above).tolist()
    return SetFamily(F.n, tuple(mask for mask, kept in zip(F.sets, keep) if kept))


def middle_weight(n: int, size: int) -> Fraction:
    """LYM weight multiplier of a middle set of the given size (may be below 1)."""
    return 1 + Fraction((size - 1) * (n - size - 1) - 1, size * (n - size))


def improved_lym_sum(F: SetFamily) -> Fraction:
    """
    Weighted Lubell sum in which every middle set M counts with weight
    1 + ((|M|-1)(n-|M|-1)-1) / (|M|(n-|M|)).

    Raises:
        PreconditionError: if the empty set or [n] is a member
    """
    if 0 in F or F.full_mask in F:
        raise PreconditionError("Weighted LYM sum needs a family avoiding the empty set and [n]")
    middles = middle_sets(F)
    total = lubell_sum(F.difference(middles))
    for mask in middles:
        size = mask.bit_count()
        total += middle_weight(F.n, size) / comb(F.n, size)
    return total
