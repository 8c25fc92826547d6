"""
Oracle worker - searches one combination-rank interval for the family with the fewest copies
Each worker only knows its interval; the master partitions the space and reduces the results
"""

import json
import sys
from math import comb
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from errors import RangeError, ValidationError
from family_core import SetFamily, canonical_key
from poset_engine import Poset, count_butterflies_with_pivot, count_copies_through, poset_to_json


def universe(n: int) -> List[int]:
    """All subsets of [n] in canonical (popcount, colex) order."""
    return sorted(range(1 << n), key=canonical_key)


def rank_combination(combo: Sequence[int], N: int) -> int:
    """Lexicographic rank of an increasing index tuple among all len(combo)-subsets of range(N)."""
    s = len(combo)
    rank = 0
    previous = -1
    for i, c in enumerate(combo):
        for skipped in range(previous + 1, c):
            rank += comb(N - skipped - 1, s - i - 1)
        previous = c
    return rank


def unrank_combination(rank: int, N: int, s: int) -> List[int]:
    """Inverse of rank_combination."""
    total = comb(N, s)
    if not 0 <= rank < total:
        raise RangeError(f"Rank {rank} outside [0, {total}) for C({N}, {s})")
    combo = []
    c = 0
    for i in range(s):
        while True:
            block = comb(N - c - 1, s - i - 1)
            if rank < block:
                break
            rank -= block
            c += 1
        combo.append(c)
        c += 1
    return combo


def family_key(F: SetFamily) -> Tuple[Tuple[int, int], ...]:
    """Tie-break key: lexicographic order of the canonical member list."""
    return tuple(canonical_key(mask) for mask in F.sets)


def _copies_through(prefix: Sequence[int], n: int, G: int, P: Poset) -> int:
    base = SetFamily(n, tuple(prefix))
    if P.is_butterfly():
        return count_butterflies_with_pivot(base, G)
    return count_copies_through(base, G, P)


class SearchWorker:
    """
    Exhaustive minimum-copies search over the combinations with ranks in
    [rank_start, rank_end) of size-subsets of 2^[n].

    Prefix copy counts are kept per position and updated with the pivot counter when
    the combination changes, so moving to the lexicographic successor only recounts
    the changed suffix. A prefix that already has at least as many copies as the best
    family found is skipped as a whole.
    """

    def __init__(self, n: int, size: int, poset: Poset, rank_start: int, rank_end: int,
                 verbose: bool = False):
        """
        Args:
            n: Ground size
            size: Family size
            poset: Forbidden poset whose copies are counted
            rank_start: First combination rank (inclusive)
            rank_end: Last combination rank (exclusive)
            verbose: Print progress to stderr
        """
        self.n = n
        self.size = size
        self.poset = poset
        self.universe = universe(n)
        self.total = comb(len(self.universe), size)
        if not 0 <= rank_start <= rank_end <= self.total:
            raise RangeError(f"Rank interval [{rank_start}, {rank_end}) outside [0, {self.total}]")
        self.rank_start = rank_start
        self.rank_end = rank_end
        self.verbose = verbose
        self.best_objective: Optional[int] = None
        self.best_family: Optional[SetFamily] = None
        self.visited = 0
        self.done = False

    def get_identity(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "size": self.size,
            "poset": self.poset.name,
            "rank_start": self.rank_start,
            "rank_end": self.rank_end,
        }

    def run(self) -> "SearchWorker":
        """Search the whole interval; returns self for chaining."""
        if self.done or self.rank_start == self.rank_end:
            self.done = True
            return self
        if self.size == 0:
            self._offer([], 0)
            self.done = True
            return self

        N, s = len(self.universe), self.size
        combo = unrank_combination(self.rank_start, N, s)
        counts = [0] * (s + 1)
        valid = 0
        rank = self.rank_start

        while rank < self.rank_end:
            depth = valid
            pruned = False
            while depth < s:
                prefix = [self.universe[c] for c in combo[:depth]]
                counts[depth + 1] = counts[depth] + _copies_through(
                    prefix, self.n, self.universe[combo[depth]], self.poset)
                depth += 1
                if depth < s and self.best_objective is not None and counts[depth] >= self.best_objective:
                    pruned = True
                    break
            if not pruned:
                self.visited += 1
                self._offer(combo, counts[s])
            # the successor changes some position <= depth-1
            move = self._advance(combo, depth - 1, N)
            if move < 0:
                break
            valid = move
            rank = rank_combination(combo, N)

        self.done = True
        if self.verbose:
            print(f"  ✓ ranks [{self.rank_start}, {self.rank_end}): best {self.best_objective} "
                  f"({self.visited} families evaluated)", file=sys.stderr)
        return self

    @staticmethod
    def _advance(combo: List[int], last: int, N: int) -> int:
        """Lexicographic successor that changes a position <= last; -1 when exhausted."""
        s = len(combo)
        i = last
        while i >= 0 and combo[i] == N - s + i:
            i -= 1
        if i < 0:
            return -1
        combo[i] += 1
        for j in range(i + 1, s):
            combo[j] = combo[j - 1] + 1
        return i

    def _offer(self, combo: Sequence[int], objective: int):
        # combinations arrive in increasing rank, so the first optimum is the lexicographically least
        if self.best_objective is None or objective < self.best_objective:
            self.best_objective = objective
            self.best_family = SetFamily(self.n, tuple(self.universe[c] for c in combo))

    # ---- checkpoints ----

    def to_checkpoint(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "size": self.size,
            "poset": poset_to_json(self.poset),
            "rank_start": self.rank_start,
            "rank_end": self.rank_end,
            "best_objective": self.best_objective,
            "best_family": self.best_family.to_lists() if self.best_family is not None else None,
        }

    def save_checkpoint(self, path: Union[str, Path]):
        Path(path).write_text(json.dumps(self.to_checkpoint(), sort_keys=True) + "\n", encoding="utf-8")

    def load_checkpoint(self, path: Union[str, Path]) -> bool:
        """
        Adopt a finished interval's result from disk.

        Returns:
            True if the checkpoint matched this worker's search (n, size, poset
            relations and interval) and was loaded
        """
        path = Path(path)
        if not path.exists():
            return False
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ValidationError(f"Corrupt checkpoint {path}: {e}") from e
        if not isinstance(data, dict):
            raise ValidationError(f"Checkpoint {path} is not a JSON object")
        identity = {key: data.get(key) for key in ("n", "size", "poset", "rank_start", "rank_end")}
        if identity != {key: value for key, value in self.to_checkpoint().items() if key in identity}:
            return False
        self.best_objective = data.get("best_objective")
        family = data.get("best_family")
        self.best_family = SetFamily.from_lists(self.n, family) if family is not None else None
        self.done = True
        return True


def _search_range(args: Tuple[int, int, Poset, int, int, Optional[str]]) -> Dict[str, Any]:
    """Pool entry point: run one interval (or reuse its checkpoint) and return the checkpoint dict."""
    n, size, poset, rank_start, rank_end, checkpoint = args
    worker = SearchWorker(n, size, poset, rank_start, rank_end)
    if checkpoint is None or not worker.load_checkpoint(checkpoint):
        worker.run()
        if checkpoint is not None:
            worker.save_checkpoint(checkpoint)
    return worker.to_checkpoint()
