"""
Oracle Master - brute-force ground truth for tiny n
Largest P-free families, fewest copies at a fixed size, and the audit of the extra-set construction
"""

import sys
from dataclasses import dataclass
from math import comb
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from bounds import BoundReport, Verdict, report
from config import ORACLE_EXHAUSTIVE_N, ORACLE_MAX_COMBINATIONS
from errors import CapacityError, RangeError, ScaleError
from extremal import build_construction, f, random_superset, sigma, sigma_star
from family_core import MAX_N, SetFamily, make_rng
from oracle_worker import _search_range, family_key, universe
from poset_engine import (Poset, contains_poset, contains_poset_through, count,
                          count_butterflies, count_butterflies_with_pivot)

# Largest n for the greedy pass that replaces branch-and-bound above the exhaustive limit
GREEDY_MAX_N = 10

# Intervals handed to each worker process by min_copies
INTERVALS_PER_WORKER = 4


@dataclass(frozen=True)
class Witness:
    """A family together with the objective it attains."""
    family: SetFamily
    objective: int
    kind: str
    poset: str
    heuristic: bool = False

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def size(self) -> int:
        return len(self.family)


def _creates_copy(masks: List[int], n: int, G: int, P: Poset) -> bool:
    base = SetFamily(n, tuple(masks))
    if P.is_butterfly():
        return count_butterflies_with_pivot(base, G) > 0
    return contains_poset_through(base, G, P)


class OracleMaster:
    """
    Coordinates the exhaustive searches.

    max_p_free runs in-process; min_copies partitions the combination ranks into
    intervals, hands them to SearchWorker instances (serially or on a process pool)
    and reduces their results with a deterministic tie-break.
    """

    def __init__(self, threads: int = 1, checkpoint_dir: Optional[Union[str, Path]] = None,
                 verbose: bool = False):
        """
        Args:
            threads: Worker processes for min_copies
            checkpoint_dir: Directory for per-interval checkpoint JSON (None = no checkpoints)
            verbose: Print progress banners to stderr
        """
        if threads < 1:
            raise RangeError(f"threads must be >= 1 (got {threads})")
        self.threads = threads
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir is not None else None
        self.verbose = verbose

    def _say(self, text: str = ""):
        if self.verbose:
            print(text, file=sys.stderr)

    def _banner(self, title: str):
        self._say(f"\n{'='*80}")
        self._say(f"ORACLE: {title}")
        self._say(f"{'='*80}")

    # ---- largest P-free family ----

    def max_p_free(self, n: int, P: Poset) -> Witness:
        """
        Largest P-free subfamily of 2^[n].

        Include-first branch-and-bound over the subsets in canonical order. Candidates
        that would complete a copy are dropped as the family grows, and a branch is cut
        when its size plus the surviving candidates cannot beat the best found. The
        first optimum reached is the lexicographically least one. Above the exhaustive
        limit a single greedy pass runs instead and the Witness is marked heuristic.

        Raises:
            RangeError: n outside 1..63
            ScaleError: n too large even for the greedy pass
        """
        if not 1 <= n <= MAX_N:
            raise RangeError(f"Ground set size must lie in 1..{MAX_N} (got {n})")
        if n > ORACLE_EXHAUSTIVE_N:
            return self._greedy_p_free(n, P)

        self._banner(f"max-free n={n} poset={P.name} (branch-and-bound)")
        candidates = universe(n)
        best: List[int] = []
        nodes = 0

        def search(chosen: List[int], remaining: List[int]):
            nonlocal best, nodes
            nodes += 1
            if len(chosen) + len(remaining) <= len(best):
                return
            if not remaining:
                best = list(chosen)
                self._say(f"  ✓ improved to {len(best)} sets")
                return
            G, rest = remaining[0], remaining[1:]
            chosen.append(G)
            survivors = [H for H in rest if not _creates_copy(chosen, n, H, P)]
            search(chosen, survivors)
            chosen.pop()
            search(chosen, rest)

        search([], [G for G in candidates if not _creates_copy([], n, G, P)])
        self._say(f"  • {nodes} search nodes")
        return Witness(SetFamily(n, tuple(best)), len(best), "max-free", P.name)

    def _greedy_p_free(self, n: int, P: Poset) -> Witness:
        if n > GREEDY_MAX_N:
            raise ScaleError(f"max-free search is limited to n <= {GREEDY_MAX_N} (got {n})")
        self._banner(f"max-free n={n} poset={P.name} (greedy, heuristic)")
        chosen: List[int] = []
        for G in universe(n):
            if not _creates_copy(chosen, n, G, P):
                chosen.append(G)
        self._say(f"  ✓ greedy family of {len(chosen)} sets")
        return Witness(SetFamily(n, tuple(chosen)), len(chosen), "max-free", P.name, heuristic=True)

    # ---- fewest copies at a fixed size ----

    def _intervals(self, total: int) -> List[tuple]:
        parts = max(1, min(total, self.threads * INTERVALS_PER_WORKER))
        step = -(-total // parts)
        return [(start, min(start + step, total)) for start in range(0, total, step)]

    def min_copies(self, n: int, size: int, P: Poset, allow_large: bool = False) -> Witness:
        """
        Minimum number of copies of P over all size-member subfamilies of 2^[n].

        Args:
            n: Ground size
            size: Family size
            P: The poset
            allow_large: Run searches beyond n = 4 or the combination limit

        Raises:
            RangeError: size outside 0..2^n
            ScaleError: the search is too large and allow_large is not set
        """
        if not 1 <= n <= MAX_N:
            raise RangeError(f"Ground set size must lie in 1..{MAX_N} (got {n})")
        if n > 6:
            raise ScaleError(f"min-copies enumerates C(2^n, size) families; n={n} is out of reach")
        if not 0 <= size <= 1 << n:
            raise RangeError(f"Family size must lie in 0..{1 << n} (got {size})")
        total = comb(1 << n, size)
        if (n > 4 or total > ORACLE_MAX_COMBINATIONS) and not allow_large:
            raise ScaleError(
                f"C({1 << n}, {size}) = {total} families at n={n} exceeds the desk-scale limit "
                f"(n <= 4 and at most {ORACLE_MAX_COMBINATIONS}); pass allow_large to run it")

        self._banner(f"min-copies n={n} size={size} poset={P.name}")
        intervals = self._intervals(total)
        self._say(f"  • {total} families in {len(intervals)} rank intervals, {self.threads} worker(s)")
        if self.checkpoint_dir is not None:
            self.checkpoint_dir.mkdir(parents=True, exist_ok=True)
        work_items = [(n, size, P, start, end, self._checkpoint_path(n, size, P, start, end))
                      for start, end in intervals]

        if self.threads > 1 and len(work_items) > 1:
            with Pool(processes=min(self.threads, len(work_items))) as pool:
                results = pool.map(_search_range, work_items)
        else:
            results = [_search_range(item) for item in work_items]

        witness = self._reduce(n, P, results)
        self._say(f"  ✓ minimum {witness.objective} copies")
        return witness

    def _checkpoint_path(self, n: int, size: int, P: Poset, start: int, end: int) -> Optional[str]:
        if self.checkpoint_dir is None:
            return None
        # the name alone does not identify custom posets
        name = f"{P.name.replace(':', '-')}-{P.digest()}"
        return str(self.checkpoint_dir / f"min_copies_n{n}_s{size}_{name}_{start}_{end}.json")

    @staticmethod
    def _reduce(n: int, P: Poset, results: List[Dict[str, Any]]) -> Witness:
        """Smallest (objective, family key) over the interval results."""
        best = None
        for result in results:
            if result["best_objective"] is None:
                continue
            family = SetFamily.from_lists(n, result["best_family"])
            key = (result["best_objective"], family_key(family))
            if best is None or key < best[0]:
                best = (key, family)
        if best is None:
            raise RangeError("No family of the requested size exists")
        (objective, _), family = best
        return Witness(family, objective, "min-copies", P.name)

    # ---- construction audit ----

    def audit_prop1(self, n: int, E_max: int, seed: int, trials: int = 5) -> List[BoundReport]:
        """
        For E = 0..E_max: random supersets of the maximum 2-Sperner families with E
        extra sets carry at least E*f(n) butterflies, and the residue construction
        carries exactly E*f(n).

        Returns:
            Two rows per E: superset_lower (lhs = fewest butterflies over the trials)
            and construction_exact
        """
        if not 2 <= n <= 12:
            raise RangeError(f"The construction audit runs for 2 <= n <= 12 (got {n})")
        if E_max < 0 or trials < 1:
            raise RangeError(f"Need E_max >= 0 and trials >= 1 (got {E_max}, {trials})")

        self._banner(f"construction audit n={n} E=0..{E_max}")
        extremal = sigma_star(n, 2)
        rows = []
        for E in range(E_max + 1):
            expected = E * f(n)
            params = {"n": n, "m": E, "trials": trials, "seed": seed}

            fewest = None
            for t in range(trials):
                rng = make_rng(seed, stream=E * trials + t)
                family = random_superset(extremal[t % len(extremal)], E, rng)
                butterflies = count_butterflies(family)
                fewest = butterflies if fewest is None else min(fewest, butterflies)
            rows.append(report("superset_lower", fewest, expected, params, ">="))

            try:
                construction = build_construction(n, E)
            except CapacityError as e:
                rows.append(BoundReport("construction_exact", e.achieved, expected, params,
                                        Verdict.HYPOTHESIS_NOT_MET, {"capacity": e.achieved}))
                self._say(f"  ✗ E={E}: residue capacity {e.achieved}")
                continue
            rows.append(report("construction_exact", count_butterflies(construction), expected,
                               {**params, "size": len(construction), "sigma": sigma(n, 2)}, "=="))
            self._say(f"  ✓ E={E}: construction {rows[-1].lhs}, supersets >= {fewest}")
        return rows

    # ---- verification and display ----

    @staticmethod
    def verify_witness(witness: Witness, P: Poset) -> bool:
        """Re-evaluate the objective on the witness family."""
        if witness.kind == "max-free":
            return not contains_poset(witness.family, P) and len(witness.family) == witness.objective
        return count(witness.family, P) == witness.objective

    @staticmethod
    def format_witness(witness: Witness) -> str:
        output = []
        output.append("\n" + "="*80)
        output.append(f"ORACLE: {witness.kind} n={witness.n} poset={witness.poset}")
        output.append("="*80)
        output.append(f"  Objective: {witness.objective}{'  (heuristic)' if witness.heuristic else ''}")
        output.append(f"  Size: {witness.size}")
        output.append(f"  Family: {witness.family.to_lists()}")
        output.append("─"*80)
        return "\n".join(output)


def max_p_free(n: int, P: Poset) -> Witness:
    return OracleMaster().max_p_free(n, P)


def min_copies(n: int, size: int, P: Poset, allow_large: bool = False, threads: int = 1) -> Witness:
    return OracleMaster(threads=threads).min_copies(n, size, P, allow_large)


def audit_prop1(n: int, E_max: int, seed: int, trials: int = 5) -> List[BoundReport]:
    return OracleMaster().audit_prop1(n, E_max, seed, trials)


audit_construction = audit_prop1


def verify_witness(witness: Witness, P: Poset) -> bool:
    return OracleMaster.verify_witness(witness, P)
