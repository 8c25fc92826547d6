"""
Main interface for posetlab
Batch driver: every module is a subcommand writing CSV/JSON reports
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import config
from bounds import (STABILITY_NAMES, genshadow_check, prop_change_grid, prop_change_report,
                    shadow_audit, stability_check, stability_rhs)
from errors import CapacityError, PosetLabError, RangeError
from extremal import STRATEGIES, build_construction, f, sigma
from family_core import is_k_sperner, is_left_shifted, load_family, lubell_sum, serialize_family
from isoperimetry import (bad_superset_census, census_rows, edges_via_rank, hamming_edges,
                          is_downset_encoding, isoperi_check)
from oracle import OracleMaster
from poset_engine import (Poset, count, count_butterflies, count_copies, improved_lym_sum,
                          parse_poset_spec, poset_from_json)
from reports import any_failed, bound_rows, render, write_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATED = 2

COLUMNS = {
    "count": ["poset", "n", "size", "copies"],
    "bounds": ["name", "n", "m", "lhs", "rhs", "verdict"],
    "iso": ["op", "n", "k", "param", "lhs", "rhs", "verdict"],
    "oracle": ["kind", "n", "size", "poset", "objective", "heuristic", "family"],
    "lym": ["measure", "n", "size", "value"],
    "audit": ["name", "n", "m", "lhs", "rhs", "verdict"],
}


class UsageError(Exception):
    """Raised by the parser instead of exiting with argparse's status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _ints(text: str, count: int) -> List[int]:
    parts = text.split(":")
    try:
        values = [int(part) for part in parts]
    except ValueError as e:
        raise RangeError(f"Expected {count} integers separated by ':', got '{text}'") from e
    if len(values) != count:
        raise RangeError(f"Expected {count} integers separated by ':', got '{text}'")
    return values


def _load_poset(text: str) -> Poset:
    if text.endswith(".json"):
        try:
            data = json.loads(Path(text).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise RangeError(f"Cannot read poset file {text}: {e}") from e
        return poset_from_json(data)
    return parse_poset_spec(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="posetlab",
        description="Supersaturation workbench for forbidden subposets of the Boolean lattice.",
    )
    parser.add_argument("--seed", type=int, default=config.POSETLAB_SEED, help="PRNG seed")
    parser.add_argument("--threads", type=int, default=config.POSETLAB_THREADS,
                        help="worker budget (env POSETLAB_THREADS)")
    parser.add_argument("--format", choices=["csv", "json"], default=config.POSETLAB_FORMAT)
    parser.add_argument("--output", help="report path (default stdout)")
    parser.add_argument("--verbose", action="store_true", default=config.VERBOSE,
                        help="progress banners on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="count copies of a poset; columns: poset,n,size,copies")
    p.add_argument("--family", required=True)
    p.add_argument("--poset", default="butterfly", help="butterfly | chain:k | vee | wedge | file.json")
    p.add_argument("--method", choices=["fast", "injections", "subsets"], default="fast")

    p = sub.add_parser("construct", help="extra-set construction; writes family JSON and a sidecar report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--extra", type=int, default=0)
    p.add_argument("--strategy", choices=list(STRATEGIES), default="residue")
    p.add_argument("--mirrored", action="store_true")
    p.add_argument("--report", help="sidecar report path (default <output>.report.json or stderr)")

    p = sub.add_parser("bounds", help="numeric bounds; columns: name,n,m,lhs,rhs,verdict")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--grid", help="l_min:l_max for the x/g property grid")
    group.add_argument("--at", help="l:m:m1 for the x/g properties at a single point")
    group.add_argument("--stability", choices=list(STABILITY_NAMES))
    group.add_argument("--shadow-audit", help="n:l, every subfamily of one layer")
    group.add_argument("--genshadow", type=int, metavar="K", help="shadow bound on --family at layer K")
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--family")

    p = sub.add_parser("iso", help="Hamming-graph checks; columns: op,n,k,param,lhs,rhs,verdict")
    p.add_argument("--family", required=True)
    p.add_argument("--k", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--delta", type=float)
    group.add_argument("--epsilon", type=float)
    group.add_argument("--sqrt", action="store_true")

    p = sub.add_parser("oracle", help="brute force; columns: kind,n,size,poset,objective,heuristic,family")
    p.add_argument("kind", choices=["max-free", "min-copies"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--poset", default="butterfly")
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--checkpoint-dir")

    p = sub.add_parser("lym", help="Lubell sums; columns: measure,n,size,value")
    p.add_argument("--family", required=True)
    p.add_argument("--improved", action="store_true")

    p = sub.add_parser("audit", help="construction audit; columns: name,n,m,lhs,rhs,verdict (m = E)")
    p.add_argument("target", choices=["prop1", "construction"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--e-max", type=int, required=True)
    p.add_argument("--trials", type=int, default=5)

    return parser


# ---- subcommands ----
# Each returns (rows, violated).

def _cmd_count(args) -> tuple:
    family = load_family(args.family)
    poset = _load_poset(args.poset)
    if args.method == "fast":
        copies = count(family, poset, args.threads)
    else:
        copies = count_copies(family, poset, method=args.method)
    return [{"poset": poset.name, "n": family.n, "size": len(family), "copies": copies}], False


def _cmd_construct(args) -> int:
    try:
        family = build_construction(args.n, args.extra, args.strategy, args.mirrored)
    except CapacityError as e:
        print(f"✗ {e} (achieved {e.achieved})", file=sys.stderr)
        return EXIT_USAGE
    butterflies = count_butterflies(family, args.threads)
    expected = args.extra * f(args.n)
    sidecar = {
        "n": args.n,
        "E": args.extra,
        "strategy": args.strategy,
        "sigma": sigma(args.n, 2),
        "f": f(args.n),
        "size": len(family),
        "butterfly_count": butterflies,
        "expected": expected,
    }
    write_report(serialize_family(family), args.output)
    sidecar_text = json.dumps(sidecar, sort_keys=True) + "\n"
    if args.report:
        write_report(sidecar_text, args.report)
    elif args.output:
        write_report(sidecar_text, f"{args.output}.report.json")
    else:
        write_report(sidecar_text, stream=sys.stderr)
    return EXIT_VIOLATED if butterflies != expected else EXIT_OK


def _cmd_bounds(args) -> tuple:
    if args.grid:
        l_min, l_max = _ints(args.grid, 2)
        reports = prop_change_grid(l_min, l_max, args.points)
    elif args.at:
        l, m, m1 = _ints(args.at, 3)
        reports = prop_change_report(l, m, m1)
    elif args.shadow_audit:
        n, l = _ints(args.shadow_audit, 2)
        reports = shadow_audit(n, l)
    elif args.genshadow is not None:
        if not args.family:
            raise RangeError("--genshadow needs --family")
        reports = [genshadow_check(load_family(args.family), args.genshadow)]
    elif args.family:
        reports = [stability_check(args.stability, load_family(args.family))]
    else:
        if args.n is None or args.m is None:
            raise RangeError("--stability needs --family, or --n and --m")
        reports = [stability_rhs(args.stability, args.n, args.m)]
    return bound_rows(reports), any_failed(reports)


def _cmd_iso(args) -> tuple:
    family = load_family(args.family)
    n, k = family.n, args.k
    rows: List[Dict[str, Any]] = []
    violated = False

    edges = hamming_edges(family, k)
    shifted = is_left_shifted(family)
    via_rank = edges_via_rank(family, k) if shifted else None
    edge_ok = via_rank is None or via_rank == edges
    rows.append({"op": "edges", "n": n, "k": k, "param": "", "lhs": edges, "rhs": via_rank,
                 "verdict": ("holds" if edge_ok else "violated") if shifted else "evaluated"})
    downset = is_downset_encoding(family, k)
    rows.append({"op": "downset", "n": n, "k": k, "param": "", "lhs": downset, "rhs": shifted,
                 "verdict": "holds" if downset == shifted else "violated"})
    violated |= not edge_ok or downset != shifted

    if args.delta is not None:
        check = isoperi_check(family, k, args.delta)
        rows.append({"op": "isoperi", "n": n, "k": k, "param": args.delta, "lhs": check.lhs,
                     "rhs": check.rhs, "verdict": check.verdict})
        violated |= check.failed
    elif args.epsilon is not None or args.sqrt:
        mode = "sqrt" if args.sqrt else ("epsilon", args.epsilon)
        reports = census_rows(bad_superset_census(family, k, mode))
        for item in reports:
            rows.append({"op": item.name, "n": n, "k": k, "param": item.params.get("param"),
                         "lhs": item.lhs, "rhs": item.rhs, "verdict": item.verdict})
        violated |= any_failed(reports)
    return rows, violated


def _cmd_oracle(args) -> tuple:
    poset = _load_poset(args.poset)
    master = OracleMaster(threads=args.threads, checkpoint_dir=args.checkpoint_dir, verbose=args.verbose)
    if args.kind == "max-free":
        witness = master.max_p_free(args.n, poset)
    else:
        if args.size is None:
            raise RangeError("min-copies needs --size")
        witness = master.min_copies(args.n, args.size, poset, args.allow_large)
    if args.verbose:
        print(master.format_witness(witness), file=sys.stderr)
    row = {"kind": witness.kind, "n": witness.n, "size": witness.size, "poset": witness.poset,
           "objective": witness.objective, "heuristic": witness.heuristic,
           "family": witness.family.to_lists()}
    return [row], not master.verify_witness(witness, poset)


def _cmd_lym(args) -> tuple:
    family = load_family(args.family)
    rows = [{"measure": "lubell", "n": family.n, "size": len(family), "value": lubell_sum(family)}]
    violated = is_k_sperner(family, 2) and rows[0]["value"] > 2
    if args.improved:
        value = improved_lym_sum(family)
        rows.append({"measure": "improved_lubell", "n": family.n, "size": len(family), "value": value})
        violated |= count_butterflies(family) == 0 and value > 2
    return rows, violated


def _cmd_audit(args) -> tuple:
    master = OracleMaster(verbose=args.verbose)
    reports = master.audit_prop1(args.n, args.e_max, args.seed, args.trials)
    return bound_rows(reports), any_failed(reports)


HANDLERS = {
    "count": _cmd_count,
    "bounds": _cmd_bounds,
    "iso": _cmd_iso,
    "oracle": _cmd_oracle,
    "lym": _cmd_lym,
    "audit": _cmd_audit,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 1 on usage or input errors, 2 when the report shows a violated bound
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    if args.threads < 1:
        print("✗ --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        print(f"\n{'='*80}\nPOSETLAB: {args.command}\n{'='*80}", file=sys.stderr)

    try:
        if args.command == "construct":
            return _cmd_construct(args)
        rows, violated = HANDLERS[args.command](args)
        write_report(render(rows, COLUMNS[args.command], args.format), args.output)
    except PosetLabError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE

    if args.verbose:
        print(f"{'─'*80}\n{'✗ violated bound in report' if violated else '✓ done'}", file=sys.stderr)
    return EXIT_VIOLATED if violated else EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
