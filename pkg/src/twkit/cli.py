"""Command-line surface.

Subcommands:
  validate    check a decomposition file against a graph file
  solve       rebuild an optimum-width decomposition through the full
              dealternation + conflict-witness pipeline
  mso         normalize a transduction pipeline or compare two of them

Exit codes: 0 ok, 1 check failed, 2 parse error, 3 size guard exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field

from . import conflict, dealternation, oracle, pace
from .core import validate_decomposition
from .errors import GuardError, ParseError
from .msonf import check_equivalence, normalize, parse_pipeline, write_pipeline
from .sepforest import induced_decomposition, is_reduced, sepforest_width

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_GUARD = 3


@dataclass
class RunReport:
    instance: str
    input_width: int | None = None
    optimum_width: int | None = None
    k: int | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def ok(self) -> bool:
        return all(self.checks.values())

    def lines(self) -> list[str]:
        out = [f"instance {self.instance}"]
        if self.input_width is not None:
            out.append(f"width input={self.input_width} optimum={self.optimum_width}")
        if self.k is not None:
            out.append(dealternation.describe_bounds(self.k))
        for name in sorted(self.checks):
            out.append(f"check {name}: {'pass' if self.checks[name] else 'FAIL'}")
        return out


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_validate(args) -> int:
    g = pace.parse_gr(_read(args.graph))
    t = pace.parse_td(_read(args.td), g)
    violations = validate_decomposition(t)
    if violations:
        for v in violations:
            print(str(v))
        return EXIT_CHECK_FAILED
    print(f"valid: {t.forest.node_count} bags, width {t.width()}")
    return EXIT_OK


def cmd_solve(args) -> int:
    g = pace.parse_gr(_read(args.graph))
    t = pace.parse_td(_read(args.td), g)
    report = RunReport(instance=args.graph)

    violations = validate_decomposition(t)
    if violations:
        for v in violations:
            print(str(v))
        print("input decomposition is invalid")
        return EXIT_CHECK_FAILED

    if g.vertex_count > oracle.TREEWIDTH_GUARD:
        print(
            f"graph has {g.vertex_count} vertices; the exact oracle stops at "
            f"{oracle.TREEWIDTH_GUARD} and there is no oracle-free mode by design")
        return EXIT_GUARD

    k = max(t.width(), 0)
    report.input_width = t.width()
    report.k = k

    t0 = time.perf_counter()
    tw = oracle.exact_treewidth(g)
    f0 = oracle.optimum_reduced_sepforest(g)
    report.timings["oracle"] = time.perf_counter() - t0
    report.optimum_width = tw

    t0 = time.perf_counter()
    f = dealternation.global_dealternate(t, f0, k)
    report.timings["dealternate"] = time.perf_counter() - t0
    report.checks["dealternated-reduced"] = is_reduced(f)
    report.checks["dealternated-width-optimum"] = sepforest_width(f) == tw

    node_reports = dealternation.dealternation_report(t, f, k)
    report.checks["factor-bound-f"] = all(r.factors <= r.bound_f for r in node_reports)
    report.checks["context-children-bound-g"] = all(
        r.context_children <= r.bound_g for r in node_reports)

    t0 = time.perf_counter()
    coloring = conflict.color_conflict_graph(t, f)
    h_graph = conflict.conflict_graph(t, f)
    report.checks["coloring-proper"] = conflict.is_proper_coloring(h_graph, coloring)
    load = conflict.max_stain_load(t, f)
    report.checks["load-within-h"] = load <= dealternation.h_bound(k)
    witness = conflict.encode_witness(t, f, coloring)
    decoded = conflict.decode_witness(t, witness)
    report.checks["witness-roundtrip"] = decoded.forest.parent == f.forest.parent
    report.timings["conflict"] = time.perf_counter() - t0

    out = induced_decomposition(f)
    out_violations = validate_decomposition(out)
    report.checks["output-valid"] = not out_violations
    report.checks["output-width-optimum"] = out.width() == tw

    if args.out:
        _write(args.out, pace.write_td(out))
    if args.verbose:
        for r in node_reports:
            print(str(r))
    for line in report.lines():
        print(line)
    print(
        "timings " + " ".join(f"{k2}={v:.3f}s" for k2, v in sorted(report.timings.items())),
        file=sys.stderr,
    )
    return EXIT_OK if report.ok() else EXIT_CHECK_FAILED


def cmd_mso(args) -> int:
    if args.action == "normalize":
        pipeline = parse_pipeline(_read(args.pipeline))
        result = normalize(pipeline)
        text = write_pipeline(result)
        if args.out:
            _write(args.out, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.action == "check-equiv":
        p1 = parse_pipeline(_read(args.pipeline))
        if args.pipeline2:
            p2 = parse_pipeline(_read(args.pipeline2))
        else:
            p2 = normalize(p1)
        rep = check_equivalence(p1, p2, trials=args.trials,
                                universe_max=args.universe_max, seed=args.rng_seed)
        print(str(rep))
        return EXIT_OK if rep.equivalent else EXIT_CHECK_FAILED
    raise AssertionError(args.action)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twkit",
        description="treewidth surgery and transduction pipeline tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="validate a .td against a .gr")
    p_val.add_argument("--graph", required=True)
    p_val.add_argument("--td", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_solve = sub.add_parser("solve", help="emit an optimum-width decomposition")
    p_solve.add_argument("--graph", required=True)
    p_solve.add_argument("--td", required=True)
    p_solve.add_argument("--out", default=None)
    p_solve.add_argument("--verbose", action="store_true")
    p_solve.set_defaults(func=cmd_solve)

    p_mso = sub.add_parser("mso", help="transduction pipeline tools")
    p_mso.add_argument("action", choices=["normalize", "check-equiv"])
    p_mso.add_argument("--pipeline", required=True)
    p_mso.add_argument("--pipeline2", default=None)
    p_mso.add_argument("--out", default=None)
    p_mso.add_argument("--trials", type=int, default=100)
    p_mso.add_argument("--universe-max", type=int, default=4)
    p_mso.add_argument("--rng-seed", type=int, default=0)
    p_mso.set_defaults(func=cmd_mso)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except GuardError as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
