"""Command-line front end.

Subcommands:

* ``measure``  — measure of a named set (workspace or built-in K / Kij).
* ``refine``   — common refinement of two equal sets, with a verification
  report (refines both inputs, measures agree).
* ``check``    — run the randomised property suites.
* ``examples`` — the determinant-power series over the circle families.

Exit code 0 means no errors and, for ``check``, all properties passing.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .errors import GL2MeasureError, NotEqualSets
from .integration import CircleFamily, family_integral
from .measure import mu
from .sets import (
    common_refinement,
    equality_witness,
    is_refinement,
    reduce as reduce_ddd,
    set_equal,
)
from .serialize import (
    Workspace,
    builtin_set,
    coset_to_json,
    ddd_to_json,
    render_value,
    workspace_from_json,
)
from .checks import run_checks
from .values import GlobalParams


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, default=2, help="prime residue size (default 2)")
    p.add_argument("--t1-window", type=int, nargs=2, default=(-16, 16), metavar=("LO", "HI"))
    p.add_argument("--t2-window", type=int, nargs=2, default=(-8, 8), metavar=("LO", "HI"))
    p.add_argument("--x-trunc", type=int, default=8, help="series truncation order")
    p.add_argument("--coset-budget", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--workspace", type=str, default=None, help="JSON workspace file")


def _params(args: argparse.Namespace) -> GlobalParams:
    return GlobalParams(
        q=args.q,
        t1_window=tuple(args.t1_window),
        t2_window=tuple(args.t2_window),
        x_trunc=args.x_trunc,
        coset_budget=args.coset_budget,
    )


def _load_workspace(args: argparse.Namespace, params: GlobalParams) -> Workspace:
    if args.workspace is None:
        return Workspace(params=params)
    with open(args.workspace, "r", encoding="utf-8") as fh:
        return workspace_from_json(fh.read(), params)


def _emit(args: argparse.Namespace, text_lines: list[str], structured: dict) -> None:
    if args.format == "structured":
        print(json.dumps(structured, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def cmd_measure(args: argparse.Namespace) -> int:
    params = _params(args)
    ws = _load_workspace(args, params)
    target = ws.lookup_set(args.name)
    value = render_value(mu(target))
    _emit(args, [value], {"set": args.name, "measure": value})
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    params = _params(args)
    ws = _load_workspace(args, params)
    a = reduce_ddd(ws.lookup_set(args.name_a))
    b = reduce_ddd(ws.lookup_set(args.name_b))
    budget = params.coset_budget
    if not set_equal(a, b, budget=budget):
        witness = equality_witness(a, b, budget=budget)
        print(
            f"NotEqualSets: the presentations differ; witness coset "
            f"{json.dumps(coset_to_json(witness))}",
            file=sys.stderr,
        )
        return 1
    refined = common_refinement(a, b, budget=budget)
    report = {
        "refines_first": is_refinement(a, refined, budget=budget),
        "refines_second": is_refinement(b, refined, budget=budget),
        "measure_first": render_value(mu(a)),
        "measure_second": render_value(mu(b)),
        "measure_refinement": render_value(mu(refined)),
    }
    report["measures_equal"] = (
        report["measure_first"]
        == report["measure_second"]
        == report["measure_refinement"]
    )
    doc = {"refinement": ddd_to_json(refined), "report": report}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
    lines = [f"{key}: {value}" for key, value in report.items()]
    if not args.out:
        lines.append(json.dumps(ddd_to_json(refined)))
    _emit(args, lines, doc)
    return 0 if all(v for k, v in report.items() if k.startswith(("refines", "measures"))) else 1


def cmd_check(args: argparse.Namespace) -> int:
    params = _params(args)
    results = run_checks(
        args.kind, params, args.seed, args.count, parallel=args.parallel
    )
    structured = {
        "results": [
            {
                "name": r.name,
                "passed": r.passed,
                "cases": r.cases,
                "detail": r.detail,
            }
            for r in results
        ]
    }
    _emit(args, [r.line() for r in results], structured)
    return 0 if all(r.passed for r in results) else 1


def cmd_examples(args: argparse.Namespace) -> int:
    params = _params(args)
    fam = CircleFamily(kind=args.kind, s=args.s, m=args.m, n=0)
    value = family_integral(fam, params.q, args.trunc)
    rendered = render_value(value)
    _emit(
        args,
        [rendered],
        {"kind": args.kind, "q": params.q, "s": args.s, "m": args.m, "value": rendered},
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gl2measure",
        description="Exact measure and integration on GL2 over a two-dimensional local field",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="measure of a named or built-in set")
    p.add_argument("name", help="set name: workspace entry, K, or Kij (e.g. K11, K-1,1)")
    _add_common_flags(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("refine", help="common refinement of two equal sets")
    p.add_argument("name_a")
    p.add_argument("name_b")
    p.add_argument("--out", type=str, default=None, help="write the refinement document here")
    _add_common_flags(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("check", help="run the property suites")
    p.add_argument("--kind", choices=("invariants", "oracle", "all"), default="all")
    p.add_argument("--count", type=int, default=25, help="cases per property")
    p.add_argument("--parallel", action="store_true", help="run suites concurrently")
    _add_common_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("examples", help="determinant-power series over circle families")
    p.add_argument("--kind", choices=("disc", "quarter", "triangle"), required=True)
    p.add_argument("--s", type=int, default=1, help="positive integer exponent")
    p.add_argument("--m", type=int, default=-1, help="quarter-plane lower index")
    p.add_argument("--trunc", type=int, default=None, help="series truncation (default --x-trunc)")
    _add_common_flags(p)
    p.set_defaults(func=cmd_examples)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "examples":
        if args.trunc is None:
            args.trunc = args.x_trunc
        args.kind = {"quarter": "quarter_plane"}.get(args.kind, args.kind)
    try:
        return args.func(args)
    except NotEqualSets as exc:
        print(f"NotEqualSets: {exc}", file=sys.stderr)
        return 1
    except GL2MeasureError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
