"""Command-line interface.

Exit codes: 0 when the analysis ran (including "incompatible" and
"inconsistent" verdicts), 1 for input or validation errors, 2 for
internal numerical failures. ``--output json`` prints exactly one JSON
document on stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from .consistent import HistoryFamily, history_probability, is_consistent
from .errors import NumericalError, QHistoriesError
from .evaluate import (
    born_table,
    consistency_summary,
    evaluate_query,
    generalized_context_summary,
    scan_summary,
)
from .histories import build_generalized_context, generalized_probability
from .inference import three_box_report
from .linalg import TOL, Propagator
from .sampling import compatible_family, random_hermitian, random_state
from .scenario_io import load_scenario, serialize_json, to_jsonable

QUERY_KINDS = {
    "born": "born",
    "gc-prob": "gc_probability",
    "ch-prob": "ch_probability",
    "retrodict": "retrodiction",
}


class InputError(Exception):
    pass


def _index_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=["human", "json"], default="human")
    common.add_argument("--tolerance", type=_positive, default=None,
                        help=f"numerical tolerance tau (default {TOL:g}); also sets the consistency tolerance")
    common.add_argument("--consistency-tolerance", type=_positive, default=None,
                        help="tolerance for off-diagonal decoherence-functional entries")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized demos")

    parser = argparse.ArgumentParser(prog="qhistories", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="parse and validate a scenario")
    p.add_argument("scenario")

    for name, help_ in (("born", "Born probabilities"), ("gc-prob", "generalized-context probability queries"),
                        ("ch-prob", "consistent-histories probability queries"),
                        ("retrodict", "contrary-retrodiction analysis")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("scenario")
        p.add_argument("--query", type=int, default=None, help="index into the scenario's query list")

    for name, help_ in (("gc-build", "build the generalized context of the selected contexts"),
                        ("ch-check", "consistency check of the family of the selected contexts")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("scenario")
        p.add_argument("--contexts", type=_index_list, default=None, help="e.g. 0,2 (default: all)")

    p = sub.add_parser("scan-contrary", parents=[common], help="list contrary property pairs")
    p.add_argument("scenario")
    p.add_argument("--contexts", type=_index_list, default=None)
    p.add_argument("--budget", type=int, default=10_000)

    p = sub.add_parser("demo", parents=[common], help="built-in demonstrations")
    p.add_argument("name", choices=["three-box", "bridge"])
    p.add_argument("--trials", type=int, default=20, help="trials for the bridge demo")
    return parser


def _run_queries(s, kind: str, index: int | None, tol: float, ctol: float) -> list[dict]:
    if index is not None:
        if not 0 <= index < len(s.queries):
            raise InputError(f"--query {index} out of range (scenario has {len(s.queries)} queries)")
        q = s.queries[index]
        if q["type"] != kind:
            raise InputError(f"query {index} has type {q['type']!r}, expected {kind!r}")
        res = evaluate_query(s, q, tol, ctol)
        res["index"] = index
        return [res]
    out = []
    for n, q in enumerate(s.queries):
        if q["type"] == kind:
            res = evaluate_query(s, q, tol, ctol)
            res["index"] = n
            out.append(res)
    return out


def bridge_demo(seed: int, trials: int, tol: float) -> dict:
    """Random compatible two-time families: consistency and agreement of the two probability rules."""
    rng = np.random.default_rng(seed)
    worst_off, worst_gap, inconsistent = 0.0, 0.0, 0
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        u = Propagator.from_hamiltonian(random_hermitian(d, rng))
        tcs = compatible_family(d, rng, [1.0, 2.0], u)
        gc = build_generalized_context(0.0, tcs, u, tol)
        if not gc:
            raise NumericalError("constructed family unexpectedly incompatible")
        family = HistoryFamily.build(0.0, tcs, u)
        state = random_state(d, rng)
        rep = is_consistent(family, state, 10 * tol)
        worst_off = max(worst_off, rep.max_off_diagonal)
        if not rep:
            inconsistent += 1
            continue
        for k in gc.atoms:
            gap = abs(history_probability(family, state, k, 10 * tol) - generalized_probability(state, gc.atom(k)))
            worst_gap = max(worst_gap, gap)
    return {
        "seed": seed,
        "trials": trials,
        "inconsistent_families": inconsistent,
        "max_off_diagonal": worst_off,
        "max_probability_gap": worst_gap,
    }


def execute(args: argparse.Namespace) -> dict:
    tol = args.tolerance if args.tolerance is not None else TOL
    ctol = args.consistency_tolerance if args.consistency_tolerance is not None else tol
    cmd = args.command
    doc: dict = {"command": cmd}

    if cmd == "demo":
        doc["command"] = f"demo {args.name}"
        if args.name == "three-box":
            doc["report"] = three_box_report(tol, ctol)
        else:
            doc["result"] = bridge_demo(args.seed, args.trials, tol)
        return doc

    s = load_scenario(args.scenario, tol)
    doc["scenario"] = s.name
    if cmd == "validate":
        doc.update(valid=True, dimension=s.dimension, contexts=len(s.contexts), queries=len(s.queries),
                   dynamics=s.propagator.mode)
    elif cmd == "born":
        doc["results"] = _run_queries(s, "born", args.query, tol, ctol)
        if args.query is None:
            doc["atoms"] = born_table(s)
    elif cmd in QUERY_KINDS:
        doc["results"] = _run_queries(s, QUERY_KINDS[cmd], args.query, tol, ctol)
    elif cmd in ("gc-build", "ch-check"):
        idx = args.contexts
        if idx is not None and any(not 0 <= i < len(s.contexts) for i in idx):
            raise InputError(f"--contexts {idx} out of range (scenario has {len(s.contexts)} contexts)")
        if cmd == "gc-build":
            doc["result"] = generalized_context_summary(s, idx, tol)
        else:
            doc["result"] = consistency_summary(s, idx, ctol)
    elif cmd == "scan-contrary":
        idx = args.contexts if args.contexts is not None else range(len(s.contexts))
        try:
            ctxs = [s.contexts[i].context for i in idx]
        except IndexError:
            raise InputError(f"--contexts {list(idx)} out of range")
        doc["result"] = scan_summary(ctxs, tol, args.budget)
    return doc


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return str(x).lower() if x is not None else "null"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def render_human(doc, prefix: str = "") -> list[str]:
    """Flatten a result document into ``key: value`` lines, floats at 6 significant digits."""
    lines: list[str] = []
    if isinstance(doc, dict):
        for k in sorted(doc):
            lines.extend(render_human(doc[k], f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(doc, list):
        if doc and all(not isinstance(x, (dict, list)) for x in doc):
            lines.append(f"{prefix}: [{', '.join(_fmt(x) for x in doc)}]")
        elif not doc:
            lines.append(f"{prefix}: []")
        else:
            for n, x in enumerate(doc):
                lines.extend(render_human(x, f"{prefix}[{n}]"))
    else:
        lines.append(f"{prefix}: {_fmt(doc)}")
    return lines


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = to_jsonable(execute(args))
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"internal numerical failure: {exc}", file=sys.stderr)
        return 2
    except (QHistoriesError, InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output == "json":
        sys.stdout.write(serialize_json(doc))
    else:
        sys.stdout.write("\n".join(render_human(doc)) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
