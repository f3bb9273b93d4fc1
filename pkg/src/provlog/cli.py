"""Command-line front end.

Exit codes for `decide`: 0 provable, 1 refuted, 2 error (bad input,
fragment violation, resource limit, timeout).  Output is deterministic:
identical invocations produce byte-identical output.  JSON payloads carry
a schema tag so downstream consumers can detect format changes.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
from typing import Optional

from . import experiments, ignatiev, interp
from .formula import (
    CLOSED_B,
    CLOSED_D,
    FULL_GL,
    FULL_IL,
    FragmentError,
    ParseError,
    SchemaError,
    fragment_fn,
    parse,
    pretty,
)
from .glprover import (
    Provable,
    Refuted,
    decide_fgl,
    decide_gl,
    decide_gl3,
    decide_gl4,
    decide_gl_closed,
    normal_form,
)
from .kripke import (
    ResourceLimitError,
    build_pmorphism_from_G1,
    check,
    frame_from_json,
    model_from_json,
    model_to_json,
    to_dot,
)

JSON_SCHEMA = "provlog/1"


class _Timeout(Exception):
    pass


def _with_timeout(seconds: float, fn, *args, **kwargs):
    if seconds <= 0:
        return fn(*args, **kwargs)

    def handler(signum, frame):
        raise _Timeout()

    old = signal.signal(signal.SIGALRM, handler)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        return fn(*args, **kwargs)
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def _cmd_decide(args) -> int:
    logic = args.logic
    if logic.startswith("fgl:"):
        try:
            n = int(logic.split(":", 1)[1])
        except ValueError:
            print(f"error: bad fragment index in {logic!r}", file=sys.stderr)
            return 2
        language = fragment_fn(n)
    else:
        language = {
            "gl": FULL_GL,
            "gl3": FULL_GL,
            "gl4": FULL_GL,
            "glclosed": CLOSED_B,
            "ilw3": FULL_IL,
        }.get(logic)
        if language is None:
            print(f"error: unknown logic {logic!r}", file=sys.stderr)
            return 2
    f = parse(args.formula, language)

    def run():
        if logic == "gl":
            return decide_gl(f, cross_check=args.cross_check)
        if logic == "gl3":
            return decide_gl3(f)
        if logic == "gl4":
            return decide_gl4(f, cross_check=args.cross_check)
        if logic == "glclosed":
            return decide_gl_closed(f)
        if logic == "ilw3":
            return interp.decide_ilw3(f)
        return decide_fgl(n, f)

    verdict = _with_timeout(args.timeout, run)
    if isinstance(verdict, Provable):
        if args.json:
            _emit_json(
                {
                    "schema": JSON_SCHEMA,
                    "command": "decide",
                    "logic": logic,
                    "formula": args.formula,
                    "verdict": "provable",
                }
            )
        else:
            print("provable")
        return 0
    assert isinstance(verdict, Refuted)
    world = verdict.world
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(to_dot(verdict.model, highlight=world))
    if args.json:
        _emit_json(
            {
                "schema": JSON_SCHEMA,
                "command": "decide",
                "logic": logic,
                "formula": args.formula,
                "verdict": "refuted",
                "world": list(world) if isinstance(world, tuple) else world,
                "model": model_to_json(verdict.model),
            }
        )
    else:
        print(f"refuted at world {world}")
        if logic == "ilw3":
            print("countermodel falsifies the boxed translation of the input")
        print(json.dumps(model_to_json(verdict.model), sort_keys=True))
    return 1


def _cmd_normalform(args) -> int:
    f = parse(args.formula, fragment_fn(args.n))
    nf = normal_form(args.n, f)
    if args.json:
        _emit_json(
            {
                "schema": JSON_SCHEMA,
                "command": "normalform",
                "n": args.n,
                "formula": args.formula,
                "normal_form": str(nf),
                "as_formula": pretty(nf.to_formula()),
            }
        )
    else:
        print(str(nf))
    return 0


def _cmd_translate(args) -> int:
    f = parse(args.formula, FULL_IL)
    print(pretty(interp.translate_tr(f)))
    return 0


def _cmd_modelcheck(args) -> int:
    with open(args.model) as fh:
        model = model_from_json(json.load(fh))
    world = _resolve_world(model.frame.worlds, args.world)
    f = parse(args.formula, FULL_GL)
    result = check(model, world, f)
    print("true" if result else "false")
    return 0


def _resolve_world(worlds, text: str):
    for w in worlds:
        if str(w) == text:
            return w
    try:
        candidate = int(text)
    except ValueError:
        candidate = text
    if candidate in set(worlds):
        return candidate
    raise ValueError(f"world {text!r} is not in the model")


def _cmd_ignatiev(args) -> int:
    tu = ignatiev.build_truncation(args.bound, args.levels)
    if args.linearity:
        a = parse(args.linearity[0], CLOSED_D)
        b = parse(args.linearity[1], CLOSED_D)
        report = ignatiev.linearity_experiment(tu, a, b)
        print(
            f"checked {report.points_checked} points: "
            f"{len(report.violations)} violations"
        )
        for v in report.violations:
            print(
                f"  at {v.point}: left witness {v.witness_left}, "
                f"right witness {v.witness_right}, "
                f"roots {v.root_left} / {v.root_right}"
            )
        return 0 if report.ok else 1
    if args.export == "json":
        _emit_json(ignatiev.truncation_to_json(tu))
    elif args.export == "dot":
        print(ignatiev.truncation_to_dot(tu), end="")
    else:
        edge_counts = []
        for lvl in range(tu.max_level + 1):
            edges = sum(len(tu.successors(lvl, p)) for p in tu.points)
            edge_counts.append(f"R{lvl}: {edges}")
        print(
            f"truncation bound={tu.bound} levels={tu.max_level}: "
            f"{len(tu.points)} points, {', '.join(edge_counts)}"
        )
    return 0


def _cmd_pmorph(args) -> int:
    with open(args.frame) as fh:
        frame = frame_from_json(json.load(fh))
    world = _resolve_world(frame.worlds, args.world)
    (m, i), pm = build_pmorphism_from_G1(frame, world)
    payload = {
        "schema": JSON_SCHEMA,
        "command": "pmorph",
        "point": [m, i],
        "verified": True,
        "map": [
            [[p, j], w if not isinstance(w, tuple) else list(w)]
            for (p, j), w in sorted(pm.mapping.items())
        ],
    }
    _emit_json(payload)
    return 0


def _cmd_experiment(args) -> int:
    rows = experiments.run_suite(args.suite)
    width = max(len(r.name) for r in rows)
    failures = 0
    for r in rows:
        mark = "PASS" if r.passed else "FAIL"
        if not r.passed:
            failures += 1
        detail = f"  ({r.detail})" if r.detail else ""
        print(f"{mark}  {r.name.ljust(width)}{detail}")
    print(f"{len(rows) - failures}/{len(rows)} checks passed")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="provlog",
        description="decision procedures and countermodels for "
        "provability and interpretability logics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide provability of a formula")
    p.add_argument("--logic", required=True,
                   help="gl | gl3 | gl4 | glclosed | fgl:<n> | ilw3")
    p.add_argument("--formula", required=True)
    p.add_argument("--cross-check", action="store_true")
    p.add_argument("--dot", metavar="PATH",
                   help="write the countermodel as graphviz")
    p.add_argument("--json", action="store_true")
    p.add_argument("--max-worlds", type=int, default=6)
    p.add_argument("--timeout", type=float, default=10.0)
    p.set_defaults(func=_cmd_decide)

    p = sub.add_parser("normalform",
                       help="constant-fragment normal form of a formula")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_normalform)

    p = sub.add_parser("translate",
                       help="boxed translation of an interpretability formula")
    p.add_argument("--formula", required=True)
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("modelcheck", help="evaluate a formula on a model")
    p.add_argument("--model", required=True, metavar="JSON_PATH")
    p.add_argument("--world", required=True)
    p.add_argument("--formula", required=True)
    p.set_defaults(func=_cmd_modelcheck)

    p = sub.add_parser("ignatiev",
                       help="inspect a truncation of the ordinal-sequence frame")
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--export", choices=("json", "dot"))
    p.add_argument("--linearity", nargs=2, metavar=("A", "B"))
    p.set_defaults(func=_cmd_ignatiev)

    p = sub.add_parser("pmorph",
                       help="unfold a confluent frame onto the two-column frame")
    p.add_argument("--frame", required=True, metavar="JSON_PATH")
    p.add_argument("--world", required=True)
    p.set_defaults(func=_cmd_pmorph)

    p = sub.add_parser("experiment", help="run a named experiment suite")
    p.add_argument("--suite", required=True,
                   choices=sorted(experiments.SUITES))
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ParseError,
        FragmentError,
        SchemaError,
        ResourceLimitError,
        ValueError,
        OSError,
        _Timeout,
    ) as exc:
        message = "timed out" if isinstance(exc, _Timeout) else str(exc)
        print(f"error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
