"""Command-line frontend: ``ninfer <command> FILE ...``.

Exit codes: 0 holds / equivalent, 1 fails / not equivalent, 2 unknown,
3 usage, parse or guardedness error, 4 state space or oracle limit exceeded,
5 cyclic input to a back-and-forth check, 6 internal soundness violation.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time

from . import __version__
from .equiv import BfMode, CyclicInput, OracleBoundExceeded, Relation, bf_bisimilar_oracle, equivalent
from .equiv import partition as compute_partition
from .fixtures import CorpusError, load_corpus, run_fixture
from .generate import random_model
from .lts import (BuildLimits, StateSpaceExceeded, UnguardedRecursion, build_lts, export_aut,
                  export_dot, hide_high, restrict_high)
from .security import AttackerBounds, Base, Outcome, PropertyId, check, prepare, taxonomy_report
from .syntax import SpecError, check_guardedness, model_to_text, parse_spec

EXIT_HOLDS, EXIT_FAILS, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_LIMIT, EXIT_CYCLIC, EXIT_UNSOUND = 3, 4, 5, 6

_OUTCOME_EXIT = {Outcome.HOLDS: EXIT_HOLDS, Outcome.FAILS: EXIT_FAILS, Outcome.UNKNOWN: EXIT_UNKNOWN}
DEFAULT_MAX_STATES = 100_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _limits(args) -> BuildLimits:
    if args.max_states is not None:
        n = args.max_states
    else:
        raw = os.environ.get("NINFER_MAX_STATES")
        try:
            n = int(raw) if raw else DEFAULT_MAX_STATES
        except ValueError:
            raise UsageError(f"NINFER_MAX_STATES must be an integer, got {raw!r}")
    if n <= 0:
        raise UsageError("the state limit must be positive")
    return BuildLimits(max_states=n)


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    model = parse_spec(text)
    problems = check_guardedness(model)
    if problems:
        raise UsageError("\n".join(str(p) for p in problems))
    return model


def _process(model, name):
    if name is None:
        if not model.defs:
            raise UsageError("the file defines no process")
        return next(iter(model.defs))
    if name not in model.defs:
        raise UsageError(f"undefined process {name}")
    return name


def _witness_lines(witness: dict) -> list:
    kind = witness.get("kind")
    if kind == "attacker":
        return [f"Q = {witness['attacker']}", "L = {" + ", ".join(witness["sync"]) + "}",
                f"composition: {witness['composition']}"]
    if kind == "state":
        return [f"reachable state {witness['state']}: {witness['term']}"]
    if kind == "high-transition":
        return [f"high step: {witness['source']} --{witness['action']}--> {witness['target']}"]
    if kind == "views":
        return [f"restricted view: {witness['restricted']}", f"hidden view: {witness['hidden']}"]
    return [f"{k}: {v}" for k, v in witness.items() if k != "kind"]


# --- commands ----------------------------------------------------------------


def cmd_parse(args) -> int:
    model = _load(args.file)
    sys.stdout.write(model_to_text(model))
    return EXIT_HOLDS


def cmd_lts(args) -> int:
    model = _load(args.file)
    name = _process(model, args.process)
    lts = build_lts(model, name, _limits(args))
    if args.transform == "restrict":
        lts = restrict_high(lts, model.high)
    elif args.transform == "hide":
        lts = hide_high(lts, model.high)
    if args.format == "aut":
        sys.stdout.write(export_aut(lts))
    else:
        highlight = compute_partition(lts, args.partition) if args.partition else None
        sys.stdout.write(export_dot(lts, highlight, name))
    return EXIT_HOLDS


def cmd_equiv(args) -> int:
    model = _load(args.file)
    left, right = _process(model, args.left), _process(model, args.right)
    limits = _limits(args)
    a = build_lts(model, left, limits)
    b = build_lts(model, right, limits)
    start = time.perf_counter()
    if args.relation in {m.value for m in BfMode}:
        same = bf_bisimilar_oracle(a, a.initial, b, b.initial, args.relation)
    else:
        same = equivalent(a, a.initial, b, b.initial, args.relation)
    ms = round((time.perf_counter() - start) * 1000, 3)
    if args.json:
        json.dump({"left": left, "right": right, "relation": args.relation, "equivalent": same,
                   "stats": {"states": [a.num_states, b.num_states],
                             "transitions": [a.num_transitions, b.num_transitions], "ms": ms}},
                  sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        verdict = "equivalent" if same else "not equivalent"
        print(f"{left} and {right} are {verdict} ({args.relation})")
    return EXIT_HOLDS if same else EXIT_FAILS


def cmd_check(args) -> int:
    model = _load(args.file)
    name = _process(model, args.process)
    prop = PropertyId(Base(args.property), Relation(args.relation))
    bounds = AttackerBounds(depth=args.depth, max_attackers=args.max_attackers)
    start = time.perf_counter()
    subject = prepare(model, name, _limits(args))
    verdict = check(model, name, prop, bounds, _limits(args), subject)
    ms = round((time.perf_counter() - start) * 1000, 3)
    if args.json:
        out = {"process": name, "property": prop.base.value, "relation": prop.relation.value,
               "outcome": verdict.outcome.value}
        if verdict.witness is not None:
            out["witness"] = verdict.witness
        out["stats"] = {"states": subject.lts.num_states,
                        "transitions": subject.lts.num_transitions, "ms": ms}
        json.dump(out, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(f"{prop}({name}): {verdict.outcome.value.capitalize()}")
        if verdict.reason:
            print(f"  {verdict.reason}")
        if verdict.witness and verdict.outcome is Outcome.FAILS:
            for line in _witness_lines(verdict.witness):
                print(f"  {line}")
        print(f"  states: {subject.lts.num_states}, transitions: {subject.lts.num_transitions}")
    return _OUTCOME_EXIT[verdict.outcome]


def cmd_taxonomy(args) -> int:
    model = _load(args.file)
    name = _process(model, args.process)
    bounds = AttackerBounds(depth=args.depth, max_attackers=args.max_attackers)
    report = taxonomy_report(model, name, bounds, _limits(args))
    if args.json:
        json.dump(report.to_json(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(report.render())
    if not report.consistent:
        for v in report.violations:
            print(f"internal soundness violation: {v}", file=sys.stderr)
        return EXIT_UNSOUND
    return EXIT_HOLDS


def cmd_corpus(args) -> int:
    failures = 0
    for fixture in load_corpus():
        problems = run_fixture(fixture)
        count = len(fixture.expectations) + len(fixture.equivalences)
        print(f"{'ok ' if not problems else 'FAIL'} {fixture.name} ({count} expectations)")
        for p in problems:
            print(f"     {p}")
        failures += bool(problems)
    return EXIT_FAILS if failures else EXIT_HOLDS


def cmd_random(args) -> int:
    rng = random.Random(args.seed)
    for i in range(args.count):
        model, _ = random_model(rng, args.max_ops, name=f"P{i}")
        sys.stdout.write(model_to_text(model))
    return EXIT_HOLDS


# --- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ninfer", description="Noninterference checker for a small process calculus.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, process=True):
        p.add_argument("file")
        if process:
            p.add_argument("--process", "-p", help="process name (default: first definition)")
        p.add_argument("--max-states", type=int, help="state limit (env NINFER_MAX_STATES)")

    def attacker_opts(p):
        p.add_argument("--depth", type=int, default=3, help="attacker depth bound")
        p.add_argument("--max-attackers", type=int, default=200)

    p = sub.add_parser("parse", help="parse and check guardedness, print the normalised model")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("lts", help="export the LTS of a process")
    common(p)
    p.add_argument("--format", choices=["aut", "dot"], default="aut")
    p.add_argument("--transform", choices=["none", "restrict", "hide"], default="none")
    p.add_argument("--partition", choices=[r.value for r in Relation],
                   help="colour DOT nodes by equivalence class")
    p.set_defaults(func=cmd_lts)

    p = sub.add_parser("equiv", help="compare two processes")
    common(p, process=False)
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--relation", "-r", default="branching",
                   choices=[r.value for r in Relation] + [m.value for m in BfMode])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("check", help="check one noninterference property")
    common(p)
    p.add_argument("--property", required=True, choices=[b.value for b in Base])
    p.add_argument("--relation", "-r", default="branching", choices=["weak", "branching"])
    p.add_argument("--json", action="store_true")
    attacker_opts(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("taxonomy", help="check all ten properties")
    common(p)
    p.add_argument("--json", action="store_true")
    attacker_opts(p)
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("corpus", help="replay the bundled reference corpus")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("random", help="print random guarded models")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--max-ops", type=int, default=6)
    p.set_defaults(func=cmd_random)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "depth", 0) < 0 or getattr(args, "max_attackers", 1) < 1:
        print("ninfer: error: attacker bounds must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (SpecError, UsageError, UnguardedRecursion, CorpusError) as exc:
        print(f"ninfer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StateSpaceExceeded, OracleBoundExceeded) as exc:
        print(f"ninfer: limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except CyclicInput as exc:
        print(f"ninfer: back-and-forth check needs an acyclic LTS: {exc}", file=sys.stderr)
        return EXIT_CYCLIC


if __name__ == "__main__":
    sys.exit(main())
