"""Command-line interface.

Subcommands:
  validate      check a trace file for well-formedness
  exits         entry/exit points of every critical section
  locksets      per-event lock sets (per-thread, trace-based, or both)
  must-precede  does one event precede another in every alternative schedule?
  crp           enumerate or count correctly reordered prefixes
  gen           emit a random well-formed trace

Exit codes: 0 success, 1 well-formedness findings (validate only),
2 usage or input errors (unreadable file, malformed trace, unknown event id,
enumeration cap exceeded).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import locksets as ls
from . import reorder, tracegen
from .trace import (
    Lock,
    ParseError,
    Trace,
    UnknownEventError,
    parse_trace,
    serialize,
    threads_of,
)
from .wellformed import IllFormedTraceError, validate


def _load(path: str) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace(fh.read())


def _fmt_lockset(locks: frozenset[str]) -> str:
    return "{" + ",".join(sorted(locks)) + "}"


def _render_rows(trace: Trace, extra: list[tuple[str, dict[int, str]]]) -> str:
    """Tabular view: one row per event, one column per thread, then extras."""
    threads = sorted(threads_of(trace))
    headers = ["id"] + [f"t{t}" for t in threads] + [h for h, _ in extra]
    rows = []
    for ev in trace:
        cells = [str(ev.id)]
        cells += [str(ev.op) if ev.thread == t else "" for t in threads]
        cells += [col.get(ev.id, "") for _, col in extra]
        rows.append(cells)
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    for cells in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
    return "\n".join(lines)


def _cmd_validate(args) -> int:
    violations = validate(_load(args.trace))
    if args.json:
        print(json.dumps([v.as_dict() for v in violations], indent=2))
    elif not violations:
        print("well-formed")
    else:
        for v in violations:
            witnesses = ", ".join(str(w) for w in v.witnesses)
            print(f"{v.condition.value} (events {witnesses}): {v.message}")
    return 1 if violations else 0


def _cmd_exits(args) -> int:
    trace = _load(args.trace)
    pairs = ls.entry_exit_pairs(trace)
    if args.json:
        print(json.dumps([
            {"entry": p.entry, "exit": p.exit, "lock": p.lock,
             "thread": p.thread, "open": p.open}
            for p in pairs
        ], indent=2))
    else:
        for p in pairs:
            suffix = " [open]" if p.open else ""
            print(f"lock({p.lock}) by thread {p.thread}: "
                  f"entry {p.entry} -> exit {p.exit}{suffix}")
    return 0


def _cmd_locksets(args) -> int:
    trace = _load(args.trace)
    if args.oracle and args.mode != "trace":
        raise ValueError("--oracle applies to --mode trace only")
    if args.mode == "diff":
        report = ls.diff_report(trace)
        if args.json:
            print(json.dumps(report.as_dicts(), indent=2))
        else:
            columns = [
                ("per-thread", {r.event_id: _fmt_lockset(r.per_thread) for r in report.rows}),
                ("trace-based", {r.event_id: _fmt_lockset(r.trace_based) for r in report.rows}),
                ("gained", {r.event_id: _fmt_lockset(r.gained) for r in report.rows}),
            ]
            print(_render_rows(trace, columns))
        return 0

    if args.mode == "per-thread":
        sets = {ev.id: ls.per_thread_lockset(trace, ev.id) for ev in trace}
    elif args.oracle:
        names = sorted({ev.op.lock for ev in trace if isinstance(ev.op, Lock)})
        sets = {
            ev.id: frozenset(
                m for m in names if ls.protected_by_oracle(trace, ev.id, m, cap=args.cap)
            )
            for ev in trace
        }
    else:
        sets = {ev.id: ls.lockset(trace, ev.id) for ev in trace}
    if args.json:
        print(json.dumps([
            {"event_id": ev.id, "thread": ev.thread, "op": str(ev.op),
             "locks": sorted(sets[ev.id])}
            for ev in trace
        ], indent=2))
    else:
        print(_render_rows(trace, [("locks", {i: _fmt_lockset(s) for i, s in sets.items()})]))
    return 0


def _cmd_must_precede(args) -> int:
    trace = _load(args.trace)
    witness = reorder.refute_must_precede(trace, args.from_id, args.to_id)
    if args.json:
        print(json.dumps({
            "must_precede": witness is None,
            "witness": None if witness is None else list(witness),
        }, indent=2))
    else:
        print("true" if witness is None else "false")
        if witness is not None:
            print(",".join(str(i) for i in witness))
    return 0


def _cmd_crp(args) -> int:
    trace = _load(args.trace)
    if args.action == "count":
        n = reorder.count_crps(trace, cap=args.cap)
        print(json.dumps({"count": n}) if args.json else n)
        return 0
    if args.json:
        out = [list(c.ids) for c in reorder.enumerate_crps(trace, cap=args.cap)]
        print(json.dumps(out))
    else:
        for candidate in reorder.enumerate_crps(trace, cap=args.cap):
            print(",".join(str(i) for i in candidate.ids))
    return 0


def _cmd_gen(args) -> int:
    params = tracegen.GenParams(
        seed=args.seed,
        max_threads=args.threads,
        max_locks=args.locks,
        max_events=args.events,
    )
    sys.stdout.write(serialize(tracegen.generate(params)))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locktrace",
        description="Analyze lock/fork/join execution traces: validity, "
                    "critical sections, and per-thread vs trace-based lock sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("validate", _cmd_validate, "check a trace for well-formedness")
    p.add_argument("trace")
    p.add_argument("--json", action="store_true")

    p = add("exits", _cmd_exits, "critical-section entry and exit points")
    p.add_argument("trace")
    p.add_argument("--json", action="store_true")

    p = add("locksets", _cmd_locksets, "per-event lock sets")
    p.add_argument("trace")
    p.add_argument("--mode", choices=["per-thread", "trace", "diff"], default="diff")
    p.add_argument("--oracle", action="store_true",
                   help="decide protection by enumerating all reordered prefixes")
    p.add_argument("--cap", type=int, default=reorder.DEFAULT_CAP)
    p.add_argument("--json", action="store_true")

    p = add("must-precede", _cmd_must_precede,
            "check whether one event precedes another in every schedule")
    p.add_argument("trace")
    p.add_argument("--from", dest="from_id", type=int, required=True, metavar="ID")
    p.add_argument("--to", dest="to_id", type=int, required=True, metavar="ID")
    p.add_argument("--json", action="store_true")

    p = add("crp", _cmd_crp, "enumerate or count correctly reordered prefixes")
    p.add_argument("trace")
    p.add_argument("--action", choices=["enumerate", "count"], default="enumerate")
    p.add_argument("--cap", type=int, default=reorder.DEFAULT_CAP)
    p.add_argument("--json", action="store_true")

    p = add("gen", _cmd_gen, "emit a random well-formed trace")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=3)
    p.add_argument("--locks", type=int, default=2)
    p.add_argument("--events", type=int, default=12)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, IllFormedTraceError, UnknownEventError,
            reorder.CapExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
