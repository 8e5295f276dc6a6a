"""Validity checking for traces of lock/fork/join executions.

A trace is well formed when it could have been produced by an actual run:
locks are held by at most one thread at a time and released by their holder,
every non-main thread is created exactly once before it runs, and a joined
thread has finished (and done something) before the join returns.  Each of
the six conditions is checked independently and every breach is reported,
with the events that exhibit it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .trace import Event, Fork, Join, Lock, Trace, Unlock, MAIN_THREAD


class WfCondition(enum.Enum):
    """The six well-formedness conditions."""

    ACQ = "WF-Acq"
    REL = "WF-Rel"
    FORK1 = "WF-Fork1"
    FORK2 = "WF-Fork2"
    JOIN1 = "WF-Join1"
    JOIN2 = "WF-Join2"


@dataclass(frozen=True)
class WfViolation:
    """One diagnosed breach: the condition, witness event ids, and a message."""

    condition: WfCondition
    witnesses: tuple[int, ...]
    message: str

    def as_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "witnesses": list(self.witnesses),
            "message": self.message,
        }


class IllFormedTraceError(ValueError):
    """Raised when an operation requires a well-formed trace but got breaches."""

    def __init__(self, violations: list[WfViolation]):
        first = violations[0]
        suffix = f" (+{len(violations) - 1} more)" if len(violations) > 1 else ""
        super().__init__(f"trace is ill-formed: {first.condition.value}: {first.message}{suffix}")
        self.violations = violations


def _check_acquisitions(trace: Trace, out: list[WfViolation]) -> None:
    # WF-Acq: between two acquisitions of the same lock, the first acquirer
    # must have released it.
    pending: dict[str, tuple[Event, bool]] = {}  # lock -> (last acquire, released since)
    for ev in trace:
        if isinstance(ev.op, Lock):
            prev = pending.get(ev.op.lock)
            if prev is not None and not prev[1]:
                out.append(
                    WfViolation(
                        WfCondition.ACQ,
                        (prev[0].id, ev.id),
                        f"lock {ev.op.lock} acquired by thread {ev.thread} at event "
                        f"{ev.id} while still held by thread {prev[0].thread} "
                        f"(acquired at event {prev[0].id}, no release in between)",
                    )
                )
            pending[ev.op.lock] = (ev, False)
        elif isinstance(ev.op, Unlock):
            prev = pending.get(ev.op.lock)
            if prev is not None and ev.thread == prev[0].thread:
                pending[ev.op.lock] = (prev[0], True)


def _check_releases(trace: Trace, out: list[WfViolation]) -> None:
    # WF-Rel: every release has an acquisition by the same thread with no
    # release of that lock (by anyone) in between.
    window: dict[str, set[int]] = {}  # lock -> threads that acquired it since the last release
    for ev in trace:
        if isinstance(ev.op, Lock):
            window.setdefault(ev.op.lock, set()).add(ev.thread)
        elif isinstance(ev.op, Unlock):
            acquirers = window.get(ev.op.lock, set())
            if ev.thread not in acquirers:
                out.append(
                    WfViolation(
                        WfCondition.REL,
                        (ev.id,),
                        f"lock {ev.op.lock} released by thread {ev.thread} at event "
                        f"{ev.id} without a matching acquisition",
                    )
                )
            window[ev.op.lock] = set()


def _check_forks(trace: Trace, out: list[WfViolation]) -> None:
    first_fork: dict[int, Event] = {}
    for ev in trace:
        if not isinstance(ev.op, Fork):
            continue
        # WF-Fork1: a thread is created at most once, and never the main thread.
        if ev.op.target == MAIN_THREAD:
            out.append(
                WfViolation(
                    WfCondition.FORK1,
                    (ev.id,),
                    f"event {ev.id} forks the main thread",
                )
            )
        prev = first_fork.get(ev.op.target)
        if prev is not None:
            out.append(
                WfViolation(
                    WfCondition.FORK1,
                    (prev.id, ev.id),
                    f"thread {ev.op.target} forked twice (events {prev.id} and {ev.id})",
                )
            )
        else:
            first_fork[ev.op.target] = ev

    # WF-Fork2: every event of a non-main thread comes after that thread's fork.
    reported: set[int] = set()
    forked_at: dict[int, int] = {t: trace.index(e.id) for t, e in first_fork.items()}
    for i, ev in enumerate(trace):
        if ev.thread == MAIN_THREAD or ev.thread in reported:
            continue
        at = forked_at.get(ev.thread)
        if at is None or at >= i:
            out.append(
                WfViolation(
                    WfCondition.FORK2,
                    (ev.id,),
                    f"thread {ev.thread} runs at event {ev.id} without a prior fork",
                )
            )
            reported.add(ev.thread)


def _check_joins(trace: Trace, out: list[WfViolation]) -> None:
    events_of: dict[int, list[int]] = {}  # thread -> positions
    for i, ev in enumerate(trace):
        events_of.setdefault(ev.thread, []).append(i)

    for i, ev in enumerate(trace):
        if not isinstance(ev.op, Join):
            continue
        target = ev.op.target
        # WF-Join1: joins name a different, non-empty thread.
        if target == ev.thread:
            out.append(
                WfViolation(
                    WfCondition.JOIN1,
                    (ev.id,),
                    f"event {ev.id} joins its own thread {target}",
                )
            )
        elif target not in events_of:
            out.append(
                WfViolation(
                    WfCondition.JOIN1,
                    (ev.id,),
                    f"event {ev.id} joins thread {target}, which has no events",
                )
            )
        # WF-Join2: every event of the joined thread precedes the join.
        late = [p for p in events_of.get(target, ()) if p >= i]
        if late:
            offender = trace[late[0]]
            out.append(
                WfViolation(
                    WfCondition.JOIN2,
                    (ev.id, offender.id),
                    f"thread {target} still runs at event {offender.id}, at or after "
                    f"its join at event {ev.id}",
                )
            )


def validate(trace: Trace) -> list[WfViolation]:
    """Check all six conditions; returns [] iff the trace is well formed.

    All conditions are evaluated (no fail-fast).  Violations come back in a
    deterministic order: by the position of their first witness, then by
    condition name.
    """
    out: list[WfViolation] = []
    _check_acquisitions(trace, out)
    _check_releases(trace, out)
    _check_forks(trace, out)
    _check_joins(trace, out)
    out.sort(key=lambda v: (trace.index(v.witnesses[0]), v.condition.value))
    return out


def require_well_formed(trace: Trace) -> None:
    """Raise IllFormedTraceError unless validate(trace) is empty."""
    violations = validate(trace)
    if violations:
        raise IllFormedTraceError(violations)
