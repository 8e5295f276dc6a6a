"""Critical sections and lock sets, per-thread and trace-based.

A lock acquisition opens a critical section; the section closes at the first
matching release by the same thread, or, when the program stopped while the
lock was still held, at that thread's last recorded event (an *open*
section, whose final event counts as a member).

Two constructions are computed side by side:

* the classic per-thread one, which only ever places events of the acquiring
  thread inside a section, and
* the trace-based one, which places an event inside a section when every
  alternative schedule runs it between the acquisition and its exit point.
  Fork/join ordering can force events of *other* threads in between, so a
  section may span threads and an event may be protected by a lock its own
  thread never touched.

`protected_by_oracle` decides protection by brute-force enumeration of all
reordered prefixes; it is the ground truth the two constructions are measured
against and is kept deliberately separate from the reachability-based path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .reorder import (
    DEFAULT_CAP,
    MustPrecedeTable,
    _forced_between_members,
    enumerate_crps,
)
from .trace import Event, Lock, Operation, Trace, Unlock
from .wellformed import require_well_formed


@dataclass(frozen=True)
class EntryExit:
    """A critical section's boundary: the acquiring event and its exit point."""

    entry: int
    exit: int
    lock: str
    thread: int
    open: bool


@dataclass(frozen=True)
class LockSetRow:
    """Both lock sets for one event, plus what the trace-based view adds."""

    event_id: int
    thread: int
    op: Operation
    per_thread: frozenset[str]
    trace_based: frozenset[str]
    gained: frozenset[str]


@dataclass(frozen=True)
class LockSetReport:
    """Per-event lock-set comparison over a whole trace, in trace order."""

    rows: tuple[LockSetRow, ...]

    def row(self, event_id: int) -> LockSetRow:
        for row in self.rows:
            if row.event_id == event_id:
                return row
        raise LookupError(f"no report row for event id {event_id}")

    def as_dicts(self) -> list[dict]:
        return [
            {
                "event_id": row.event_id,
                "thread": row.thread,
                "op": str(row.op),
                "per_thread": sorted(row.per_thread),
                "trace_based": sorted(row.trace_based),
                "gained": sorted(row.gained),
            }
            for row in self.rows
        ]


def _entry_event(trace: Trace, entry_id: int) -> Event:
    ev = trace.event(entry_id)
    if not isinstance(ev.op, Lock):
        raise ValueError(f"event {entry_id} is {ev.op}, not a lock acquisition")
    return ev


def _exit_point(trace: Trace, entry_id: int) -> int:
    entry = _entry_event(trace, entry_id)
    last = entry
    for ev in trace.events[trace.index(entry_id) + 1 :]:
        if ev.thread != entry.thread:
            continue
        if ev.op == Unlock(entry.op.lock):
            return ev.id
        last = ev
    return last.id


def _is_open(trace: Trace, entry_id: int, exit_id: int) -> bool:
    lock = _entry_event(trace, entry_id).op.lock
    return trace.event(exit_id).op != Unlock(lock)


def exit_point(trace: Trace, entry_id: int) -> int:
    """Exit point of the section opened by the lock event `entry_id`.

    The first release of the same lock by the same thread after the entry;
    if the thread never releases it, the thread's last event (which is the
    entry itself when nothing follows).
    """
    require_well_formed(trace)
    return _exit_point(trace, entry_id)


def entry_exit_pairs(trace: Trace) -> list[EntryExit]:
    """Section boundaries for every lock event, in trace order."""
    require_well_formed(trace)
    pairs = []
    for ev in trace:
        if isinstance(ev.op, Lock):
            x = _exit_point(trace, ev.id)
            pairs.append(
                EntryExit(
                    entry=ev.id,
                    exit=x,
                    lock=ev.op.lock,
                    thread=ev.thread,
                    open=_is_open(trace, ev.id, x),
                )
            )
    return pairs


# ---------------------------------------------------------------------------
# Per-thread construction
# ---------------------------------------------------------------------------


def _per_thread_cs(trace: Trace, entry_id: int) -> frozenset[int]:
    entry = _entry_event(trace, entry_id)
    exit_id = _exit_point(trace, entry_id)
    i, j = trace.index(entry_id), trace.index(exit_id)
    members = {
        ev.id for ev in trace.events[i + 1 : j] if ev.thread == entry.thread
    }
    if _is_open(trace, entry_id, exit_id):
        members.add(exit_id)
    return frozenset(members)


def per_thread_cs(trace: Trace, entry_id: int) -> frozenset[int]:
    """Events of the acquiring thread strictly inside the section.

    For an open section the exit event itself is included as well.  The
    entry, and a closing release, are never members.
    """
    require_well_formed(trace)
    return _per_thread_cs(trace, entry_id)


def per_thread_lockset(trace: Trace, event_id: int) -> frozenset[str]:
    """Locks whose per-thread section (in this event's thread) contains it."""
    require_well_formed(trace)
    ev = trace.event(event_id)
    held = set()
    for other in trace:
        if other.thread == ev.thread and isinstance(other.op, Lock):
            if event_id in _per_thread_cs(trace, other.id):
                held.add(other.op.lock)
    return frozenset(held)


# ---------------------------------------------------------------------------
# Trace-based construction
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _mp_table(trace: Trace) -> MustPrecedeTable:
    return MustPrecedeTable(trace)


def _critical_section(trace: Trace, entry_id: int) -> frozenset[int]:
    exit_id = _exit_point(trace, entry_id)
    members = set(_forced_between_members(trace, entry_id, exit_id, _mp_table(trace)))
    if _is_open(trace, entry_id, exit_id):
        members.add(exit_id)
    return frozenset(members)


def critical_section(trace: Trace, entry_id: int) -> frozenset[int]:
    """Events that every schedule reaching the exit keeps inside the section.

    An event is a member when each correctly reordered prefix containing the
    exit point runs it strictly between entry and exit; an open section
    additionally contains its own exit event.  Members may belong to any
    thread, not just the acquiring one: fork/join ordering can pin another
    thread's events inside.
    """
    require_well_formed(trace)
    return _critical_section(trace, entry_id)


@lru_cache(maxsize=8)
def _sections_by_lock(trace: Trace) -> tuple[tuple[str, frozenset[int]], ...]:
    return tuple(
        (ev.op.lock, _critical_section(trace, ev.id))
        for ev in trace
        if isinstance(ev.op, Lock)
    )


def lockset(trace: Trace, event_id: int) -> frozenset[str]:
    """Locks protecting this event under the trace-based construction.

    A lock is held for the event when the event sits in the critical section
    of any of that lock's acquisitions, whichever thread acquired it.
    """
    require_well_formed(trace)
    trace.event(event_id)
    return frozenset(
        lock for lock, members in _sections_by_lock(trace) if event_id in members
    )


# ---------------------------------------------------------------------------
# Ground-truth protection oracle (enumeration-based)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4)
def _inside_masks(trace: Trace, cap: int) -> tuple[dict[int, int], dict[int, int]]:
    """For each lock event: the events inside the section in *every* schedule.

    Returns (bit, inside) where bit maps event ids to bitmask positions and
    inside maps each entry id to the AND, over all enumerated prefixes that
    contain the entry's exit point, of the events strictly between entry and
    exit there.
    """
    bit = {ev.id: 1 << k for k, ev in enumerate(trace)}
    boundaries = [
        (ev.id, _exit_point(trace, ev.id))
        for ev in trace
        if isinstance(ev.op, Lock)
    ]
    everything = (1 << len(trace)) - 1
    inside = {entry: everything for entry, _ in boundaries}
    for candidate in enumerate_crps(trace, cap):
        pos: dict[int, int] = {}
        seen_before: list[int] = []
        mask = 0
        for k, event_id in enumerate(candidate.ids):
            pos[event_id] = k
            seen_before.append(mask)
            mask |= bit[event_id]
        seen_before.append(mask)
        for entry, exit_id in boundaries:
            k = pos.get(exit_id)
            if k is None:
                continue
            i = pos[entry]
            inside[entry] &= seen_before[k] & ~seen_before[i + 1]
    return bit, inside


def protected_by_oracle(
    trace: Trace, event_id: int, lock: str, cap: int = DEFAULT_CAP
) -> bool:
    """Decide lock protection by exhausting all reordered prefixes.

    The event is protected by `lock` when some acquisition of it keeps the
    event strictly between entry and exit in every enumerated prefix that
    contains the exit, or when the event *is* the exit of an open section.
    Desk-scale only; raises CapExceeded beyond `cap` prefixes.
    """
    require_well_formed(trace)
    trace.event(event_id)
    entries = [
        ev for ev in trace if isinstance(ev.op, Lock) and ev.op.lock == lock
    ]
    for entry in entries:
        exit_id = _exit_point(trace, entry.id)
        if event_id == exit_id and _is_open(trace, entry.id, exit_id):
            return True
    bit, inside = _inside_masks(trace, cap)
    return any(bit[event_id] & inside[entry.id] for entry in entries)


# ---------------------------------------------------------------------------
# Divergence report
# ---------------------------------------------------------------------------


def diff_report(trace: Trace) -> LockSetReport:
    """Per-event comparison of the two constructions.

    `gained` lists the locks the trace-based set adds over the per-thread
    one; a nonempty value marks an event protected across thread boundaries.
    """
    require_well_formed(trace)
    # Membership in a per-thread section already implies the member belongs
    # to the acquiring thread, so one table serves every event.
    narrow = [
        (ev.op.lock, _per_thread_cs(trace, ev.id))
        for ev in trace
        if isinstance(ev.op, Lock)
    ]
    wide = _sections_by_lock(trace)
    rows = []
    for ev in trace:
        per_thread = frozenset(lock for lock, members in narrow if ev.id in members)
        trace_based = frozenset(lock for lock, members in wide if ev.id in members)
        rows.append(
            LockSetRow(
                event_id=ev.id,
                thread=ev.thread,
                op=ev.op,
                per_thread=per_thread,
                trace_based=trace_based,
                gained=trace_based - per_thread,
            )
        )
    return LockSetReport(rows=tuple(rows))
