"""Alternative schedules of a trace, and the ordering facts they all share.

A *correctly reordered prefix* of a well-formed trace T is any well-formed
trace built from a subset of T's events whose per-thread subsequences are
prefixes of T's.  These are the schedules that the recorded run could have
taken instead; an event pair (e, f) is ordered for good (`must_precede`)
exactly when every such schedule that runs f runs e first.

Both questions are answered on the same search space: a state counts, for
every thread, how many of its events have been scheduled, and a thread's next
event may fire only when the trace rules allow it:

* a non-main thread needs its fork scheduled first;
* nothing runs in a thread that has already been joined;
* a lock can be taken only while no thread holds it;
* a join needs a target that is distinct and has run at least one event.

Releases and forks need no extra guard: per-thread order is built into the
state, and the subject trace being well formed rules out double forks and
stray releases.  Every path through this space is a correctly reordered
prefix and vice versa; the test suite checks that equivalence against a
brute-force filter over raw permutations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .trace import Event, Fork, Join, Lock, Trace, Unlock, MAIN_THREAD, project_thread
from .wellformed import require_well_formed, validate

DEFAULT_CAP = 1_000_000


class CapExceeded(RuntimeError):
    """The set of reordered prefixes outgrew the requested budget."""

    def __init__(self, cap: int):
        super().__init__(f"more than {cap} correctly reordered prefixes")
        self.cap = cap


@dataclass(frozen=True)
class CrpCandidate:
    """An ordered selection of event ids drawn from a subject trace."""

    ids: tuple[int, ...]


def _candidate_ids(candidate: CrpCandidate | Sequence[int]) -> tuple[int, ...]:
    if isinstance(candidate, CrpCandidate):
        return candidate.ids
    return tuple(candidate)


class _SchedState:
    """Per-thread progress counters plus the lock/fork/join facts they imply.

    The progress vector alone identifies a state; holder/forked/joined are
    carried incrementally so enabledness stays O(1) per probe.
    """

    __slots__ = ("threads", "sequences", "progress", "holder", "forked", "joined")

    def __init__(self, trace: Trace):
        per_thread: dict[int, list[Event]] = {}
        for ev in trace:
            per_thread.setdefault(ev.thread, []).append(ev)
        self.threads = sorted(per_thread)
        self.sequences = per_thread
        self.progress = {t: 0 for t in self.threads}
        self.holder: dict[str, int | None] = {}
        self.forked: dict[int, int] = {}
        self.joined: dict[int, int] = {}

    def key(self) -> tuple[int, ...]:
        return tuple(self.progress[t] for t in self.threads)

    def next_event(self, thread: int) -> Event | None:
        seq = self.sequences[thread]
        i = self.progress[thread]
        return seq[i] if i < len(seq) else None

    def enabled(self, ev: Event) -> bool:
        if ev.thread != MAIN_THREAD and not self.forked.get(ev.thread):
            return False
        if self.joined.get(ev.thread):
            return False
        op = ev.op
        if isinstance(op, Lock):
            return self.holder.get(op.lock) is None
        if isinstance(op, Join):
            return op.target != ev.thread and self.progress.get(op.target, 0) > 0
        return True

    def schedule(self, ev: Event) -> None:
        self.progress[ev.thread] += 1
        op = ev.op
        if isinstance(op, Lock):
            self.holder[op.lock] = ev.thread
        elif isinstance(op, Unlock):
            self.holder[op.lock] = None
        elif isinstance(op, Fork):
            self.forked[op.target] = self.forked.get(op.target, 0) + 1
        elif isinstance(op, Join):
            self.joined[op.target] = self.joined.get(op.target, 0) + 1

    def unschedule(self, ev: Event) -> None:
        self.progress[ev.thread] -= 1
        op = ev.op
        if isinstance(op, Lock):
            self.holder[op.lock] = None
        elif isinstance(op, Unlock):
            self.holder[op.lock] = ev.thread
        elif isinstance(op, Fork):
            self.forked[op.target] -= 1
        elif isinstance(op, Join):
            self.joined[op.target] -= 1


# ---------------------------------------------------------------------------
# Membership and enumeration
# ---------------------------------------------------------------------------


def is_crp(candidate: CrpCandidate | Sequence[int], trace: Trace) -> bool:
    """Decide membership directly from the definition.

    The candidate (event ids resolved against `trace`) must form a well-formed
    trace whose per-thread subsequences are prefixes of the subject's.  This
    is deliberately independent of the scheduling search so the two can be
    checked against each other.
    """
    require_well_formed(trace)
    ids = _candidate_ids(candidate)
    reordered = Trace(trace.event(i) for i in ids)
    if validate(reordered):
        return False
    for thread in {e.thread for e in reordered}:
        mine = [e.id for e in reordered if e.thread == thread]
        subject = [e.id for e in project_thread(trace, thread)]
        if mine != subject[: len(mine)]:
            return False
    return True


def enumerate_crps(trace: Trace, cap: int = DEFAULT_CAP) -> Iterator[CrpCandidate]:
    """Stream every correctly reordered prefix of `trace` exactly once.

    Depth-first over the scheduling space, threads tried in ascending id, so
    the stream order is deterministic.  The empty prefix comes first and the
    full trace appears along the way.  Raises CapExceeded when more than
    `cap` prefixes would be produced.
    """
    require_well_formed(trace)
    state = _SchedState(trace)
    path: list[int] = []
    produced = 0

    def emit() -> CrpCandidate:
        nonlocal produced
        if produced >= cap:
            raise CapExceeded(cap)
        produced += 1
        return CrpCandidate(tuple(path))

    yield emit()
    stack: list[tuple[Iterator[int], Event | None]] = [(iter(state.threads), None)]
    while stack:
        thread_iter, entered_by = stack[-1]
        move = None
        for t in thread_iter:
            ev = state.next_event(t)
            if ev is not None and state.enabled(ev):
                move = ev
                break
        if move is None:
            stack.pop()
            if entered_by is not None:
                state.unschedule(entered_by)
                path.pop()
            continue
        state.schedule(move)
        path.append(move.id)
        yield emit()
        stack.append((iter(state.threads), move))


def count_crps(trace: Trace, cap: int = DEFAULT_CAP) -> int:
    """Number of correctly reordered prefixes; CapExceeded past the budget."""
    n = 0
    for _ in enumerate_crps(trace, cap):
        n += 1
    return n


# ---------------------------------------------------------------------------
# The must-precede relation
# ---------------------------------------------------------------------------


def _search_without(trace: Trace, excluded: int, target: int | None):
    """Explore every schedule that never fires `excluded`.

    With a `target`: return the first found prefix (a tuple of ids, ending
    with the target) in which the target fires, or None if there is none.
    Without: return the set of all event ids that become fireable somewhere
    in this restricted space.

    States are memoized on the progress vector, so each is expanded once.
    """
    state = _SchedState(trace)
    visited = {state.key()}
    fireable: set[int] = set()
    path: list[int] = []
    stack: list[tuple[Iterator[int], Event | None]] = [(iter(state.threads), None)]
    while stack:
        thread_iter, entered_by = stack[-1]
        descended = False
        for t in thread_iter:
            ev = state.next_event(t)
            if ev is None or not state.enabled(ev):
                continue
            if target is not None:
                if ev.id == target:
                    return tuple(path) + (ev.id,)
            else:
                fireable.add(ev.id)
            if ev.id == excluded:
                continue
            state.schedule(ev)
            key = state.key()
            if key in visited:
                state.unschedule(ev)
                continue
            visited.add(key)
            path.append(ev.id)
            stack.append((iter(state.threads), ev))
            descended = True
            break
        if not descended:
            stack.pop()
            if entered_by is not None:
                state.unschedule(entered_by)
                path.pop()
    return None if target is not None else fireable


def refute_must_precede(trace: Trace, earlier: int, later: int) -> tuple[int, ...] | None:
    """Witness that `earlier` need not precede `later`, or None if it must.

    The witness is a correctly reordered prefix (as event ids) that contains
    `later` but never ran `earlier` before it.
    """
    require_well_formed(trace)
    trace.event(earlier)
    k = trace.index(later)
    if earlier == later:
        # No schedule places an event strictly before itself; the recorded
        # prefix up to the event is already a counterexample.
        return tuple(e.id for e in trace.events[: k + 1])
    return _search_without(trace, earlier, later)


def must_precede(trace: Trace, earlier: int, later: int) -> bool:
    """True iff every reordered prefix containing `later` runs `earlier` first."""
    return refute_must_precede(trace, earlier, later) is None


class MustPrecedeTable:
    """All-pairs must-precede answers for one trace, computed once.

    One restricted search per event e yields every event still fireable while
    e is withheld; `must_precede(e, f)` holds exactly when f is not among
    them.
    """

    def __init__(self, trace: Trace):
        require_well_formed(trace)
        self._trace = trace
        self._fireable_without: dict[int, frozenset[int]] = {
            ev.id: frozenset(_search_without(trace, ev.id, None)) for ev in trace
        }

    def holds(self, earlier: int, later: int) -> bool:
        self._trace.event(earlier)
        self._trace.event(later)
        return later not in self._fireable_without[earlier]


# ---------------------------------------------------------------------------
# Exit-conditioned ordering
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _reachable_state_graph(
    trace: Trace,
) -> dict[tuple[int, ...], tuple[tuple[int, tuple[int, ...]], ...]]:
    """Every reachable progress vector, with its fireable moves.

    Maps each state to the (event id, successor state) pairs its enabled
    next events induce.  Built once per trace by the callers below.
    """
    state = _SchedState(trace)

    def edges() -> tuple[tuple[int, tuple[int, ...]], ...]:
        base = state.key()
        out = []
        for i, t in enumerate(state.threads):
            ev = state.next_event(t)
            if ev is not None and state.enabled(ev):
                succ = base[:i] + (base[i] + 1,) + base[i + 1 :]
                out.append((ev.id, succ))
        return tuple(out)

    graph = {state.key(): edges()}
    stack: list[tuple[Iterator[tuple[int, tuple[int, ...]]], Event | None]] = [
        (iter(graph[state.key()]), None)
    ]
    while stack:
        edge_iter, entered_by = stack[-1]
        descended = False
        for event_id, succ in edge_iter:
            if succ in graph:
                continue
            ev = trace.event(event_id)
            state.schedule(ev)
            graph[succ] = edges()
            stack.append((iter(graph[succ]), ev))
            descended = True
            break
        if not descended:
            stack.pop()
            if entered_by is not None:
                state.unschedule(entered_by)
    return graph


def _states_that_still_reach(graph: dict, event_id: int) -> set[tuple[int, ...]]:
    """States from which the given event can still fire eventually."""
    reverse: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    seeds = set()
    for source, moves in graph.items():
        for fired, succ in moves:
            reverse.setdefault(succ, []).append(source)
            if fired == event_id:
                seeds.add(source)
    can = set(seeds)
    work = list(seeds)
    while work:
        for pred in reverse.get(work.pop(), ()):
            if pred not in can:
                can.add(pred)
                work.append(pred)
    return can


def _forced_between_members(
    trace: Trace, entry_id: int, exit_id: int, table: MustPrecedeTable
) -> frozenset[int]:
    """Events that every schedule reaching `exit_id` runs strictly between
    `entry_id` and `exit_id`.

    An event is ruled out either because some schedule fires the exit without
    having run it first, or because some schedule fires it before the entry
    and can still go on to reach the exit.  Both refutations are decided on
    the shared state graph; the entry and exit themselves are never members.
    """
    graph = _reachable_state_graph(trace)
    exit_reachers = _states_that_still_reach(graph, exit_id)
    initial = tuple([0] * len(next(iter(graph))))
    # forward closure that withholds the entry, collecting every event that
    # can fire there while the exit stays reachable afterwards
    fired_before_entry: set[int] = set()
    seen = {initial}
    work = [initial]
    while work:
        source = work.pop()
        for fired, succ in graph[source]:
            if fired == entry_id:
                continue
            if succ in exit_reachers:
                fired_before_entry.add(fired)
            if succ not in seen:
                seen.add(succ)
                work.append(succ)
    return frozenset(
        ev.id
        for ev in trace
        if ev.id not in (entry_id, exit_id)
        and table.holds(ev.id, exit_id)
        and ev.id not in fired_before_entry
    )
