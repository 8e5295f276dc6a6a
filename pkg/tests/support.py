"""Shared helpers and definitional oracles for the test suite.

The oracles here stick to first principles (filter raw id sequences, scan
candidate lists literally) so they stay independent of the library's
scheduling search.  They only lean on `is_crp`, which is itself a direct
transcription of the definition, and on the validator.
"""

from __future__ import annotations

from itertools import combinations, permutations
from typing import Iterable

from locktrace import (
    CrpCandidate,
    GenParams,
    Lock,
    Trace,
    Unlock,
    generate,
    is_crp,
    project_thread,
)

T1_TEXT = """\
1, fork(2)
2, lock(m1)
2, lock(m2)
2, unlock(m2)
2, unlock(m1)
1, lock(m1)
1, fork(3)
3, lock(m2)
3, unlock(m2)
1, join(3)
1, unlock(m1)
"""


def subtrace(trace: Trace, ids: Iterable[int]) -> Trace:
    """Reorder/slice a trace by event ids, keeping the original ids."""
    return Trace(trace.event(i) for i in ids)


def sweep(count: int, *, start: int = 0, max_events: int = 12) -> list[Trace]:
    """Deterministic batch of generated traces with varied shapes."""
    traces = []
    for seed in range(start, start + count):
        params = GenParams(
            seed=seed,
            max_threads=1 + seed % 3,
            max_locks=1 + seed % 3,
            max_events=4 + seed % (max_events - 3),
        )
        traces.append(generate(params))
    return traces


def adversarial_traces() -> list[Trace]:
    """Handcrafted shapes that stress the cross-thread forcing logic."""
    from locktrace import parse_trace

    texts = [
        T1_TEXT,
        # a join pins the child's only event inside the guarding section even
        # though short schedules can run it before the acquisition
        """\
        1, fork(2)
        1, lock(m1)
        1, lock(m2)
        1, unlock(m2)
        2, lock(m2)
        1, join(2)
        1, unlock(m1)
        """,
        # nested sections with an open inner one
        """\
        1, lock(a)
        1, lock(b)
        1, fork(2)
        2, lock(c)
        1, join(2)
        1, unlock(b)
        """,
        # two children joined by the same parent, one inside each section
        """\
        1, fork(2)
        1, fork(3)
        2, lock(a)
        1, lock(b)
        3, lock(c)
        3, unlock(c)
        1, join(3)
        1, unlock(b)
        2, unlock(a)
        """,
        # the same thread joined twice
        """\
        1, fork(2)
        2, lock(m)
        2, unlock(m)
        1, fork(3)
        1, join(2)
        3, join(2)
        3, lock(m)
        1, join(3)
        """,
        # child forks a grandchild while the parent holds a lock
        """\
        1, lock(m)
        1, fork(2)
        2, fork(3)
        3, lock(n)
        3, unlock(n)
        2, join(3)
        1, join(2)
        1, unlock(m)
        """,
        # opposite nesting orders: some reorderings of this trace deadlock
        # (each thread holding one lock, wanting the other), so reaching an
        # exit point is a real constraint
        """\
        1, fork(2)
        1, lock(a)
        1, lock(b)
        1, unlock(b)
        1, unlock(a)
        2, lock(b)
        2, lock(a)
        2, unlock(a)
        2, unlock(b)
        """,
        # deadlock-capable nesting with a join inside the outer section
        """\
        1, fork(2)
        2, lock(b)
        2, lock(a)
        2, unlock(a)
        2, unlock(b)
        1, lock(a)
        1, lock(b)
        1, unlock(b)
        1, join(2)
        1, unlock(a)
        """,
    ]
    return [parse_trace(text) for text in texts]


# ---------------------------------------------------------------------------
# Brute-force enumeration of correctly reordered prefixes
# ---------------------------------------------------------------------------


def crps_unpruned(trace: Trace) -> set[tuple[int, ...]]:
    """Literally try every permutation of every subset.  Tiny traces only."""
    ids = [e.id for e in trace]
    found = set()
    for k in range(len(ids) + 1):
        for subset in combinations(ids, k):
            for perm in permutations(subset):
                if is_crp(perm, trace):
                    found.add(perm)
    return found


def crps_pruned(trace: Trace) -> set[tuple[int, ...]]:
    """Grow members one event at a time, testing each with is_crp.

    Sound because membership is closed under taking prefixes (a fact the
    suite checks separately, and which crps_unpruned confirms on tiny
    traces by agreeing with this function).
    """
    ids = [e.id for e in trace]
    found: set[tuple[int, ...]] = {()}
    frontier: list[tuple[int, ...]] = [()]
    while frontier:
        base = frontier.pop()
        present = set(base)
        for eid in ids:
            if eid in present:
                continue
            extended = base + (eid,)
            if extended not in found and is_crp(extended, trace):
                found.add(extended)
                frontier.append(extended)
    return found


# ---------------------------------------------------------------------------
# Definitional must-precede over an explicit candidate list
# ---------------------------------------------------------------------------


def definitional_must_precede(
    trace: Trace, candidates: Iterable[CrpCandidate | tuple[int, ...]]
) -> dict[tuple[int, int], bool]:
    """For every pair (e, f): does each candidate containing f run e first?

    One pass over the candidate list, folding per-event "seen before f"
    bitmasks.
    """
    ids = [e.id for e in trace]
    bit = {eid: 1 << k for k, eid in enumerate(ids)}
    everything = (1 << len(ids)) - 1
    before_ok = {eid: everything for eid in ids}
    for cand in candidates:
        seq = cand.ids if isinstance(cand, CrpCandidate) else cand
        mask = 0
        for eid in seq:
            before_ok[eid] &= mask
            mask |= bit[eid]
    return {
        (e, f): bool(bit[e] & before_ok[f])
        for e in ids
        for f in ids
    }


# ---------------------------------------------------------------------------
# Literal lock-protection check over an explicit candidate list
# ---------------------------------------------------------------------------


def _literal_exit(trace: Trace, entry_id: int) -> int:
    entry = trace.event(entry_id)
    thread_events = list(project_thread(trace, entry.thread))
    at = next(i for i, e in enumerate(thread_events) if e.id == entry_id)
    for ev in thread_events[at + 1 :]:
        if ev.op == Unlock(entry.op.lock):
            return ev.id
    return thread_events[-1].id


def literal_protected(
    trace: Trace,
    candidates: list[tuple[int, ...]],
    event_id: int,
    lock: str,
) -> bool:
    """Quantify over the candidate list exactly as the definition reads."""
    for entry in trace:
        if not isinstance(entry.op, Lock) or entry.op.lock != lock:
            continue
        exit_id = _literal_exit(trace, entry.id)
        if event_id == exit_id and trace.event(exit_id).op != Unlock(lock):
            return True
        holds = True
        for seq in candidates:
            if exit_id not in seq:
                continue
            if event_id not in seq:
                holds = False
                break
            i, j, k = seq.index(entry.id), seq.index(event_id), seq.index(exit_id)
            if not (i < j < k):
                holds = False
                break
        if holds:
            return True
    return False
