"""Seeded random generation of well-formed traces.

The generator drives the property-test and oracle suites: it walks the same
enabledness rules the scheduling search uses (free locks, forked-not-joined
threads, joinable targets), so every output validates cleanly by
construction.  A fraction of threads deliberately stop while holding a lock,
leaving open sections and unjoined threads on the table.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .trace import Event, Fork, Join, Lock, Operation, Trace, Unlock, MAIN_THREAD

# Fraction of threads that never release what they acquire.
_ABANDON_RATE = 0.2

_WEIGHTS = {"lock": 3, "unlock": 2, "fork": 6, "join": 2}


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    max_threads: int = 3
    max_locks: int = 2
    max_events: int = 12


def generate(params: GenParams) -> Trace:
    """Produce a well-formed trace, deterministic in the parameters.

    Bounds are clamped to sane values; generation stops early if no action
    is enabled (every lock stranded with a finished holder, nothing left to
    fork or join).
    """
    rng = random.Random(params.seed)
    n_threads = max(1, params.max_threads)
    n_locks = max(0, params.max_locks)
    n_events = max(0, params.max_events)

    locks = [f"m{i}" for i in range(1, n_locks + 1)]
    unforked = list(range(2, n_threads + 1))
    running = {MAIN_THREAD}
    joined: set[int] = set()
    holder: dict[str, int | None] = {m: None for m in locks}
    events_of: dict[int, int] = {MAIN_THREAD: 0}
    abandons = {MAIN_THREAD: rng.random() < _ABANDON_RATE}

    events: list[Event] = []
    while len(events) < n_events:
        choices: list[tuple[int, Operation]] = []
        weights: list[int] = []
        for thread in sorted(running - joined):
            for m in locks:
                if holder[m] is None:
                    choices.append((thread, Lock(m)))
                    weights.append(_WEIGHTS["lock"])
                elif holder[m] == thread and not abandons[thread]:
                    choices.append((thread, Unlock(m)))
                    weights.append(_WEIGHTS["unlock"])
            if unforked:
                choices.append((thread, Fork(unforked[0])))
                weights.append(_WEIGHTS["fork"])
            for other in sorted(running - joined):
                if other != thread and events_of[other] > 0:
                    choices.append((thread, Join(other)))
                    weights.append(_WEIGHTS["join"])
        if not choices:
            break
        thread, op = rng.choices(choices, weights=weights, k=1)[0]
        events.append(Event(len(events) + 1, thread, op))
        events_of[thread] += 1
        if isinstance(op, Lock):
            holder[op.lock] = thread
        elif isinstance(op, Unlock):
            holder[op.lock] = None
        elif isinstance(op, Fork):
            unforked.remove(op.target)
            running.add(op.target)
            events_of[op.target] = 0
            abandons[op.target] = rng.random() < _ABANDON_RATE
        elif isinstance(op, Join):
            joined.add(op.target)
    return Trace(events)
