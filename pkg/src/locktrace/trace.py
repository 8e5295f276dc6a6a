"""Event and trace model for lock-based concurrent executions.

A trace is an ordered sequence of events, each recording one concurrency
operation (fork, join, lock, unlock) performed by one thread.  Events carry a
unique numeric id; the id doubles as the event's name when traces are sliced,
reordered, or reported on.  The main thread is always thread 1.

The module also owns the on-disk trace format: one event per line,
``<thread>, <op>`` (or ``<id>, <thread>, <op>`` with explicit ids), where
``<op>`` is one of ``fork(N)``, ``join(N)``, ``lock(NAME)``, ``unlock(NAME)``.
``#`` starts a comment; blank lines are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

MAIN_THREAD = 1

_NAME_RE = re.compile(r"[^\s,()#]+")
_OP_RE = re.compile(r"(fork|join|lock|unlock)\s*\(\s*([^\s,()#]*)\s*\)")


class ParseError(ValueError):
    """Raised on malformed trace text; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class UnknownEventError(LookupError):
    """Raised when an event id is not present in the trace at hand."""

    def __init__(self, event_id: int):
        super().__init__(f"no event with id {event_id} in trace")
        self.event_id = event_id


def _check_thread(value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"thread id must be a positive integer, got {value!r}")


def _check_lock_name(name: str) -> None:
    if not isinstance(name, str) or not _NAME_RE.fullmatch(name):
        raise ValueError(
            f"lock name must be a non-empty token without whitespace, commas, "
            f"parentheses or '#', got {name!r}"
        )


@dataclass(frozen=True)
class Fork:
    """Creation of a new thread."""

    target: int

    def __post_init__(self):
        _check_thread(self.target)

    def __str__(self) -> str:
        return f"fork({self.target})"


@dataclass(frozen=True)
class Join:
    """Wait for another thread to finish."""

    target: int

    def __post_init__(self):
        _check_thread(self.target)

    def __str__(self) -> str:
        return f"join({self.target})"


@dataclass(frozen=True)
class Lock:
    """Acquisition of a lock."""

    lock: str

    def __post_init__(self):
        _check_lock_name(self.lock)

    def __str__(self) -> str:
        return f"lock({self.lock})"


@dataclass(frozen=True)
class Unlock:
    """Release of a lock."""

    lock: str

    def __post_init__(self):
        _check_lock_name(self.lock)

    def __str__(self) -> str:
        return f"unlock({self.lock})"


Operation = Fork | Join | Lock | Unlock


@dataclass(frozen=True)
class Event:
    """One recorded operation: unique id, executing thread, operation."""

    id: int
    thread: int
    op: Operation

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 1:
            raise ValueError(f"event id must be a positive integer, got {self.id!r}")
        _check_thread(self.thread)
        if not isinstance(self.op, (Fork, Join, Lock, Unlock)):
            raise ValueError(f"not an operation: {self.op!r}")

    def __str__(self) -> str:
        return f"({self.id}, {self.thread}, {self.op})"


class Trace:
    """Immutable ordered sequence of events with pairwise-distinct ids.

    Ids need not be contiguous: slices and reorderings of a recorded trace
    keep the original ids so that results stay comparable across views.
    """

    __slots__ = ("_events", "_pos", "_hash")

    def __init__(self, events: Iterable[Event] = ()):
        evts = tuple(events)
        pos: dict[int, int] = {}
        for i, ev in enumerate(evts):
            if not isinstance(ev, Event):
                raise TypeError(f"not an Event: {ev!r}")
            if ev.id in pos:
                raise ValueError(f"duplicate event id {ev.id}")
            pos[ev.id] = i
        self._events = evts
        self._pos = pos
        self._hash: int | None = None

    @property
    def events(self) -> tuple[Event, ...]:
        return self._events

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self._events)

    def __getitem__(self, i: int) -> Event:
        return self._events[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return self._events == other._events

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._events)
        return self._hash

    def __repr__(self) -> str:
        return f"Trace([{', '.join(str(e) for e in self._events)}])"

    def has_event(self, event_id: int) -> bool:
        return event_id in self._pos

    def event(self, event_id: int) -> Event:
        """Look an event up by id; raises UnknownEventError when absent."""
        try:
            return self._events[self._pos[event_id]]
        except KeyError:
            raise UnknownEventError(event_id) from None

    def index(self, event_id: int) -> int:
        """0-based position of the event with the given id."""
        try:
            return self._pos[event_id]
        except KeyError:
            raise UnknownEventError(event_id) from None


# ---------------------------------------------------------------------------
# Order and projection primitives
# ---------------------------------------------------------------------------


def position(trace: Trace, event: Event) -> int:
    """1-based position of `event` in `trace`.

    The event must be present: same id and same contents.
    """
    idx = trace.index(event.id)
    if trace[idx] != event:
        raise ValueError(f"event {event} does not match the trace's event id {event.id}")
    return idx + 1


def trace_order(trace: Trace, first: Event, second: Event) -> bool:
    """True iff `first` occurs strictly before `second` in `trace`."""
    return position(trace, first) < position(trace, second)


def project_thread(trace: Trace, thread: int) -> Trace:
    """The subsequence of events executed by `thread`, order preserved."""
    return Trace(e for e in trace if e.thread == thread)


def threads_of(trace: Trace) -> set[int]:
    """Set of thread ids that execute at least one event."""
    return {e.thread for e in trace}


def is_prefix(trace: Trace, other: Trace) -> bool:
    """True iff `trace` is an initial segment of `other` (by event id)."""
    if len(trace) > len(other):
        return False
    return all(a.id == b.id for a, b in zip(trace, other))


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def _parse_int(token: str, line: int, what: str) -> int:
    if not token.isdigit():
        raise ParseError(line, f"malformed {what}: {token!r}")
    value = int(token)
    if value < 1:
        raise ParseError(line, f"{what} must be >= 1, got {token!r}")
    return value


def _parse_op(token: str, line: int) -> Operation:
    m = _OP_RE.fullmatch(token)
    if m is None:
        word = token.split("(", 1)[0].strip() or token
        raise ParseError(line, f"unknown operation {word!r}")
    keyword, arg = m.group(1), m.group(2)
    if keyword in ("fork", "join"):
        target = _parse_int(arg, line, "thread id")
        return Fork(target) if keyword == "fork" else Join(target)
    if not arg:
        raise ParseError(line, f"missing lock name in {token!r}")
    return Lock(arg) if keyword == "lock" else Unlock(arg)


def parse_trace(text: str) -> Trace:
    """Parse trace text into a Trace.

    Each non-blank, non-comment line yields one event.  Two fields per line
    (`thread, op`) assign ids 1-based in line order; three fields
    (`id, thread, op`) set the id explicitly.  Duplicate ids are rejected.
    """
    events: list[Event] = []
    used: set[int] = set()
    ordinal = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        ordinal += 1
        if len(fields) == 2:
            event_id = ordinal
            thread_tok, op_tok = fields
        elif len(fields) == 3:
            event_id = _parse_int(fields[0], lineno, "event id")
            thread_tok, op_tok = fields[1], fields[2]
        else:
            raise ParseError(lineno, f"expected 'thread, op' or 'id, thread, op', got {line!r}")
        if event_id in used:
            raise ParseError(lineno, f"duplicate event id {event_id}")
        used.add(event_id)
        thread = _parse_int(thread_tok, lineno, "thread id")
        events.append(Event(event_id, thread, _parse_op(op_tok, lineno)))
    return Trace(events)


def serialize(trace: Trace) -> str:
    """Render a trace in the text format (one `thread, op` line per event).

    Ids are implicit in the output: re-parsing assigns them by position.
    """
    return "".join(f"{e.thread}, {e.op}\n" for e in trace)
