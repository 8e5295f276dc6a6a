"""Trace analysis for lock-based concurrency.

Parses and validates execution traces of fork/join/lock/unlock events,
enumerates the alternative schedules a trace admits (its correctly reordered
prefixes), and computes critical sections and lock sets two ways: the classic
per-thread construction and the trace-based one, in which fork/join ordering
can pull events of other threads into a section.  The diff report shows
exactly where the two disagree.
"""

from .trace import (
    MAIN_THREAD,
    Event,
    Fork,
    Join,
    Lock,
    Operation,
    ParseError,
    Trace,
    Unlock,
    UnknownEventError,
    is_prefix,
    parse_trace,
    position,
    project_thread,
    serialize,
    threads_of,
    trace_order,
)
from .wellformed import (
    IllFormedTraceError,
    WfCondition,
    WfViolation,
    require_well_formed,
    validate,
)
from .reorder import (
    DEFAULT_CAP,
    CapExceeded,
    CrpCandidate,
    MustPrecedeTable,
    count_crps,
    enumerate_crps,
    is_crp,
    must_precede,
    refute_must_precede,
)
from .locksets import (
    EntryExit,
    LockSetReport,
    LockSetRow,
    critical_section,
    diff_report,
    entry_exit_pairs,
    exit_point,
    lockset,
    per_thread_cs,
    per_thread_lockset,
    protected_by_oracle,
)
from .tracegen import GenParams, generate

__version__ = "0.1.0"

__all__ = [
    "MAIN_THREAD",
    "DEFAULT_CAP",
    "Event",
    "Fork",
    "Join",
    "Lock",
    "Unlock",
    "Operation",
    "Trace",
    "ParseError",
    "UnknownEventError",
    "parse_trace",
    "serialize",
    "position",
    "trace_order",
    "project_thread",
    "threads_of",
    "is_prefix",
    "WfCondition",
    "WfViolation",
    "IllFormedTraceError",
    "validate",
    "require_well_formed",
    "CrpCandidate",
    "CapExceeded",
    "MustPrecedeTable",
    "is_crp",
    "enumerate_crps",
    "count_crps",
    "must_precede",
    "refute_must_precede",
    "EntryExit",
    "LockSetRow",
    "LockSetReport",
    "exit_point",
    "entry_exit_pairs",
    "per_thread_cs",
    "per_thread_lockset",
    "critical_section",
    "lockset",
    "protected_by_oracle",
    "diff_report",
    "GenParams",
    "generate",
]
