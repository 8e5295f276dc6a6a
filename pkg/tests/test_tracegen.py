from __future__ import annotations

from locktrace import (
    Fork,
    GenParams,
    Join,
    Lock,
    Trace,
    Unlock,
    generate,
    project_thread,
    threads_of,
    validate,
)


def _has_open_section(trace) -> bool:
    held: dict[str, bool] = {}
    for ev in trace:
        if isinstance(ev.op, Lock):
            held[ev.op.lock] = True
        elif isinstance(ev.op, Unlock):
            held[ev.op.lock] = False
    return any(held.values())


def _has_fork_join_sandwich(trace) -> bool:
    # a fork and the matching join both lying inside some other thread's
    # lock/unlock window
    for entry in trace:
        if not isinstance(entry.op, Lock):
            continue
        i = trace.index(entry.id)
        j = next(
            (
                trace.index(ev.id)
                for ev in trace.events[i + 1 :]
                if ev.thread == entry.thread and ev.op == Unlock(entry.op.lock)
            ),
            None,
        )
        if j is None:
            continue
        inside = trace.events[i + 1 : j]
        joined = {e.op.target for e in inside if isinstance(e.op, Join)}
        forked = {e.op.target for e in inside if isinstance(e.op, Fork)}
        if joined & forked:
            return True
    return False


class TestGenerate:
    def test_deterministic_in_params(self):
        params = GenParams(seed=42, max_threads=3, max_locks=2, max_events=12)
        assert generate(params) == generate(params)
        assert generate(params) != generate(GenParams(seed=43, max_threads=3, max_locks=2, max_events=12))

    def test_zero_events(self):
        assert generate(GenParams(seed=1, max_events=0)) == Trace()

    def test_single_thread_has_no_fork_or_join(self):
        trace = generate(GenParams(seed=7, max_threads=1, max_locks=2, max_events=12))
        assert threads_of(trace) <= {1}
        assert all(isinstance(e.op, (Lock, Unlock)) for e in trace)

    def test_seed_42_is_well_formed(self):
        trace = generate(GenParams(seed=42, max_threads=3, max_locks=2, max_events=12))
        assert validate(trace) == []

    def test_bounds_are_clamped(self):
        trace = generate(GenParams(seed=3, max_threads=0, max_locks=-1, max_events=5))
        assert threads_of(trace) <= {1}
        assert validate(trace) == []

    def test_thousand_seeds_all_well_formed(self):
        for seed in range(1000):
            params = GenParams(
                seed=seed,
                max_threads=1 + seed % 3,
                max_locks=1 + seed % 2,
                max_events=4 + seed % 9,
            )
            assert validate(generate(params)) == [], seed

    def test_sweep_coverage(self):
        saw_open = saw_sandwich = saw_three_threads = False
        for seed in range(1000):
            trace = generate(GenParams(seed=seed, max_threads=3, max_locks=2, max_events=12))
            saw_open = saw_open or _has_open_section(trace)
            saw_sandwich = saw_sandwich or _has_fork_join_sandwich(trace)
            saw_three_threads = saw_three_threads or len(threads_of(trace)) >= 3
            if saw_open and saw_sandwich and saw_three_threads:
                break
        assert saw_open
        assert saw_sandwich
        assert saw_three_threads

    def test_events_numbered_by_position(self):
        trace = generate(GenParams(seed=11, max_events=12))
        assert [e.id for e in trace] == list(range(1, len(trace) + 1))

    def test_respects_event_budget(self):
        for seed in (0, 5, 9):
            trace = generate(GenParams(seed=seed, max_events=7))
            assert len(trace) <= 7

    def test_projections_keep_program_order(self):
        trace = generate(GenParams(seed=19, max_threads=3, max_locks=2, max_events=12))
        for thread in threads_of(trace):
            ids = [e.id for e in project_thread(trace, thread)]
            assert ids == sorted(ids)
