from __future__ import annotations

import pytest

from locktrace import Trace, parse_trace

from support import T1_TEXT, subtrace


@pytest.fixture(scope="session")
def t1() -> Trace:
    """Fork-join trace whose lock section spans threads: the golden fixture."""
    return parse_trace(T1_TEXT)


@pytest.fixture(scope="session")
def t2(t1) -> Trace:
    return subtrace(t1, [1, 6, 7, 8, 9, 10, 11, 2, 3, 4, 5])


@pytest.fixture(scope="session")
def t3(t1) -> Trace:
    return subtrace(t1, [1, 6, 7, 8, 9, 10, 11, 2])


@pytest.fixture(scope="session")
def t4(t1) -> Trace:
    return subtrace(t1, [1, 7, 8, 10, 6, 11])


@pytest.fixture(scope="session")
def t5(t1) -> Trace:
    return subtrace(t1, [1, 2, 6])


@pytest.fixture(scope="session")
def t6(t1) -> Trace:
    return subtrace(t1, [2, 3, 4, 5])
