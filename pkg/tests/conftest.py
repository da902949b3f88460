import numpy as np
import pytest

from mrwtl.multirate import LaurentFilter, RationalRate

TABLE_RATES = [RationalRate(2, 1, 3), RationalRate(1, 1, 2), RationalRate(3, 1, 4), RationalRate(2, 3, 5)]


def random_filter(rng, lo=-4, hi=4, max_len=6):
    length = int(rng.integers(1, max_len + 1))
    start = int(rng.integers(lo, hi + 1))
    return LaurentFilter(rng.standard_normal(length), start)


def random_rate(rng, max_m=7):
    while True:
        m = int(rng.integers(2, max_m + 1))
        q1 = int(rng.integers(1, m))
        if np.gcd(q1, m) == 1:
            return RationalRate.from_q1(q1, m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=TABLE_RATES, ids=str)
def table_rate(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda l: int(l.split()[2])):
            terminalreporter.write_line(line)
