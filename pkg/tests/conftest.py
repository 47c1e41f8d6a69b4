import itertools
import math

import numpy as np
import pytest


def brute_threshold_value(probs, k):
    """Win probability of "stop on the first 1 at index >= k" over all 2^n outcomes.

    Plain itertools product, no numpy: independent of the package's enumeration.
    """
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(probs)):
        weight = 1.0
        for b, p in zip(bits, probs):
            weight *= p if b else 1.0 - p
        ones = [i for i, b in enumerate(bits, start=1) if b]
        stops = [i for i in ones if i >= k]
        if stops and stops[0] == ones[-1]:
            total += weight
    return total


def brute_optimal(probs):
    values = [brute_threshold_value(probs, k) for k in range(1, len(probs) + 1)]
    return max(values), values


def random_instance(rng, n_max=12, p_one=0.05, allow_one=True):
    n = int(rng.integers(1, n_max + 1))
    p = 1.0 - rng.random(n)
    if allow_one:
        p[rng.random(n) < p_one] = 1.0
    else:
        p = np.minimum(p, np.nextafter(1.0, 0.0))
    return [float(x) for x in p]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rel_close(a, b, rtol):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
