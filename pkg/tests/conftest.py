"""Shared strategies and the acceptance-criteria summary."""
from collections import defaultdict

import hypothesis.extra.numpy as npst
import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")


@st.composite
def distributions(draw, size=None, min_size=2, max_size=8, floor=1e-3):
    n = size if size is not None else draw(st.integers(min_size, max_size))
    w = draw(npst.arrays(np.float64, (n,), elements=st.floats(floor, 1.0)))
    return w / w.sum()


@st.composite
def stochastic_matrices(draw, rows, cols, floor=1e-3):
    w = draw(npst.arrays(np.float64, (rows, cols), elements=st.floats(floor, 1.0)))
    return w / w.sum(axis=1, keepdims=True)


@st.composite
def truth_vectors(draw, size, floor=0.0):
    v = draw(npst.arrays(np.float64, (size,), elements=st.floats(floor, 1.0)))
    if not np.any(v > 0):
        v[draw(st.integers(0, size - 1))] = 1.0
    return v


def random_system(rng, n=None, m=None, matched=False):
    """Random (source, forecast, channel, degrees) with strictly positive entries."""
    n = n or int(rng.integers(2, 7))
    m = m or int(rng.integers(1, 5))
    p = rng.dirichlet(np.ones(n))
    q = p if matched else rng.dirichlet(np.ones(n))
    w = rng.dirichlet(np.ones(m), size=n)
    t = rng.uniform(0.01, 1.0, size=(n, m))
    return p, q, w, t


# acceptance summary: one line per criterion
_outcomes = defaultdict(list)


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[crit].append(report.outcome)


@pytest.fixture(autouse=True)
def _record_criterion(request):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        request.node.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_outcomes):
        results = _outcomes[crit]
        verdict = "PASS" if all(r == "passed" for r in results) else "FAIL"
        terminalreporter.write_line(f"criterion {crit:>2}: {verdict} ({len(results)} checks)")
