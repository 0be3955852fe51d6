import os
import subprocess
import sys

import numpy as np
import pytest

from geninfo import _backend, _fallback
from geninfo.rate_fidelity import simplex_grid

kernels = pytest.importorskip("geninfo._kernels")


def problem(seed, n=6, m=4, s=1.5):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(n))
    payoff = rng.normal(size=(n, m))
    kernel = np.ascontiguousarray(np.exp2(s * (payoff - payoff.max(axis=1, keepdims=True))))
    return kernel, p, payoff


@pytest.mark.parametrize("seed", range(5))
def test_blahut_parity(seed):
    kernel, p, _ = problem(seed)
    init = np.full(kernel.shape[1], 1.0 / kernel.shape[1])
    args = (kernel, p, init, 1e-10, 1e-9, 200, 1e-14)
    qa, za, ita, ca, ga = kernels.blahut(*args)
    qb, zb, itb, cb, gb = _fallback.blahut(*args)
    assert ita == itb and ca == cb
    np.testing.assert_allclose(qa, qb, atol=1e-12)
    np.testing.assert_allclose(za, zb, rtol=1e-12)
    assert ga == pytest.approx(gb, abs=1e-12)


def test_blahut_skips_zero_mass_rows():
    kernel, p, _ = problem(0)
    p = p.copy()
    p[2] = 0.0
    p /= p.sum()
    init = np.full(kernel.shape[1], 0.25)
    qa = kernels.blahut(kernel, p, init, 1e-10, 1e-9, 50, 1e-14)[0]
    qb = _fallback.blahut(kernel, p, init, 1e-10, 1e-9, 50, 1e-14)[0]
    np.testing.assert_allclose(qa, qb, atol=1e-12)


def test_blahut_accepts_read_only_buffers():
    kernel, p, _ = problem(1)
    init = np.full(kernel.shape[1], 0.25)
    for a in (kernel, p, init):
        a.setflags(write=False)
    kernels.blahut(kernel, p, init, 1e-10, 1e-9, 5, 1e-14)


@pytest.mark.parametrize("n, m, res", [(2, 2, 12), (3, 2, 10), (3, 3, 6), (4, 3, 4)])
def test_grid_parity(n, m, res):
    _, p, payoff = problem(n * 10 + m, n, m)
    grid = np.ascontiguousarray(simplex_grid(m, res))
    top = float(np.sum(p * payoff.max(axis=1)))
    for target in (-1.0, 0.0, 0.5 * top):
        a = kernels.grid_min_rate(grid, p, payoff, target)
        b = _fallback.grid_min_rate(grid, p, payoff, target)
        assert a[0] == pytest.approx(b[0], abs=1e-12)
        assert a[2] == pytest.approx(b[2], abs=1e-12)


def test_backend_selection():
    assert _backend.BACKEND in ("cython", "python")
    env = dict(os.environ, GENINFO_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from geninfo import _backend; print(_backend.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
