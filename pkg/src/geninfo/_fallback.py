"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

_CHUNK = 1 << 18


def blahut(kernel, source, init, tol, gap_tol, max_iter, floor):
    kernel = np.ascontiguousarray(kernel, dtype=float)
    source = np.asarray(source, dtype=float)
    q = np.array(init, dtype=float)
    weights = np.where(source > 0, source, 0.0)
    converged = False
    gap = np.inf
    it = 0
    while it < max_iter:
        it += 1
        z = kernel @ q
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(weights > 0, weights / z, 0.0)
        c = v @ kernel
        new = np.maximum(q * c, floor)
        new /= new.sum()
        delta = np.abs(new - q).sum()
        gap = float(np.log2(c.max()))
        q = new
        if delta < tol and gap < gap_tol:
            converged = True
            break
    return q, kernel @ q, it, converged, gap


def _xlog2x(a):
    out = np.zeros_like(a)
    mask = a > 0
    out[mask] = a[mask] * np.log2(a[mask])
    return out


def grid_min_rate(grid, source, payoff, g_target):
    grid = np.asarray(grid, dtype=float)
    source = np.asarray(source, dtype=float)
    payoff = np.asarray(payoff, dtype=float)
    n = source.size
    K = grid.shape[0]
    gains = source[:, None] * (grid @ payoff.T).T          # (n, K)
    negh = source[:, None] * _xlog2x(grid).sum(axis=1)[None, :]
    max_gain = float(gains.max(axis=1).sum())

    best, best_gain = np.inf, -np.inf
    total = K**n
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total))
        # mixed-radix digits, row 0 most significant
        digits = np.empty((n, flat.size), dtype=np.intp)
        rem = flat
        for i in range(n - 1, -1, -1):
            digits[i] = rem % K
            rem = rem // K
        gain = np.zeros(flat.size)
        rate = np.zeros(flat.size)
        q = np.zeros((flat.size, grid.shape[1]))
        for i in range(n):
            gain += gains[i, digits[i]]
            rate += negh[i, digits[i]]
            q += source[i] * grid[digits[i]]
        rate -= _xlog2x(q).sum(axis=1)
        ok = gain >= g_target - 1e-12
        if np.any(ok):
            cand = np.where(ok, rate, np.inf)
            k = int(np.argmin(cand))
            if cand[k] < best:
                best, best_gain = float(cand[k]), float(gain[k])
    return best, best_gain, max_gain
