"""Rate-fidelity function R(G) by parametric alternating minimization.

For a slope parameter ``s >= 0`` the channel minimizing ``I(X;Y) - s*G`` has
the form

    P(y_j|x_i) = P(y_j) 2**(s*I_ij) * lam_i,   lam_i = 1 / sum_j P(y_j) 2**(s*I_ij)

where ``I_ij`` is the generalized information of message ``y_j`` about event
``x_i``. Iterating that form together with ``P(y_j) <- sum_i P(x_i)P(y_j|x_i)``
converges to the point of the curve with slope ``s``, whose coordinates are

    G = sum_ij P(x_i)P(y_j|x_i) I_ij,   R = s*G + sum_i P(x_i) log2 lam_i.

The classical rate-distortion curve is the special case ``I_ij = -d_ij``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _backend
from .core_prob import Channel, as_matrix, as_probs
from .errors import (
    GeninfoError,
    InfeasibleFidelityTargetError,
    InvalidSlopeError,
    NullLogicalProbabilityError,
)
from .semantic import DEFAULT_EPSILON, SemanticChannel

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
DEFAULT_GAP_TOL = 1e-9
OUTPUT_FLOOR = 1e-14
# Blahut sweeps before switching to the Newton polish
BLAHUT_BUDGET = 300

# enumeration budget for the grid oracle (channels visited)
MAX_GRID_CHANNELS = 5 * 10**8


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    """Generalized information values I_ij in bits (events x messages)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise GeninfoError("payoff matrix must be a non-empty 2-D array")
        if np.any(np.isnan(v)) or np.any(v == np.inf):
            raise GeninfoError("payoff entries must not be NaN or +inf")
        if np.any(np.isneginf(v)):
            raise GeninfoError("payoff entries must be finite; clamp truth degrees first")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class DistortionMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise GeninfoError("distortion matrix must be a non-empty 2-D array")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise GeninfoError("distortion entries must be finite and nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def squared_error(cls, x_values, y_values=None):
        x = np.asarray(x_values, dtype=float)
        y = x if y_values is None else np.asarray(y_values, dtype=float)
        return cls((x[:, None] - y[None, :]) ** 2)

    @classmethod
    def hamming(cls, n: int):
        return cls(1.0 - np.eye(n))


@dataclass(frozen=True, eq=False)
class RateFidelityPoint:
    s: float
    R: float
    G: float
    channel: Channel
    output: np.ndarray
    multipliers: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class RateDistortionPoint:
    s: float
    R: float
    D: float
    channel: Channel
    iterations: int
    converged: bool


def payoff_matrix(prior, semantics, epsilon: float = DEFAULT_EPSILON) -> PayoffMatrix:
    p = as_probs(prior)
    sem = semantics if isinstance(semantics, SemanticChannel) else SemanticChannel(semantics)
    raw = p @ sem.degrees
    for j in np.flatnonzero(raw <= 0):
        name = sem[j].name or f"#{j}"
        raise NullLogicalProbabilityError(f"null logical probability for message {name}")
    t = sem.clamped(epsilon)
    return PayoffMatrix(np.log2(t / (p @ t)))


def average_distortion(source, channel, d) -> float:
    p, w = as_probs(source), as_matrix(channel)
    dv = d.values if isinstance(d, DistortionMatrix) else np.asarray(d, dtype=float)
    if w.shape != dv.shape or w.shape[0] != p.size:
        raise GeninfoError("source, channel and distortion shapes do not align")
    return float(np.sum(p[:, None] * w * dv))


def _payoff_values(payoff) -> np.ndarray:
    return payoff.values if isinstance(payoff, PayoffMatrix) else PayoffMatrix(payoff).values


def _endpoint(p, payoff, s):
    # s = 0: every channel with one output message is optimal; take the best column
    col = p @ payoff
    j = int(np.argmax(col))
    n, m = payoff.shape
    w = np.zeros((n, m))
    w[:, j] = 1.0
    out = np.zeros(m)
    out[j] = 1.0
    return RateFidelityPoint(
        s=float(s), R=0.0, G=float(col[j]), channel=Channel(w), output=out,
        multipliers=np.ones(n), iterations=0, converged=True,
    )


def _barrier_polish(kernel, p, q, mu_start=1e-3, mu_end=1e-15, max_steps=600):
    """Log-barrier Newton refinement of the output distribution.

    Minimizes -sum_i p_i ln (kernel @ q)_i - mu * sum_j ln q_j over the simplex
    for a decreasing sequence of mu. Returns (q, newton_steps).
    """
    q = np.maximum(q, 1e-12)
    q = q / q.sum()
    ones = np.ones_like(q)
    live = p > 0
    k, pl = kernel[live], p[live]
    mu, steps = mu_start, 0
    while steps < max_steps:
        for _ in range(60):
            z = k @ q
            w = pl / z
            grad = -(w @ k) - mu / q
            hess = (k * (w / z)[:, None]).T @ k
            hess[np.diag_indices_from(hess)] += mu / q**2
            rhs = np.column_stack([grad, ones])
            try:
                sol = np.linalg.solve(hess, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(hess, rhs, rcond=None)[0]
            hg, h1 = sol[:, 0], sol[:, 1]
            step = -(hg - (hg.sum() / h1.sum()) * h1)
            decrement = -(grad @ step)
            steps += 1
            if not decrement > 1e-14:
                break
            t = 1.0
            neg = step < 0
            if np.any(neg):
                t = min(1.0, 0.99 * float(np.min(-q[neg] / step[neg])))
            f0 = -pl @ np.log(z) - mu * np.log(q).sum()
            while t > 1e-14:
                trial = q + t * step
                if np.all(trial > 0):
                    f1 = -pl @ np.log(k @ trial) - mu * np.log(trial).sum()
                    if f1 <= f0 - 1e-4 * t * decrement:
                        break
                t *= 0.5
            else:
                break
            q = trial / trial.sum()
        if mu <= mu_end:
            break
        mu = max(mu * 0.1, mu_end)
    return q, steps


def solve_point(source, payoff, s: float, *, init=None, tol: float = DEFAULT_TOL,
                max_iter: int = DEFAULT_MAX_ITER, gap_tol: float = DEFAULT_GAP_TOL,
                polish: bool = True) -> RateFidelityPoint:
    """Solve for the point of R(G) at slope ``s``.

    Blahut iterations run first; if they have not converged after
    ``BLAHUT_BUDGET`` sweeps, a barrier Newton polish takes over and the
    remaining iteration budget is spent on further sweeps only if needed.
    ``init`` warm-starts the output distribution. A run that exhausts
    ``max_iter`` is returned with ``converged=False``.
    """
    if not s >= 0 or not math.isfinite(s):
        raise InvalidSlopeError(f"invalid slope: s = {s!r} (must be finite and >= 0)")
    p = as_probs(source)
    payoff = _payoff_values(payoff)
    if payoff.shape[0] != p.size:
        raise GeninfoError("payoff rows do not match the source alphabet")
    if s == 0:
        return _endpoint(p, payoff, s)

    n, m = payoff.shape
    shift = payoff.max(axis=1)
    kernel = np.ascontiguousarray(np.exp2(s * (payoff - shift[:, None])))
    pc = np.ascontiguousarray(p)
    q0 = np.full(m, 1.0 / m) if init is None else np.maximum(np.asarray(init, dtype=float), OUTPUT_FLOOR)
    q0 = q0 / q0.sum()

    budget = min(max_iter, BLAHUT_BUDGET) if polish else max_iter
    q, z, iterations, converged, _ = _backend.blahut(
        kernel, pc, q0, float(tol), float(gap_tol), int(budget), OUTPUT_FLOOR
    )
    # Newton steps count against the same iteration cap
    if not converged and polish and max_iter - iterations > 1:
        q, steps = _barrier_polish(kernel, p, q, max_steps=max_iter - iterations - 1)
        iterations += steps
        # the duality gap certifies the polished point; on ill-conditioned
        # kernels a further sweep moves q by more than tol without improving it
        z = kernel @ q
        live = p > 0
        c = (p[live] / z[live]) @ kernel[live]
        converged = bool(np.log2(c.max()) < gap_tol)
        if not converged and iterations < max_iter:
            q, z, it3, converged, _ = _backend.blahut(
                kernel, pc, q, float(tol), float(gap_tol), int(max_iter - iterations), OUTPUT_FLOOR
            )
            iterations += it3

    log2_lam = -np.log2(z) - s * shift
    w = q[None, :] * kernel / z[:, None]
    dead = q <= 10 * OUTPUT_FLOOR
    if np.any(dead) and not np.all(dead):
        w[:, dead] = 0.0
        w /= w.sum(axis=1, keepdims=True)
    gain = float(np.sum(p[:, None] * w * payoff))
    rate = s * gain + float(p @ log2_lam)
    return RateFidelityPoint(
        s=float(s), R=max(rate, 0.0), G=gain, channel=Channel(w), output=p @ w,
        multipliers=np.exp2(log2_lam), iterations=int(iterations), converged=bool(converged),
    )


def _check_grid(s_grid) -> np.ndarray:
    s = np.asarray(s_grid, dtype=float).reshape(-1)
    if s.size == 0:
        raise GeninfoError("s grid is empty")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise InvalidSlopeError("invalid slope: s grid must be finite and nonnegative")
    if np.any(np.diff(s) <= 0):
        raise GeninfoError("s grid must be strictly increasing")
    return s


def rate_fidelity_curve(source, payoff, s_grid, *, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER, init=None,
                        polish: bool = True) -> list[RateFidelityPoint]:
    """Sweep ``s_grid``, warm-starting each point from the previous output."""
    points = []
    prev = init
    for s in _check_grid(s_grid):
        pt = solve_point(source, payoff, s, init=prev, tol=tol, max_iter=max_iter, polish=polish)
        points.append(pt)
        # the s = 0 output is a point mass; a uniform start recovers faster
        prev = None if s == 0 else pt.output
    return points


def rate_distortion_curve(source, d, s_grid, *, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER) -> list[RateDistortionPoint]:
    dv = d.values if isinstance(d, DistortionMatrix) else DistortionMatrix(d).values
    curve = rate_fidelity_curve(source, -dv, s_grid, tol=tol, max_iter=max_iter)
    return [
        RateDistortionPoint(pt.s, pt.R, -pt.G, pt.channel, pt.iterations, pt.converged)
        for pt in curve
    ]


def simplex_grid(m: int, resolution: int) -> np.ndarray:
    """All probability vectors of length m with entries in multiples of 1/resolution."""
    rows = []
    for bars in combinations(range(resolution + m - 1), m - 1):
        edges = (-1,) + bars + (resolution + m - 1,)
        rows.append([edges[k + 1] - edges[k] - 1 for k in range(m)])
    return np.array(rows, dtype=float) / resolution


def brute_force_R_of_G(source, payoff, g_target: float, grid_resolution: int = 25) -> float:
    """Exhaustive upper bound on R(g_target) over a simplex grid of channels.

    Every channel whose rows lie on the grid is visited; the smallest Shannon
    rate among those achieving ``G >= g_target`` is returned.
    """
    p = as_probs(source)
    payoff = _payoff_values(payoff)
    n, m = payoff.shape
    if n > 4 or m > 3:
        raise GeninfoError("grid oracle supports at most 4 events and 3 messages")
    if grid_resolution < 1:
        raise GeninfoError("grid resolution must be >= 1")
    grid = simplex_grid(m, int(grid_resolution))
    if grid.shape[0] ** n > MAX_GRID_CHANNELS:
        raise GeninfoError(
            f"grid oracle would visit {grid.shape[0] ** n} channels; lower the resolution"
        )
    max_gain = float(np.sum(p * payoff.max(axis=1)))
    if g_target > max_gain + 1e-12:
        raise InfeasibleFidelityTargetError(
            f"infeasible fidelity target: {g_target:.6g} exceeds the maximum {max_gain:.6g}"
        )
    best, _, _ = _backend.grid_min_rate(
        np.ascontiguousarray(grid), np.ascontiguousarray(p),
        np.ascontiguousarray(payoff), float(g_target),
    )
    return max(float(best), 0.0)
