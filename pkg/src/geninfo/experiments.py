"""Worked scenarios: stock-index predictions and gray-level rate-fidelity studies.

Gray-level source: levels ``x_i = i`` for ``i = 0..b`` with ``b = 2**k - 1``,
probabilities from a normal density with mean ``b/2`` and standard deviation
``b/8`` evaluated at the integer points and normalized.

The discrimination parameter ``d`` is a width in gray levels of a fixed
reference depth (``reference_bits``, default 6, i.e. 64 levels). On a
``k``-bit alphabet the perception width is ``d * b / (2**reference_bits - 1)``,
so ``d`` keeps the same physical meaning as the bit depth changes. Pass
``reference_bits=None`` to read ``d`` in the current depth's own levels.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core_prob import Alphabet, Distribution, normalize
from .errors import GeninfoError, MatchingPointOutsideSweepError
from .rate_fidelity import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    PayoffMatrix,
    RateFidelityPoint,
    payoff_matrix,
    rate_fidelity_curve,
    solve_point,
)
from .semantic import DEFAULT_EPSILON, SemanticChannel, TruthFunction, gaussian_truth, semantic_info
from .tabular import csv_text

REFERENCE_BITS = 6
PLATEAU_TOL = 1e-3
MAX_BITS = 16


def default_s_grid() -> np.ndarray:
    """40 slopes: dense below the matching slope, sparser above it."""
    return np.concatenate([np.linspace(0.0, 1.0, 21), np.linspace(1.25, 6.0, 19)])


@dataclass(frozen=True)
class GrayLevelConfig:
    k: int
    d: float
    s_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_s_grid()))
    reference_bits: int | None = REFERENCE_BITS

    def __post_init__(self):
        if not 1 <= int(self.k) <= MAX_BITS:
            raise GeninfoError(f"bit depth k = {self.k} outside [1, {MAX_BITS}]")
        if not self.d > 0:
            raise GeninfoError(f"discrimination d = {self.d} must be > 0")
        object.__setattr__(self, "s_grid", tuple(float(s) for s in self.s_grid))

    @property
    def levels(self) -> int:
        return 2 ** int(self.k) - 1

    @property
    def width(self) -> float:
        """Perception width in units of this depth's gray levels."""
        if self.reference_bits is None:
            return float(self.d)
        return float(self.d) * self.levels / (2 ** int(self.reference_bits) - 1)

    def build(self, epsilon: float = DEFAULT_EPSILON):
        alphabet, source = graylevel_source(self.k)
        semantics = discrimination_semantics(alphabet, self.width)
        return source, payoff_matrix(source, semantics, epsilon)


@dataclass(frozen=True)
class Prediction:
    """A stock prediction: Gaussian (center, width) or a constant truth degree."""

    center: float | None = None
    width: float | None = None
    constant: float | None = None

    def truth(self, alphabet: Alphabet) -> TruthFunction:
        if self.constant is not None:
            return TruthFunction(np.full(len(alphabet), float(self.constant)), alphabet)
        return gaussian_truth(alphabet, self.center, self.width)


@dataclass(frozen=True)
class StockConfig:
    x0: float
    d0: float
    predictions: tuple[Prediction, ...]
    value_grid: tuple[float, ...]

    def __post_init__(self):
        if not self.d0 > 0:
            raise GeninfoError("prior spread d0 must be > 0")
        for pr in self.predictions:
            if pr.constant is None and not (pr.width is not None and pr.width > 0):
                raise GeninfoError("prediction widths must be > 0")
        object.__setattr__(self, "predictions", tuple(self.predictions))
        object.__setattr__(self, "value_grid", tuple(float(v) for v in self.value_grid))


@dataclass(frozen=True, eq=False)
class Curve:
    """A swept rate-fidelity curve together with the problem it solves."""

    source: Distribution
    payoff: PayoffMatrix
    points: list[RateFidelityPoint]
    label: float | None = None


@dataclass(frozen=True)
class MatchingPoint:
    s: float
    G: float
    R: float

    @property
    def gap(self) -> float:
        return self.R - self.G


def graylevel_source(k: int) -> tuple[Alphabet, Distribution]:
    if not 1 <= int(k) <= MAX_BITS:
        raise GeninfoError(f"bit depth k = {k} outside [1, {MAX_BITS}]")
    b = 2 ** int(k) - 1
    values = np.arange(b + 1, dtype=float)
    sigma = b / 8.0
    weights = np.exp(-((values - b / 2.0) ** 2) / (2.0 * sigma**2))
    return Alphabet.from_values(values), normalize(weights)


def discrimination_semantics(alphabet: Alphabet, d: float) -> SemanticChannel:
    """One Gaussian confusion function per gray level, centered on that level."""
    if not d > 0:
        raise GeninfoError(f"discrimination d = {d} must be > 0")
    return SemanticChannel(gaussian_truth(alphabet, c, d) for c in alphabet.values)


def graylevel_curve(config: GrayLevelConfig, *, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> Curve:
    source, payoff = config.build()
    points = rate_fidelity_curve(source, payoff, config.s_grid, tol=tol, max_iter=max_iter)
    return Curve(source, payoff, points, label=config.d)


def _map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fig4_family(configs: Sequence[GrayLevelConfig], workers: int = 1) -> list[Curve]:
    """One rate-fidelity curve per discrimination value."""
    return _map(graylevel_curve, list(configs), workers)


def fig4_csv(curves: Sequence[Curve]) -> str:
    rows = [(c.label, p.s, p.R, p.G) for c in curves for p in c.points]
    return csv_text(["d", "s", "R", "G"], rows)


def _secant_slope(source, payoff, s, h, init):
    lo = solve_point(source, payoff, max(s - h, 0.0), init=init)
    hi = solve_point(source, payoff, s + h, init=lo.output)
    dg = hi.G - lo.G
    if abs(dg) < 1e-14:
        return None
    return (hi.R - lo.R) / dg


def matching_point(points: Sequence[RateFidelityPoint], source=None, payoff=None,
                   s_tol: float = 1e-6, h: float = 1e-5) -> MatchingPoint:
    """Locate where the curve touches (or comes closest to) the line R = G.

    The swept point with the smallest R - G fixes a bracket in s; the
    bracket is then bisected on the sign of the local secant slope
    dR/dG - 1, solving fresh points at each step. Without ``source`` and
    ``payoff`` only the swept points are used.
    """
    if not points:
        raise GeninfoError("empty curve")
    gaps = np.array([p.R - p.G for p in points])
    gains = np.array([p.G for p in points])
    i = int(np.argmin(gaps))
    best = points[i]
    if gains.max() - gains.min() < 1e-12:
        # flat curve: nothing to refine
        return MatchingPoint(best.s, best.G, best.R)
    if i == 0 or i == len(points) - 1:
        raise MatchingPointOutsideSweepError(
            f"matching point outside sweep; closest is s={best.s:.6g} with R-G={gaps[i]:.3g}",
            closest=best,
        )
    if source is None or payoff is None:
        return MatchingPoint(best.s, best.G, best.R)

    lo, hi = points[i - 1].s, points[i + 1].s
    warm = best.output
    while hi - lo > s_tol:
        mid = 0.5 * (lo + hi)
        slope = _secant_slope(source, payoff, mid, min(h, 0.25 * (hi - lo)), warm)
        if slope is None:
            break
        if slope > 1.0:
            hi = mid
        else:
            lo = mid
    pt = solve_point(source, payoff, 0.5 * (lo + hi), init=warm)
    return MatchingPoint(pt.s, pt.G, pt.R)


def matching_s_grid() -> np.ndarray:
    return np.array([0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5])


def graylevel_matching(config: GrayLevelConfig) -> MatchingPoint:
    curve = graylevel_curve(config)
    return matching_point(curve.points, curve.source, curve.payoff)


@dataclass(frozen=True)
class Fig5Result:
    d: float
    ks: tuple[int, ...]
    g_star: tuple[float, ...]
    k_prime: int | None

    def rows(self):
        return [(self.d, k, g, k == self.k_prime) for k, g in zip(self.ks, self.g_star)]


def plateau_onset(ks: Sequence[int], values: Sequence[float], tol: float = PLATEAU_TOL) -> int | None:
    """Smallest k after which no later step raises the value by more than ``tol``."""
    inc = np.diff(np.asarray(values, dtype=float))
    for idx in range(len(ks) - 1):
        if np.all(inc[idx:] <= tol):
            return int(ks[idx])
    return None


def fig5_study(d: float, k_range: Sequence[int], workers: int = 1,
               reference_bits: int | None = REFERENCE_BITS,
               plateau_tol: float = PLATEAU_TOL) -> Fig5Result:
    ks = [int(k) for k in k_range]
    configs = [GrayLevelConfig(k, d, tuple(matching_s_grid()), reference_bits) for k in ks]
    matches = _map(graylevel_matching, configs, workers)
    g_star = tuple(float(m.G) for m in matches)
    return Fig5Result(float(d), tuple(ks), g_star, plateau_onset(ks, g_star, plateau_tol))


def fig5_csv(results: Sequence[Fig5Result]) -> str:
    rows = [r for res in results for r in res.rows()]
    return csv_text(["d", "k", "G_star", "k_prime_flag"], rows)


def stock_prior(config: StockConfig) -> tuple[Alphabet, Distribution]:
    values = np.asarray(config.value_grid, dtype=float)
    weights = np.exp(-((values - config.x0) ** 2) / (2.0 * config.d0**2))
    return Alphabet.from_values(values), normalize(weights)


def stock_info_curves(config: StockConfig) -> list[tuple[float, int, float]]:
    """Information of each prediction at every grid value, as (X, index, bits) rows."""
    alphabet, prior = stock_prior(config)
    rows = []
    for j, pred in enumerate(config.predictions):
        truth = pred.truth(alphabet)
        for i, x in enumerate(alphabet.values):
            if prior.probs[i] > 0:
                rows.append((float(x), j, semantic_info(prior, truth, i)))
    return rows


def stock_csv(rows) -> str:
    return csv_text(["X", "prediction", "info_bits"], rows)


def largest_common_rate(curves: Sequence[Curve]) -> float:
    return min(max(p.R for p in c.points) for c in curves)


def gain_at_rate(curve: Curve, rate: float) -> float:
    """Linear interpolation of G at a given R along a swept curve."""
    r = np.array([p.R for p in curve.points])
    g = np.array([p.G for p in curve.points])
    order = np.argsort(r, kind="stable")
    return float(np.interp(rate, r[order], g[order]))


def crossing_rates(a: Curve, b: Curve, n: int = 400) -> list[float]:
    """Rates in (0, common max) where the G-difference of two curves changes sign."""
    top = largest_common_rate([a, b])
    grid = np.linspace(0.0, top, n)
    diff = np.array([gain_at_rate(a, r) - gain_at_rate(b, r) for r in grid])
    sign = np.sign(diff)
    return [float(grid[i + 1]) for i in range(n - 1) if sign[i] != 0 and sign[i] != sign[i + 1]]


def secant_slopes(points: Sequence[RateFidelityPoint]) -> np.ndarray:
    r = np.array([p.R for p in points])
    g = np.array([p.G for p in points])
    dg = np.diff(g)
    keep = dg > 1e-9
    return np.diff(r)[keep] / dg[keep]
