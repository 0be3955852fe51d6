import math

import numpy as np
import pytest

from geninfo.core_prob import Alphabet, kl_divergence, shannon_mutual_info
from geninfo.errors import (
    GeninfoError,
    InfeasibleFidelityTargetError,
    InvalidSlopeError,
    NullLogicalProbabilityError,
)
from geninfo.experiments import GrayLevelConfig
from geninfo.rate_fidelity import (
    DistortionMatrix,
    PayoffMatrix,
    average_distortion,
    brute_force_R_of_G,
    payoff_matrix,
    rate_distortion_curve,
    rate_fidelity_curve,
    simplex_grid,
    solve_point,
)
from geninfo.semantic import SemanticChannel, gaussian_truth, semantic_info

cp = pytest.importorskip("cvxpy")


def cvx_min_rate(p, payoff, g_target):
    """min I(X;Y) subject to G >= g_target, as a convex program over the joint."""
    n, m = payoff.shape
    joint = cp.Variable((n, m), nonneg=True)
    col = cp.sum(joint, axis=0)
    ref = cp.vstack([p[i] * col for i in range(n)])
    rate = cp.sum(cp.rel_entr(joint, ref)) / math.log(2)
    cons = [cp.sum(joint, axis=1) == p, cp.sum(cp.multiply(joint, payoff)) >= g_target]
    prob = cp.Problem(cp.Minimize(rate), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def posteriors_of(p, payoff):
    return p[:, None] * np.exp2(payoff)


class TestPayoff:
    def test_tautology_columns(self):
        pm = payoff_matrix([0.3, 0.7], [[1, 1], [1, 1]])
        np.testing.assert_allclose(pm.values, 0.0, atol=1e-15)

    def test_crisp_partition(self):
        eps = 1e-9
        q = (1 + eps) / 2
        pm = payoff_matrix([0.5, 0.5], [[1, 0], [0, 1]], eps)
        expected = [[math.log2(1 / q), math.log2(eps / q)], [math.log2(eps / q), math.log2(1 / q)]]
        np.testing.assert_allclose(pm.values, expected, atol=1e-12)

    def test_gaussian_columns_match_pointwise(self):
        alpha = Alphabet.from_values([0.0, 1.0, 2.0])
        p = np.array([0.2, 0.5, 0.3])
        sem = SemanticChannel([gaussian_truth(alpha, c, 0.8) for c in (0, 1, 2)])
        pm = payoff_matrix(p, sem)
        for j, t in enumerate(sem):
            for i in range(3):
                assert pm.values[i, j] == pytest.approx(semantic_info(p, t, i), abs=1e-12)

    def test_null_message_named(self):
        from geninfo.semantic import TruthFunction

        sem = SemanticChannel([TruthFunction([1, 1]), TruthFunction([0, 1], name="never")])
        with pytest.raises(NullLogicalProbabilityError, match="never"):
            payoff_matrix([1.0, 0.0], sem)

    def test_payoff_rejects_inf(self):
        with pytest.raises(GeninfoError):
            PayoffMatrix([[0.0, np.inf]])
        with pytest.raises(GeninfoError):
            PayoffMatrix([[0.0, -np.inf]])


class TestAverageDistortion:
    def test_examples(self):
        d = DistortionMatrix.hamming(2)
        assert average_distortion([0.3, 0.7], np.eye(2), d) == 0.0
        assert average_distortion([0.5, 0.5], [[0.5, 0.5]] * 2, d) == 0.5

    def test_random_oracle(self):
        rng = np.random.default_rng(0)
        p = rng.dirichlet(np.ones(3))
        w = rng.dirichlet(np.ones(3), size=3)
        d = rng.uniform(0, 4, (3, 3))
        oracle = sum(p[i] * w[i, j] * d[i, j] for i in range(3) for j in range(3))
        assert average_distortion(p, w, d) == pytest.approx(oracle, abs=1e-12)

    def test_negative_distortion_rejected(self):
        with pytest.raises(GeninfoError):
            DistortionMatrix([[0.0, -1.0]])


class TestSolvePoint:
    def test_endpoint(self):
        rng = np.random.default_rng(1)
        p = rng.dirichlet(np.ones(4))
        pm = payoff_matrix(p, rng.uniform(0.05, 1, (3, 4)))
        pt = solve_point(p, pm, 0.0)
        cols = p @ pm.values
        assert pt.R == 0.0
        assert pt.G == pytest.approx(cols.max(), abs=1e-12)
        post = posteriors_of(p, pm.values)
        assert pt.G == pytest.approx(-min(kl_divergence(p, post[:, j]) for j in range(3)), abs=1e-12)
        assert pt.G <= 0

    def test_endpoint_zero_iff_posterior_is_source(self):
        p = np.array([0.2, 0.3, 0.5])
        pm = payoff_matrix(p, [[1, 1, 1], [0.3, 0.9, 0.1]])
        assert solve_point(p, pm, 0.0).G == pytest.approx(0.0, abs=1e-12)

    def test_matching_point_independent_posteriors(self):
        p = np.array([0.3, 0.45, 0.25])
        t = np.array([[1.0, 0.3, 0.1], [0.4, 1.0, 0.4], [0.05, 0.2, 1.0]])
        pm = payoff_matrix(p, t.T)
        pt = solve_point(p, pm, 1.0)
        assert pt.converged
        assert abs(pt.R - pt.G) <= 1e-6

    def test_negative_slope(self):
        with pytest.raises(InvalidSlopeError, match="invalid slope"):
            solve_point([0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]], -0.1)

    @pytest.mark.parametrize("s", [0.25, 0.5, 2.0])
    def test_convex_program_oracle(self, s):
        rng = np.random.default_rng(42)
        p = rng.dirichlet(np.ones(4) * 2)
        pm = payoff_matrix(p, rng.uniform(0.05, 1, (3, 4)))
        pt = solve_point(p, pm, s)
        assert pt.converged
        assert pt.R == pytest.approx(cvx_min_rate(p, pm.values, pt.G), abs=1e-3)

    def test_point_invariants(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n, m = rng.integers(2, 6, size=2)
            p = rng.dirichlet(np.ones(n))
            pm = payoff_matrix(p, rng.uniform(0.01, 1, (m, n)))
            for s in (0.3, 1.0, 3.0):
                pt = solve_point(p, pm, s)
                assert pt.converged
                w = np.asarray(pt.channel)
                np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
                np.testing.assert_allclose(pt.output, p @ w, atol=1e-9)
                assert pt.R >= pt.G - 1e-9
                assert pt.R == pytest.approx(shannon_mutual_info(p, w), abs=1e-8)

    def test_zero_mass_event_row_is_a_distribution(self):
        p = np.array([0.5, 0.0, 0.5])
        pm = payoff_matrix(p, [[1, 0.5, 0.1], [0.1, 0.5, 1]])
        pt = solve_point(p, pm, 2.0)
        np.testing.assert_allclose(np.asarray(pt.channel).sum(axis=1), 1.0, atol=1e-12)
        assert pt.R == pytest.approx(shannon_mutual_info(p, pt.channel), abs=1e-8)


class TestCurve:
    def test_constant_payoff(self):
        pts = rate_fidelity_curve([0.2, 0.8], np.zeros((2, 3)), [0, 0.5, 1, 4])
        assert all(pt.R == 0 and pt.G == 0 for pt in pts)

    def test_grid_validation(self):
        with pytest.raises(GeninfoError):
            rate_fidelity_curve([0.5, 0.5], np.zeros((2, 2)), [0.5, 0.5])
        with pytest.raises(InvalidSlopeError):
            rate_fidelity_curve([0.5, 0.5], np.zeros((2, 2)), [-1, 0.5])

    def test_endpoints_compose(self):
        p = np.array([0.3, 0.45, 0.25])
        pm = payoff_matrix(p, [[1.0, 0.3, 0.1], [0.4, 1.0, 0.4], [0.05, 0.2, 1.0]])
        a, b = rate_fidelity_curve(p, pm, [0.0, 1.0])
        assert a.G == solve_point(p, pm, 0.0).G
        assert b.G == pytest.approx(solve_point(p, pm, 1.0).G, abs=1e-9)

    @pytest.fixture(scope="class")
    @classmethod
    def graylevel_curve(cls):
        cfg = GrayLevelConfig(3, 2.0, tuple(np.linspace(0, 6, 40)))
        source, payoff = cfg.build()
        return source, payoff, rate_fidelity_curve(source, payoff, cfg.s_grid)

    def test_graylevel_monotone_and_convex(self, graylevel_curve):
        _, _, pts = graylevel_curve
        assert all(pt.converged for pt in pts)
        r = np.array([pt.R for pt in pts])
        g = np.array([pt.G for pt in pts])
        s = np.array([pt.s for pt in pts])
        assert np.all(np.diff(r) >= -1e-9) and np.all(np.diff(g) >= -1e-9)
        keep = np.diff(g) > 1e-9
        slopes = np.diff(r)[keep] / np.diff(g)[keep]
        assert np.all(np.diff(slopes) >= -1e-6)
        # each secant slope lies between the slopes at its endpoints
        lo, hi = s[:-1][keep], s[1:][keep]
        assert np.all(slopes >= lo - 1e-6) and np.all(slopes <= hi + 1e-6)

    def test_graylevel_consistency(self, graylevel_curve):
        source, _, pts = graylevel_curve
        for pt in pts:
            assert pt.R >= pt.G - 1e-9
            assert pt.R == pytest.approx(shannon_mutual_info(source, pt.channel), abs=1e-8)

    def test_negative_gain_at_zero_rate(self, graylevel_curve):
        _, _, pts = graylevel_curve
        assert pts[0].R == 0 and pts[0].G < 0
        # any gain above the zero-rate value costs a positive rate
        assert all(pt.R > 0 for pt in pts[1:] if pt.G > pts[0].G + 1e-9)


def rate_at_gain(p, pm, g_target, lo=1e-3, hi=50.0):
    """Parametric R at the slope whose G equals g_target (bisection on s)."""
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if solve_point(p, pm, mid).G < g_target:
            lo = mid
        else:
            hi = mid
    return solve_point(p, pm, hi)


class TestBruteForce:
    P2 = np.array([0.5, 0.5])

    def crisp(self):
        return payoff_matrix(self.P2, [[1, 0], [0, 1]])

    def test_zero_target_feasible_at_zero_rate(self):
        pm = payoff_matrix(self.P2, [[1, 1], [1, 0.5]])
        assert (self.P2 @ pm.values).max() >= 0
        assert brute_force_R_of_G(self.P2, pm, 0.0) == 0.0

    def test_near_endpoint(self):
        pm = self.crisp()
        top = (self.P2 @ pm.values).max()
        assert brute_force_R_of_G(self.P2, pm, top - 1e-6) < 1e-3

    def test_crisp_half_bit_matches_parametric(self):
        pm = self.crisp()
        pt = rate_at_gain(self.P2, pm, 0.5)
        assert pt.G == pytest.approx(0.5, abs=1e-9)
        assert brute_force_R_of_G(self.P2, pm, 0.5, 25) == pytest.approx(pt.R, abs=5e-2)

    def test_crisp_gap_shrinks_with_resolution(self):
        pm = self.crisp()
        exact = rate_at_gain(self.P2, pm, 0.5).R
        gaps = [brute_force_R_of_G(self.P2, pm, 0.5, r) - exact for r in (25, 50, 100)]
        assert all(g >= -1e-9 for g in gaps)
        assert gaps[0] > gaps[1] > gaps[2]

    def test_upper_bounds_parametric(self):
        rng = np.random.default_rng(9)
        p = rng.dirichlet(np.ones(3))
        pm = payoff_matrix(p, rng.uniform(0.05, 1, (2, 3)))
        for s in (0.5, 1.0, 2.0):
            pt = solve_point(p, pm, s)
            assert brute_force_R_of_G(p, pm, pt.G, 20) >= pt.R - 1e-9

    def test_infeasible(self):
        pm = self.crisp()
        top = float(np.sum(self.P2 * pm.values.max(axis=1)))
        with pytest.raises(InfeasibleFidelityTargetError, match="infeasible fidelity target"):
            brute_force_R_of_G(self.P2, pm, top + 0.01)

    def test_size_limits(self):
        with pytest.raises(GeninfoError):
            brute_force_R_of_G(np.full(5, 0.2), np.zeros((5, 2)), 0.0)

    def test_simplex_grid(self):
        g = simplex_grid(3, 4)
        assert g.shape == (15, 3)
        np.testing.assert_allclose(g.sum(axis=1), 1.0)


def h2(x):
    return 0.0 if x in (0.0, 1.0) else -x * math.log2(x) - (1 - x) * math.log2(1 - x)


class TestRateDistortion:
    def test_binary_hamming(self):
        pts = rate_distortion_curve([0.5, 0.5], DistortionMatrix.hamming(2), np.linspace(0.1, 8, 20))
        for pt in pts:
            assert pt.R == pytest.approx(max(1 - h2(pt.D), 0.0), abs=2e-2)

    def test_lossless_limit_and_monotone(self):
        p = np.array([0.2, 0.3, 0.5])
        d = DistortionMatrix.squared_error([0.0, 1.0, 2.0])
        pts = rate_distortion_curve(p, d, [0.1, 0.5, 1, 2, 5, 10, 40])
        dist = [pt.D for pt in pts]
        assert all(b <= a + 1e-12 for a, b in zip(dist, dist[1:]))
        assert pts[-1].D < 1e-6
        ent = float(-np.sum(p * np.log2(p)))
        assert pts[-1].R == pytest.approx(ent, abs=1e-4)

    def test_affine_equivalence(self):
        # uniform circular source with cyclic-shift Gaussian semantics
        n, sigma = 6, 1.0
        idx = np.arange(n)
        circ = np.minimum(np.abs(idx[:, None] - idx[None, :]), n - np.abs(idx[:, None] - idx[None, :]))
        d = (circ**2).astype(float)
        t = np.exp(-d / (2 * sigma**2))
        p = np.full(n, 1.0 / n)
        pm = payoff_matrix(p, t.T)
        c = 1.0 / (2 * sigma**2 * math.log(2))
        const = pm.values[0, 0]
        np.testing.assert_allclose(pm.values, -c * d + const, atol=1e-12)
        s_grid = np.array([0.1, 0.4, 0.8, 1.2, 2.0, 3.0])
        rf = rate_fidelity_curve(p, pm, s_grid)
        rd = rate_distortion_curve(p, d, s_grid * c)
        for a, b in zip(rf, rd):
            assert a.R == pytest.approx(b.R, abs=1e-6)
            assert a.G == pytest.approx(-c * b.D + const, abs=1e-6)
