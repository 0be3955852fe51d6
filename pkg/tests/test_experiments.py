import math

import numpy as np
import pytest

from geninfo.core_prob import Alphabet
from geninfo.errors import GeninfoError, MatchingPointOutsideSweepError
from geninfo.experiments import (
    GrayLevelConfig,
    Prediction,
    StockConfig,
    discrimination_semantics,
    fig4_csv,
    fig5_csv,
    fig5_study,
    graylevel_curve,
    graylevel_matching,
    graylevel_source,
    matching_point,
    plateau_onset,
    stock_csv,
    stock_info_curves,
)
from geninfo.rate_fidelity import payoff_matrix, rate_fidelity_curve
from geninfo.semantic import gaussian_truth


class TestGrayLevelSource:
    def test_k1(self):
        alpha, p = graylevel_source(1)
        np.testing.assert_array_equal(alpha.values, [0, 1])
        np.testing.assert_allclose(p.probs, [0.5, 0.5], atol=1e-15)

    def test_k3_mode_and_oracle(self):
        alpha, p = graylevel_source(3)
        assert p.probs[3] == pytest.approx(p.probs[4], abs=1e-15)
        assert np.argmax(p.probs) in (3, 4)
        # normal density at integer points, evaluated term by term with math.exp
        b, sigma = 7, 7 / 8
        dens = [math.exp(-((i - b / 2) ** 2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))
                for i in range(b + 1)]
        total = math.fsum(dens)
        np.testing.assert_allclose(p.probs, [x / total for x in dens], atol=1e-12)

    @pytest.mark.parametrize("k", [2, 5, 8])
    def test_symmetric(self, k):
        _, p = graylevel_source(k)
        np.testing.assert_allclose(p.probs, p.probs[::-1], atol=1e-12)

    @pytest.mark.parametrize("k", [0, 17])
    def test_range(self, k):
        with pytest.raises(GeninfoError):
            graylevel_source(k)


class TestDiscrimination:
    def test_column_matches_gaussian(self):
        alpha, _ = graylevel_source(3)
        sem = discrimination_semantics(alpha, 2.0)
        np.testing.assert_array_equal(sem[3].degrees, gaussian_truth(alpha, 3, 2).degrees)

    def test_sharp_limit_is_near_diagonal(self):
        alpha, _ = graylevel_source(3)
        deg = discrimination_semantics(alpha, 0.01).degrees
        np.testing.assert_allclose(deg, np.eye(8), atol=1e-300)

    def test_fuzzy_limit(self):
        alpha, p = graylevel_source(3)
        sem = discrimination_semantics(alpha, 7.0 * 1000)
        assert np.all(sem.degrees > 1 - 1e-6)
        assert np.all(np.abs(payoff_matrix(p, sem).values) < 1e-5)

    def test_bad_width(self):
        alpha, _ = graylevel_source(2)
        with pytest.raises(GeninfoError):
            discrimination_semantics(alpha, 0.0)

    def test_reference_unit(self):
        assert GrayLevelConfig(6, 2.0).width == pytest.approx(2.0)
        assert GrayLevelConfig(3, 2.0).width == pytest.approx(2.0 * 7 / 63)
        assert GrayLevelConfig(3, 2.0, reference_bits=None).width == 2.0

    def test_config_validation(self):
        with pytest.raises(GeninfoError):
            GrayLevelConfig(0, 1.0)
        with pytest.raises(GeninfoError):
            GrayLevelConfig(3, -1.0)


class TestMatchingPoint:
    def test_graylevel_slope_one(self):
        m = graylevel_matching(GrayLevelConfig(4, 2.0, (0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5)))
        assert abs(m.s - 1.0) <= 1e-3
        assert abs(m.gap) <= 1e-6

    def test_uninformative(self):
        p = np.array([0.2, 0.5, 0.3])
        pts = rate_fidelity_curve(p, payoff_matrix(p, np.ones((2, 3))), [0, 0.5, 1, 2])
        m = matching_point(pts)
        assert m.G == 0 and m.R == 0

    def test_outside_sweep(self):
        cfg = GrayLevelConfig(3, 2.0, (1.5, 2.0, 3.0))
        curve = graylevel_curve(cfg)
        with pytest.raises(MatchingPointOutsideSweepError, match="outside sweep") as info:
            matching_point(curve.points, curve.source, curve.payoff)
        assert info.value.closest is curve.points[0]

    def test_discrimination_ordering(self):
        grid = (0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5)
        sharp = graylevel_matching(GrayLevelConfig(6, 1.0, grid))
        blunt = graylevel_matching(GrayLevelConfig(6, 4.0, grid))
        assert sharp.G > blunt.G


class TestFig5:
    def test_plateau_onset(self):
        assert plateau_onset([1, 2, 3, 4], [0.5, 1.0, 1.0005, 1.0]) == 2
        assert plateau_onset([1, 2, 3], [0.1, 0.2, 0.3]) is None
        assert plateau_onset([1, 2, 3], [1.0, 1.0, 1.0]) == 1

    def test_binary_bound(self):
        res = fig5_study(2.0, [1])
        assert res.g_star[0] <= 1.0 + 1e-9

    def test_concurrency_independent(self):
        a = fig5_study(2.0, range(1, 5), workers=1)
        b = fig5_study(2.0, range(1, 5), workers=3)
        assert fig5_csv([a]) == fig5_csv([b])

    def test_csv_header(self):
        text = fig5_csv([fig5_study(4.0, [1, 2])])
        assert text.splitlines()[0] == "d,k,G_star,k_prime_flag"


class TestFig4Csv:
    def test_header_and_rows(self):
        curve = graylevel_curve(GrayLevelConfig(2, 2.0, (0.0, 1.0)))
        lines = fig4_csv([curve]).splitlines()
        assert lines[0] == "d,s,R,G"
        assert len(lines) == 3


class TestStock:
    def config(self, preds):
        return StockConfig(100.0, 10.0, tuple(preds), tuple(np.arange(60.0, 140.5, 0.5)))

    def test_peak_at_center(self):
        rows = stock_info_curves(self.config([Prediction(115, 5)]))
        xs = np.array([r[0] for r in rows])
        bits = np.array([r[2] for r in rows])
        assert xs[np.argmax(bits)] == 115.0

    def test_flat_prediction_is_zero(self):
        rows = stock_info_curves(self.config([Prediction(constant=0.4)]))
        assert max(abs(r[2]) for r in rows) < 1e-12

    def test_widths_must_be_positive(self):
        with pytest.raises(GeninfoError):
            self.config([Prediction(110, 0.0)])

    def test_prediction_truth(self):
        alpha = Alphabet.from_values([0.0, 1.0])
        np.testing.assert_array_equal(Prediction(constant=0.3).truth(alpha).degrees, [0.3, 0.3])

    def test_csv_header(self):
        text = stock_csv(stock_info_curves(self.config([Prediction(90, 5)])))
        assert text.splitlines()[0] == "X,prediction,info_bits"
