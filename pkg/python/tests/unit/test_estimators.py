"""
Unit tests for hedgegraph - Estimators
"""

import numpy as np
import pytest

from hedgegraph.models.estimate import CovEstimate, EstimateKind, estimate_from_matrix
from hedgegraph.services.estimators import (
    sample_corr,
    sample_cov,
    sample_mean,
    threshold,
)
from hedgegraph.utils.error_handling import (
    ErrorCode,
    ValidationError,
    ZeroVarianceError,
)
from tests.conftest import make_panel

pytestmark = pytest.mark.unit


def _corr(matrix):
    return estimate_from_matrix(matrix, kind=EstimateKind.CORRELATION)


class TestSampleMean:
    def test_symmetric_column(self):
        assert sample_mean(make_panel([[0.1], [-0.1]]))[0] == pytest.approx(0.0, abs=1e-18)

    def test_simple_column(self):
        assert sample_mean(make_panel([[0.01], [0.02], [0.03]]))[0] == pytest.approx(0.02)

    def test_zero_panel(self):
        np.testing.assert_array_equal(sample_mean(make_panel(np.zeros((4, 3)))), np.zeros(3))


class TestSampleCov:
    """Tests for the unbiased sample covariance"""

    def test_identical_columns(self):
        panel = make_panel([[0.01, 0.01], [0.03, 0.03], [-0.02, -0.02]])
        cov = sample_cov(panel)
        assert cov.matrix[0, 1] == pytest.approx(cov.matrix[0, 0], rel=1e-14)

    def test_opposite_columns(self):
        """Deviations (1, -1) and (-1, 1) with T = 2"""
        cov = sample_cov(make_panel([[0.5, -0.5], [-0.5, 0.5]]))
        # Each deviation is +-0.5, so scale by 4 to reach [[2, -2], [-2, 2]]
        np.testing.assert_allclose(cov.matrix * 4, [[2.0, -2.0], [-2.0, 2.0]], atol=1e-15)

    def test_constant_asset_zero_row(self):
        cov = sample_cov(make_panel([[0.013, 0.1], [0.013, 0.2], [0.013, -0.1]]))
        np.testing.assert_array_equal(cov.matrix[0], [0.0, 0.0])
        np.testing.assert_array_equal(cov.matrix[:, 0], [0.0, 0.0])

    def test_matches_double_loop(self, rng):
        """Matrix form equals direct summation on random 10x5 panels"""
        for _ in range(20):
            returns = rng.normal(0, 0.02, size=(10, 5))
            cov = sample_cov(make_panel(returns))
            mean = returns.mean(axis=0)
            expected = np.zeros((5, 5))
            for i in range(5):
                for j in range(5):
                    expected[i, j] = sum(
                        (returns[t, i] - mean[i]) * (returns[t, j] - mean[j])
                        for t in range(10)
                    ) / 9
            np.testing.assert_allclose(cov.matrix, expected, atol=1e-12)

    def test_quadratic_homogeneity(self, rng):
        returns = rng.normal(0, 0.01, size=(30, 4))
        base = sample_cov(make_panel(returns))
        scaled = sample_cov(make_panel(returns * 3.0))
        np.testing.assert_allclose(scaled.matrix, 9.0 * base.matrix, rtol=1e-12)

    def test_too_few_rows(self):
        with pytest.raises(ValidationError) as exc:
            sample_cov(make_panel([[0.1, 0.2]]))
        assert exc.value.error_code == ErrorCode.TOO_FEW_ROWS

    def test_json_form(self):
        cov = sample_cov(make_panel([[0.1, 0.2], [0.0, 0.1]], tickers=("X", "Y")))
        payload = cov.to_json_dict()
        assert payload["tickers"] == ["X", "Y"]
        assert payload["kind"] == "covariance"
        assert payload["sample_size"] == 2
        assert len(payload["matrix"]) == 2


class TestSampleCorr:
    """Tests for covariance normalization"""

    def test_perfect_anticorrelation(self):
        corr = sample_corr(estimate_from_matrix([[2.0, -2.0], [-2.0, 2.0]]))
        np.testing.assert_array_equal(corr.matrix, [[1.0, -1.0], [-1.0, 1.0]])
        assert corr.kind == EstimateKind.CORRELATION

    def test_diagonal_gives_identity(self):
        corr = sample_corr(estimate_from_matrix(np.diag([0.5, 2.0, 3.0])))
        np.testing.assert_array_equal(corr.matrix, np.eye(3))

    def test_zero_variance_names_ticker(self):
        panel = make_panel([[0.0, 0.1], [0.0, 0.2], [0.0, 0.0]], tickers=("X", "Y"))
        with pytest.raises(ZeroVarianceError) as exc:
            sample_corr(sample_cov(panel))
        assert exc.value.error_code == ErrorCode.ZERO_VARIANCE
        assert exc.value.details == {"ticker": "X"}

    def test_random_bounds(self, rng):
        for _ in range(20):
            corr = sample_corr(sample_cov(make_panel(rng.normal(size=(15, 6)))))
            assert np.all(np.diag(corr.matrix) == 1.0)
            assert np.all(np.abs(corr.matrix) <= 1.0)

    def test_rejects_correlation_input(self):
        with pytest.raises(ValidationError) as exc:
            sample_corr(_corr(np.eye(2)))
        assert exc.value.error_code == ErrorCode.WRONG_ESTIMATE_KIND


class TestThreshold:
    """Tests for the correlation dead band"""

    def test_inside_band_zeroed(self):
        result = threshold(_corr([[1.0, 0.3], [0.3, 1.0]]), 0.5, -0.5)
        assert result.matrix[0, 1] == 0.0
        assert result.matrix[1, 0] == 0.0

    def test_strong_negative_kept(self):
        result = threshold(_corr([[1.0, -0.7], [-0.7, 1.0]]), 0.5, -0.5)
        assert result.matrix[0, 1] == -0.7

    def test_diagonal_preserved(self):
        result = threshold(_corr(np.eye(3)), 0.5, -0.5)
        np.testing.assert_array_equal(np.diag(result.matrix), np.ones(3))

    def test_idempotent(self, rng):
        corr = sample_corr(sample_cov(make_panel(rng.normal(size=(40, 6)))))
        once = threshold(corr, 0.1, -0.1)
        twice = threshold(once, 0.1, -0.1)
        np.testing.assert_array_equal(once.matrix, twice.matrix)

    @pytest.mark.parametrize("taus", [(1.2, -0.5), (0.0, -0.5), (0.5, 0.1), (0.5, -1.0)])
    def test_bad_bounds(self, taus):
        with pytest.raises(ValidationError) as exc:
            threshold(_corr(np.eye(2)), *taus)
        assert exc.value.error_code == ErrorCode.BAD_THRESHOLD

    def test_covariance_rejected(self):
        with pytest.raises(ValidationError) as exc:
            threshold(estimate_from_matrix(np.eye(2)), 0.5, -0.5)
        assert exc.value.error_code == ErrorCode.WRONG_ESTIMATE_KIND


class TestEstimateInvariants:
    def test_asymmetric_rejected(self):
        with pytest.raises(ValidationError):
            estimate_from_matrix([[1.0, 0.2], [0.1, 1.0]])

    def test_negative_variance_rejected(self):
        with pytest.raises(ValidationError):
            estimate_from_matrix([[-1.0, 0.0], [0.0, 1.0]])

    def test_sample_size_floor(self):
        with pytest.raises(ValidationError):
            CovEstimate(
                tickers=("A",),
                mean=[0.0],
                matrix=[[1.0]],
                sample_size=1,
            )

    def test_restrict_orders_by_request(self):
        est = estimate_from_matrix(np.diag([1.0, 2.0, 3.0]), mean=[0.1, 0.2, 0.3])
        sub = est.restrict(["A2", "A0"])
        np.testing.assert_array_equal(sub.matrix, np.diag([3.0, 1.0]))
        np.testing.assert_array_equal(sub.mean, [0.3, 0.1])
