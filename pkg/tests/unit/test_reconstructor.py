"""Tests for domain.reconstructor — series from H, boundary slices and no-go scans."""

import numpy as np
import pytest

from domain.errors import SeriesInconsistencyError
from domain.model_catalog import apply_twist_H, h14
from domain.models import ObstructionReport, TwistSpec, UniSeries, Verdict
from domain.reconstructor import (
    certify_no_go,
    idzumi_step,
    local_evaluator,
    multistart_grid,
    reconstruct_bivariate,
    reconstruct_univariate,
    series_coefficients,
    series_coefficients_2d,
    series_eval,
    series_unitarity,
    solve_difference,
    sparsity_mask,
    twist_bounds,
    ybe_order_check,
)
from domain.rmatrix_catalog import ik_hamiltonian, ik_model, v17_2_model, zf_hamiltonian, zf_model
from domain.tensor_core import ice_mask

# Takes h14 at xi = 2 onto the 17V2 generator at theta0 = 0.
H14_TWIST = TwistSpec(telescope_A=[0.0, -0.5, -0.5], sz_shift_beta=-0.5)


@pytest.fixture(scope="module")
def zf_series():
    series = reconstruct_univariate(zf_hamiltonian(2), 6)
    assert isinstance(series, UniSeries)
    return series


@pytest.fixture(scope="module")
def zf_boundary_and_evaluator():
    f = local_evaluator(zf_model(2))
    boundary = series_coefficients(lambda s: f(s, 0.0), 0.0, 0.15, 4, n_points=32)
    return boundary, f


class TestSolveDifference:
    """X(x)I - I(x)X = Q with the (|00>,|00>) entry pinned."""

    def test_recovers_x(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        x[0, 0] = 0
        q = np.kron(x, np.eye(3)) - np.kron(np.eye(3), x)
        solved, residual = solve_difference(q)
        np.testing.assert_allclose(solved, x, atol=1e-10)
        assert residual < 1e-10

    def test_identity_part_is_removed(self):
        x = np.diag(np.arange(9, dtype=complex))
        q = np.kron(x, np.eye(3)) - np.kron(np.eye(3), x)
        solved, _ = solve_difference(q)
        assert solved[0, 0] == 0

    def test_inconsistent_q(self):
        rng = np.random.default_rng(4)
        _, residual = solve_difference(rng.normal(size=(27, 27)))
        assert residual > 1e-3


class TestUnivariate:
    """Series around u = 1 built from H."""

    def test_first_order_is_h(self, zf_series):
        np.testing.assert_allclose(zf_series.coeffs[1], zf_hamiltonian(2), atol=1e-12)
        np.testing.assert_array_equal(zf_series.coeffs[0], np.eye(9))

    def test_single_step(self):
        h = zf_hamiltonian(2)
        nxt, residual = idzumi_step([np.eye(9, dtype=complex)], h)
        np.testing.assert_allclose(nxt, h, atol=1e-12)
        assert residual < 1e-12

    def test_matches_cauchy_coefficients(self, zf_series):
        oracle = series_coefficients(zf_model(2).evaluator, 1.0, 0.25, 6)
        for k in range(7):
            np.testing.assert_allclose(zf_series.coeffs[k], oracle[k], atol=1e-8)

    def test_consistency_residuals(self, zf_series):
        assert max(zf_series.residuals) < 1e-9

    def test_ik_matches_cauchy_coefficients(self):
        series = reconstruct_univariate(ik_hamiltonian(2), 6)
        assert isinstance(series, UniSeries)
        oracle = series_coefficients(ik_model(2).evaluator, 1.0, 0.25, 6)
        for k in range(7):
            np.testing.assert_allclose(series.coeffs[k], oracle[k], atol=1e-8)

    def test_truncated_ybe_shrinks_with_the_order(self, zf_series):
        (_, coarse), (_, fine) = ybe_order_check(zf_series, epsilons=(0.1, 0.05))
        assert fine < coarse / 8

    def test_series_eval_near_one(self, zf_series):
        np.testing.assert_allclose(series_eval(zf_series, 1.02), zf_model(2).evaluator(1.02), atol=1e-8)

    def test_unitarity_per_order(self, zf_series):
        assert max(series_unitarity(zf_series)) < 1e-8

    def test_twisted_h14_is_a_laurent_polynomial(self):
        b = apply_twist_H(h14(2.0), H14_TWIST)
        series = reconstruct_univariate(h14(2.0), 5, twist=H14_TWIST)
        assert isinstance(series, UniSeries)
        for k in range(1, 6):
            np.testing.assert_allclose(series.coeffs[k], (-1) ** (k + 1) * b, atol=1e-9)

    def test_untwisted_h14_is_obstructed(self):
        report = reconstruct_univariate(h14(1.0), 6, model="h14")
        assert isinstance(report, ObstructionReport)
        assert report.verdict is Verdict.OBSTRUCTED
        assert 1 <= report.order_failed <= 6
        assert report.residual_by_order[report.order_failed - 1] > 1e-6


class TestSparsityMask:
    def test_stays_inside_the_ice_rule(self):
        mask = sparsity_mask(zf_hamiltonian(2))
        assert not np.any(mask & ~ice_mask())

    def test_contains_h_and_the_diagonal(self):
        h = h14(1.0)
        mask = sparsity_mask(h)
        assert np.all(mask[np.abs(h) > 0])
        assert np.all(np.diag(mask))

    def test_fourteen_vertex_pattern_stays_small(self):
        mask = sparsity_mask(h14(1.0))
        assert mask.sum() <= 15


class TestCauchyCoefficients:
    def test_polynomial(self):
        coeffs = series_coefficients(lambda z: np.array([1 + 2 * z + 3 * z**2]), 0.0, 0.5, 3, n_points=16)
        np.testing.assert_allclose([c[0] for c in coeffs], [1, 2, 3, 0], atol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            series_coefficients(lambda z: z, 0.0, 0.5, 8, n_points=8)

    def test_two_variables(self):
        coeffs = series_coefficients_2d(lambda x, y: np.array([x * y + 2 * y**2]), 0.5, 2, n_points=8)
        assert coeffs[(1, 1)][0] == pytest.approx(1)
        assert coeffs[(0, 2)][0] == pytest.approx(2)
        assert abs(coeffs[(2, 0)][0]) < 1e-12


class TestBivariate:
    """Filling Ř(x, y) from the slice Ř(x, 0)."""

    def test_matches_two_dimensional_oracle(self, zf_boundary_and_evaluator):
        boundary, f = zf_boundary_and_evaluator
        series = reconstruct_bivariate(boundary, 4)
        oracle = series_coefficients_2d(f, 0.15, 4)
        for key, value in oracle.items():
            np.testing.assert_allclose(series.coefficient(*key), value, atol=1e-7)

    def test_diagonal_sums_vanish(self, zf_boundary_and_evaluator):
        boundary, _ = zf_boundary_and_evaluator
        series = reconstruct_bivariate(boundary, 4)
        assert all(series.residuals[("diagonal", d)] < 1e-8 for d in range(1, 5))

    def test_boundary_must_start_at_identity(self, zf_boundary_and_evaluator):
        boundary, _ = zf_boundary_and_evaluator
        with pytest.raises(SeriesInconsistencyError):
            reconstruct_bivariate([2 * boundary[0]] + list(boundary[1:]), 4)

    def test_boundary_too_short(self, zf_boundary_and_evaluator):
        boundary, _ = zf_boundary_and_evaluator
        with pytest.raises(ValueError):
            reconstruct_bivariate(boundary[:3], 4)


class TestCertifyNoGo:
    """Twist-family scans for a consistent series."""

    def test_grid_shape_and_seed(self):
        a = multistart_grid(30, seed=1)
        b = multistart_grid(30, seed=1)
        assert a.shape == (30, 5)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(a[0], np.zeros(5))

    def test_grid_stays_inside_the_box(self):
        bounds = np.array([1.0, 0.5, 1.0, 1.0, 0.2])
        grid = multistart_grid(200, seed=3, bounds=bounds)
        assert np.all(np.abs(grid) < bounds)

    @pytest.mark.parametrize("bounds", [(1.0, 1.0, 1.0, 1.0), (1.0, 1.0, 0.0, 1.0, 1.0), (1.0, 1.0, np.inf, 1.0, 1.0)])
    def test_bad_bounds(self, bounds):
        with pytest.raises(ValueError):
            twist_bounds(bounds)

    def test_consistent_generator_exists(self):
        b = apply_twist_H(h14(2.0), H14_TWIST)
        report = certify_no_go(b, 4, model="17v2")
        assert report.verdict is Verdict.EXISTS
        assert report.order_failed is None
        assert report.details["trivial_twist_residual"] < 1e-9

    @pytest.mark.parametrize("xi", [0.0, 1.0, 3.0])
    def test_h14_generic_xi_is_obstructed(self, xi):
        report = certify_no_go(h14(xi), 6, threads=4, model="h14")
        assert report.verdict is Verdict.OBSTRUCTED
        assert report.details["best_residual"] > 1e-6
        assert "finite-order" in report.details["scope"]
        bounds = np.array(report.details["twist_bounds"])
        twist = report.twist_params
        found = np.abs([twist["sz_shift_beta"], twist["identity_shift_alpha"], *twist["telescope_A"][1:],
                        twist["grading_alpha"]])
        assert np.all(found <= bounds)

    def test_h14_at_xi_two_exists(self):
        report = certify_no_go(h14(2.0), 6, threads=4, model="h14")
        assert report.verdict is Verdict.EXISTS
        assert report.order_failed is None
        assert report.details["best_residual"] < 1e-10
        series = reconstruct_univariate(h14(2.0), 6, twist=TwistSpec(**report.twist_params))
        assert isinstance(series, UniSeries)

    def test_h14_at_xi_two_matches_the_seventeen_vertex_matrix(self):
        series = reconstruct_univariate(h14(2.0), 6, twist=H14_TWIST)
        oracle = series_coefficients(lambda u: v17_2_model(0.0).evaluator(np.sqrt(u)), 1.0, 0.25, 6)
        for k in range(7):
            np.testing.assert_allclose(series.coeffs[k], oracle[k], atol=1e-9)

    def test_growing_the_twist_does_not_hide_an_obstruction(self):
        h = h14(1.0)
        scale = max(1.0, np.abs(h).max())
        far = TwistSpec(telescope_A=[0.0, 4e7, 1e8], identity_shift_alpha=1e6, sz_shift_beta=1e7)
        twisted = apply_twist_H(h, far)
        coeffs, worst = [np.eye(9, dtype=complex)], 0.0
        for k in range(3):
            nxt, residual = idzumi_step(coeffs, twisted, scale=scale ** (k + 1))
            coeffs.append(nxt)
            worst = max(worst, residual)
        assert worst > 1e-6

