"""Tests for domain.rmatrix_catalog — closed-form R-matrices and spectral curves."""

import numpy as np
import pytest

from domain.errors import ModelParameterError, PoleProximityError
from domain.models import CurveBranch, CurvePoint, CurveSpec, TwistSpec
from domain.model_catalog import apply_twist_H, find_diagonal_gauge
from domain.rmatrix_catalog import (
    apply_twist_R,
    braid,
    curve_chart,
    curve_residual,
    curve_slope,
    derivative_hamiltonian,
    gb_from_hsb,
    hsb_pattern_residual,
    ik_hamiltonian,
    ik_R,
    ik_model,
    sample_curve,
    sb_model,
    sb_R,
    unbraid,
    v17_2_components,
    v17_2_hamiltonian,
    v17_2_model,
    v17_2_R,
    zf_hamiltonian,
    zf_model,
    zf_R,
)
from domain.tensor_core import ice_mask, permutation_operator
from domain.verifier import (
    draw_admissible,
    unitarity_check,
    ybe_residual_braided,
    ybe_residual_multiplicative,
    ybe_residual_rll,
)

SB_SPEC = CurveSpec(CurveBranch.SB, lambda4=0.3)


@pytest.fixture(scope="module")
def sb_points():
    return draw_admissible(sb_model(SB_SPEC), np.random.default_rng(11), 4)


class TestBraiding:
    def test_braid_then_unbraid(self):
        r = zf_R(0.7, 2)
        np.testing.assert_allclose(unbraid(braid(r)), r)

    def test_regular_point_is_permutation(self):
        np.testing.assert_allclose(zf_R(1.0, 2), permutation_operator(), atol=1e-14)
        np.testing.assert_allclose(ik_R(1.0, 2), permutation_operator(), atol=1e-14)


class TestRationalModels:
    """ZF and IK: regularity, poles, ice rule and YBE."""

    @pytest.mark.parametrize("factory", [zf_model, ik_model], ids=["zf", "ik"])
    def test_regular(self, factory):
        np.testing.assert_allclose(factory(2).evaluator(1.0), np.eye(9), atol=1e-14)

    @pytest.mark.parametrize("factory", [zf_model, ik_model], ids=["zf", "ik"])
    def test_ice_rule(self, factory):
        r = factory(2).evaluator(0.3 + 0.4j)
        assert np.max(np.abs(r[~ice_mask()])) == 0

    @pytest.mark.parametrize(
        "model",
        [zf_model(2), ik_model(2), ik_model(0.7 + 0.3j)],
        ids=["zf", "ik", "ik-complex-k"],
    )
    def test_multiplicative_ybe(self, model):
        assert ybe_residual_multiplicative(model.evaluator, 0.7 + 0.3j, 1.3 - 0.2j) < 1e-10

    @pytest.mark.parametrize("k", [2, 0.7 + 0.3j])
    def test_ik_unitarity(self, k):
        lam, residual = unitarity_check(ik_model(k).bivariate(), 1.4 + 0.2j, 0.8 - 0.3j)
        assert residual < 1e-10
        assert abs(lam) > 0

    def test_ik_printed_h_plus_breaks_the_ybe(self):
        printed = ik_model(2, verbatim=True)
        assert printed.name == "IK-verbatim"
        assert ybe_residual_multiplicative(printed.evaluator, 0.7 + 0.3j, 1.3 - 0.2j) > 1e-3
        _, residual = unitarity_check(printed.bivariate(), 2.0, 1.0)
        assert residual > 1e-3

    def test_ik_printed_h_plus_differs_by_a_factor_u(self):
        u = 0.7 + 0.2j
        fixed, printed = ik_R(u, 2), ik_R(u, 2, verbatim=True)
        changed = ~np.isclose(fixed, printed, rtol=0, atol=1e-14)
        assert changed.any()
        np.testing.assert_allclose(fixed[changed] / printed[changed], u)

    def test_zf_pole(self):
        with pytest.raises(PoleProximityError):
            zf_R(0.25, 2)

    def test_zf_degenerate_k(self):
        with pytest.raises(PoleProximityError):
            zf_model(1.0)

    def test_ik_degenerate_k(self):
        with pytest.raises(PoleProximityError):
            ik_model(-1.0)

    @pytest.mark.parametrize(
        "model, exact",
        [(zf_model(2), zf_hamiltonian(2)), (ik_model(2), ik_hamiltonian(2))],
        ids=["zf", "ik"],
    )
    def test_exact_hamiltonian_matches_finite_difference(self, model, exact):
        np.testing.assert_allclose(derivative_hamiltonian(model), exact, atol=1e-8)

    def test_richardson_error_estimate(self):
        _, error = derivative_hamiltonian(zf_model(2), return_error=True)
        assert error < 1e-6


class TestSeventeenVertex:
    """17V2: a two-term Laurent polynomial in z."""

    def test_components(self):
        a, b = v17_2_components(0.3)
        z = 0.8 + 0.5j
        np.testing.assert_allclose(braid(v17_2_R(z, 0.3)), z * a - b / z, atol=1e-14)

    def test_normalized_model_is_regular(self):
        np.testing.assert_allclose(v17_2_model(0.3).evaluator(1.0), np.eye(9), atol=1e-14)

    def test_raw_model_keeps_the_scale(self):
        raw = v17_2_model(0.3, normalized=False)
        assert raw.evaluator(1.0)[0, 0] == pytest.approx(0.7)

    def test_ybe(self):
        assert ybe_residual_multiplicative(v17_2_model(0.3).evaluator, 0.9 + 0.4j, 1.2 - 0.3j) < 1e-10

    def test_hamiltonian(self):
        np.testing.assert_allclose(derivative_hamiltonian(v17_2_model(0.3)), v17_2_hamiltonian(0.3), atol=1e-8)

    def test_theta_one_is_degenerate(self):
        with pytest.raises(PoleProximityError):
            v17_2_hamiltonian(1.0)

    def test_z_zero(self):
        with pytest.raises(PoleProximityError):
            v17_2_R(0.0, 0.3)

    def test_unnormalized_model_is_not_regular(self):
        with pytest.raises(ModelParameterError):
            derivative_hamiltonian(v17_2_model(0.3, normalized=False))


class TestSpectralCurve:
    """SB and MB curves: sampling, slopes and charts."""

    def test_base_point_on_sb_curve(self):
        assert curve_residual(CurvePoint(1.0, 0.0), SB_SPEC) == 0.0

    def test_sample_curve_residuals(self):
        points = sample_curve(SB_SPEC, 0.8 + 0.3j)
        assert points
        assert all(curve_residual(p, SB_SPEC) <= 1e-10 for p in points)

    def test_sample_curve_includes_base(self):
        points = sample_curve(SB_SPEC, 1.0)
        assert min(abs(p.b) for p in points) < 1e-10

    def test_slope_at_base(self):
        assert curve_slope(CurvePoint(1.0, 0.0), SB_SPEC) == pytest.approx(-4 / 0.3)

    def test_chart_stays_on_curve(self):
        chart = curve_chart(SB_SPEC, CurvePoint(1.0, 0.0))
        for t in (0.005, -0.01, 0.008j):
            assert curve_residual(chart(t), SB_SPEC) < 1e-10

    def test_mb_curve_sampling(self):
        spec = CurveSpec(CurveBranch.MB, alpha=2.0, beta=1.5)
        points = sample_curve(spec, 0.9)
        assert all(curve_residual(p, spec) <= 1e-10 for p in points)


class TestSpecialBranch:
    def test_regular(self):
        x = sample_curve(SB_SPEC, 0.9 + 0.2j)[0]
        np.testing.assert_allclose(braid(sb_R(x, x)), np.eye(9), atol=1e-12)

    def test_model_requires_sb_curve(self):
        with pytest.raises(ModelParameterError):
            sb_model(CurveSpec(CurveBranch.MB, alpha=2.0, beta=1.5))

    def test_hamiltonian_pattern(self):
        h = derivative_hamiltonian(sb_model(SB_SPEC))
        assert hsb_pattern_residual(h) < 1e-6

    def test_braided_ybe(self, sb_points):
        x, y, z, _ = sb_points
        assert ybe_residual_braided(sb_model(SB_SPEC).bivariate(), x, y, z) < 1e-9

    def test_rll(self, sb_points):
        x, y, _, w = sb_points
        rb = sb_model(SB_SPEC).bivariate()

        def r(p, q):
            return unbraid(rb(p, q))

        assert ybe_residual_rll(r, r, x, y, w) < 1e-9

    def test_unitarity_and_lambda_symmetry(self, sb_points):
        x, y, _, _ = sb_points
        rb = sb_model(SB_SPEC).bivariate()
        lam_xy, residual = unitarity_check(rb, x, y)
        lam_yx, _ = unitarity_check(rb, y, x)
        assert residual < 1e-9
        assert abs(lam_xy - lam_yx) <= 1e-9 * max(1.0, abs(lam_xy))

    @pytest.mark.parametrize("t", [0.04 * np.exp(2j * np.pi * n / 10) for n in range(10)])
    def test_hamiltonian_is_a_gauged_generalized_bariev(self, t):
        model = sb_model(SB_SPEC)
        point = curve_chart(SB_SPEC, model.base)(t)
        h = derivative_hamiltonian(model, base=point)
        assert hsb_pattern_residual(h) < 1e-6
        fit = find_diagonal_gauge(h, gb_from_hsb(h), tol=1e-8)
        assert fit.success, fit.message


class TestTwistR:
    """R-level twists reproduce the Hamiltonian-level transformation."""

    def test_gauge_and_telescope(self):
        model = zf_model(2)
        twist = TwistSpec(gauge_g=np.diag([1.0, 1.3, 0.8]), telescope_A=[0.0, 0.2, -0.1], identity_shift_alpha=0.4)
        twisted = apply_twist_R(model, twist)
        expected = apply_twist_H(zf_hamiltonian(2), twist)
        np.testing.assert_allclose(derivative_hamiltonian(twisted), expected, atol=1e-7)

    def test_sz_shift_has_no_r_counterpart(self):
        with pytest.raises(ModelParameterError):
            apply_twist_R(zf_model(2), TwistSpec(sz_shift_beta=1.0))

    @pytest.mark.parametrize("seed", range(20))
    def test_random_twists_keep_the_ybe(self, seed):
        rng = np.random.default_rng(seed)
        twist = TwistSpec(
            gauge_g=np.diag(np.exp(0.3 * rng.normal(size=3))),
            grading_alpha=0.2 * rng.normal(),
            telescope_A=list(0.3 * rng.normal(size=3)),
            identity_shift_alpha=0.3 * rng.normal(),
        )
        twisted = apply_twist_R(zf_model(2), twist)
        rb = twisted.bivariate()
        x, y, z = 1.1 + 0.1j, 0.9 - 0.2j, 1.2 + 0.05j
        assert ybe_residual_braided(rb, x, y, z) < 1e-10
        _, residual = unitarity_check(rb, x, y)
        assert residual < 1e-10
        expected = apply_twist_H(zf_hamiltonian(2), twist)
        np.testing.assert_allclose(derivative_hamiltonian(twisted), expected, atol=1e-7)
