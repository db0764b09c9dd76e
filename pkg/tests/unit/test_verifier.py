"""Tests for domain.verifier — residual checks and seeded verification reports."""

import numpy as np
import pytest

from domain.errors import PoleProximityError
from domain.model_catalog import build_chain, h14
from domain.models import CurveBranch, CurveSpec
from domain.rmatrix_catalog import ik_model, sb_model, unbraid, v17_2_model, zf_hamiltonian, zf_model
from domain.tensor_core import permutation_operator
from domain.verifier import (
    draw_admissible,
    extract_hamiltonian,
    hamiltonian_pair_residual,
    ice_rule_check,
    mutate_model,
    regularity_check,
    transfer_commutation,
    transfer_matrix,
    unitarity_check,
    verify_model,
    ybe_residual_braided,
    ybe_residual_multiplicative,
    ybe_residual_rll,
)


@pytest.fixture(scope="module")
def zf():
    return zf_model(2)


def non_braided(model):
    rb = model.bivariate()
    return lambda x, y: unbraid(rb(x, y))


class TestResiduals:
    """Point checks on the ZF model, which satisfies every identity."""

    def test_multiplicative_ybe(self, zf):
        assert ybe_residual_multiplicative(zf.evaluator, 0.8 + 0.3j, 1.2 - 0.4j) < 1e-10

    def test_braided_ybe_through_the_bivariate_shim(self, zf):
        assert ybe_residual_braided(zf.bivariate(), 1.1 + 0.2j, 0.9 - 0.3j, 1.4 + 0.1j) < 1e-10

    def test_rll(self, zf):
        r = non_braided(zf)
        assert ybe_residual_rll(r, r, 1.1 + 0.2j, 0.9 - 0.3j, 1.4 + 0.1j) < 1e-9

    def test_unitarity(self, zf):
        lam, residual = unitarity_check(zf.bivariate(), 1.2 + 0.3j, 0.8 - 0.1j)
        assert residual < 1e-10
        assert abs(lam) > 0

    def test_regularity(self, zf):
        assert regularity_check(zf.bivariate(), 1.3 + 0.2j) < 1e-14

    def test_ybe_fails_for_a_generic_matrix(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(9, 9))
        assert ybe_residual_multiplicative(lambda u: u * np.eye(9) + m, 1.2, 0.7) > 1e-3


class TestIceRule:
    def test_chain_conserves_sz(self):
        assert ice_rule_check(build_chain(h14(1.0), 3)) == 0.0

    def test_violation_is_reported(self):
        m = np.eye(9)
        m[0, 1] = 0.25
        assert ice_rule_check(m) == 0.25


class TestTransferMatrix:
    """Commuting transfer matrices built from the non-braided R."""

    def test_permutation_gives_the_shift(self):
        t = transfer_matrix(lambda x, y: permutation_operator(), 1.0, [1.0, 1.0])
        np.testing.assert_allclose(t, permutation_operator())

    def test_shape(self, zf):
        assert transfer_matrix(non_braided(zf), 1.2, [1.0] * 3).shape == (27, 27)

    def test_commutation(self, zf):
        assert transfer_commutation(non_braided(zf), 0.8 + 0.2j, 1.3 - 0.1j, 0.9 + 0.1j, 3) < 1e-10

    def test_site_limit(self, zf):
        with pytest.raises(ValueError):
            transfer_commutation(non_braided(zf), 0.8, 1.3, 0.9, 5)


class TestHamiltonianExtraction:
    def test_extract_matches_exact(self, zf):
        np.testing.assert_allclose(extract_hamiltonian(zf), zf_hamiltonian(2), atol=1e-8)

    def test_pair_residual(self, zf):
        assert hamiltonian_pair_residual(zf) < 1e-7


class TestSampling:
    def test_draw_admissible_is_seeded(self, zf):
        a = draw_admissible(zf, np.random.default_rng(3), 3)
        b = draw_admissible(zf, np.random.default_rng(3), 3)
        assert a == b
        assert len(a) == 3

    def test_points_stay_in_the_annulus(self, zf):
        pts = draw_admissible(zf, np.random.default_rng(4), 4, annulus=(0.5, 2.0))
        assert all(0.5 <= abs(p) <= 2.0 for p in pts)

    def test_impossible_bound_raises(self, zf):
        with pytest.raises(PoleProximityError):
            draw_admissible(zf, np.random.default_rng(1), 2, max_entry=1e-6)


class TestVerifyModel:
    """Seeded verification reports."""

    def test_zf_passes(self, zf):
        report = verify_model(zf, samples=10, seed=7, transfer_samples=2)
        assert report.passed
        names = {c.check_name for c in report.checks}
        assert {"ybe", "unitarity", "regularity", "ice_rule", "transfer_commutation", "hamiltonian_pair"} <= names

    @pytest.mark.parametrize(
        "model",
        [ik_model(2), v17_2_model(0.3), sb_model(CurveSpec(CurveBranch.SB, lambda4=0.3))],
        ids=["ik", "v17_2", "sb"],
    )
    def test_catalogued_models_pass(self, model):
        report = verify_model(model, samples=8, seed=7, transfer_samples=2)
        assert report.passed, [c.check_name for c in report.checks if not c.passed]

    def test_printed_ik_entries_fail(self):
        report = verify_model(ik_model(2, verbatim=True), samples=5, seed=7, transfer_samples=0)
        by_name = {c.check_name: c for c in report.checks}
        assert not by_name["ybe"].passed
        assert not by_name["unitarity"].passed

    def test_deterministic_across_threads(self, zf):
        serial = verify_model(zf, samples=6, seed=11, transfer_samples=1)
        parallel = verify_model(zf, samples=6, seed=11, transfer_samples=1, threads=2)
        assert [c.max_residual for c in serial.checks] == [c.max_residual for c in parallel.checks]
        assert [c.worst_point for c in serial.checks] == [c.worst_point for c in parallel.checks]

    def test_mutated_model_fails_ybe(self, zf):
        report = verify_model(mutate_model(zf), samples=5, seed=7, transfer_samples=0)
        by_name = {c.check_name: c for c in report.checks}
        assert not report.passed
        assert not by_name["ybe"].passed
        assert by_name["regularity"].passed

    def test_mutation_keeps_the_regular_point(self, zf):
        np.testing.assert_allclose(mutate_model(zf).evaluator(1.0), np.eye(9), atol=1e-14)
