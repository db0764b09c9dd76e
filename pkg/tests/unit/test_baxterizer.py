"""Tests for domain.baxterizer — algebra fits and Baxterized R-matrices."""

import numpy as np
import pytest

from domain.baxterizer import (
    bmw_baxterize,
    bmw_fit,
    braid_relation_residual,
    braid_shift,
    detect_families,
    eigen_clusters,
    hecke_baxterize,
    hecke_fit,
    minimal_polynomial_residual,
    passing_families,
    tl_baxterize,
    tl_fit,
)
from domain.errors import AlgebraFitError, PoleProximityError
from domain.models import AlgebraFamily
from domain.rmatrix_catalog import braid, v17_2_hamiltonian, v17_2_R, zf_R
from domain.tensor_core import permutation_operator
from domain.verifier import ybe_residual_multiplicative


@pytest.fixture(scope="module")
def tl_generator():
    """e = |v><v| with v = |02> + |11> + |20>, so e^2 = 3e."""
    v = np.zeros(9, dtype=complex)
    v[[2, 4, 6]] = 1
    return np.outer(v, v)


@pytest.fixture(scope="module")
def random_9x9():
    rng = np.random.default_rng(8)
    return rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))


@pytest.fixture(scope="module")
def hecke_17v2():
    return hecke_fit(v17_2_hamiltonian(0.3))


@pytest.fixture(scope="module")
def bmw_zf():
    """Braid limit of ZF at k = 1.3."""
    return bmw_fit(braid(zf_R(0.0, 1.3)), 1e-8)


def proportionality_residual(a, b) -> float:
    c = np.vdot(b.ravel(), a.ravel()) / np.vdot(b.ravel(), b.ravel())
    return float(np.max(np.abs(a - c * b)) / np.max(np.abs(a)))


class TestSpectralHelpers:
    def test_braid_relation_of_permutation(self):
        assert braid_relation_residual(permutation_operator()) < 1e-15

    def test_braid_relation_of_random_matrix(self, random_9x9):
        assert braid_relation_residual(random_9x9) > 1e-3

    def test_eigen_clusters(self, tl_generator):
        clusters = sorted(eigen_clusters(tl_generator), key=lambda c: c[0].real)
        assert [m for _, m in clusters] == [8, 1]
        assert clusters[0][0] == pytest.approx(0, abs=1e-12)
        assert clusters[1][0] == pytest.approx(3)

    def test_minimal_polynomial(self, tl_generator):
        assert minimal_polynomial_residual(tl_generator, [0, 3]) < 1e-14
        assert minimal_polynomial_residual(tl_generator, [0]) > 0.1

    def test_braid_shift_roots(self, tl_generator):
        r, residual = braid_shift(tl_generator)
        assert residual < 1e-12
        assert abs(r * r + 3 * r + 1) < 1e-10


class TestTemperleyLieb:
    """Spin-1 singlet-type projector."""

    def test_fit(self, tl_generator):
        fit = tl_fit(tl_generator)
        assert fit.family is AlgebraFamily.TL
        assert fit.constants["a"] == pytest.approx(1.5)
        np.testing.assert_allclose(fit.generator, tl_generator, atol=1e-12)

    def test_affine_map_reproduces_the_generator(self, tl_generator):
        fit = tl_fit(tl_generator)
        np.testing.assert_allclose(
            fit.alpha_scale * tl_generator + fit.beta_shift * np.eye(9), fit.generator, atol=1e-12
        )

    def test_baxterization_solves_ybe(self, tl_generator):
        fit = tl_fit(tl_generator)
        assert ybe_residual_multiplicative(lambda z: tl_baxterize(fit, z), 1.4 + 0.3j, 0.6 - 0.2j) < 1e-10

    def test_pole_at_one(self, tl_generator):
        fit = tl_fit(tl_generator)
        with pytest.raises(PoleProximityError):
            tl_baxterize(fit, 1.0005)

    def test_random_matrix_fails(self, random_9x9):
        with pytest.raises(AlgebraFitError):
            tl_fit(random_9x9)


class TestHecke:
    """The 17V2 generator is a Hecke element."""

    def test_relations(self, hecke_17v2):
        assert hecke_17v2.family is AlgebraFamily.HECKE
        assert hecke_17v2.residuals["braid"] < 1e-10
        assert hecke_17v2.residuals["hecke"] < 1e-10
        q = hecke_17v2.constants["q"]
        assert hecke_17v2.constants["xi"] == pytest.approx(q - 1 / q)

    def test_baxterization_solves_ybe(self, hecke_17v2):
        assert ybe_residual_multiplicative(lambda z: hecke_baxterize(hecke_17v2, z), 1.2 + 0.4j, 0.7 - 0.3j) < 1e-10

    def test_baxterization_matches_17v2(self, hecke_17v2):
        z = 1.3 + 0.2j
        r = hecke_baxterize(hecke_17v2, z)
        residual = min(
            proportionality_residual(r, braid(v17_2_R(z, 0.3))),
            proportionality_residual(r, braid(v17_2_R(1 / z, 0.3))),
        )
        assert residual < 1e-8

    def test_z_zero(self, hecke_17v2):
        with pytest.raises(PoleProximityError):
            hecke_baxterize(hecke_17v2, 0.0)

    def test_random_matrix_fails(self, random_9x9):
        with pytest.raises(AlgebraFitError):
            hecke_fit(random_9x9)


class TestBMW:
    """A ZF braid limit carries three eigenvalues and satisfies the BMW relations."""

    def test_constants(self, bmw_zf):
        assert bmw_zf.family is AlgebraFamily.BMW
        assert set(bmw_zf.constants) == {"q", "a", "xi"}
        assert max(bmw_zf.residuals.values()) <= 1e-8

    def test_baxterization_solves_ybe(self, bmw_zf):
        def r(x):
            return bmw_baxterize(bmw_zf, np.sqrt(complex(x)))

        assert ybe_residual_multiplicative(r, 1.3 + 0.2j, 0.7 - 0.1j) < 1e-8

    def test_bad_sign(self, bmw_zf):
        with pytest.raises(ValueError):
            bmw_baxterize(bmw_zf, 1.3, sign="0")

    def test_two_eigenvalues_are_not_enough(self, tl_generator):
        with pytest.raises(AlgebraFitError):
            bmw_fit(tl_generator)


class TestDetection:
    def test_random_matrix_fits_nothing(self, random_9x9):
        results = detect_families(random_9x9)
        assert set(results) == set(AlgebraFamily)
        assert all(isinstance(v, AlgebraFitError) for v in results.values())
        assert passing_families(random_9x9) == []

    def test_tl_generator_is_detected(self, tl_generator):
        families = {fit.family for fit in passing_families(tl_generator)}
        assert AlgebraFamily.TL in families
        assert AlgebraFamily.BMW not in families
