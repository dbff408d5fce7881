import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import random_symplectic
from gaussqkd.exceptions import ParameterError, UnphysicalStateError
from gaussqkd.states import (
    CovarianceMatrix,
    LambdaMatrix,
    apply,
    direct_sum,
    heterodyne_condition,
    outcome_covariance,
    su_mm_coherent_state,
    thermal,
    tmss,
    vacuum,
)
from gaussqkd.symplectic import ModeTag, SymplecticTransform, beamsplitter, two_mode_squeezer

I2 = np.eye(2)
Z = np.diag([1.0, -1.0])


class TestCovarianceMatrix:
    def test_rejects_asymmetric(self):
        with pytest.raises(ParameterError):
            CovarianceMatrix(np.array([[1.0, 0.1], [0.0, 1.0]]), (ModeTag.U,))

    def test_rejects_uncertainty_violation(self):
        # x and p both squeezed
        with pytest.raises(UnphysicalStateError):
            CovarianceMatrix(np.diag([0.5, 0.5]), (ModeTag.U,))

    def test_accepts_squeezed_single_mode(self):
        state = CovarianceMatrix(np.diag([0.25, 4.0]), (ModeTag.U,))
        assert np.allclose(state.symplectic_eigenvalues(), [1.0])

    def test_tag_count_checked(self):
        with pytest.raises(ParameterError):
            CovarianceMatrix(np.eye(4), (ModeTag.U,))

    def test_matrix_is_read_only(self):
        with pytest.raises(ValueError):
            vacuum(1).matrix[0, 0] = 2.0

    def test_reorder_and_block(self):
        state = direct_sum(thermal(2.0), thermal(3.0, ModeTag.UBAR))
        swapped = state.reorder([1, 0])
        assert np.allclose(swapped.block(0, 0), 3 * I2)
        assert swapped.mode_tags == (ModeTag.UBAR, ModeTag.U)
        assert np.allclose(state.marginal([1]).matrix, 3 * I2)


class TestConstructors:
    @pytest.mark.parametrize("d", [1, 4])
    def test_vacuum(self, d):
        state = vacuum(d)
        assert np.array_equal(state.matrix, np.eye(2 * d))
        assert np.array_equal(state.symplectic_eigenvalues(), np.ones(d))

    def test_tmss_unit_variance_is_vacuum(self):
        assert np.allclose(tmss(1.0).matrix, np.eye(4))

    def test_tmss_off_diagonal(self):
        assert np.allclose(tmss(3.0).block(0, 1), np.sqrt(8) * Z)

    @pytest.mark.parametrize("v", [1.0, 1.5, 3.0, 40.0])
    def test_tmss_equals_squeezed_vacuum(self, v):
        s = two_mode_squeezer((v + 1) / 2).matrix
        assert np.allclose(tmss(v).matrix, s @ s.T, rtol=1e-13, atol=1e-13)

    def test_tmss_default_tags(self):
        assert tmss(2.0).mode_tags == (ModeTag.U, ModeTag.UBAR)

    def test_bad_variances(self):
        with pytest.raises(ParameterError):
            tmss(0.9)
        with pytest.raises(ParameterError):
            thermal(0.5)


class TestApply:
    def test_identity(self):
        state = tmss(2.5)
        out = apply(SymplecticTransform(np.eye(4)), state)
        assert np.array_equal(out.matrix, state.matrix)

    def test_beamsplitter_step_of_two_way_circuit(self):
        # (A1'', C1, B1', B1): Alice's mode after the channel, Bob's TMSS
        v, vp, tau, xi, T = 2.0, 1.5, 0.8, 0.05, 0.3
        z, zp = np.sqrt(v * (v + 2)), np.sqrt(vp * (vp + 2))
        gamma = np.eye(8)
        gamma[0:2, 0:2] += v * I2
        gamma[0:2, 2:4] = gamma[2:4, 0:2] = np.sqrt(tau) * z * Z
        gamma[2:4, 2:4] += tau * (v + xi) * I2
        gamma[4:6, 4:6] += vp * I2
        gamma[6:8, 6:8] += vp * I2
        gamma[4:6, 6:8] = gamma[6:8, 4:6] = zp * Z
        state = CovarianceMatrix(gamma, (ModeTag.U,) * 4)
        # C2 = sqrt(T) C1 + sqrt(1-T) B1', B2 = sqrt(T) B1' - sqrt(1-T) C1
        out = apply(beamsplitter(T, (2, 1), 4), state).matrix
        expect = {
            (1, 1): T * tau * (v + xi) + (1 - T) * vp + 1,
            (2, 2): (1 - T) * tau * (v + xi) + T * vp + 1,
            (1, 2): -np.sqrt(T * (1 - T)) * (tau * (v + xi) - vp),
        }
        for (i, j), val in expect.items():
            assert np.allclose(out[2 * i : 2 * i + 2, 2 * j : 2 * j + 2], val * I2, atol=1e-12)
        assert np.allclose(out[0:2, 2:4], np.sqrt(T * tau) * z * Z)
        assert np.allclose(out[0:2, 4:6], -np.sqrt((1 - T) * tau) * z * Z)
        assert np.allclose(out[2:4, 6:8], np.sqrt(1 - T) * zp * Z)
        assert np.allclose(out[4:6, 6:8], np.sqrt(T) * zp * Z)

    def test_mode_count_mismatch(self):
        with pytest.raises(ParameterError):
            apply(beamsplitter(0.5), vacuum(3))


@given(seed=st.integers(0, 10_000))
def test_apply_preserves_spectrum(seed):
    rng = np.random.default_rng(seed)
    state = direct_sum(thermal(1 + 3 * rng.random()), tmss(1 + 5 * rng.random()), vacuum(1))
    out = apply(SymplecticTransform(random_symplectic(rng, 4)), state)
    assert np.allclose(out.symplectic_eigenvalues(), state.symplectic_eigenvalues(), rtol=1e-8)


class TestHeterodyne:
    def test_product_state_is_untouched(self):
        state = direct_sum(thermal(2.0), thermal(5.0))
        assert np.allclose(heterodyne_condition(state, [1]).matrix, 2 * I2)

    @pytest.mark.parametrize("v", [1.0, 3.0, 50.0])
    def test_tmss_collapses_to_vacuum(self, v):
        assert np.allclose(heterodyne_condition(tmss(v), [1]).matrix, I2, atol=1e-10)

    def test_matches_dense_blockwise_oracle(self):
        VA = VB = 4.0
        gamma = oracles.closed_form_two_way(VA, VB, 0.5, 1.2, 0.9, 0.05, 0.9, 0.05)
        state = CovarianceMatrix(gamma, (ModeTag.U,) * 4)
        got = heterodyne_condition(state, [1]).matrix
        assert np.allclose(got, oracles.conditional_from_blocks(gamma, 1), atol=1e-12)

    def test_iterated_equals_joint_schur_complement(self, rng):
        s = random_symplectic(rng, 4)
        state = CovarianceMatrix(s @ np.diag(np.repeat(1 + rng.random(4), 2)) @ s.T, (ModeTag.U,) * 4)
        g = state.matrix
        meas, rest = [0, 1, 4, 5], [2, 3, 6, 7]
        a, b, c = g[np.ix_(meas, meas)], g[np.ix_(rest, rest)], g[np.ix_(meas, rest)]
        joint = b - c.T @ np.linalg.solve(a + np.eye(4), c)
        assert np.allclose(heterodyne_condition(state, [0, 2]).matrix, joint, rtol=1e-9, atol=1e-9)

    def test_keeps_tags_of_unmeasured(self):
        state = direct_sum(tmss(2.0), vacuum(1, (ModeTag.U,)))
        assert heterodyne_condition(state, [1]).mode_tags == (ModeTag.U, ModeTag.U)

    @pytest.mark.parametrize("measured", [[], [0, 1], [3]])
    def test_bad_subsets(self, measured):
        with pytest.raises(ParameterError):
            heterodyne_condition(tmss(2.0), measured)


class TestOutcomeCovariance:
    def test_vacuum(self):
        assert np.array_equal(outcome_covariance(vacuum(1)), I2)

    def test_tmss(self):
        expected = np.block([[2 * I2, np.sqrt(2) * Z], [np.sqrt(2) * Z, 2 * I2]])
        assert np.allclose(outcome_covariance(tmss(3.0)), expected)

    def test_linear_in_gamma(self):
        g = tmss(5.0).matrix
        assert np.allclose(outcome_covariance(g), 0.5 * (g + np.eye(4)))

    def test_positive_definite(self, rng):
        s = random_symplectic(rng, 3)
        assert np.linalg.eigvalsh(outcome_covariance(s @ s.T)).min() > 0


class TestSuMM:
    def test_zero_lambda_is_vacuum(self):
        assert np.allclose(su_mm_coherent_state(np.zeros((3, 3))).matrix, np.eye(12))

    def test_single_pair_is_tmss(self):
        assert np.allclose(su_mm_coherent_state(np.array([[0.5]])).matrix, tmss(5 / 3).matrix, atol=1e-14)

    def test_single_pair_matches_fock_series(self):
        got = su_mm_coherent_state(np.array([[0.5]])).matrix
        assert np.allclose(got, oracles.fock_covariance_single_pair(0.5, cutoff=40), atol=1e-6)

    def test_two_pairs_match_fock_series(self, rng):
        lam = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        lam *= 0.3 / np.linalg.norm(lam, 2)
        got = su_mm_coherent_state(lam).matrix
        assert np.allclose(got, oracles.fock_covariance_su_mm(lam, cutoff=12), atol=1e-7)

    def test_random_two_pair_state_is_pure(self, rng):
        lam = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        lam *= 0.6 / np.linalg.norm(lam, 2)
        nu = su_mm_coherent_state(lam).symplectic_eigenvalues()
        assert np.allclose(nu, 1.0, atol=1e-8)

    def test_tags(self):
        state = su_mm_coherent_state(np.zeros((2, 2)))
        assert state.mode_tags == (ModeTag.U, ModeTag.U, ModeTag.UBAR, ModeTag.UBAR)

    def test_rejects_norm_one(self):
        with pytest.raises(ParameterError):
            LambdaMatrix(np.array([[1.0]]))


@given(seed=st.integers(0, 10_000), m=st.integers(1, 3), norm=st.floats(0.0, 0.95))
def test_su_mm_always_pure(seed, m, norm):
    rng = np.random.default_rng(seed)
    lam = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    lam *= norm / np.linalg.norm(lam, 2)
    assert np.allclose(su_mm_coherent_state(lam).symplectic_eigenvalues(), 1.0, atol=1e-8)
