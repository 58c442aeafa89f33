import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molconsensus.errors import DomainError
from molconsensus.kernel import MediumParams
from molconsensus.matrix import UNIFORM_S, build_x, normalize, sparsify
from molconsensus.network import wrapped_line_network
from molconsensus.spectral import (column_variance_series,
                                   eigendecompose_symmetric, jacobi_eigh,
                                   lambda2_power, markov_structure_check,
                                   matrix_power_column_variance,
                                   predict_covariance)

MED2 = MediumParams(2, 1.0, 0.1)
TWO_NODE = np.array([[0.6, 0.4], [0.4, 0.6]])


def ring_chain(alpha, beta, n=8):
    """Symmetric doubly stochastic: alpha*I + beta*(C + C^T)/2 + rest*J/n."""
    c = np.roll(np.eye(n), 1, axis=1)
    rest = 1.0 - alpha - beta
    return alpha * np.eye(n) + beta * 0.5 * (c + c.T) + rest * np.ones((n, n)) / n


def wrapped_xt(n=24, n_prime=5, t0=1.0):
    x = build_x(wrapped_line_network(n, 1.0, MED2), t0)
    if n_prime is not None:
        x = sparsify(x, n_prime)
    return normalize(x, UNIFORM_S)


class TestEigendecompose:
    def test_identity(self):
        s = eigendecompose_symmetric(np.eye(4))
        assert np.allclose(s.eigenvalues, 1.0)
        # any orthonormal basis is acceptable; check residuals instead
        assert np.abs(s.basis.T @ s.basis - np.eye(4)).max() < 1e-9

    def test_two_node_hand_values(self):
        # characteristic polynomial lambda^2 - 1.2 lambda + 0.2
        s = eigendecompose_symmetric(TWO_NODE)
        assert s.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
        assert s.eigenvalues[1] == pytest.approx(0.2, abs=1e-12)
        assert np.allclose(np.abs(s.consensus_vector), 1 / np.sqrt(2))

    def test_perron_frobenius_on_wrapped_line(self):
        s = eigendecompose_symmetric(wrapped_xt().entries)
        assert s.eigenvalues[0] == pytest.approx(1.0, abs=1e-10)
        assert np.abs(s.consensus_vector - 1 / np.sqrt(24)).max() < 1e-8
        assert abs(s.lambda2) < 1.0

    def test_residuals_and_orthonormality(self):
        m = wrapped_xt(12, 4).entries
        s = eigendecompose_symmetric(m)
        assert np.abs(s.basis.T @ s.basis - np.eye(12)).max() < 1e-9
        for k in range(12):
            resid = m @ s.basis[:, k] - s.eigenvalues[k] * s.basis[:, k]
            assert np.abs(resid).max() <= 1e-9 * np.abs(m).max()

    def test_rejects_asymmetric(self):
        m = np.array([[0.5, 0.4], [0.6, 0.5]])
        with pytest.raises(DomainError):
            eigendecompose_symmetric(m)

    def test_jacobi_matches_numpy(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(9, 9))
        a = a + a.T
        vals, _ = jacobi_eigh(a)
        assert np.allclose(np.sort(vals), np.linalg.eigvalsh(a), atol=1e-10)


class TestLambda2Power:
    def test_two_node(self):
        assert lambda2_power(TWO_NODE) == pytest.approx(0.2, abs=1e-8)

    def test_identity_keeps_unit_eigenvalue(self):
        assert lambda2_power(np.eye(5)) == pytest.approx(1.0, abs=1e-12)

    def test_agrees_with_jacobi(self):
        for alpha, beta in [(0.3, 0.4), (0.5, 0.2), (0.1, 0.6)]:
            m = ring_chain(alpha, beta)
            full = abs(eigendecompose_symmetric(m).lambda2)
            assert lambda2_power(m, tol=1e-12) == pytest.approx(full, abs=1e-8)

    def test_nonsymmetric_column_stochastic(self):
        # column-normalized boundary case; compare against the similar
        # symmetric matrix D^{-1/2} X D^{-1/2}
        from molconsensus.network import line_network
        x = build_x(line_network(8, 1.0, MED2), 1.0)
        xt = normalize(x)
        d = x.entries.sum(axis=0)
        sym = x.entries / np.sqrt(np.outer(d, d))
        ref = np.sort(np.abs(np.linalg.eigvalsh(sym)))[-2]
        assert lambda2_power(xt.entries, tol=1e-12) == pytest.approx(ref, abs=1e-8)


class TestMarkovStructure:
    def test_identity(self):
        checks = markov_structure_check(np.eye(3))
        assert checks["aperiodic"] and not checks["irreducible"]

    def test_dense_positive(self):
        checks = markov_structure_check(np.full((4, 4), 0.25))
        assert checks["aperiodic"] and checks["irreducible"]

    def test_block_diagonal(self):
        m = np.block([[TWO_NODE, np.zeros((2, 2))],
                      [np.zeros((2, 2)), TWO_NODE]])
        assert not markov_structure_check(m)["irreducible"]

    def test_zero_diagonal_cycle_not_aperiodic_flagged(self):
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert not markov_structure_check(swap)["aperiodic"]


class TestPredictCovariance:
    def test_epoch_zero_is_initial_covariance(self):
        pred = predict_covariance(TWO_NODE, 0, 2.5)
        assert np.allclose(pred.full, 2.5 * np.eye(2))

    def test_two_node_first_epoch(self):
        pred = predict_covariance(TWO_NODE, 1, 1.0)
        assert np.allclose(pred.diagonal, 0.52)
        assert np.allclose(pred.lambda2_approx, 0.5 + 0.5 * 0.2 ** 2)
        assert pred.bound == pytest.approx(0.5 + 0.04)

    def test_large_epoch_reaches_floor(self):
        xt = wrapped_xt(8, 4)
        pred = predict_covariance(xt.entries, 2000, 1.0)
        assert np.abs(pred.diagonal - 1 / 8).max() < 1e-10

    def test_positive_semidefinite_and_floor(self):
        xt = wrapped_xt(10, 3)
        for n in (0, 1, 3, 10):
            pred = predict_covariance(xt.entries, n, 1.0)
            assert np.allclose(pred.full, pred.full.T)
            assert np.linalg.eigvalsh(pred.full).min() > -1e-12
            assert pred.diagonal.min() >= 1.0 / 10 - 1e-12

    def test_general_initial_covariance_hook(self):
        cov0 = np.array([1.0, 2.0])
        pred = predict_covariance(TWO_NODE, 1, 1.0, cov0_diag=cov0)
        ref = TWO_NODE @ np.diag(cov0) @ TWO_NODE
        assert np.allclose(pred.full, ref)

    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            predict_covariance(np.array([[0.5, 0.4], [0.6, 0.5]]), 1, 1.0)

    @given(alpha=st.floats(0.05, 0.5), beta=st.floats(0.05, 0.4),
           n=st.integers(0, 12))
    @settings(max_examples=25, deadline=None)
    def test_two_mode_approximation_error_bound(self, alpha, beta, n):
        m = ring_chain(alpha, beta)
        s = eigendecompose_symmetric(m)
        lam3 = abs(s.eigenvalues[2])
        pred = predict_covariance(m, n, 1.0)
        slack = lam3 ** (2 * n) * (8 - 2) + 1e-10
        assert np.abs(pred.diagonal - pred.lambda2_approx).max() <= slack
        assert pred.diagonal.max() <= pred.bound + 1e-12


class TestColumnVariance:
    def test_epoch_zero_value(self):
        for n in (2, 5, 9):
            got = matrix_power_column_variance(np.eye(n), 0)
            assert got == pytest.approx((n - 1) / n)

    def test_vanishes_for_mixing_matrix(self):
        xt = wrapped_xt(8, 4)
        assert matrix_power_column_variance(xt.entries, 4000) < 1e-12

    def test_nonnegative_and_series_consistent(self):
        xt = wrapped_xt(10, 3)
        series = column_variance_series(xt.entries, 6)
        assert all(v >= 0 for v in series)
        for n, v in enumerate(series):
            assert v == pytest.approx(matrix_power_column_variance(xt.entries, n))

    def test_identity_is_constant(self):
        series = column_variance_series(np.eye(6), 5)
        assert all(v == pytest.approx(series[0]) for v in series)


class TestSpectralProperties:
    def test_spectral_mapping(self):
        rng = np.random.default_rng(3)
        for _ in range(4):
            alpha, beta = rng.uniform(0.1, 0.4, size=2)
            m = ring_chain(alpha, beta, n=10)
            s = eigendecompose_symmetric(m)
            for n in (2, 5, 20):
                direct = np.sort(np.abs(jacobi_eigh(
                    np.linalg.matrix_power(m, n))[0]))
                mapped = np.sort(np.abs(s.eigenvalues ** n))
                assert np.abs(direct - mapped).max() < 1e-8

    def test_sparsity_lambda2_trend(self):
        lams = [abs(eigendecompose_symmetric(wrapped_xt(24, np_).entries).lambda2)
                for np_ in (2, 4, 8, 16, 23)]
        assert all(a >= b - 1e-12 for a, b in zip(lams, lams[1:]))

    def test_diagonal_limit(self):
        s = eigendecompose_symmetric(np.eye(6))
        assert s.lambda2 == pytest.approx(1.0)
