"""Eigenstructure of the iteration matrix and analytic convergence predictions."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

_SYM_TOL = 1e-9


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray  # sorted by descending |lambda|
    basis: np.ndarray        # orthonormal columns, same order
    lambda2: float
    spectral_gap: float
    consensus_vector: np.ndarray


@dataclass(frozen=True)
class CovariancePrediction:
    full: np.ndarray
    diagonal: np.ndarray
    lambda2_approx: np.ndarray
    bound: float
    epoch: int
    sigma0_sq: float


def jacobi_eigh(matrix, tol=1e-13, max_sweeps=60):
    """Cyclic Jacobi rotations for a symmetric matrix.

    Returns (eigenvalues, vectors) with vectors as columns.  Sweep order is
    fixed (row-major upper triangle) so the output is deterministic.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    scale = np.abs(a).max() or 1.0
    for _ in range(max_sweeps):
        off2 = float((np.triu(a, 1) ** 2).sum())
        if math.sqrt(2.0 * off2) <= tol * scale:
            return a.diagonal().copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                if abs(theta) > 1e150:  # theta^2 would overflow
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (
                        abs(theta) + math.sqrt(theta * theta + 1.0)
                    )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = a[:, p].copy()
                rot_q = a[:, q].copy()
                a[:, p] = c * rot_p - s * rot_q
                a[:, q] = s * rot_p + c * rot_q
                rot_p = a[p, :].copy()
                rot_q = a[q, :].copy()
                a[p, :] = c * rot_p - s * rot_q
                a[q, :] = s * rot_p + c * rot_q
                rot_p = v[:, p].copy()
                rot_q = v[:, q].copy()
                v[:, p] = c * rot_p - s * rot_q
                v[:, q] = s * rot_p + c * rot_q
    raise ConvergenceError("Jacobi sweeps did not reduce off-diagonal norm")


def _order_spectrum(values, vectors):
    # descending |lambda|, ties broken by descending signed value
    idx = sorted(range(len(values)),
                 key=lambda i: (-abs(values[i]), -values[i]))
    return values[idx], vectors[:, idx]


def eigendecompose_symmetric(matrix):
    """Full spectral decomposition of a (near-)symmetric matrix."""
    m = np.asarray(matrix, dtype=float)
    asym = np.abs(m - m.T).max()
    if asym > _SYM_TOL:
        raise DomainError(
            f"matrix asymmetry {asym:.3g} exceeds {_SYM_TOL:g}; use the "
            "power-method path for column-normalized matrices"
        )
    sym = 0.5 * (m + m.T)
    values, vectors = jacobi_eigh(sym)
    values, vectors = _order_spectrum(values, vectors)
    n = m.shape[0]
    # deterministic sign: make the largest-|.| component of each vector positive
    for k in range(n):
        lead = np.abs(vectors[:, k]).argmax()
        if vectors[lead, k] < 0:
            vectors[:, k] = -vectors[:, k]
    lambda2 = float(values[1]) if n > 1 else 0.0
    return SpectralSummary(
        eigenvalues=values,
        basis=vectors,
        lambda2=lambda2,
        spectral_gap=1.0 - abs(lambda2),
        consensus_vector=vectors[:, 0].copy(),
    )


def lambda2_power(matrix, tol=1e-10, max_iters=20000, return_details=False):
    """|lambda_2| by deflated power iteration.

    Works for non-symmetric column-stochastic matrices (the boundary-affected
    case), where the all-ones vector is a known left eigenvector of the unit
    eigenvalue.  Also serves as an independent check on the Jacobi path.
    With return_details, gives (value, iterations, last_step) instead.
    """
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    if n == 1:
        return (0.0, 0, 0.0) if return_details else 0.0
    ones = np.ones(n)

    # dominant (Perron) right eigenvector; for stochastic input lambda_1 = 1
    v1 = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iters):
        nxt = m @ v1
        nxt /= np.linalg.norm(nxt)
        if np.linalg.norm(nxt - v1) < 1e-14:
            v1 = nxt
            break
        v1 = nxt

    denom = float(ones @ v1)
    if abs(denom) < 1e-12:
        raise ConvergenceError("dominant eigenvector orthogonal to ones")

    def deflated(y):
        z = m @ y
        return z - v1 * (ones @ z) / denom

    rng = np.random.default_rng(12345)
    y = rng.standard_normal(n)
    y -= v1 * (ones @ y) / denom
    y /= np.linalg.norm(y)
    est_prev = None
    for it in range(max_iters):
        z = deflated(y)
        norm = np.linalg.norm(z)
        if norm < 1e-290:
            # deflation annihilated everything: lambda_2 = 0
            return (0.0, it, 0.0) if return_details else 0.0
        est = norm
        y = z / norm
        if est_prev is not None and abs(est - est_prev) <= tol * max(est, 1e-300):
            if return_details:
                return float(est), it + 1, abs(est - est_prev)
            return float(est)
        est_prev = est
    raise ConvergenceError(
        f"power iteration stalled after {max_iters} iterations; last two "
        f"estimates {est_prev:.12g}, {est:.12g} (lambda_2 may be nearly "
        "degenerate with lambda_3)"
    )


def markov_structure_check(matrix):
    """Aperiodicity (positive diagonal) and irreducibility (connected support)."""
    m = np.asarray(matrix, dtype=float)
    if np.any(m < 0):
        raise DomainError("expected a nonnegative matrix")
    n = m.shape[0]
    aperiodic = bool(np.any(m.diagonal() > 0))

    def reaches_all(adj):
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for j in np.nonzero(adj[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        return bool(seen.all())

    support = m > 0
    irreducible = reaches_all(support) and reaches_all(support.T)
    return {"aperiodic": aperiodic, "irreducible": irreducible}


def predict_covariance(iteration_entries, n_epoch, sigma0_sq, cov0_diag=None,
                       summary=None):
    """Analytic estimate covariance after n_epoch rounds.

    For independent initial estimates of common variance sigma0_sq the full
    covariance is sigma0_sq * Xt^(2n); an arbitrary diagonal initial
    covariance is supported as a generalization hook.  Requires a symmetric
    (doubly stochastic) matrix, where the two-mode approximation
    sigma0_sq * (1/N + v2_i^2 lambda2^(2n)) and the scalar bound
    sigma0_sq * (1/N + lambda2^(2n)) apply.  `summary` may carry a
    precomputed decomposition of the same matrix to skip the Jacobi solve.
    """
    m = np.asarray(iteration_entries, dtype=float)
    if np.abs(m - m.T).max() > _SYM_TOL:
        raise DomainError("covariance prediction requires a symmetric matrix")
    if n_epoch < 0:
        raise DomainError("epoch must be nonnegative")
    n = m.shape[0]
    power_n = np.linalg.matrix_power(m, n_epoch)
    if cov0_diag is None:
        full = sigma0_sq * (power_n @ power_n)
    else:
        full = power_n @ np.diag(np.asarray(cov0_diag, dtype=float)) @ power_n
    if summary is None:
        summary = eigendecompose_symmetric(m)
    lam2 = summary.lambda2
    v2 = summary.basis[:, 1] if n > 1 else np.zeros(n)
    decay = lam2 ** (2 * n_epoch)
    lambda2_approx = sigma0_sq * (1.0 / n + v2 ** 2 * decay)
    bound = sigma0_sq * (1.0 / n + decay)
    return CovariancePrediction(
        full=full,
        diagonal=full.diagonal().copy(),
        lambda2_approx=lambda2_approx,
        bound=float(bound),
        epoch=n_epoch,
        sigma0_sq=sigma0_sq,
    )


def matrix_power_column_variance(iteration_entries, n_epoch):
    """Sum over columns of the population variance of Xt^n's column entries.

    The convergence diagnostic for the boundary-affected case: it reaches
    zero exactly when all columns have collapsed to uniform vectors.
    """
    if n_epoch < 0:
        raise DomainError("epoch must be nonnegative")
    m = np.asarray(iteration_entries, dtype=float)
    power = np.linalg.matrix_power(m, n_epoch)
    return float(power.var(axis=0, ddof=0).sum())


def column_variance_series(iteration_entries, epochs):
    """matrix_power_column_variance for n = 0..epochs via incremental powers."""
    m = np.asarray(iteration_entries, dtype=float)
    power = np.eye(m.shape[0])
    out = []
    for _ in range(epochs + 1):
        out.append(float(power.var(axis=0, ddof=0).sum()))
        power = m @ power
    return out
