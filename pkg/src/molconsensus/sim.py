"""Consensus protocol engine: epoch loop, one-shot compact case, Monte Carlo."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import DomainError
from .spectral import eigendecompose_symmetric, predict_covariance

_SYM_TOL = 1e-9


@dataclass
class ConsensusState:
    estimates: np.ndarray
    epoch: int = 0

    def __post_init__(self):
        self.estimates = np.asarray(self.estimates, dtype=float)
        if not np.all(np.isfinite(self.estimates)):
            raise DomainError("estimates must be finite")


@dataclass(frozen=True)
class EpochSchedule:
    """Timing of one protocol round: emit for t0, then wait t0 to reset."""

    t0: float
    waiting_time: float

    @property
    def iteration_time(self):
        return self.t0 + self.waiting_time


@dataclass
class Trajectory:
    history: np.ndarray  # (epochs+1, N)
    converged: bool
    epochs: int
    criterion: str  # "average" or "spread"
    consensus_value: Optional[float] = None


@dataclass
class TrialEnsemble:
    trials: int
    seed: int
    mu: float
    sigma0_sq: float
    per_epoch_mean: np.ndarray      # (epochs+1, N)
    per_epoch_var: np.ndarray       # (epochs+1, N), sample variance
    per_epoch_cov: Optional[List[np.ndarray]]
    analytic: Optional[list]        # CovariancePrediction per epoch, or None
    negative_draws: int = 0


def compact_one_shot(rho0, x_center):
    """Average of the initial estimates via the single-round compact protocol.

    Each node emits at rho_j / (X_j N); the superposed concentration at the
    network center is then exactly the arithmetic mean.
    """
    rho = np.asarray(rho0, dtype=float)
    xc = np.asarray(x_center, dtype=float)
    if rho.shape != xc.shape:
        raise DomainError("estimate and response vectors must match in length")
    if np.any(xc <= 0):
        raise DomainError("center responses must all be positive")
    rates = rho / (xc * rho.shape[0])
    return float(np.dot(rates, xc))


def run_epoch(state, iteration):
    """One synchronous protocol round: estimates <- Xt @ estimates."""
    xt = iteration.entries
    if xt.shape[1] != state.estimates.shape[0]:
        raise DomainError("dimension mismatch between matrix and estimates")
    return ConsensusState(estimates=xt @ state.estimates, epoch=state.epoch + 1)


def run_until(state, iteration, tol=1e-8, max_epochs=10000):
    """Iterate to consensus, recording the full trajectory.

    With a doubly stochastic matrix the target is the initial average; the
    stopping test is max_i |rho_i - rho_av| <= tol * max(1, |rho_av|).  Other
    normalizations do not preserve the average, so the test switches to the
    spread max_i rho_i - min_i rho_i.  Exhausting max_epochs is reported via
    the converged flag, not an exception.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    use_average = iteration.doubly_stochastic
    rho_av = float(state.estimates.mean())
    history = [state.estimates.copy()]
    cur = state

    def done(est):
        if use_average:
            return np.abs(est - rho_av).max() <= tol * max(1.0, abs(rho_av))
        return float(est.max() - est.min()) <= tol

    converged = done(cur.estimates)
    while not converged and cur.epoch - state.epoch < max_epochs:
        cur = run_epoch(cur, iteration)
        history.append(cur.estimates.copy())
        converged = done(cur.estimates)

    final = history[-1]
    return Trajectory(
        history=np.array(history),
        converged=converged,
        epochs=len(history) - 1,
        criterion="average" if use_average else "spread",
        consensus_value=float(final.mean()) if converged else None,
    )


def monte_carlo(iteration, mu, sigma0_sq, trials, epochs, seed,
                keep_full_cov=None):
    """Seeded ensemble of consensus runs with Gaussian initial estimates.

    Draws are i.i.d. per node per trial from N(mu, sigma0_sq) using a PCG64
    generator; identical seeds reproduce the ensemble exactly.  Empirical
    per-epoch mean and variance are paired with the analytic covariance
    prediction whenever the matrix is symmetric (the regime where the
    prediction holds).  Gaussian draws can go negative even though physical
    concentrations cannot; these are counted, not rejected.
    """
    if trials < 2:
        raise DomainError("need at least two trials")
    if sigma0_sq < 0:
        raise DomainError("variance must be nonnegative")
    xt = iteration.entries
    n = xt.shape[0]
    if keep_full_cov is None:
        keep_full_cov = n <= 32
    rng = np.random.default_rng(seed)
    draws = rng.normal(loc=mu, scale=np.sqrt(sigma0_sq), size=(trials, n))
    negative_draws = int((draws < 0).sum())

    symmetric = np.abs(xt - xt.T).max() <= _SYM_TOL
    summary = eigendecompose_symmetric(xt) if symmetric else None
    means = np.empty((epochs + 1, n))
    variances = np.empty((epochs + 1, n))
    covs = [] if keep_full_cov else None
    analytic = [] if symmetric else None

    cur = draws
    for epoch in range(epochs + 1):
        means[epoch] = cur.mean(axis=0)
        variances[epoch] = cur.var(axis=0, ddof=1)
        if covs is not None:
            covs.append(np.cov(cur, rowvar=False, ddof=1).reshape(n, n))
        if analytic is not None:
            analytic.append(predict_covariance(xt, epoch, sigma0_sq,
                                               summary=summary))
        if epoch < epochs:
            cur = cur @ xt.T

    return TrialEnsemble(
        trials=trials, seed=seed, mu=mu, sigma0_sq=sigma0_sq,
        per_epoch_mean=means, per_epoch_var=variances,
        per_epoch_cov=covs, analytic=analytic,
        negative_draws=negative_draws,
    )


def epoch_schedule(radius, diffusion_coeff, k=1.0):
    """Emission horizon and waiting time, both k R^2 / D."""
    if radius <= 0 or diffusion_coeff <= 0 or k <= 0:
        raise DomainError("radius, diffusion coefficient and k must be positive")
    t0 = k * radius * radius / diffusion_coeff
    return EpochSchedule(t0=t0, waiting_time=t0)
