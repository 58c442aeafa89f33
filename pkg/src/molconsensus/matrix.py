"""Concentration matrix assembly and normalization into the iteration matrix."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ModeError
from .kernel import cumulative_response

COLUMN_NORMALIZED = "column_normalized"
UNIFORM_S = "uniform_S"

_STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class ConcentrationMatrix:
    """Symmetric N x N channel matrix: concentration per unit production rate."""

    entries: np.ndarray
    t0: float
    medium: object
    n_prime: Optional[int] = None  # neighbor budget when sparsified

    @property
    def n_nodes(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class IterationMatrix:
    """Normalized, dimensionless update matrix for the consensus iteration."""

    entries: np.ndarray
    mode: str
    column_sums: np.ndarray  # of the source concentration matrix
    row_sums: np.ndarray
    doubly_stochastic: bool

    @property
    def n_nodes(self):
        return self.entries.shape[0]

    @property
    def is_symmetric(self):
        return bool(np.abs(self.entries - self.entries.T).max() <= _STOCHASTIC_TOL)


def build_x(geometry, t0, rel_tol=1e-12):
    """Assemble the channel matrix from geometry and physics.

    Distances below node_radius (notably the zero self-distance) are clamped
    to node_radius.  The upper triangle is computed and mirrored so symmetry
    is exact; kernel evaluations are cached per distinct distance, which
    collapses regular layouts to O(N) quadratures.
    """
    from .network import distance_matrix

    if t0 <= 0:
        raise DomainError("t0 must be positive")
    dm = distance_matrix(geometry)
    medium = geometry.medium
    n = dm.shape[0]
    clamped = np.maximum(dm, medium.node_radius)
    cache = {}
    entries = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            d = clamped[i, j]
            key = round(d, 12)
            if key not in cache:
                cache[key] = cumulative_response(d, t0, medium, rel_tol=rel_tol).value
            entries[i, j] = cache[key]
            entries[j, i] = entries[i, j]
    return ConcentrationMatrix(entries=entries, t0=t0, medium=medium)


def sparsify(x, n_prime):
    """Zero out everything beyond each node's n_prime nearest neighbors.

    Nearness is read off the matrix itself (entries decay with distance).
    Neighbors tied with the cutoff entry are all retained, and an entry
    survives if either endpoint keeps it; both rules preserve symmetry.
    The diagonal is always kept.
    """
    n = x.n_nodes
    if not 1 <= n_prime <= n - 1:
        raise DomainError(f"n_prime must be in [1, {n - 1}], got {n_prime}")
    entries = x.entries
    keep = np.eye(n, dtype=bool)
    for i in range(n):
        off = entries[i].copy()
        off[i] = -np.inf
        # equidistant neighbors are indistinguishable: everything tied with
        # the n_prime-th largest entry survives
        cutoff = np.partition(off, n - 1 - n_prime)[n - 1 - n_prime]
        keep[i] |= off >= cutoff
    keep |= keep.T
    return ConcentrationMatrix(entries=np.where(keep, entries, 0.0), t0=x.t0,
                               medium=x.medium, n_prime=n_prime)


def normalize(x, mode=COLUMN_NORMALIZED):
    """Turn the channel matrix into the iteration matrix.

    column_normalized: each column divided by its own sum; always
    column-stochastic, doubly stochastic only when the column sums of the
    source matrix happened to be equal.

    uniform_S: the whole matrix divided by the common column sum S; rejected
    unless all column sums agree to 1e-9 relative.  Result is symmetric and
    doubly stochastic.
    """
    entries = x.entries
    col_sums = entries.sum(axis=0)
    if np.any(col_sums <= 0):
        raise DomainError("every column sum must be strictly positive")

    if mode == UNIFORM_S:
        spread = (col_sums.max() - col_sums.min()) / col_sums.max()
        if spread > _STOCHASTIC_TOL:
            worst_hi = int(col_sums.argmax())
            worst_lo = int(col_sums.argmin())
            raise ModeError(
                "uniform_S needs equal column sums; columns "
                f"{worst_lo} ({col_sums[worst_lo]:.12g}) and "
                f"{worst_hi} ({col_sums[worst_hi]:.12g}) differ by "
                f"{spread:.3g} relative"
            )
        s = float(col_sums.mean())
        xt = entries / s
    elif mode == COLUMN_NORMALIZED:
        xt = entries / col_sums[None, :]
    else:
        raise ModeError(f"unknown normalization mode {mode!r}")

    row_sums = xt.sum(axis=1)
    doubly = bool(
        np.abs(row_sums - 1.0).max() <= _STOCHASTIC_TOL
        and np.abs(xt.sum(axis=0) - 1.0).max() <= _STOCHASTIC_TOL
    )
    return IterationMatrix(entries=xt, mode=mode, column_sums=col_sums,
                           row_sums=row_sums, doubly_stochastic=doubly)


def rates_uniform(estimates, s):
    """Production rates for the uniform network: each estimate divided by S."""
    if s <= 0:
        raise DomainError("S must be positive")
    return np.asarray(estimates, dtype=float) / s


def rates_compact(estimates, x_center):
    """One-shot rates for a compact network: rho_j / (X_j * N).

    x_center holds each node's cumulative response at the network center.
    """
    rho = np.asarray(estimates, dtype=float)
    xc = np.asarray(x_center, dtype=float)
    if np.any(xc <= 0):
        raise DomainError("center responses must all be positive")
    return rho / (xc * rho.shape[0])
