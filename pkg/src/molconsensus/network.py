"""Node geometries, pairwise distances, and the effective communication radius."""

import json
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError
from .kernel import MediumParams, cumulative_response


@dataclass(frozen=True)
class NetworkGeometry:
    """Immutable node layout in an m-dimensional medium.

    `wrap_length` switches the distance metric for coordinate 0 to a ring of
    that circumference; used by the wrapped-line layout that realizes a
    boundary-free uniform network.
    """

    positions: np.ndarray  # (N, m)
    medium: MediumParams
    spacing_hint: Optional[float] = None
    wrap_length: Optional[float] = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        if pos.ndim != 2 or pos.shape[0] < 1:
            raise DomainError("positions must be a nonempty (N, m) array")
        if pos.shape[1] != self.medium.dimension:
            raise DomainError(
                f"position dimension {pos.shape[1]} does not match medium "
                f"dimension {self.medium.dimension}"
            )
        dm = distance_matrix(self)
        n = pos.shape[0]
        if n > 1:
            off = dm[~np.eye(n, dtype=bool)]
            if off.min() <= 0:
                raise DomainError("coincident nodes are not allowed")

    @property
    def n_nodes(self):
        return self.positions.shape[0]


def distance_matrix(geometry):
    """N x N Euclidean (or ring, when wrapped) pairwise distances."""
    pos = geometry.positions
    diff = pos[:, None, :] - pos[None, :, :]
    if geometry.wrap_length is not None:
        length = geometry.wrap_length
        d0 = np.abs(diff[:, :, 0])
        diff = diff.copy()
        diff[:, :, 0] = np.minimum(d0, length - d0)
    return np.sqrt((diff ** 2).sum(axis=2))


def _embed(coords_1d, medium):
    pos = np.zeros((len(coords_1d), medium.dimension))
    pos[:, 0] = coords_1d
    return pos


def line_network(n, a, medium):
    """n nodes on a line with constant spacing a."""
    if n < 1:
        raise DomainError("need at least one node")
    if a <= 0:
        raise DomainError("spacing must be positive")
    pos = _embed(a * np.arange(n), medium)
    return NetworkGeometry(pos, medium, spacing_hint=a)


def wrapped_line_network(n, a, medium):
    """Line of n nodes with ring distances (circumference n*a).

    Every node sees identical neighbor distances, so the concentration
    matrix is circulant and exactly uniform-normalizable.
    """
    if n < 1:
        raise DomainError("need at least one node")
    if a <= 0:
        raise DomainError("spacing must be positive")
    pos = _embed(a * np.arange(n), medium)
    return NetworkGeometry(pos, medium, spacing_hint=a, wrap_length=n * a)


def grid_network(rows, cols, a, medium):
    """rows x cols lattice with spacing a; needs a 2-D or 3-D medium."""
    if rows < 1 or cols < 1:
        raise DomainError("rows and cols must be >= 1")
    if a <= 0:
        raise DomainError("spacing must be positive")
    if medium.dimension == 1 and rows > 1 and cols > 1:
        raise DomainError("a 2-D lattice does not fit in a 1-D medium")
    coords = [(a * i, a * j) for i in range(rows) for j in range(cols)]
    pos = np.zeros((rows * cols, medium.dimension))
    if medium.dimension == 1:
        pos[:, 0] = [c[0] + c[1] for c in coords]  # degenerate 1 x n or n x 1
    else:
        pos[:, 0] = [c[0] for c in coords]
        pos[:, 1] = [c[1] for c in coords]
    return NetworkGeometry(pos, medium, spacing_hint=a)


def compact_cluster(n, cluster_radius, medium, seed, t0=None):
    """n nodes placed uniformly in a ball of cluster_radius around the origin.

    Deterministic given the seed.  The origin is the center reference point
    for the one-shot consensus rates.  Warns when the cluster is not small
    compared with the sensing scale sqrt(4 D t0).
    """
    if n < 1:
        raise DomainError("need at least one node")
    if cluster_radius <= 0:
        raise DomainError("cluster radius must be positive")
    if t0 is not None:
        scale = math.sqrt(4.0 * medium.diffusion_coeff * t0)
        if cluster_radius > 0.1 * scale:
            warnings.warn(
                f"cluster radius {cluster_radius:g} is not small relative to "
                f"the sensing scale {scale:g}; compact-network assumptions weaken",
                stacklevel=2,
            )
    rng = np.random.default_rng(seed)
    m = medium.dimension
    dirs = rng.normal(size=(n, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = cluster_radius * rng.random(n) ** (1.0 / m)
    return NetworkGeometry(dirs * radii[:, None], medium)


@dataclass(frozen=True)
class EffectiveRadiusReport:
    radius: float
    n_prime: int
    epsilon: float
    per_node: Optional[list] = None


def effective_radius(medium, t0, density, epsilon, geometry=None):
    """Smallest radius beyond which the ring contribution stays below epsilon.

    The ring factor is r * X(r) with X the cumulative response; it rises from
    zero, peaks, and decays, so the threshold crossing on the tail is unique.
    n_prime comes from pi R^2 d in a 2-D medium, or from counting within-R
    neighbors when a concrete geometry is supplied.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must be in (0, 1)")
    if density <= 0:
        raise DomainError("density must be positive")
    if t0 <= 0:
        raise DomainError("t0 must be positive")

    scale = math.sqrt(4.0 * medium.diffusion_coeff * t0)

    def factor(r):
        return r * cumulative_response(r, t0, medium, rel_tol=1e-10).value

    # locate the peak on a log-spaced grid, then extend until below threshold
    grid = np.geomspace(1e-3 * scale, 10.0 * scale, 200)
    vals = np.array([factor(r) for r in grid])
    fmax = vals.max()
    target = epsilon * fmax
    r_lo = grid[int(vals.argmax())]
    r_hi = grid[-1]
    while factor(r_hi) >= target:
        r_hi *= 2.0
        if r_hi > 1e6 * scale:
            raise DomainError("ring factor does not fall below epsilon")
    # bisect the tail crossing
    for _ in range(80):
        mid = 0.5 * (r_lo + r_hi)
        if factor(mid) >= target:
            r_lo = mid
        else:
            r_hi = mid
    radius = 0.5 * (r_lo + r_hi)

    per_node = None
    if geometry is not None:
        dm = distance_matrix(geometry)
        counts = ((dm > 0) & (dm <= radius)).sum(axis=1)
        per_node = [int(c) for c in counts]
        n_prime = int(round(float(np.mean(counts))))
    elif medium.dimension == 2:
        n_prime = int(round(math.pi * radius * radius * density))
    else:
        raise DomainError(
            "n_prime needs either a 2-D medium (area density formula) or a "
            "concrete geometry to count neighbors in"
        )
    return EffectiveRadiusReport(radius=radius, n_prime=n_prime,
                                 epsilon=epsilon, per_node=per_node)


# geometry document schema: {"medium": {...}, "positions": [[...], ...],
# optional "spacing_hint", "wrap_length"}

def geometry_to_doc(geometry):
    doc = {
        "medium": {
            "dimension": geometry.medium.dimension,
            "diffusion_coeff": geometry.medium.diffusion_coeff,
            "node_radius": geometry.medium.node_radius,
        },
        "positions": [[float(c) for c in row] for row in geometry.positions],
    }
    if geometry.spacing_hint is not None:
        doc["spacing_hint"] = geometry.spacing_hint
    if geometry.wrap_length is not None:
        doc["wrap_length"] = geometry.wrap_length
    return doc


def geometry_from_doc(doc):
    """Build a geometry from a parsed document, with field-path errors."""
    if not isinstance(doc, dict):
        raise ConfigError("", "geometry document must be a mapping")
    med = doc.get("medium")
    if not isinstance(med, dict):
        raise ConfigError("medium", "missing or not a mapping")
    for key in ("dimension", "diffusion_coeff", "node_radius"):
        if key not in med:
            raise ConfigError(f"medium.{key}", "missing required key")
    try:
        medium = MediumParams(
            dimension=int(med["dimension"]),
            diffusion_coeff=float(med["diffusion_coeff"]),
            node_radius=float(med["node_radius"]),
        )
    except DomainError as exc:
        raise ConfigError("medium", str(exc)) from exc
    positions = doc.get("positions")
    if not isinstance(positions, list) or not positions:
        raise ConfigError("positions", "missing or empty")
    width = None
    for i, row in enumerate(positions):
        if not isinstance(row, list):
            raise ConfigError(f"positions[{i}]", "must be a coordinate list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ConfigError(f"positions[{i}]", "inconsistent dimension")
    try:
        return NetworkGeometry(
            np.array(positions, dtype=float),
            medium,
            spacing_hint=doc.get("spacing_hint"),
            wrap_length=doc.get("wrap_length"),
        )
    except DomainError as exc:
        raise ConfigError("positions", str(exc)) from exc


def load_geometry(path):
    with open(path, "r", encoding="utf-8") as fh:
        return geometry_from_doc(json.load(fh))


def save_geometry(geometry, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(geometry_to_doc(geometry), fh, indent=2)
        fh.write("\n")
