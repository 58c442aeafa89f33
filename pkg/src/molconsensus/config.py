"""Experiment configuration: TOML parsing, validation, defaults, hashing."""

import hashlib
import json
from dataclasses import dataclass, field
from typing import List, Optional

try:
    import tomllib as tomli
except ModuleNotFoundError:
    import tomli

from .errors import ConfigError
from .kernel import MediumParams
from .matrix import COLUMN_NORMALIZED, UNIFORM_S
from .network import (compact_cluster, grid_network, line_network,
                      load_geometry, wrapped_line_network)

GEOMETRY_KINDS = ("line", "grid", "cluster", "wrapped_line", "custom")

_SCHEMA = {
    "geometry": {"kind", "n", "a", "rows", "cols", "cluster_radius", "path"},
    "medium": {"dimension", "D", "node_radius"},
    "schedule": {"k", "t0"},
    "matrix": {"normalization", "n_prime", "epsilon", "density"},
    "statistics": {"mu", "sigma0_sq", "trials", "epochs", "tol", "seed"},
    "output": {"directory"},
}


@dataclass
class ExperimentConfig:
    geometry_kind: str
    n: Optional[int]
    a: Optional[float]
    rows: Optional[int]
    cols: Optional[int]
    cluster_radius: Optional[float]
    geometry_path: Optional[str]
    medium: MediumParams
    k: float
    t0_explicit: Optional[float]
    normalization: str
    n_prime: Optional[int]
    epsilon: Optional[float]
    density: Optional[float]
    mu: float
    sigma0_sq: float
    trials: int
    epochs: int
    tol: float
    seed: Optional[int]
    out_dir: str
    applied_defaults: List[str] = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    @property
    def t0(self):
        """Emission horizon: explicit t0 wins, else k * R^2 / D with R the
        layout's characteristic length (spacing, or cluster radius)."""
        if self.t0_explicit is not None:
            return self.t0_explicit
        radius = self.cluster_radius if self.geometry_kind == "cluster" else self.a
        return self.k * radius * radius / self.medium.diffusion_coeff

    def config_hash(self):
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def build_geometry(self):
        kind = self.geometry_kind
        if kind == "line":
            return line_network(self.n, self.a, self.medium)
        if kind == "wrapped_line":
            return wrapped_line_network(self.n, self.a, self.medium)
        if kind == "grid":
            return grid_network(self.rows, self.cols, self.a, self.medium)
        if kind == "cluster":
            return compact_cluster(self.n, self.cluster_radius, self.medium,
                                   seed=self.seed if self.seed is not None else 0,
                                   t0=self.t0)
        return load_geometry(self.geometry_path)


def _check_unknown(doc):
    for section, keys in doc.items():
        if section not in _SCHEMA:
            raise ConfigError(section, "unknown section")
        if not isinstance(keys, dict):
            raise ConfigError(section, "must be a table")
        for key in keys:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")


def _get(doc, section, key, typ, required=False, default=None, defaults=None):
    table = doc.get(section, {})
    if key not in table:
        if required:
            raise ConfigError(f"{section}.{key}", "missing required key")
        if defaults is not None and default is not None:
            defaults.append(f"{section}.{key}={default}")
        return default
    value = table[key]
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if typ is int and isinstance(value, bool):
        raise ConfigError(f"{section}.{key}", "expected an integer, got a bool")
    if not isinstance(value, typ):
        raise ConfigError(
            f"{section}.{key}",
            f"expected {typ.__name__}, got {type(value).__name__}",
        )
    return value


def _positive(value, path):
    if value is not None and value <= 0:
        raise ConfigError(path, "must be positive")
    return value


def parse_config_dict(doc):
    """Validate a parsed config mapping and apply the documented defaults."""
    _check_unknown(doc)
    defaults = []

    kind = _get(doc, "geometry", "kind", str, required=True)
    if kind not in GEOMETRY_KINDS:
        raise ConfigError("geometry.kind",
                          f"must be one of {', '.join(GEOMETRY_KINDS)}")
    n = _get(doc, "geometry", "n", int)
    a = _get(doc, "geometry", "a", float)
    rows = _get(doc, "geometry", "rows", int)
    cols = _get(doc, "geometry", "cols", int)
    cluster_radius = _get(doc, "geometry", "cluster_radius", float)
    path = _get(doc, "geometry", "path", str)

    if kind in ("line", "wrapped_line"):
        if n is None:
            raise ConfigError("geometry.n", f"required for kind={kind}")
        if a is None:
            raise ConfigError("geometry.a", f"required for kind={kind}")
    elif kind == "grid":
        if rows is None or cols is None:
            raise ConfigError("geometry.rows", "rows and cols required for grid")
        if a is None:
            raise ConfigError("geometry.a", "required for kind=grid")
    elif kind == "cluster":
        if n is None:
            raise ConfigError("geometry.n", "required for kind=cluster")
        if cluster_radius is None:
            raise ConfigError("geometry.cluster_radius", "required for cluster")
    elif kind == "custom" and path is None:
        raise ConfigError("geometry.path", "required for kind=custom")
    _positive(a, "geometry.a")
    _positive(cluster_radius, "geometry.cluster_radius")

    if kind == "custom":
        medium = None  # carried inside the geometry document
        for key in ("dimension", "D", "node_radius"):
            if key in doc.get("medium", {}):
                raise ConfigError(f"medium.{key}",
                                  "custom geometry carries its own medium")
    else:
        dimension = _get(doc, "medium", "dimension", int, required=True)
        diffusion = _get(doc, "medium", "D", float, required=True)
        node_radius = _get(doc, "medium", "node_radius", float, required=True)
        _positive(diffusion, "medium.D")
        _positive(node_radius, "medium.node_radius")
        if dimension not in (1, 2, 3):
            raise ConfigError("medium.dimension", "must be 1, 2 or 3")
        medium = MediumParams(dimension=dimension, diffusion_coeff=diffusion,
                              node_radius=node_radius)

    k = _get(doc, "schedule", "k", float, default=1.0, defaults=defaults)
    t0_explicit = _get(doc, "schedule", "t0", float)
    _positive(k, "schedule.k")
    _positive(t0_explicit, "schedule.t0")

    normalization = _get(doc, "matrix", "normalization", str,
                         default=COLUMN_NORMALIZED, defaults=defaults)
    if normalization not in (COLUMN_NORMALIZED, UNIFORM_S):
        raise ConfigError("matrix.normalization",
                          f"must be {COLUMN_NORMALIZED} or {UNIFORM_S}")
    n_prime = _get(doc, "matrix", "n_prime", int)
    epsilon = _get(doc, "matrix", "epsilon", float)
    density = _get(doc, "matrix", "density", float)
    if n_prime is not None and n_prime < 1:
        raise ConfigError("matrix.n_prime", "must be >= 1")
    if epsilon is not None and not 0 < epsilon < 1:
        raise ConfigError("matrix.epsilon", "must be in (0, 1)")
    _positive(density, "matrix.density")

    mu = _get(doc, "statistics", "mu", float, default=0.0, defaults=defaults)
    sigma0_sq = _get(doc, "statistics", "sigma0_sq", float, default=1.0,
                     defaults=defaults)
    trials = _get(doc, "statistics", "trials", int, default=0, defaults=defaults)
    epochs = _get(doc, "statistics", "epochs", int, default=50, defaults=defaults)
    tol = _get(doc, "statistics", "tol", float, default=1e-8, defaults=defaults)
    seed = _get(doc, "statistics", "seed", int)
    if sigma0_sq < 0:
        raise ConfigError("statistics.sigma0_sq", "must be nonnegative")
    if trials < 0:
        raise ConfigError("statistics.trials", "must be nonnegative")
    if epochs < 0:
        raise ConfigError("statistics.epochs", "must be nonnegative")
    _positive(tol, "statistics.tol")
    if trials > 0 and seed is None:
        raise ConfigError("statistics.seed", "required when trials > 0")

    out_dir = _get(doc, "output", "directory", str, default="out",
                   defaults=defaults)

    cfg = ExperimentConfig(
        geometry_kind=kind, n=n, a=a, rows=rows, cols=cols,
        cluster_radius=cluster_radius, geometry_path=path,
        medium=medium, k=k, t0_explicit=t0_explicit,
        normalization=normalization, n_prime=n_prime, epsilon=epsilon,
        density=density, mu=mu, sigma0_sq=sigma0_sq, trials=trials,
        epochs=epochs, tol=tol, seed=seed, out_dir=out_dir,
        applied_defaults=defaults, raw=doc,
    )
    if cfg.medium is None:
        geom = cfg.build_geometry()
        cfg.medium = geom.medium
        if cfg.a is None:
            cfg.a = geom.spacing_hint
        if cfg.t0_explicit is None and cfg.a is None:
            raise ConfigError("schedule.t0",
                              "required for custom geometry without a spacing hint")
    return cfg


def parse_config(path, overrides=()):
    """Load a TOML config file, apply section.key=value overrides, validate."""
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"invalid TOML: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like section.key=value")
        target, _, literal = item.partition("=")
        if "." not in target:
            raise ConfigError(target, "override key must be section.key")
        section, _, key = target.partition(".")
        doc.setdefault(section, {})[key] = _parse_literal(literal)
    return parse_config_dict(doc)


def _parse_literal(text):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for typ in (int, float):
        try:
            return typ(text)
        except ValueError:
            pass
    return text.strip('"')
