"""Command-line entry point: build-matrix, spectrum, simulate, sweep.

Exit codes: 0 success (converged where applicable), 1 usage/config error,
2 valid but non-converged result, 3 numeric failure.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .config import parse_config
from .errors import (ConfigError, ConvergenceError, DivergenceError,
                     DomainError, ModeError, MolConsensusError)
from .csv_io import write_csv
from .matrix import build_x, normalize, sparsify
from .network import effective_radius
from .sim import ConsensusState, monte_carlo, run_until
from .spectral import column_variance_series, eigendecompose_symmetric, \
    lambda2_power

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_NUMERIC = 3


def _meta(cfg, extra=None):
    meta = {
        "tool": "molconsensus",
        "version": __version__,
        "config_hash": cfg.config_hash(),
        "normalization": cfg.normalization,
        "applied_defaults": ";".join(cfg.applied_defaults) or "none",
    }
    if extra:
        meta.update(extra)
    return meta


def build_pipeline(cfg):
    """Config -> (geometry, concentration matrix, iteration matrix)."""
    geom = cfg.build_geometry()
    x = build_x(geom, cfg.t0)
    n_prime = cfg.n_prime
    if n_prime is None and cfg.epsilon is not None:
        report = effective_radius(cfg.medium, cfg.t0, cfg.density or 1.0,
                                  cfg.epsilon, geometry=geom)
        n_prime = report.n_prime
    n = x.n_nodes
    if n_prime is not None and 1 <= n_prime <= n - 1:
        x = sparsify(x, n_prime)
    xt = normalize(x, cfg.normalization)
    return geom, x, xt


def _matrix_rows(entries):
    n = entries.shape[0]
    header = ["node"] + [str(j) for j in range(n)]
    rows = [[i] + [float(v) for v in entries[i]] for i in range(n)]
    return header, rows


def cmd_build_matrix(cfg, out_dir):
    geom, x, xt = build_pipeline(cfg)
    header, rows = _matrix_rows(x.entries)
    write_csv(os.path.join(out_dir, "X.csv"), header, rows, _meta(cfg))
    header, rows = _matrix_rows(xt.entries)
    write_csv(os.path.join(out_dir, "Xtilde.csv"), header, rows, _meta(cfg))
    nnz = (x.entries > 0).sum(axis=1) - 1  # off-diagonal links per node
    diag_rows = [
        [i, float(xt.column_sums[i]), float(xt.row_sums[i]), int(nnz[i])]
        for i in range(x.n_nodes)
    ]
    write_csv(
        os.path.join(out_dir, "diagnostics.csv"),
        ["node", "x_column_sum", "xtilde_row_sum", "n_prime"],
        diag_rows,
        _meta(cfg, {"doubly_stochastic": str(xt.doubly_stochastic).lower()}),
    )
    return EXIT_OK


def cmd_spectrum(cfg, out_dir):
    _, _, xt = build_pipeline(cfg)
    if xt.is_symmetric:
        summary = eigendecompose_symmetric(xt.entries)
        rows = [
            [i, float(lam), abs(float(lam))]
            for i, lam in enumerate(summary.eigenvalues)
        ]
        write_csv(os.path.join(out_dir, "spectrum.csv"),
                  ["index", "eigenvalue", "abs_eigenvalue"], rows, _meta(cfg))
    value, iters, residual = lambda2_power(xt.entries, return_details=True)
    write_csv(os.path.join(out_dir, "lambda2.csv"),
              ["abs_lambda2", "iterations", "residual"],
              [[float(value), iters, float(residual)]], _meta(cfg))
    series = column_variance_series(xt.entries, cfg.epochs)
    rows = [[n, float(v)] for n, v in enumerate(series)]
    write_csv(os.path.join(out_dir, "column_variance.csv"),
              ["epoch", "column_variance"], rows,
              _meta(cfg, {"variance_estimator": "population"}))
    return EXIT_OK


def cmd_simulate(cfg, out_dir):
    _, _, xt = build_pipeline(cfg)
    n = xt.n_nodes
    rng = np.random.default_rng(cfg.seed)
    rho0 = rng.normal(cfg.mu, math.sqrt(cfg.sigma0_sq), size=n)
    traj = run_until(ConsensusState(rho0), xt, tol=cfg.tol,
                     max_epochs=cfg.epochs)
    rows = [
        [epoch, node, float(traj.history[epoch, node])]
        for epoch in range(traj.history.shape[0])
        for node in range(n)
    ]
    write_csv(os.path.join(out_dir, "trajectory.csv"),
              ["epoch", "node_id", "estimate"], rows,
              _meta(cfg, {"converged": str(traj.converged).lower(),
                          "criterion": traj.criterion}))

    if cfg.trials >= 2:
        ens = monte_carlo(xt, cfg.mu, cfg.sigma0_sq, cfg.trials, cfg.epochs,
                          cfg.seed)
        rows = []
        for epoch in range(cfg.epochs + 1):
            pred = ens.analytic[epoch] if ens.analytic is not None else None
            for node in range(n):
                rows.append([
                    epoch, node,
                    float(ens.per_epoch_mean[epoch, node]),
                    float(ens.per_epoch_var[epoch, node]),
                    float(pred.diagonal[node]) if pred else float("nan"),
                    float(pred.bound) if pred else float("nan"),
                ])
        write_csv(os.path.join(out_dir, "ensemble.csv"),
                  ["epoch", "node_id", "empirical_mean", "empirical_var",
                   "analytic_var", "lambda2_bound"], rows,
                  _meta(cfg, {"trials": cfg.trials, "seed": cfg.seed,
                              "negative_draws": ens.negative_draws}))
    return EXIT_OK if traj.converged else EXIT_NOT_CONVERGED


_SWEEP_SHORTHAND = {
    "N": "geometry.n",
    "n": "geometry.n",
    "n_prime": "matrix.n_prime",
    "epsilon": "matrix.epsilon",
    "a": "geometry.a",
}


def cmd_sweep(cfg_path, overrides, param, values, out_dir):
    path = _SWEEP_SHORTHAND.get(param, param)
    if "." not in path:
        raise ConfigError(param, "unknown sweep parameter")
    rows = []
    cfg = None
    for value in values:
        cfg = parse_config(cfg_path, list(overrides) + [f"{path}={value}"])
        _, _, xt = build_pipeline(cfg)
        lam2 = lambda2_power(xt.entries)
        rng = np.random.default_rng(cfg.seed if cfg.seed is not None else 0)
        rho0 = rng.normal(cfg.mu, math.sqrt(cfg.sigma0_sq), size=xt.n_nodes)
        traj = run_until(ConsensusState(rho0), xt, tol=cfg.tol,
                         max_epochs=cfg.epochs)
        final_cv = column_variance_series(xt.entries, cfg.epochs)[-1]
        rows.append([value, float(lam2),
                     traj.epochs if traj.converged else -1,
                     traj.converged, float(final_cv)])
    write_csv(os.path.join(out_dir, "sweep.csv"),
              [param, "abs_lambda2", "epochs_to_tolerance", "converged",
               "final_column_variance"], rows,
              _meta(cfg, {"swept": path}))
    return EXIT_OK


def _parse_values(text):
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        try:
            out.append(int(chunk))
        except ValueError:
            out.append(float(chunk))
    return out


def make_parser():
    parser = argparse.ArgumentParser(
        prog="molconsensus",
        description="Average-consensus simulator for diffusion-coupled networks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("build-matrix", "spectrum", "simulate", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="section.key=value")
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        if name == "sweep":
            p.add_argument("--param", required=True)
            p.add_argument("--values", required=True,
                           help="comma-separated value list")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"statistics.seed={args.seed}")
        if args.command == "sweep":
            cfg = parse_config(args.config, overrides)
            out_dir = args.out or cfg.out_dir
            return cmd_sweep(args.config, overrides, args.param,
                             _parse_values(args.values), out_dir)
        cfg = parse_config(args.config, overrides)
        out_dir = args.out or cfg.out_dir
        handler = {
            "build-matrix": cmd_build_matrix,
            "spectrum": cmd_spectrum,
            "simulate": cmd_simulate,
        }[args.command]
        return handler(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, DivergenceError, DomainError, ModeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MolConsensusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
