import numpy as np
import pytest

from molconsensus.cli import main
from molconsensus.config import parse_config, parse_config_dict
from molconsensus.csv_io import read_csv
from molconsensus.errors import ConfigError

MINIMAL = """\
[geometry]
kind = "line"
n = 10
a = 1.0

[medium]
dimension = 2
D = 1.0
node_radius = 0.1

[statistics]
seed = 42
"""

WRAPPED = """\
[geometry]
kind = "wrapped_line"
n = 12
a = 1.0

[medium]
dimension = 2
D = 1.0
node_radius = 0.1

[matrix]
normalization = "uniform_S"
n_prime = 4

[statistics]
mu = 1.0
sigma0_sq = 1.0
trials = 200
epochs = 10
seed = 7
"""


def write(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestParseConfig:
    def test_minimal_with_defaults(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL))
        assert cfg.k == 1.0
        assert cfg.normalization == "column_normalized"
        assert cfg.tol == 1e-8
        assert any(d.startswith("schedule.k=") for d in cfg.applied_defaults)
        assert cfg.t0 == pytest.approx(1.0)  # k a^2 / D

    def test_negative_diffusion_names_field(self, tmp_path):
        bad = MINIMAL.replace("D = 1.0", "D = -1.0")
        with pytest.raises(ConfigError) as err:
            parse_config(write(tmp_path, bad))
        assert err.value.path == "medium.D"

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            parse_config(write(tmp_path, MINIMAL + "\n[matrix]\nfoo = 1\n"))
        assert err.value.path == "matrix.foo"

    def test_seed_required_with_trials(self, tmp_path):
        text = MINIMAL.replace("seed = 42", "trials = 10")
        with pytest.raises(ConfigError) as err:
            parse_config(write(tmp_path, text))
        assert err.value.path == "statistics.seed"

    def test_overrides(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL),
                           ["geometry.n=20", "schedule.k=2.0"])
        assert cfg.n == 20
        assert cfg.k == 2.0

    def test_type_mismatch(self):
        with pytest.raises(ConfigError) as err:
            parse_config_dict({"geometry": {"kind": "line", "n": "ten", "a": 1.0},
                               "medium": {"dimension": 2, "D": 1.0,
                                          "node_radius": 0.1}})
        assert err.value.path == "geometry.n"

    def test_explicit_t0_wins(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL + "\n[schedule]\nt0 = 3.5\n"))
        assert cfg.t0 == 3.5

    def test_config_hash_stable(self, tmp_path):
        a = parse_config(write(tmp_path, MINIMAL, "a.toml"))
        b = parse_config(write(tmp_path, MINIMAL, "b.toml"))
        assert a.config_hash() == b.config_hash()


class TestCliCommands:
    def test_build_matrix_outputs(self, tmp_path):
        cfg = write(tmp_path, MINIMAL)
        out = tmp_path / "out"
        assert main(["build-matrix", "--config", cfg, "--out", str(out)]) == 0
        for name in ("X.csv", "Xtilde.csv", "diagnostics.csv"):
            meta, header, rows = read_csv(out / name)
            assert meta["tool"] == "molconsensus"
            assert "config_hash" in meta
            assert rows
        meta, _, rows = read_csv(out / "diagnostics.csv")
        assert meta["doubly_stochastic"] == "false"
        # column sums of Xtilde are one
        _, header, xt_rows = read_csv(out / "Xtilde.csv")
        xt = np.array([[float(v) for v in row[1:]] for row in xt_rows])
        assert np.abs(xt.sum(axis=0) - 1).max() < 1e-12

    def test_spectrum_outputs(self, tmp_path):
        cfg = write(tmp_path, WRAPPED)
        out = tmp_path / "out"
        assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
        _, _, spec_rows = read_csv(out / "spectrum.csv")
        assert float(spec_rows[0][1]) == pytest.approx(1.0, abs=1e-9)
        _, _, lam_rows = read_csv(out / "lambda2.csv")
        assert 0 < float(lam_rows[0][0]) < 1
        _, _, cv_rows = read_csv(out / "column_variance.csv")
        assert len(cv_rows) == 11

    def test_spectrum_skips_eigendecomposition_when_asymmetric(self, tmp_path):
        cfg = write(tmp_path, MINIMAL)
        out = tmp_path / "out"
        assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
        assert not (out / "spectrum.csv").exists()
        assert (out / "lambda2.csv").exists()

    def test_simulate_byte_identical(self, tmp_path):
        cfg = write(tmp_path, WRAPPED)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        code1 = main(["simulate", "--config", cfg, "--out", str(out1)])
        code2 = main(["simulate", "--config", cfg, "--out", str(out2)])
        assert code1 == code2
        for name in ("trajectory.csv", "ensemble.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_simulate_exit_code_signals_convergence(self, tmp_path):
        text = WRAPPED.replace("epochs = 10", "epochs = 2000")
        code = main(["simulate", "--config", write(tmp_path, text),
                     "--out", str(tmp_path / "conv")])
        assert code == 0
        text = WRAPPED.replace("epochs = 10", "epochs = 1")
        code = main(["simulate", "--config", write(tmp_path, text, "b.toml"),
                     "--out", str(tmp_path / "nonconv")])
        assert code == 2

    def test_config_error_exit_code(self, tmp_path):
        bad = write(tmp_path, MINIMAL.replace("D = 1.0", "D = -2.0"))
        assert main(["build-matrix", "--config", bad,
                     "--out", str(tmp_path / "o")]) == 1

    def test_numeric_error_exit_code(self, tmp_path):
        # uniform_S on a boundary-affected line is a mode (numeric) failure
        bad = write(tmp_path, MINIMAL + "\n[matrix]\nnormalization = \"uniform_S\"\n")
        assert main(["build-matrix", "--config", bad,
                     "--out", str(tmp_path / "o")]) == 3

    def test_seed_flag_overrides(self, tmp_path):
        cfg = write(tmp_path, WRAPPED)
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        main(["simulate", "--config", cfg, "--out", str(out1), "--seed", "99"])
        main(["simulate", "--config", cfg, "--out", str(out2)])
        assert ((out1 / "trajectory.csv").read_bytes()
                != (out2 / "trajectory.csv").read_bytes())

    def test_single_node_all_commands(self, tmp_path):
        text = MINIMAL.replace("n = 10", "n = 1")
        cfg = write(tmp_path, text)
        for cmd in ("build-matrix", "spectrum", "simulate"):
            assert main([cmd, "--config", cfg,
                         "--out", str(tmp_path / cmd)]) in (0, 2)

    def test_sweep_n_over_line(self, tmp_path):
        cfg = write(tmp_path, MINIMAL + "\n[matrix]\nn_prime = 5\n")
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", cfg, "--out", str(out),
                     "--param", "N", "--values", "10,20,40"]) == 0
        _, header, rows = read_csv(out / "sweep.csv")
        assert [r[0] for r in rows] == ["10", "20", "40"]
        lams = [float(r[1]) for r in rows]
        # larger network mixes slower
        assert lams[0] <= lams[1] <= lams[2]

    def test_sweep_n_prime_on_wrapped_line(self, tmp_path):
        text = WRAPPED.replace("n = 12", "n = 24").replace("trials = 200",
                                                           "trials = 0")
        cfg = write(tmp_path, text)
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", cfg, "--out", str(out),
                     "--param", "n_prime", "--values", "2,4,8"]) == 0
        _, _, rows = read_csv(out / "sweep.csv")
        lams = [float(r[1]) for r in rows]
        assert lams[0] >= lams[1] >= lams[2]

    def test_roundtrip_float_precision(self, tmp_path):
        cfg = write(tmp_path, MINIMAL)
        out = tmp_path / "out"
        main(["build-matrix", "--config", cfg, "--out", str(out)])
        _, _, rows = read_csv(out / "X.csv")
        value = rows[0][1]
        assert repr(float(value)) == value
