import math

import numpy as np
import pytest

from fracwave.cli import _region_flag, config_hash, main, parse_config_text
from fracwave.mittag_leffler import MLParams, ml_eval
from fracwave.operator_model import model_from_text


def write_config(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


SCALAR_CFG = """
model = scalar
a = 2
gamma = -0.75
alpha = 1.5
T = 1.0
n_steps = 256
w0 = 1
"""

LADDER_CFG = """
model = ladder
gamma = -0.75
omega = 0.5235987755982988
rho_min = 1e-2
rho_max = 1e4
blocks_per_decade = 4
alpha = 1.5
"""


class TestMl:
    def test_exponential(self, capsys):
        assert main(["ml", "--alpha", "1", "--delta", "1", "--z", "1,0"]) == 0
        assert capsys.readouterr().out.strip() == "2.718281828459045"

    def test_zero_gives_reciprocal_gamma(self, capsys):
        assert main(["ml", "--alpha", "1.5", "--delta", "3", "--z", "0,0"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.5)

    def test_derivative(self, capsys):
        assert main(["ml", "--alpha", "1", "--delta", "1", "--z", "0.3", "--derivative", "1"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(math.exp(0.3))

    def test_malformed_z_usage_error(self):
        assert main(["ml", "--alpha", "1", "--z", "nope"]) == 2

    def test_bad_alpha_domain_error(self):
        assert main(["ml", "--alpha", "-1", "--z", "1"]) == 3

    def test_missing_args_usage(self):
        assert main(["ml", "--alpha", "1"]) == 2


class TestConfig:
    def test_parse_and_hash_stable(self):
        cfg = parse_config_text("a = 1\n# comment\nb = two\n")
        assert cfg == {"a": "1", "b": "two"}
        assert config_hash(cfg) == config_hash({"b": "two", "a": "1"})

    def test_empty_config_rejected(self, tmp_path):
        path = write_config(tmp_path, "# nothing here\n")
        assert main(["verify", "--config", path]) == 2

    def test_missing_file(self):
        assert main(["verify", "--config", "/nonexistent.cfg"]) == 2

    def test_no_config_flag(self):
        assert main(["verify"]) == 2


class TestVerify:
    def test_ladder_battery_passes(self, tmp_path):
        path = write_config(tmp_path, LADDER_CFG)
        assert main(["verify", "--config", path, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "verify_summary.csv").read_text().strip().splitlines()
        assert lines[3] == "check,value,target,tol,status"
        body = lines[4:]
        assert len(body) >= 10
        assert all(row.endswith(",pass") for row in body)

    def test_broken_contour_rejected(self, tmp_path):
        path = write_config(tmp_path, LADDER_CFG + "theta = 0.7\nmu = 0.6\n")
        assert main(["verify", "--config", path, "--out", str(tmp_path)]) == 3

    def test_inadmissible_alpha_rejected(self, tmp_path):
        path = write_config(tmp_path, LADDER_CFG.replace("alpha = 1.5", "alpha = 1.95"))
        assert main(["verify", "--config", path, "--out", str(tmp_path)]) == 3


class TestSolve:
    def test_homogeneous_scalar_matches_oracle(self, tmp_path):
        path = write_config(tmp_path, SCALAR_CFG)
        assert main(["solve", "--config", path, "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "solution.csv").read_text().strip().splitlines()
        data = np.array(
            [[float(v) for v in r.split(",")] for r in rows if not r.startswith("#") and not r.startswith("t,")]
        )
        p = MLParams(1.5, 1.0)
        for t, re0 in zip(data[:, 0], data[:, 1]):
            want = 1.0 if t == 0 else ml_eval(p, -(t**1.5) * 2.0).real
            assert abs(re0 - want) <= 1e-8

    def test_deterministic_output(self, tmp_path):
        path = write_config(tmp_path, SCALAR_CFG)
        outs = []
        for d in ["a", "b"]:
            out = tmp_path / d
            assert main(["solve", "--config", path, "--seed", "7", "--out", str(out)]) == 0
            outs.append((out / "solution.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_zero_semilinear_equals_homogeneous(self, tmp_path):
        base = write_config(tmp_path, SCALAR_CFG)
        semi = write_config(
            tmp_path,
            SCALAR_CFG + "problem = semilinear\nforcing = linear-w\nforcing_value = 0\n",
            name="semi.cfg",
        )
        a, b = tmp_path / "hom", tmp_path / "semi"
        assert main(["solve", "--config", base, "--out", str(a)]) == 0
        assert main(["solve", "--config", semi, "--out", str(b)]) == 0

        def body(p):
            return [
                r for r in (p / "solution.csv").read_text().splitlines()
                if not r.startswith("#")
            ]

        assert body(a) == body(b)

    def test_nonconvergent_picard_exit4(self, tmp_path):
        cfg = SCALAR_CFG + (
            "problem = semilinear\nforcing = linear-w\nforcing_value = 50\n"
            "T = 2.0\nmax_iter = 10\nn_steps = 64\n"
        )
        path = write_config(tmp_path, cfg)
        assert main(["solve", "--config", path, "--out", str(tmp_path)]) == 4

    def test_unknown_problem_domain_error(self, tmp_path):
        path = write_config(tmp_path, SCALAR_CFG + "problem = elliptic\n")
        assert main(["solve", "--config", path, "--out", str(tmp_path)]) == 3

    def test_residual_csv_written(self, tmp_path):
        path = write_config(tmp_path, SCALAR_CFG)
        assert main(["solve", "--config", path, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "residual.csv").read_text().strip().splitlines()
        assert "t,residual" in lines


class TestRegions:
    def test_flag_arithmetic(self):
        assert _region_flag("linear", 1.5, 0.5, -0.75) == 1
        assert _region_flag("homogeneous", 1.1, 0.5, -0.75) == 0  # 1.1 < 4/3
        assert _region_flag("homogeneous", 1.5, 0.5, -0.5) == 0  # 1.5 < 2
        assert _region_flag("semilinear-mild", 1.9, 0.5, -0.75) == 1

    def test_raster_row_count(self, tmp_path, capsys):
        path = write_config(tmp_path, "n = 20\n")
        assert main(["regions", "--config", path, "--stdout"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        data = [r for r in lines if not r.startswith("#")]
        assert data[0] == "alpha,nu,gamma,flag"
        assert len(data) == 1 + 20 * 20

    def test_nu_axis(self, tmp_path):
        path = write_config(tmp_path, "n = 10\naxis = nu\ntheorem = linear\ngamma = -0.75\n")
        assert main(["regions", "--config", path, "--out", str(tmp_path)]) == 0
        rows = [
            r for r in (tmp_path / "regions.csv").read_text().splitlines()
            if r and not r.startswith("#") and not r.startswith("alpha,")
        ]
        gammas = {r.split(",")[2] for r in rows}
        assert gammas == {"-0.75"}

    def test_defaults_without_config(self, tmp_path):
        assert main(["regions", "--out", str(tmp_path)]) == 0
        text = (tmp_path / "regions.csv").read_text()
        assert text.count("\n") == 3 + 1 + 200 * 200


class TestModel:
    def test_build_round_trip(self, tmp_path):
        path = write_config(tmp_path, LADDER_CFG)
        assert main(["model", "build", "--config", path, "--out", str(tmp_path)]) == 0
        m = model_from_text((tmp_path / "model.txt").read_text())
        assert m.profile.gamma == -0.75
        lo, hi = m.spectral_radius_range()
        assert lo == pytest.approx(1e-2) and hi == pytest.approx(1e4)

    def test_check_passes(self, tmp_path):
        path = write_config(tmp_path, LADDER_CFG)
        assert main(["model", "check", "--config", path]) == 0

    def test_check_flags_wrong_gamma(self, tmp_path):
        path = write_config(tmp_path, LADDER_CFG)
        assert main(["model", "build", "--config", path, "--out", str(tmp_path)]) == 0
        text = (tmp_path / "model.txt").read_text().replace("gamma -0.75", "gamma -0.3")
        mpath = tmp_path / "edited.txt"
        mpath.write_text(text)
        cfg = write_config(tmp_path, f"model_file = {mpath}\n", name="check.cfg")
        assert main(["model", "check", "--config", cfg]) == 1

    def test_unknown_subcommand_usage(self):
        assert main(["model"]) == 2
