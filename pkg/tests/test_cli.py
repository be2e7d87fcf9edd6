"""Command-line interface: subcommands, config parsing, exit codes, CSV."""

import json

import numpy as np
import pytest

import copbands.cli as cli
from copbands.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def _config(tmp_path, name="exp.cfg", **overrides):
    entries = {
        "thetas": "1",
        "ns": "16",
        "B": "10",
        "seed": "5",
        "methods": "lil",
        "grid": "5",
    }
    entries.update(overrides)
    lines = [f"{k} = {v}" for k, v in entries.items() if v is not None]
    return _write(tmp_path / name, "\n".join(lines) + "\n")


# ---------------------------------------------------------------- estimate


def test_estimate_happy_path(frank_xy, tmp_path):
    data = frank_xy(n=500)
    out = tmp_path / "est.csv"
    assert main(["estimate", str(data), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "u,v,estimate"
    assert len(lines) == 1 + 33 * 33
    u, v, est = lines[1].split(",")
    assert float(u) == 1.0 / 34.0 and float(v) == 1.0 / 34.0
    assert 0.0 <= float(est) <= 1.0
    manifest = json.loads((tmp_path / "est.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "estimate"
    assert manifest["parameters"]["n"] == 500
    assert manifest["version"]


def test_estimate_is_deterministic(frank_xy, tmp_path):
    data = frank_xy(n=40)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["estimate", str(data), "--out", str(out1)]) == EXIT_OK
    assert main(["estimate", str(data), "--out", str(out2)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_estimate_rejects_few_rows(frank_xy, tmp_path, capsys):
    data = frank_xy(n=10)
    code = main(["estimate", str(data), "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_USAGE
    assert "16" in capsys.readouterr().err


def test_estimate_rejects_bad_header(tmp_path, capsys):
    data = _write(tmp_path / "bad.csv", "a,b\n1,2\n3,4\n")
    assert main(["estimate", str(data), "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert "expected header 'x,y'" in capsys.readouterr().err


def test_estimate_reports_bad_cell_location(tmp_path, capsys):
    rows = ["x,y"] + [f"{i}.0,{i}.5" for i in range(20)]
    rows[3] = "2.0,oops"
    data = _write(tmp_path / "bad.csv", "\n".join(rows) + "\n")
    assert main(["estimate", str(data), "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert ":4:" in err and "'oops'" in err and "column y" in err


def test_estimate_rejects_non_finite_value(tmp_path, capsys):
    rows = ["x,y"] + [f"{i}.0,{i}.5" for i in range(20)] + ["inf,1.0"]
    data = _write(tmp_path / "bad.csv", "\n".join(rows) + "\n")
    assert main(["estimate", str(data), "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert "non-finite" in capsys.readouterr().err


def test_estimate_missing_file(tmp_path, capsys):
    assert main(["estimate", str(tmp_path / "no.csv"), "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert "no.csv" in capsys.readouterr().err


def test_estimate_custom_grid_and_bandwidth(frank_xy, tmp_path):
    data = frank_xy(n=30)
    out = tmp_path / "est.csv"
    assert main(["estimate", str(data), "--grid", "5", "--bandwidth", "0.4",
                 "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 25
    manifest = json.loads((tmp_path / "est.csv.manifest.json").read_text())
    assert manifest["parameters"]["bandwidth"] == 0.4


# ------------------------------------------------------------------- bands


def test_bands_lil_half_width_constant(frank_xy, tmp_path):
    data = frank_xy(n=50)
    out = tmp_path / "bands.csv"
    assert main(["bands", str(data), "--no-clamp", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "u,v,lower,center,upper"
    assert len(lines) == 1 + 33 * 33
    widths = set()
    for line in lines[1:]:
        _, _, lower, center, upper = line.split(",")
        widths.add(round(float(upper) - float(center), 15))
        assert float(upper) - float(center) == pytest.approx(
            0.11679274947052345, abs=1e-12
        )
        assert float(center) - float(lower) == pytest.approx(
            0.11679274947052345, abs=1e-12
        )
    assert len(widths) <= 2  # constant up to the last-digit rounding


def test_bands_lil_n500_half_width(frank_xy, tmp_path):
    data = frank_xy(n=500)
    out = tmp_path / "bands.csv"
    assert main(["bands", str(data), "--no-clamp", "--grid", "5", "--out", str(out)]) == EXIT_OK
    line = out.read_text().splitlines()[1]
    _, _, lower, center, upper = line.split(",")
    assert float(upper) - float(center) == pytest.approx(0.042742, abs=1e-6)


def test_bands_epsilon_nesting(frank_xy, tmp_path):
    data = frank_xy(n=50)
    inner_path = tmp_path / "inner.csv"
    outer_path = tmp_path / "outer.csv"
    assert main(["bands", str(data), "--epsilon", "-0.5", "--grid", "7",
                 "--out", str(inner_path)]) == EXIT_OK
    assert main(["bands", str(data), "--epsilon", "0", "--grid", "7",
                 "--out", str(outer_path)]) == EXIT_OK
    inner = np.loadtxt(inner_path, delimiter=",", skiprows=1)
    outer = np.loadtxt(outer_path, delimiter=",", skiprows=1)
    assert np.all(inner[:, 2] >= outer[:, 2])  # lower surfaces nested
    assert np.all(inner[:, 4] <= outer[:, 4])  # upper surfaces nested


def test_bands_normal_requires_theta(frank_xy, tmp_path, capsys):
    data = frank_xy(n=50)
    code = main(["bands", str(data), "--method", "normal", "--out", str(tmp_path / "b.csv")])
    assert code == EXIT_USAGE
    assert "--theta" in capsys.readouterr().err


def test_bands_normal_with_theta(frank_xy, tmp_path):
    data = frank_xy(n=50)
    out = tmp_path / "b.csv"
    assert main(["bands", str(data), "--method", "normal", "--theta", "1",
                 "--grid", "7", "--out", str(out)]) == EXIT_OK
    table = np.loadtxt(out, delimiter=",", skiprows=1)
    hw = table[:, 4] - table[:, 3]
    assert hw.std() > 0.0  # pointwise width varies over the grid
    manifest = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert manifest["parameters"]["theta"] == 1.0


def test_bands_small_n_names_the_constraint(frank_xy, tmp_path, capsys):
    data = frank_xy(n=12)
    code = main(["bands", str(data), "--out", str(tmp_path / "b.csv")])
    assert code == EXIT_USAGE
    assert "R_n" in capsys.readouterr().err


def test_bands_numeric_failure_exit_code(frank_xy, tmp_path, capsys, monkeypatch):
    # a variance surface with a negative cell must map to the numeric exit
    def negative_sigma2(theta, u, v):
        return np.full(np.broadcast(u, v).shape, -1.0)

    monkeypatch.setattr(cli, "frank_sigma2", negative_sigma2)
    data = frank_xy(n=50)
    code = main(["bands", str(data), "--method", "normal", "--theta", "1",
                 "--grid", "5", "--out", str(tmp_path / "b.csv")])
    assert code == EXIT_NUMERIC
    assert "numeric failure" in capsys.readouterr().err


# ------------------------------------------------------- simulate-coverage


def test_simulate_coverage_happy_path(tmp_path):
    cfg = _config(tmp_path, methods="lil, normal", B="8")
    out = tmp_path / "cov.csv"
    assert main(["simulate-coverage", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "method,theta,n,coverage,mc_stderr,B,seed"
    assert len(lines) == 3
    assert lines[1].startswith("lil,1.0,16,")
    assert lines[2].startswith("normal,1.0,16,")
    manifest = json.loads((tmp_path / "cov.csv.manifest.json").read_text())
    assert manifest["seed"] == 5


def test_simulate_coverage_row_order(tmp_path):
    cfg = _config(tmp_path, thetas="-2, 1", ns="16, 20", B="2", methods="lil, normal")
    out = tmp_path / "cov.csv"
    assert main(["simulate-coverage", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    heads = [",".join(line.split(",")[:3]) for line in out.read_text().splitlines()[1:]]
    assert heads == [
        "lil,-2.0,16", "lil,-2.0,20", "lil,1.0,16", "lil,1.0,20",
        "normal,-2.0,16", "normal,-2.0,20", "normal,1.0,16", "normal,1.0,20",
    ]


def test_simulate_coverage_seed_override(tmp_path):
    cfg = _config(tmp_path, B="4")
    out1, out2, out3 = (tmp_path / f"c{i}.csv" for i in range(3))
    assert main(["simulate-coverage", "--config", str(cfg), "--out", str(out1)]) == EXIT_OK
    assert main(["simulate-coverage", "--config", str(cfg), "--seed", "5",
                 "--out", str(out2)]) == EXIT_OK
    assert main(["simulate-coverage", "--config", str(cfg), "--seed", "123",
                 "--out", str(out3)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    assert "123" in out3.read_text().splitlines()[1]


def test_simulate_coverage_rejects_unknown_keys(tmp_path, capsys):
    cfg = _config(tmp_path, foo="1", bar="2")
    code = main(["simulate-coverage", "--config", str(cfg), "--out", str(tmp_path / "c.csv")])
    assert code == EXIT_USAGE
    err = capsys.readouterr().err
    assert "unknown config keys" in err and "bar, foo" in err


def test_simulate_coverage_rejects_missing_keys(tmp_path, capsys):
    cfg = _config(tmp_path, seed=None, methods=None)
    code = main(["simulate-coverage", "--config", str(cfg), "--out", str(tmp_path / "c.csv")])
    assert code == EXIT_USAGE
    err = capsys.readouterr().err
    assert "missing required config keys" in err and "seed" in err and "methods" in err


def test_simulate_coverage_rejects_zero_b(tmp_path, capsys):
    cfg = _config(tmp_path, B="0")
    code = main(["simulate-coverage", "--config", str(cfg), "--out", str(tmp_path / "c.csv")])
    assert code == EXIT_USAGE
    assert "B must be >= 1" in capsys.readouterr().err


def test_simulate_coverage_rejects_duplicate_key(tmp_path, capsys):
    cfg = _write(tmp_path / "dup.cfg",
                 "thetas = 1\nthetas = 2\nns = 16\nB = 2\nseed = 1\nmethods = lil\n")
    code = main(["simulate-coverage", "--config", str(cfg), "--out", str(tmp_path / "c.csv")])
    assert code == EXIT_USAGE
    assert "duplicate key" in capsys.readouterr().err


def test_simulate_coverage_rejects_bad_method(tmp_path, capsys):
    cfg = _config(tmp_path, methods="lil, bogus")
    code = main(["simulate-coverage", "--config", str(cfg), "--out", str(tmp_path / "c.csv")])
    assert code == EXIT_USAGE
    assert "unknown method 'bogus'" in capsys.readouterr().err


def test_config_comments_and_auto_bandwidth(tmp_path):
    cfg = _write(
        tmp_path / "c.cfg",
        "# experiment\nthetas = 1  # frank\nns = 16\nB = 2\nseed = 9\n"
        "methods = lil\ngrid = 5\nbandwidth = auto\n",
    )
    out = tmp_path / "cov.csv"
    assert main(["simulate-coverage", "--config", str(cfg), "--out", str(out)]) == EXIT_OK


# ------------------------------------------------------------------ verify


def test_verify_lil_writes_verdict(tmp_path):
    cfg = _config(tmp_path, B="100", ns="16")
    out = tmp_path / "lil.csv"
    assert main(["verify", "lil", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "mode,theta,n,B,stat_max,stat_mean,stat_p99,frac_within_bound"
    assert lines[1].startswith("lil,1.0,16,100,")
    assert lines[-1].startswith("# verdict: bound")


def test_verify_bias_writes_verdict(tmp_path):
    cfg = _config(tmp_path, B="1000", ns="16, 32")
    out = tmp_path / "bias.csv"
    assert main(["verify", "bias", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "mode,theta,n,B,statistic"
    assert len(lines) == 4
    assert lines[-1].startswith("# verdict: decay")


def test_verify_rejects_insufficient_b(tmp_path, capsys):
    cfg = _config(tmp_path, B="9")
    code = main(["verify", "lil", "--config", str(cfg), "--out", str(tmp_path / "v.csv")])
    assert code == EXIT_USAGE
    assert "B >= 100" in capsys.readouterr().err


def test_verify_unknown_mode_exits_2(tmp_path, capsys):
    cfg = _config(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(["verify", "bogus", "--config", str(cfg), "--out", str(tmp_path / "v.csv")])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err


def test_verify_manifest_contains_mode(tmp_path):
    cfg = _config(tmp_path, B="100", ns="16")
    out = tmp_path / "lil.csv"
    assert main(["verify", "lil", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    manifest = json.loads((tmp_path / "lil.csv.manifest.json").read_text())
    assert manifest["parameters"]["mode"] == "lil"
    assert manifest["subcommand"] == "verify"
