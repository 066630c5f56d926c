import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from tdsusy.cli import main, parse_grid, ConfigError


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], float)


FREE_PAIR = {"seed_potential": {"type": "free"},
             "chain": [{"family": "free-lambda", "lambda": -0.5}, {"family": "free-lambda", "lambda": -1.5}],
             "state": {"family": "free-lambda", "lambda": -3.5},
             "grid": {"x": [-4, 4, 9], "t": [0, 1, 3]}}


# -- verify ------------------------------------------------------------------------


@pytest.mark.parametrize("suite", ["reality", "families"])
def test_verify_suite_passes(suite, tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", suite, "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] and report["suite"] == suite
    assert all(c["passed"] for c in report["checks"])
    assert all("identity" in c and "residual" in c for c in report["checks"])


def test_verify_unknown_suite_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "bogus"])
    assert info.value.code == 2


def test_verify_tight_tolerance_fails_and_names_identity(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "factorize", "--tol", "1e-30", "--out", str(out)]) == 1
    assert not json.loads(out.read_text())["passed"]
    assert "identity:" in capsys.readouterr().err


# -- potential ---------------------------------------------------------------------


def test_potential_free_even_k0(tmp_path):
    out = tmp_path / "u.csv"
    assert main(["potential", "--family", "free-even", "--k", "0", "--grid", "x=-3:3:7,t=0:2:5",
                 "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["x", "t", "value"]
    assert data.shape == (35, 3)
    assert np.all(np.diff(data[:, 1]) >= 0)  # row-major in t
    assert np.allclose(data[:, 2], -1 / (1 + data[:, 1] ** 2), rtol=1e-15)
    assert b"\r" not in out.read_bytes()


def test_potential_juxtaposed_is_finite(tmp_path):
    out = tmp_path / "u.json"
    assert main(["potential", "--family", "free-juxtaposed", "--n", "2", "--grid", "x=-8:8:161,t=0:3:7",
                 "--format", "json", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert np.all(np.isfinite(np.array(rep["value"])))
    assert len(rep["x"]) == 161 and len(rep["t"]) == 7


@pytest.mark.parametrize("argv", [
    ["potential", "--family", "free-odd", "--k", "1", "--grid", "x=-1:1:5,t=0:1:3"],
    ["potential", "--family", "free-even", "--k", "9", "--grid", "x=-1:1:5,t=0:1:3"],
    ["potential", "--family", "free-even", "--k", "1", "--grid", "x=-1:1,t=0:1:3"],
])
def test_potential_usage_errors(argv):
    assert main(argv) == 2


def test_potential_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["potential", "--family", "free-evenodd", "--m", "2", "--l", "5", "--grid", "x=-5:5:41,t=0:2:5"]
    main(argv + ["--out", str(a)])
    main(argv + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_number_round_trip(tmp_path):
    out = tmp_path / "u.csv"
    main(["potential", "--family", "free-juxtaposed", "--n", "3", "--grid", "x=-2:2:5,t=0.3:0.3:1",
          "--out", str(out)])
    _, data = read_csv(out)
    from tdsusy.potentials import free_juxtaposed
    assert np.array_equal(data[:, 2], free_juxtaposed(3, data[:, 0], data[:, 1]))


# -- transform ---------------------------------------------------------------------


def test_transform_matches_potential_family(tmp_path):
    cfg = {"seed_potential": {"type": "free"}, "chain": [{"family": "free-lambda", "lambda": 4.5}],
           "grid": {"x": [-4, 4, 9], "t": [0, 2, 5]}}
    t_out, p_out = tmp_path / "t.csv", tmp_path / "p.csv"
    assert main(["transform", "--config", write_cfg(tmp_path, cfg), "--out", str(t_out)]) == 0
    assert main(["potential", "--family", "free-even", "--k", "2", "--grid", "x=-4:4:9,t=0:2:5",
                 "--out", str(p_out)]) == 0
    th, td = read_csv(t_out)
    _, pd = read_csv(p_out)
    assert th == ["x", "t", "U", "absW", "re", "im"]
    assert np.allclose(td[:, 2], pd[:, 2], rtol=1e-9, atol=1e-12)
    assert np.all(np.isnan(td[:, 4]))  # no state requested


def test_transform_with_state(tmp_path):
    out = tmp_path / "t.json"
    assert main(["transform", "--config", write_cfg(tmp_path, FREE_PAIR), "--format", "json",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    U = np.array(rep["U"])
    t = np.array(rep["t"])[:, None]
    assert np.allclose(U, 2 / (1 + t ** 2), rtol=1e-12)
    assert np.max(np.abs(rep["re"])) > 0


def test_transform_inadmissible_chain_reports_poles(tmp_path, capsys):
    cfg = {"seed_potential": {"type": "free"}, "chain": [{"family": "free-lambda", "lambda": -1.5}],
           "grid": {"x": [-4.05, 3.95, 81], "t": [0, 1, 3]}}
    assert main(["transform", "--config", write_cfg(tmp_path, cfg)]) == 1
    err = capsys.readouterr().err
    assert "1 time(s)" in err and "x=" in err


@pytest.mark.parametrize("cfg", [
    {"seed_potential": {"type": "free"}, "chain": [], "grid": {"x": [-1, 1, 5], "t": [0, 1, 3]}},
    {"seed_potential": {"type": "free"}, "chain": [{"family": "oscillator-eigen", "n": 0}],
     "grid": {"x": [-1, 1, 5], "t": [0, 1, 3]}},
    {"seed_potential": {"type": "free"}, "chain": [{"family": "free-lambda", "lambda": 1.0}],
     "grid": {"x": [-1, 1, 5], "t": [0, 1, 3]}},
    {"seed_potential": {"type": "free"}, "chain": [{"family": "free-lambda"}],
     "grid": {"x": [-1, 1, 5], "t": [0, 1, 3]}},
    {"seed_potential": {"type": "quartic"}},
    {"seed_potential": {"type": "free"}, "extra": 1},
])
def test_transform_config_errors(cfg, tmp_path):
    assert main(["transform", "--config", write_cfg(tmp_path, cfg)]) == 2


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["transform", "--config", str(bad)]) == 2
    assert main(["transform", "--config", str(tmp_path / "missing.json")]) == 2


# -- propagate ---------------------------------------------------------------------


def prop_cfg(**kw):
    cfg = {"seed_potential": {"type": "free"}, "state": {"family": "free-lambda", "lambda": -0.5},
           "box": [-12, 12], "h": 0.05, "tau": 1e-3, "t_final": 0.5, "snapshots": [0.25, 0.5]}
    cfg.update(kw)
    return cfg


def test_propagate_free_state(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["propagate", "--config", write_cfg(tmp_path, prop_cfg()), "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["x", "t", "re", "im", "exact_re", "exact_im"]
    assert sorted(set(data[:, 1])) == [0.25, 0.5]
    diag = json.loads(capsys.readouterr().out)
    assert diag["norm_drift"] <= 1e-10
    assert all(e <= 1e-3 for e in diag["l2_error"].values())


def test_propagate_transformed_state(tmp_path, capsys):
    cfg = prop_cfg(chain=[{"family": "free-lambda", "lambda": 0.5}], box=[-14, 14], t_final=0.3,
                   snapshots=[0.3])
    out = tmp_path / "p.json"
    assert main(["propagate", "--config", write_cfg(tmp_path, cfg), "--format", "json",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert all(e <= 5e-3 for e in rep["diagnostics"]["l2_error"].values())
    assert rep["diagnostics"]["norm_drift"] <= 1e-8


def test_propagate_zero_state(tmp_path):
    out = tmp_path / "z.csv"
    cfg = prop_cfg(state={"family": "zero"}, t_final=0.1, snapshots=[0.1])
    assert main(["propagate", "--config", write_cfg(tmp_path, cfg), "--out", str(out)]) == 0
    _, data = read_csv(out)
    assert np.all(data[:, 2:] == 0)


def test_propagate_errors(tmp_path):
    path = write_cfg(tmp_path, prop_cfg())
    assert main(["propagate", "--config", path, "--tau", "0"]) == 2
    assert main(["propagate", "--config", path, "--tau=-1e-3"]) == 2
    assert main(["propagate", "--config", path, "--box", "-3", "3"]) == 1
    cfg = prop_cfg()
    del cfg["state"]
    assert main(["propagate", "--config", write_cfg(tmp_path, cfg, "n.json")]) == 2


def test_propagate_overrides_are_deterministic(tmp_path):
    path = write_cfg(tmp_path, prop_cfg())
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        main(["propagate", "--config", path, "--h", "0.1", "--t-final", "0.25", "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()


# -- helpers and entry point ---------------------------------------------------------


def test_parse_grid():
    g = parse_grid("x=-1:1:5,t=0:2:3")
    assert g.shape == (3, 5)
    with pytest.raises(ConfigError):
        parse_grid("x=-1:1:5")


def test_console_script_runs():
    exe = shutil.which("tdsusy")
    cmd = [exe] if exe else [sys.executable, "-m", "tdsusy.cli"]
    res = subprocess.run(cmd + ["potential", "--family", "free-even", "--k", "0", "--grid",
                                "x=0:1:2,t=0:1:2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "x,t,value"
    assert subprocess.run(cmd, capture_output=True).returncode == 2
