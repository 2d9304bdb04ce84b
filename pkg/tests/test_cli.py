import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from epsense import cli, sweep
from epsense.config import validate_config
from epsense.errors import ConfigError

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"

MINIMAL = {
    "passive": {"gamma_a": 5.0, "g": 1.0},
    "input": {"alpha": 1.0, "bandwidth": 2.0},
    "sweep": {"var": "g", "start": 0.5, "stop": 1.5, "n_points": 3},
    "outputs": ["f_eps"],
}


def test_minimal_config_defaults():
    cfg = validate_config(json.dumps(MINIMAL))
    assert cfg.system == "passive" and cfg.eps_convention == "symmetric"
    assert math.isinf(cfg.field.inv_temperature)
    assert cfg.quadrature.rel_tol == 1e-8 and cfg.quadrature.half_width == 50.0
    assert cfg.passive.gamma_b == 1.0 and cfg.passive.gamma_ex == 0.0
    assert cfg.values() == [0.5, 1.0, 1.5]


def test_dotted_keys():
    raw = {k: v for k, v in MINIMAL.items() if k != "passive"}
    raw.update({"passive.gamma_a": 5.0, "passive.g": 1.0, "quadrature.half_width": 30.0})
    cfg = validate_config(raw)
    assert cfg.passive.gamma_a == 5.0 and cfg.quadrature.half_width == 30.0


def violations(raw):
    with pytest.raises(ConfigError) as info:
        validate_config(raw)
    return dict(info.value.violations)


def test_all_violations_reported():
    raw = json.loads(json.dumps(MINIMAL))
    raw["passive"]["gamma_b"] = -1
    raw["input"]["bandwidth"] = 0
    raw["outputs"] = []
    v = violations(raw)
    assert {"passive.gamma_b", "input.bandwidth", "outputs"} <= set(v)


def test_active_missing_kappa():
    raw = json.loads((CONFIGS / "fig4.json").read_text())
    del raw["gain"]["kappa"]
    assert "gain.kappa" in violations(raw)


def test_other_violations():
    raw = json.loads(json.dumps(MINIMAL))
    raw["sweep"]["stop"] = raw["sweep"]["start"]
    assert "sweep" in violations(raw)
    assert "" in violations("{not json")
    raw = json.loads(json.dumps(MINIMAL))
    raw["outputs"] = ["f_eps", "bogus"]
    raw["mystery"] = 1
    v = violations(raw)
    assert "outputs" in v and "mystery" in v
    raw = json.loads((CONFIGS / "fig4.json").read_text())
    raw["outputs"] = ["chi_sq"]
    assert "outputs" in violations(raw)


def read_rows(text):
    lines = text.splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


@pytest.fixture(scope="module")
def fig2_result():
    return sweep.run_sweep(validate_config((CONFIGS / "fig2.json").read_text()), jobs=4)


def test_fig2_shape(fig2_result):
    header, rows = read_rows(sweep.to_csv(fig2_result))
    assert header == ["g", "f_eps", "f_delta", "chi_sq", "status"]
    assert len(rows) == 201 and all(len(r) == 5 for r in rows)
    g = [float(r[0]) for r in rows]
    f_delta = [float(r[2]) for r in rows]
    chi = [float(r[3]) for r in rows]
    f_eps = [float(r[1]) for r in rows]
    i = min(range(201), key=lambda k: f_delta[k])
    assert abs(g[i] - 1.025) <= 0.01 and f_delta[i] < 0.1
    assert abs(g[max(range(201), key=lambda k: chi[k])] - 1.025) <= 0.01
    jumps = [abs(b - a) / a for a, b in zip(f_eps, f_eps[1:])]
    assert max(jumps) < 0.01


def test_json_round_trip(fig2_result):
    text = sweep.to_json(fig2_result)
    back = sweep.parse_json(text)
    assert back.rows == fig2_result.rows and back.columns == fig2_result.columns
    assert sweep.to_csv(back) == sweep.to_csv(fig2_result)


def _values(cell):
    if cell in ("", "ok") or cell.isalpha() or "_" in cell:
        return [cell]
    return [complex(z) for z in cell.split(";")]


@pytest.mark.parametrize("name", ["fig2", "fig4"])
def test_golden(name):
    result = sweep.run_sweep(validate_config((CONFIGS / f"{name}.json").read_text()), jobs=2)
    _, new = read_rows(sweep.to_csv(result))
    _, old = read_rows((GOLDEN / f"{name}.csv").read_text())
    assert len(new) == len(old) == 201
    for r_new, r_old in zip(new, old):
        for a, b in zip(r_new, r_old):
            va, vb = _values(a), _values(b)
            for x, y in zip(va, vb):
                if isinstance(x, str):
                    assert x == y
                else:
                    scale = max(abs(z) for z in vb)
                    assert abs(x - y) <= 1e-10 * max(abs(y), 1e-3 * scale)


def test_fig4_columns():
    result = sweep.run_sweep(validate_config((CONFIGS / "fig4.json").read_text()), jobs=2)
    assert result.columns == ["s_z_over_s_c", "f_eps", "eigenvalues", "eta", "status"]
    assert result.metadata["s_c"] == pytest.approx(1.3794e12, rel=1e-4)
    assert all(r["status"] == "ok" for r in result.rows)


def test_above_threshold_rows_flagged(tmp_path):
    raw = json.loads((CONFIGS / "fig4.json").read_text())
    raw["sweep"].update(start=0.98, stop=1.02, n_points=5)
    raw["outputs"] = ["f_eps", "eigenvalues", "s_nu"]
    result = sweep.run_sweep(validate_config(raw), jobs=1)
    status = [r["status"] for r in result.rows]
    assert status[:2] == ["ok", "ok"] and status[-1] == "above_threshold"
    assert result.rows[-1]["f_eps"] is None and result.rows[-1]["eigenvalues"] is not None
    header, rows = read_rows(sweep.to_csv(result))
    assert rows[-1][1] == ""


def test_passive_sweeps_other_vars():
    raw = json.loads(json.dumps(MINIMAL))
    raw["passive"]["gamma_ex"] = 0.1
    raw["sweep"] = {"var": "epsilon", "start": -0.1, "stop": 0.1, "n_points": 3}
    raw["outputs"] = ["f_eps", "overlap", "eigenvalues", "s_nu", "eta"]
    rows = sweep.run_sweep(validate_config(raw), jobs=1).rows
    assert rows[0]["overlap"] == pytest.approx(rows[2]["overlap"])
    raw["sweep"] = {"var": "nu", "start": -1, "stop": 1, "n_points": 5}
    raw["outputs"] = ["f_eps", "f_delta", "s_nu"]
    rows = sweep.run_sweep(validate_config(raw), jobs=1).rows
    assert all(r["status"] == "ok" for r in rows)


def test_ep_row_flagged():
    raw = json.loads((CONFIGS / "fig2.json").read_text())
    raw["sweep"].update(start=1.0, stop=1.05, n_points=3)
    rows = sweep.run_sweep(validate_config(raw), jobs=1).rows
    assert rows[1]["status"] == "divergent_at_ep" and rows[1]["chi_sq"] is None
    assert rows[1]["f_eps"] > 0


def run_cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "epsense.cli", *args], capture_output=True, text=True,
                          env={**os.environ, **(env or {})}, cwd=ROOT)


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**MINIMAL, "passive": {"gamma_a": 5.0, "gamma_b": -1}}))
    r = run_cli("sweep", "--config", str(bad))
    assert r.returncode == 1 and "passive.gamma_b" in r.stderr
    r = run_cli("sweep", "--config", str(tmp_path / "missing.json"))
    assert r.returncode == 2
    good = tmp_path / "good.json"
    good.write_text(json.dumps(MINIMAL))
    r = run_cli("sweep", "--config", str(good), "--out", str(tmp_path / "no" / "dir" / "x.csv"))
    assert r.returncode == 2
    r = run_cli("sweep", "--config", str(good), env={"EPSENSE_JOBS": "zero"})
    assert r.returncode == 1


def test_cli_commands(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(MINIMAL))
    r = run_cli("sweep", "--config", str(good), "--format", "json")
    assert r.returncode == 0 and len(json.loads(r.stdout)["rows"]) == 3
    r = run_cli("point", "--config", str(good), "--at", "1.2")
    assert r.returncode == 0 and json.loads(r.stdout)["g"] == 1.2
    r = run_cli("threshold", "--config", str(CONFIGS / "fig4.json"))
    out = json.loads(r.stdout)
    assert out["s_c"] == pytest.approx(1.3794e12, rel=1e-4)
    assert out["s_c_scan"] == pytest.approx(out["s_c"], rel=1e-6)
    assert out["passive_ep_g"] == pytest.approx(1.025)
    r = run_cli("check")
    assert r.returncode == 0 and r.stdout.count("PASS") == 5


def test_resolve_jobs(monkeypatch):
    monkeypatch.delenv("EPSENSE_JOBS", raising=False)
    assert cli.resolve_jobs(3) == 3
    monkeypatch.setenv("EPSENSE_JOBS", "5")
    assert cli.resolve_jobs(3) == 5
