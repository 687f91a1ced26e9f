import csv
import json
from pathlib import Path

import numpy as np
import pytest

from taskmech import cli
from taskmech.config import default_config, default_document, load_config, parse_config
from taskmech.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_doc(path, doc):
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


def fixed_doc(**solver):
    doc = default_document()
    doc["solver"]["alpha0"] = 0.0
    doc["solver"].update(solver)
    return doc


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("default")
    code = cli.main(["solve", str(CONFIGS / "default.json"), "--out", str(out), "--quiet"])
    return code, out


def test_default_json_matches_code():
    assert json.loads((CONFIGS / "default.json").read_text()) == default_document()
    cfg = default_config()
    assert cfg.models.satisfaction.z2 == 3.0 and cfg.search_alpha0
    assert load_config(CONFIGS / "literal_z2_1.json").models.satisfaction.z2 == 1.0


def test_default_solve(default_run):
    code, out = default_run
    assert code == 0
    rows = read_rows(out / "schedule.csv")
    assert rows[0] == ["theta", "alpha", "beta"] and len(rows) == 202
    assert read_rows(out / "trace.csv")[0] == ["iter", "objective", "du_sup"]
    assert read_rows(out / "snapshots.csv")[0] == ["iter", "theta", "alpha"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["converged"] and manifest["verification"]["passed"]
    assert manifest["config"] == default_document()
    assert manifest["alpha0"] == 0.0


def test_verify_roundtrip(default_run, tmp_path):
    _, out = default_run
    code = cli.main(["verify", str(CONFIGS / "default.json"), str(out / "schedule.csv"),
                     "--out", str(tmp_path), "--quiet"])
    assert code == 0
    assert len(read_rows(tmp_path / "utility_matrix.csv")) == 201**2 + 1
    assert json.loads((tmp_path / "verification.json").read_text())["passed"]


def test_schedule_csv_roundtrip(default_run, solved):
    _, out = default_run
    sched = cli.read_schedule(out / "schedule.csv", default_config())
    np.testing.assert_allclose(sched.alpha, solved[0].alpha, atol=1e-12)
    np.testing.assert_allclose(sched.beta, solved[0].beta, atol=1e-12)


def test_tampered_schedule(default_run, tmp_path):
    _, out = default_run
    rows = read_rows(out / "schedule.csv")
    rows[150][1] = repr(float(rows[150][1]) - 0.05)
    bad = tmp_path / "bad.csv"
    with open(bad, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    code = cli.main(["verify", str(CONFIGS / "default.json"), str(bad), "--out", str(tmp_path), "--quiet"])
    assert code == 3
    assert "alpha_monotone" in json.loads((tmp_path / "verification.json").read_text())["failures"]


def test_unparseable_schedule(tmp_path):
    bad = tmp_path / "s.csv"
    bad.write_text("theta,alpha\n1,2\n")
    assert cli.main(["verify", str(CONFIGS / "default.json"), str(bad), "--out", str(tmp_path)]) == 1


def test_alpha0_at_cost_rejected(tmp_path, capsys):
    cfg = write_doc(tmp_path / "c.json", fixed_doc(alpha0=10.0))
    assert cli.main(["solve", cfg, "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "alpha0" in err and "line" in err


def test_max_iters_one(tmp_path):
    cfg = write_doc(tmp_path / "c.json", fixed_doc(max_iters=1))
    out = tmp_path / "o"
    assert cli.main(["solve", cfg, "--out", str(out), "--quiet"]) == 2
    for name in ("schedule.csv", "trace.csv", "snapshots.csv", "manifest.json"):
        assert (out / name).exists()
    assert not json.loads((out / "manifest.json").read_text())["converged"]


def test_sweep_zero_width(tmp_path):
    doc = default_document()
    doc["solver"]["search_interval"] = [6.0, 6.0]
    out = tmp_path / "o"
    assert cli.main(["sweep-alpha0", write_doc(tmp_path / "c.json", doc), "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out / "sweep.csv")
    assert rows[0] == ["alpha0", "profit", "converged"] and len(rows) == 2
    assert (out / "schedule.csv").exists()


def test_sweep_default_dominates(tmp_path, search):
    out = tmp_path / "o"
    assert cli.main(["sweep-alpha0", str(CONFIGS / "default.json"), "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out / "sweep.csv")[1:]
    profits = {float(a): float(p) for a, p, _ in rows}
    best = json.loads((out / "manifest.json").read_text())["profit_direct"]
    assert best >= profits[0.0] - 1e-12
    assert best == pytest.approx(search.profit, rel=1e-12)


def test_sweep_needs_search(tmp_path, capsys):
    assert cli.main(["sweep-alpha0", str(CONFIGS / "fixed_alpha0.json"), "--out", str(tmp_path)]) == 1
    assert "search" in capsys.readouterr().err


def test_deterministic_reruns(tmp_path):
    cfg = str(CONFIGS / "fixed_alpha0.json")
    for d in ("a", "b"):
        assert cli.main(["solve", cfg, "--out", str(tmp_path / d), "--quiet", "--seedless"]) == 0
    for name in ("schedule.csv", "trace.csv", "snapshots.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seedless_catches_rng(monkeypatch, tmp_path):
    def noisy(args):
        return int(np.random.default_rng(0).random() > 2)
    monkeypatch.setattr(cli, "cmd_solve", noisy)
    argv = ["solve", str(CONFIGS / "fixed_alpha0.json"), "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    with pytest.raises(RuntimeError, match="seedless"):
        cli.main(argv + ["--seedless"])


def test_forbid_rng_restores_generators():
    with cli.forbid_rng():
        pass
    assert np.random.default_rng(1).integers(10) >= 0


def test_unknown_key_has_line(tmp_path):
    path = tmp_path / "c.json"
    doc = default_document()
    doc["solver"]["gama0"] = 0.1
    path.write_text(json.dumps(doc, indent=2))
    with pytest.raises(ConfigError, match=r"line \d+: solver.gama0: unknown key"):
        load_config(path)


def test_invalid_json_has_line(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{\n  "market": {"p": 10,}\n}\n')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(path)


@pytest.mark.parametrize("section,key,value", [
    ("distribution", "lo", -1.0), ("satisfaction", "z1", 1.5), ("solver", "n_grid", 2),
    ("solver", "gamma_schedule", "cosine"), ("solver", "u_bar", 0.0), ("market", "p", "ten"),
])
def test_bad_values_rejected(section, key, value):
    doc = default_document()
    doc[section][key] = value
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_assumption_violation_rejected():
    doc = default_document()
    doc["distribution"] = {"kind": "custom", "theta": list(np.linspace(1, 4, 31)),
                           "density": list(1 / np.linspace(1, 4, 31) ** 2)}
    with pytest.raises(ConfigError, match="hazard"):
        parse_config(doc)


def test_version_flag(capsys):
    assert cli.main(["--version"]) == 0
