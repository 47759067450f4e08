import json

import numpy as np
import pytest

from pseudoproc import cli
from pseudoproc.errors import ConfigError, IngestError, ModelRequiredError


def cfg_text(**kw):
    base = {"experiment": "kendall", "model": {"kind": "independence"}, "seed": 1}
    base.update(kw)
    return json.dumps(base)


# config parsing

def test_parse_defaults():
    cfg = cli.parse_config(cfg_text())
    assert len(cfg.grid) == 17 and cfg.grid[0] == 0.1 and cfg.grid[-1] == 0.9
    assert cfg.n_list == [100] and cfg.reps == 1 and cfg.model["d"] == 2
    assert cli.parse_config(cfg_text(experiment="copula")).grid[0] == [1 / 6, 1 / 6]


@pytest.mark.parametrize("change,message", [
    ({"n_list": [400, 100]}, "n_list not increasing"),
    ({"reps": 0}, "'reps' must be >= 1"),
    ({"colour": 1}, "unknown key 'colour' in config"),
    ({"model": {"kind": "clayton", "alpha": 1, "beta": 2}}, "unknown key 'beta' in model"),
    ({"model": {"kind": "clayton", "alpha": -1}}, "alpha"),
    ({"experiment": "verify:nope"}, "unknown experiment"),
    ({"tolerance": {"slack": 1}}, "unknown key 'slack' in tolerance"),
])
def test_parse_errors(change, message):
    with pytest.raises(ConfigError, match=message):
        cli.parse_config(cfg_text(**change))


def test_parse_missing_seed_and_model():
    with pytest.raises(ConfigError, match="missing required key 'seed'"):
        cli.parse_config(json.dumps({"experiment": "kendall", "model": {"kind": "independence"}}))
    with pytest.raises(ConfigError, match="model"):
        cli.parse_config(json.dumps({"experiment": "kendall", "seed": 1}))
    with pytest.raises(ModelRequiredError):
        cli.parse_config(json.dumps({"experiment": "verify:covariance", "data": "x.csv", "seed": 1}))


def test_digest_ignores_output():
    a = cli.parse_config(cfg_text(output="one"))
    b = cli.parse_config(cfg_text(output="two"))
    c = cli.parse_config(cfg_text(seed=2))
    assert a.digest() == b.digest() != c.digest()


# ingestion

def test_ingest_good_file(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("u,v\n0.1,0.2\n\n0.3,0.4\n0.5,0.6\n", encoding="utf-8")
    s = cli.ingest_csv(p, 2)
    assert s.n == 3 and s.rows[2].tolist() == [0.5, 0.6] and s.provenance == str(p)


@pytest.mark.parametrize("text,message", [
    ("u,v\n", "empty file"),
    ("u,v\n0.1,0.2\n0.3,abc\n", r":3: non-numeric cell 'abc'"),
    ("u,v\n0.1,0.2,0.3\n", r":2: .*dimension"),
    ("0.1,0.2\n", "expected a header line"),
    ("u,v,w\n0.1,0.2,0.3\n", r":1: header has 3 columns"),
])
def test_ingest_errors(tmp_path, text, message):
    p = tmp_path / "bad.csv"
    p.write_text(text, encoding="utf-8")
    with pytest.raises(IngestError, match=message):
        cli.ingest_csv(p, 2)


# runs

def run_cfg(tmp_path, name, **kw):
    cfg = cli.parse_config(cfg_text(**kw))
    out = tmp_path / name
    return cli.run(cfg, out), out


def test_process_run_file_contract(tmp_path):
    man, out = run_cfg(tmp_path, "k", n_list=[30, 60], reps=3)
    names = sorted(p.name for p in out.iterdir())
    assert names == ["config.json", "manifest.json", "paths_n30.csv", "paths_n30.json",
                     "paths_n60.csv", "paths_n60.json"]
    lines = (out / "paths_n30.csv").read_text().splitlines()
    assert lines[0] == "rep,grid_id,index,value" and len(lines) == 1 + 3 * 17
    assert man.exit_status == 0 and man.verdicts == {}
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) == {"config_hash", "version", "files", "verdicts", "wall_time", "exit_status"}


def test_check_run_writes_reports(tmp_path):
    man, out = run_cfg(tmp_path, "n", experiment="verify:negligibility", n_list=[50, 100], reps=3,
                       **{"class": {"kind": "constants", "values": [1.0, 2.0]}})
    rep = json.loads((out / "negligibility.json").read_text())
    assert rep["verdict"] == "pass" and rep["observed"] == [0.0, 0.0]
    assert (out / "negligibility.csv").read_text().splitlines()[0] == "grid_id,n,observed,se"
    assert man.exit_status == 0


def test_run_is_byte_identical(tmp_path):
    kw = dict(experiment="copula", n_list=[40], reps=4)
    _, a = run_cfg(tmp_path, "a", **kw)
    _, b = run_cfg(tmp_path, "b", **kw)
    for f in a.iterdir():
        if f.name != "manifest.json":
            assert f.read_bytes() == (b / f.name).read_bytes()
    ma, mb = (json.loads((d / "manifest.json").read_text()) for d in (a, b))
    assert ma["files"] == mb["files"] and ma["config_hash"] == mb["config_hash"]


def test_data_only_runs(tmp_path):
    data = tmp_path / "d.csv"
    rows = np.random.default_rng(0).random((25, 2)).tolist()
    data.write_text("u,v\n" + "".join(f"{a!r},{b!r}\n" for a, b in rows), encoding="utf-8")
    cfg = cli.parse_config(json.dumps({"experiment": "copula", "data": str(data), "seed": 1}))
    man = cli.run(cfg, tmp_path / "o")
    assert "empirical.csv" in man.files and man.exit_status == 0
    cfg = cli.parse_config(json.dumps({"experiment": "residual", "data": str(data), "seed": 1}))
    with pytest.raises(ModelRequiredError):
        cli.run(cfg, tmp_path / "o2")


def test_report_csv_reingests(tmp_path):
    _, out = run_cfg(tmp_path, "n", experiment="verify:negligibility", n_list=[50, 100], reps=2,
                     **{"class": {"kind": "constants", "values": [1.0]}})
    s = cli.ingest_csv(out / "negligibility.csv", 4)
    assert s.n == 2 and s.rows[:, 1].tolist() == [50.0, 100.0]


# entry point

def test_main_list_checks(capsys):
    assert cli.main(["list-checks"]) == 0
    assert capsys.readouterr().out.split() == list(cli.CHECK_NAMES)


def test_main_ingest_and_errors(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("u,v\n0.1,0.2\n", encoding="utf-8")
    assert cli.main(["ingest", str(p), "--dim", "2", "--peek"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["n"] == 1 and info["head"] == [[0.1, 0.2]]
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "verify:covariance", "data": str(p), "seed": 1}))
    assert cli.main(["run", str(cfg)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ModelRequiredError" and "model required" in err["message"]


def test_main_run(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(cfg_text(n_list=[20], reps=2))
    assert cli.main(["run", str(cfg), "--output", str(tmp_path / "o")]) == 0
    assert json.loads(capsys.readouterr().out)["exit_status"] == 0
