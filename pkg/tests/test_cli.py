import json
import os
import subprocess
import sys

import pytest

from quasistable.config import ConfigError, RunConfig, load_config, parse_config


def run(args, tmp_path, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "quasistable", *args], cwd=tmp_path, env=e,
                          capture_output=True, text=True, timeout=600)


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_verify_is_byte_identical(tmp_path):
    a = run(["verify", "--out", "a"], tmp_path)
    b = run(["verify", "--out", "b", "--threads", "2"], tmp_path)
    assert a.returncode == 0 and b.returncode == 0, a.stderr + b.stderr
    ra = (tmp_path / "a" / "verify.json").read_bytes()
    assert ra == (tmp_path / "b" / "verify.json").read_bytes()
    rep = json.loads(ra)
    assert rep["all_passed"] is True
    assert rep["config_sha256"] == RunConfig().digest()


@pytest.mark.parametrize("cfg,field", [
    ({"model": {"tau": -1}}, "model.tau"),
    ({"model": {"beta": "x"}}, "model.beta"),
    ({"quadrature": {"order": 0}}, "quadrature.order"),
    ({"extra": 1}, "extra"),
])
def test_bad_config_names_the_field(tmp_path, cfg, field):
    r = run(["verify", "--config", write_cfg(tmp_path, cfg)], tmp_path)
    assert r.returncode == 1
    lines = r.stderr.strip().splitlines()
    assert len(lines) == 1 and field in lines[0]


def test_config_errors_in_process(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "nan.json"
    bad.write_text('{"model": {"beta": NaN}}')
    with pytest.raises(ConfigError):
        load_config(str(bad))
    cfg = parse_config({"model": {"tau": 3.0}})
    assert cfg.model.tau == 3.0 and cfg.digest() != RunConfig().digest()
    assert load_config(None) == RunConfig()


def test_bad_seeds_and_threads(tmp_path):
    assert run(["poles", "--seeds", "abc"], tmp_path).returncode == 1
    assert run(["verify", "--threads", "0"], tmp_path).returncode == 1
    assert run(["verify"], tmp_path, {"QUASISTABLE_THREADS": "many"}).returncode == 1
    assert run(["verify", "--out", "t"], tmp_path, {"QUASISTABLE_THREADS": "2"}).returncode == 0


def test_poles_free_model(tmp_path):
    cfg = write_cfg(tmp_path, {"model": {"beta": 0.0}})
    r = run(["poles", "--config", cfg, "--out", "o", "--seeds", "1-0.05j,0.9-0.01j"], tmp_path)
    assert r.returncode == 0, r.stderr
    rep = json.loads((tmp_path / "o" / "poles.json").read_text())
    (pole,) = rep["poles"]
    assert pole["s_R"] == [1, 0] and pole["Gamma_R"] == 0


def test_greens_csv_layout(tmp_path):
    cfg = write_cfg(tmp_path, {"scan": {"points": 5}})
    r = run(["greens", "--config", cfg, "--out", "g"], tmp_path)
    assert r.returncode == 0, r.stderr
    lines = (tmp_path / "g" / "greens.csv").read_text().splitlines()
    digest = parse_config({"scan": {"points": 5}}).digest()
    assert lines[0] == f"# config_sha256={digest}"
    assert lines[1].split(",")[0] == "s" and len(lines) == 7
    bad = write_cfg(tmp_path, {"scan": {"s_min": 0.1}}, "bad.json")
    assert run(["greens", "--config", bad], tmp_path).returncode == 1


def test_decay_exit_codes(tmp_path):
    # no decaying pole at the defaults; one at tau = 3
    r = run(["decay", "--out", "d1"], tmp_path)
    assert r.returncode == 2 and "decay" in r.stderr
    cfg = write_cfg(tmp_path, {"model": {"tau": 3.0}})
    r = run(["decay", "--config", cfg, "--out", "d3"], tmp_path)
    assert r.returncode == 0, r.stderr
    rep = json.loads((tmp_path / "d3" / "decay.json").read_text())
    assert rep["pole"]["s_R"][1] < 0 and rep["pole"]["sheet"] == "second"
    assert (tmp_path / "d3" / "decay.csv").read_text().startswith("# config_sha256=")


def test_semigroup_demo(tmp_path):
    r = run(["semigroup-demo", "--out", "s"], tmp_path)
    assert r.returncode == 0, r.stderr
    rep = json.loads((tmp_path / "s" / "semigroup.json").read_text())
    assert rep["composition_error"] < 1e-9
    assert rep["max_phase_modulus"] <= 1.0
    assert rep["inverse_in_semigroup"] is False


def test_unknown_command(tmp_path):
    assert run(["explode"], tmp_path).returncode == 2
