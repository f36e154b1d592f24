import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb2d import config as cfgmod
from coulomb2d.cli import main

CONFIGS = sorted((Path(__file__).parent.parent / "scripts" / "configs").glob("*.toml"))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_round_trip(path):
    cfg = cfgmod.load(path)
    again = cfgmod.loads(cfgmod.dumps(cfg))
    assert again == cfg
    assert cfgmod.config_hash(again) == cfgmod.config_hash(cfg)


def test_shipped_configs_exist():
    assert len(CONFIGS) >= 3


@settings(max_examples=40, deadline=None)
@given(ns=st.lists(st.integers(1, 10_000), min_size=1, max_size=5), bs=st.floats(0.05, 1.9),
       m=st.integers(16, 10_000), fmt=st.sampled_from(cfgmod.FORMATS))
def test_random_configs_round_trip(ns, bs, m, fmt):
    data = {"n": ns, "beta_star": bs, "grid": {"m": m}, "output": {"format": fmt}}
    cfg = cfgmod.from_dict(data)
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg


@pytest.mark.parametrize("text", [
    "n = [0]", "beta_star = -1", "[grid]\nm = 'x'", "bogus = 1", "[output]\nformat = 'xml'", "n = [",
])
def test_bad_configs_rejected(text):
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.loads(text)


def test_malformed_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("n = [\n")
    code, _, err = run(capsys, "equilibrium", "--config", str(bad), "--out", str(tmp_path))
    assert code == 2
    msg = json.loads(err.strip())
    assert msg["exit_code"] == 2 and msg["error"] == "ConfigError"


def test_missing_config_exit_code(tmp_path, capsys):
    code, _, _ = run(capsys, "equilibrium", "--config", str(tmp_path / "none.toml"))
    assert code == 2


def test_equilibrium_radius(tmp_path, capsys):
    code, out, _ = run(capsys, "equilibrium", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "equilibrium.json").read_text())
    assert summary["droplet_radius"] == 1.0
    code, _, _ = run(capsys, "equilibrium", "--potential", "quartic", "--out", str(tmp_path))
    summary = json.loads((tmp_path / "equilibrium.json").read_text())
    assert summary["droplet_radius"] == pytest.approx(2 ** -0.25, abs=1e-14)
    assert "provenance" in summary and len(summary["provenance"]["config_sha256"]) == 64


def test_numeric_failure_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "equilibrium", "--potential", "nope", "--out", str(tmp_path))
    assert code == 1
    assert len(err.strip().splitlines()) == 1


def test_onepoint_n1(tmp_path, capsys):
    code, out, _ = run(capsys, "onepoint", "--n", "1", "--out", str(tmp_path))
    assert code == 0 and "R_n(0)=1.0 " in out


def test_fluct_prints_half(tmp_path, capsys):
    code, out, _ = run(capsys, "fluct", "--n", "4", "--n", "64", "--out", str(tmp_path))
    assert code == 0 and out.startswith("total=0.5 ")
    payload = json.loads((tmp_path / "fluct.json").read_text())
    assert all(abs(row["gap_to_total"]) < 1e-12 for row in payload["ginibre_moment_check"])


def test_thermal_non_convergence_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[solver]\nmax_iter = 1\nfixed_point_iter = 0\n[grid]\nm = 256\n")
    code, _, _ = run(capsys, "thermal", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 3
    assert json.loads((tmp_path / "thermal.json").read_text())["partial"] is True


def test_flag_precedence(tmp_path):
    from coulomb2d.cli import build_parser, resolve_config
    cfg_file = tmp_path / "c.toml"
    cfg_file.write_text("n = [8]\nbeta_star = 0.5\n[potential]\nname = 'quadratic'\nparams = { c = 3.0 }\n")
    args = build_parser().parse_args(["thermal", "--config", str(cfg_file), "--n", "16", "--param", "c=2"])
    cfg = resolve_config(args)
    assert cfg.n == [16] and cfg.beta_star == 0.5 and cfg.potential.params == {"c": 2.0}


def test_byte_identical_reruns(tmp_path, capsys):
    outputs = []
    for run_dir in ("a", "b"):
        d = tmp_path / run_dir
        code, _, _ = run(capsys, "edge", "--n", "64", "--m", "512", "--out", str(d))
        assert code == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outputs[0] == outputs[1]
    assert "edge_n64.csv" in outputs[0]
    header = outputs[0]["edge_n64.csv"].decode().splitlines()[0]
    assert header == "u,g_n,delta_tilde,residual"


def test_compare_small(tmp_path, capsys):
    code, out, _ = run(capsys, "compare", "--n", "32", "--n", "64", "--m", "512", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "compare.json").read_text())
    assert summary["headline"]["v_convention_coefficients"] == {"one_point": 0.25, "claimed_thermal": 0.5}
    assert "one-point expansion vs claimed thermal expansion" in out
