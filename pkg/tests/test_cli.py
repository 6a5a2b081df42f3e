import os
import subprocess
import sys

import pytest

from oseen2d.cli import build_config, list_mapping, main, parse_config_file
from oseen2d.cli import ConfigError
from oseen2d.experiments import EXPERIMENTS, ExperimentConfig


def run_cli(args):
    env = dict(os.environ)
    src = os.path.join(os.path.dirname(__file__), "..", "src")
    env["PYTHONPATH"] = os.path.abspath(src) + os.pathsep + env.get("PYTHONPATH", "")
    return subprocess.run([sys.executable, "-m", "oseen2d.cli", *args],
                          capture_output=True, text=True, env=env)


def test_list_prints_every_subcommand():
    text = list_mapping()
    for name in EXPERIMENTS:
        assert name in text
    assert "A15" in text


def test_config_file_parsing(tmp_path):
    p = tmp_path / "cfg"
    p.write_text("grid-n = 128\nbox_l = 30.0  # comment\n\n# full comment\nseed = 7\n")
    values = parse_config_file(p)
    assert values == {"grid_n": "128", "box_l": "30.0", "seed": "7"}
    cfg = build_config(values, {})
    assert cfg.grid_n == 128 and cfg.box_l == 30.0 and cfg.seed == 7


def test_config_flag_precedence(tmp_path):
    p = tmp_path / "cfg"
    p.write_text("grid_n = 128\n")
    cfg = build_config(parse_config_file(p), {"grid_n": 64})
    assert cfg.grid_n == 64


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError):
        build_config({"wibble": "3"}, {})
    with pytest.raises(ConfigError):
        build_config({"grid_n": "not-a-number"}, {})


def test_cli_missing_config_file():
    assert main(["biot-savart-oracle", "/nonexistent/config"]) == 1


def test_cli_requires_subcommand():
    assert main([]) == 1


def test_cli_unknown_subcommand():
    assert main(["frobnicate"]) == 1


def test_cli_list_exit_zero():
    assert main(["--list"]) == 0


def test_cli_end_to_end_and_deterministic(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    args = ["commutation", "--grid-n", "64", "--out"]
    r1 = run_cli(args + [str(out1)])
    r2 = run_cli(args + [str(out2)])
    assert r1.returncode == 0, r1.stdout + r1.stderr
    assert r1.stdout == r2.stdout
    for line in r1.stdout.splitlines():
        assert line.startswith(("PASS", "FAIL"))
        assert len(line.split()) == 4
    m1 = (out1 / "manifest.txt").read_text()
    m2 = (out2 / "manifest.txt").read_text()
    assert m1 == m2
    assert "subcommand = commutation" in m1


def test_cli_artifacts_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        r = run_cli(["diffuse-localized", "--grid-n", "128", "--out", str(out)])
        assert r.returncode == 0, r.stdout + r.stderr
        outs.append((out / "diffuse_localized.csv").read_bytes())
    assert outs[0] == outs[1]


def test_default_config_values():
    cfg = ExperimentConfig()
    assert cfg.grid_n == 256
    assert cfg.box_l == 40.0
    assert cfg.m == 3.0
    assert cfg.t0 == 1e-2
    assert cfg.seed == 42
