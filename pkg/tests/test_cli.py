import os
import xml.etree.ElementTree as ET

import pytest

from pilotbox.cli import main
from pilotbox.output import read_run_csv


def test_version_exits_cleanly(capsys):
    assert main(["--version"]) == 0
    assert "pilotbox" in capsys.readouterr().out


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 1
    capsys.readouterr()


def test_analytic_sweep_prints_table(capsys):
    assert main(["analytic-sweep", "--grid", "0:0.3:4"]) == 0
    out = capsys.readouterr().out
    assert "# analytic-sweep" in out
    assert "quantum" in out
    assert len(out.strip().splitlines()) == 2 + 4


def test_seed_is_required_for_sampling_runs(capsys):
    assert main(["equal-times", "--count", "100"]) == 1
    err = capsys.readouterr().err
    assert "--seed" in err


def test_bad_grid_string(capsys):
    assert main(["analytic-sweep", "--grid", "0..1"]) == 1
    assert main(["analytic-sweep", "--grid", "0:1:x"]) == 1
    capsys.readouterr()


def test_count_below_floor(capsys):
    assert main(["equal-times", "--seed", "1", "--count", "50"]) == 1
    capsys.readouterr()


def test_run_writes_csv_and_manifest(tmp_path, capsys):
    out = str(tmp_path / "run.csv")
    code = main(
        ["equal-times", "--count", "100", "--seed", "5",
         "--grid", "0:0.2:3", "--out", out]
    )
    assert code == 0
    rows = read_run_csv(out)
    assert len(rows) == 3
    assert os.path.exists(out + ".manifest")
    # table goes to stdout only when no --out is given
    assert "quantum" not in capsys.readouterr().out


def test_manifest_replay_reproduces_csv(tmp_path, capsys):
    first = str(tmp_path / "a.csv")
    assert main(
        ["equal-times", "--count", "100", "--seed", "5",
         "--grid", "0:0.2:3", "--out", first]
    ) == 0
    second = str(tmp_path / "b.csv")
    assert main(
        ["equal-times", "--config", first + ".manifest", "--out", second]
    ) == 0
    assert open(first, "rb").read() == open(second, "rb").read()
    capsys.readouterr()


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("count = 100\nseed = 5\ngrid = 0:0.2:3\n")
    out = str(tmp_path / "c.csv")
    assert main(
        ["equal-times", "--config", str(cfg), "--seed", "6", "--out", out]
    ) == 0
    manifest = open(out + ".manifest").read()
    assert "seed = 6" in manifest
    capsys.readouterr()


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("turbo = yes\n")
    assert main(["equal-times", "--config", str(cfg), "--seed", "1"]) == 1
    assert "turbo" in capsys.readouterr().err


def test_config_experiment_mismatch(tmp_path, capsys):
    cfg = tmp_path / "mismatch.cfg"
    cfg.write_text("experiment = fr\nseed = 1\n")
    assert main(["equal-times", "--config", str(cfg)]) == 1
    capsys.readouterr()


def test_missing_config_file_is_io_error(tmp_path, capsys):
    assert main(
        ["equal-times", "--seed", "1", "--config", str(tmp_path / "nope.cfg")]
    ) == 3
    capsys.readouterr()


def test_unwritable_output_is_io_error(tmp_path, capsys):
    assert main(
        ["analytic-sweep", "--out", str(tmp_path / "no-such-dir" / "x.csv")]
    ) == 3
    capsys.readouterr()


def test_numerical_failure_exit_code(tmp_path, capsys):
    cfg = tmp_path / "strangled.cfg"
    cfg.write_text("max_steps = 2\n")
    code = main(
        ["equal-times", "--config", str(cfg), "--count", "100", "--seed", "1",
         "--grid", "0:0.2:2"]
    )
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_svg_flag_writes_parseable_file(tmp_path, capsys):
    svg = str(tmp_path / "plot.svg")
    out = str(tmp_path / "plot.csv")
    assert main(
        ["equal-times", "--count", "100", "--seed", "5",
         "--grid", "0:0.2:3", "--out", out, "--svg", svg]
    ) == 0
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg")
    capsys.readouterr()
