"""Test cases for the command-line entry point."""
import json
import runpy

import pytest

from tailcal.cli import build_parser, main


def write_config(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_parser_commands():
    """Test subcommand names and common flags."""
    args = build_parser().parse_args(["gmm-audit", "--seed", "3", "--quick", "--workers", "2", "-vv"])
    assert args.command == "gmm-audit"
    assert (args.seed, args.quick, args.workers, args.verbose) == (3, True, 2, 2)
    assert build_parser().parse_args(["export-tube"]).quick is None
    with pytest.raises(SystemExit):
        build_parser().parse_args(["fit-everything"])


def test_run_writes_reports(tmp_path, capsys):
    """Test a successful run and its exit code."""
    out = tmp_path / "out"
    code = main(["hmm-intervals", "--seed", "5", "--out", str(out)])
    assert code == 0
    assert "hmm_intervals: wrote 4 files" in capsys.readouterr().out
    with open(out / "manifest.json", encoding="utf-8") as handle:
        assert json.load(handle)["rng"]["seed"] == 5


def test_config_file_and_overrides(tmp_path):
    """Test that the subcommand and flags override the config file."""
    config = write_config(tmp_path, "[experiment]\nkind = gmm_audit\nseed = 1\n\n[modes]\nsets = gaussian\n")
    out = tmp_path / "out"
    assert main(["hmm-intervals", "--config", config, "--seed", "9", "--out", str(out)]) == 0
    with open(out / "summary.json", encoding="utf-8") as handle:
        summary = json.load(handle)
    assert summary["kind"] == "hmm_intervals"
    assert summary["rng"]["seed"] == 9
    assert list(summary["sets"]) == ["gaussian"]


def test_exit_codes(tmp_path, capsys):
    """Test the exit code of each error family."""
    assert main(["hmm-intervals", "--out", str(tmp_path / "a")]) == 2
    assert "seed" in capsys.readouterr().err

    bad = write_config(tmp_path, "[experiment]\nseed = 1\n[model]\neta = -1\n")
    assert main(["gaussian-audit", "--config", bad]) == 2

    empty = tmp_path / "empty.csv"
    empty.write_text("track_id,frame,x,y\n1,0,0,0\n", encoding="utf-8")
    config = write_config(tmp_path, f"[experiment]\nseed = 1\n[data]\npath = {empty}\n")
    assert main(["ingest", "--config", config, "--out", str(tmp_path / "b")]) == 3
    assert "scenarios" in capsys.readouterr().err


def test_module_invocation_prints_version(monkeypatch, capsys):
    """Test running the package as a module."""
    monkeypatch.setattr("sys.argv", ["tailcal", "--version"])
    with pytest.raises(SystemExit) as exit_info:
        runpy.run_module("tailcal", run_name="__main__")
    assert exit_info.value.code == 0
    assert capsys.readouterr().out.strip() == "tailcal 0.1.0"
