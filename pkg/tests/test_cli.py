import subprocess
import sys

import pytest

from dataspace import SCENARIOS
from dataspace.cli import main


ALL = sorted(SCENARIOS)


def test_list_names(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert set(out) == set(ALL)


def test_run_unknown_scenario_exits_2(capsys):
    assert main(["run", "nosuch"]) == 2
    assert "unknown scenario" in capsys.readouterr().err


def test_run_emits_trace_to_stdout(capsys):
    assert main(["run", "bank-account-plain"]) == 0
    out = capsys.readouterr().out
    assert out.endswith('"kind":"event-message","data":70}\n')
    assert out.splitlines()[0].startswith('{"seq":0,')


def test_run_writes_file(tmp_path, capsys):
    target = tmp_path / "trace.jsonl"
    assert main(["run", "counter", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    text = target.read_text(encoding="utf-8")
    assert text.count("\n") == len(text.splitlines())
    again = tmp_path / "trace2.jsonl"
    main(["run", "counter", "--out", str(again)])
    assert text == again.read_text(encoding="utf-8")


def test_run_exhausted_budget_exits_3(capsys):
    assert main(["run", "bank-account-plain", "--max-steps", "1"]) == 3
    assert "not quiescent" in capsys.readouterr().err


@pytest.mark.parametrize("name", ALL)
def test_check_matches_committed_goldens(name, capsys):
    assert main(["check", name]) == 0
    assert "ok" in capsys.readouterr().out


def test_check_reports_first_mismatching_line(monkeypatch, capsys):
    import dataspace.cli as cli

    real = cli._golden_text("counter")
    lines = real.splitlines()
    lines[3] = '{"seq":3,"actor":"g/9","kind":"spawn","data":null}'
    monkeypatch.setattr(cli, "_golden_text", lambda name: "\n".join(lines) + "\n")
    assert main(["check", "counter"]) == 1
    err = capsys.readouterr().err
    assert "mismatch at line 3" in err


def test_check_reports_length_mismatch(monkeypatch, capsys):
    import dataspace.cli as cli

    real = cli._golden_text("counter")
    truncated = "\n".join(real.splitlines()[:-1]) + "\n"
    monkeypatch.setattr(cli, "_golden_text", lambda name: truncated)
    assert main(["check", "counter"]) == 1
    assert "length mismatch" in capsys.readouterr().err


@pytest.mark.parametrize("name", ALL)
def test_oracle_subcommand_passes(name, capsys):
    assert main(["oracle", name]) == 0
    assert "oracle ok" in capsys.readouterr().out


def test_console_runs_are_byte_identical_across_processes():
    cmd = [sys.executable, "-m", "dataspace.cli", "run", "file-system-reactive"]
    first = subprocess.run(cmd, capture_output=True, check=True)
    second = subprocess.run(cmd, capture_output=True, check=True)
    assert first.stdout == second.stdout
    assert first.stdout  # non-empty
