"""CLI golden runs: every corpus file is exercised at least once."""

from __future__ import annotations

import subprocess
import sys

import pytest

from aeff.cli import main
from conftest import CORPUS, corpus_files

# command and expected exit status per corpus file
GOLDEN = {
    "m1.aeff": (["explore", "--budget", "500"], 2),
    "m2.aeff": (["explore", "--budget", "10000"], 2),
    "omega.aeff": (["explore", "--budget", "100"], 2),
    "pingpong.aeff": (["explore", "--budget", "300"], 2),
    "server.aeff": (["check", "--mode", "effects"], 0),
    "server-driven.aeff": (["explore"], 0),
    "multithreading.aeff": (["check", "--mode", "effects"], 0),
    "opcall-pair.aeff": (["audit"], 0),
    "proc-broadcast.aeff": (["audit", "--model", "flat"], 0),
    "proc-interrupt.aeff": (["measures"], 0),
}


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_corpus_golden(path, capsys):
    name = path.name
    if name in GOLDEN:
        args, expected = GOLDEN[name]
        got = run_cli(args[0], path, *args[1:])
    else:
        # every rule-* / comp-* file explores to a normal form
        got, expected = run_cli("explore", path), 0
    capsys.readouterr()
    assert got == expected, name


def test_check_skeletal_accepts_legacy(capsys):
    assert run_cli("check", CORPUS / "m1.aeff", "--mode", "skeletal") == 0
    out = capsys.readouterr().out
    assert "type: promise unit" in out


def test_check_effects_rejects_legacy(capsys):
    assert run_cli("check", CORPUS / "m1.aeff", "--mode", "effects") == 1
    err = capsys.readouterr().err
    assert "legacy" in err


def test_run_trace_leftmost(capsys):
    assert run_cli("run", CORPUS / "rule-r9.aeff") == 0
    out = capsys.readouterr().out
    assert "r9" in out and "normal form" in out


def test_structured_output_is_deterministic(capsys):
    args = (
        "run",
        CORPUS / "comp-nested-handlers.aeff",
        "--strategy",
        "random",
        "--seed",
        "7",
        "--format",
        "structured",
    )
    assert run_cli(*args) == 0
    first = capsys.readouterr().out
    assert run_cli(*args) == 0
    second = capsys.readouterr().out
    assert first == second
    assert first.splitlines()[0].startswith('{"')

    args = ("explore", CORPUS / "opcall-pair.aeff", "--format", "structured")
    assert run_cli(*args) == 0
    first = capsys.readouterr().out
    assert run_cli(*args) == 0
    assert capsys.readouterr().out == first


def test_explore_structured_records(capsys):
    assert run_cli("explore", CORPUS / "rule-r2.aeff", "--format", "structured") == 0
    lines = capsys.readouterr().out.splitlines()
    import json

    records = [json.loads(line) for line in lines]
    kinds = {r["record"] for r in records}
    assert {"node", "edge", "verdict"} <= kinds
    verdict = [r for r in records if r["record"] == "verdict"][0]
    assert verdict["verdict"] == "SN" and verdict["max_steps"] == 1
    assert lines[-1].startswith('{"') and records[-1]["record"] == "verdict"


def test_shapes_command(capsys):
    assert run_cli("shapes", CORPUS / "proc-interrupt.aeff") == 0
    out = capsys.readouterr().out
    assert "max_sh: 1" in out


def test_measures_structured(capsys):
    import json

    assert run_cli("measures", CORPUS / "server.aeff", "--format", "structured") == 0
    records = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    totals = [r for r in records if r["record"] == "process-measures"]
    assert len(totals) == 1
    assert totals[0]["size_i"] == 1  # one installed handler entry

    # driving the server consumes the handler entry in the annotation
    # (the pending interrupts act on it) and queues three responses
    assert (
        run_cli("measures", CORPUS / "server-driven.aeff", "--format", "structured")
        == 0
    )
    records = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    total = [r for r in records if r["record"] == "process-measures"][0]
    assert total["size_i"] == 0 and total["max_up"] == 3


def test_audit_not_quiescent_within_budget(capsys):
    assert run_cli("audit", CORPUS / "opcall-pair.aeff", "--budget", "5") == 2
    capsys.readouterr()


def test_audit_precondition_exit(capsys):
    assert run_cli("audit", CORPUS / "pingpong.aeff") == 1
    capsys.readouterr()


def test_usage_errors(capsys):
    assert run_cli("run", CORPUS / "rule-r1.aeff", "--strategy", "random") == 64
    capsys.readouterr()
    assert run_cli("run", CORPUS / "rule-r1.aeff", "--strategy", "all") == 64
    capsys.readouterr()
    # a pending-interrupt process has no flat counterpart
    assert run_cli("explore", CORPUS / "proc-interrupt.aeff", "--model", "flat") == 64
    capsys.readouterr()


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.aeff"
    bad.write_text("operation op : unit\nlet = in\n")
    assert run_cli("check", bad) == 1
    capsys.readouterr()


def test_figures_written(tmp_path, capsys):
    figdir = tmp_path / "figs"
    assert run_cli("explore", CORPUS / "proc-broadcast.aeff", "--figures", figdir) == 0
    assert run_cli("measures", CORPUS / "server-driven.aeff", "--figures", figdir) == 0
    assert run_cli("audit", CORPUS / "opcall-pair.aeff", "--figures", figdir) == 0
    assert run_cli("shapes", CORPUS / "opcall-pair.aeff", "--figures", figdir) == 0
    out = capsys.readouterr().out
    made = sorted(p.name for p in figdir.glob("*.png"))
    assert made == [
        "opcall-pair-audit.png",
        "opcall-pair-shapes.png",
        "proc-broadcast-explore.png",
        "server-driven-measures.png",
    ]
    assert out.count("wrote figure") == 4
    assert all((figdir / n).stat().st_size > 0 for n in made)


def test_module_entrypoint_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "aeff.cli", "check", str(CORPUS / "server.aeff")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "promise unit" in proc.stdout


def test_env_budget_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("AEFF_BUDGET", "120")
    assert run_cli("explore", CORPUS / "m1.aeff") == 2
    out = capsys.readouterr().out
    assert "budget exceeded at 120" in out
