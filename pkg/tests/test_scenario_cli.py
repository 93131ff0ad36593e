"""Scenario parsing, report schema, determinism, and the CLI surface."""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cyclecalc.errors import ScenarioError
from cyclecalc.report import Report, TaskResult
from cyclecalc.scenario import parse_scenario, run_scenario, run_scenario_text

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
GOLDEN = Path(__file__).parent / "golden"

MINIMAL = """
char 0
space X = space(affine(x))
prime D = { } on X noscreen
"""


def test_minimal_scenario_parses():
    env = parse_scenario(MINIMAL)
    assert env.characteristic == 0
    assert "X" in env.spaces and "D" in env.primes


def test_misspelled_keyword_positions():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("char 0\nspsce X = space(affine(x))\n")
    assert "spsce" in str(err.value) and "line 2" in str(err.value)


def test_unknown_names_rejected():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("char 0\nclosed B = { x } on Nowhere\n")
    assert "Nowhere" in str(err.value)
    with pytest.raises(ScenarioError):
        parse_scenario("char 0\nspace X = space(affine(x))\nclosed B = { zz } on X\n")


def test_char_must_come_first():
    with pytest.raises(ScenarioError):
        parse_scenario("space X = space(affine(x))\nchar 5\n")


def test_all_shipped_scenarios_pass():
    for path in sorted(SCENARIOS.glob("*.scn")):
        rep = run_scenario_text(path.read_text())
        assert rep.ok, f"{path.name}: {rep.render_text()}"
        assert all(t.verdict in ("pass", "inapplicable") for t in rep.tasks), path.name


def test_report_determinism():
    text = (SCENARIOS / "tangency.scn").read_text()
    r1 = run_scenario_text(text)
    r2 = run_scenario_text(text)
    assert r1.to_json(with_timing=False) == r2.to_json(with_timing=False)


def test_report_verdict_consistency():
    text = (SCENARIOS / "covers_f5.scn").read_text()
    rep = run_scenario_text(text)
    machine = json.loads(rep.to_json())
    text_render = rep.render_text()
    for task in machine["tasks"]:
        assert task["verdict"].upper() in text_render
        assert task["name"] in text_render


def test_report_schema_golden_file():
    text = (SCENARIOS / "tangency.scn").read_text()
    rep = run_scenario_text(text)
    got = json.loads(rep.to_json(with_timing=False))
    golden = json.loads((GOLDEN / "tangency_report.json").read_text())
    assert got == golden


def test_report_counts_and_rejects():
    rep = Report(characteristic=0)
    rep.add(TaskResult("a", "compose", "pass"))
    rep.add(TaskResult("b", "compose", "policy-reject", "cannot certify"))
    assert rep.counts()["policy-reject"] == 1
    assert rep.ok  # policy-reject is not a failure
    with pytest.raises(ValueError):
        TaskResult("c", "compose", "maybe")


def _engine(*args):
    return subprocess.run(
        [sys.executable, "-m", "cyclecalc.cli", *args],
        capture_output=True, text=True, cwd=ROOT,
        env={**os.environ, "PYTHONPATH": str(ROOT / "src")},
    )


def test_cli_run_scenario(tmp_path):
    out = tmp_path / "report.json"
    proc = _engine("run", str(SCENARIOS / "tangency.scn"), "--json", str(out))
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(out.read_text())
    assert payload["characteristic"] == 0
    assert {t["verdict"] for t in payload["tasks"]} == {"pass"}


def test_cli_axioms():
    proc = _engine("axioms", "--char", "5")
    assert proc.returncode == 0, proc.stderr
    assert "summary:" in proc.stdout
    bad = _engine("axioms", "--mutate-sign")
    assert bad.returncode == 1


def test_cli_groebner(tmp_path):
    ideal_file = tmp_path / "ideal.txt"
    ideal_file.write_text("vars x, y, z\ny - x^2\nz - x^3\n")
    proc = _engine("groebner", str(ideal_file), "--order", "lex")
    assert proc.returncode == 0, proc.stderr
    assert "x^2 - y" in proc.stdout
    assert "y^3 - z^2" in proc.stdout


def test_cli_budget_flags(tmp_path):
    ideal_file = tmp_path / "ideal.txt"
    ideal_file.write_text("vars x, y, z\nx^3 - y*z + x\ny^3 - x*z\nz^3 + x*y*z\n")
    proc = _engine("groebner", str(ideal_file), "--budget-pairs", "1", "--budget-degree", "2")
    assert proc.returncode == 2
    assert "budget" in proc.stderr


def test_cli_scenario_error_position(tmp_path):
    bad = tmp_path / "bad.scn"
    bad.write_text("char 0\nwibble X = 1\n")
    proc = _engine("run", str(bad))
    assert proc.returncode == 2
    assert "line 2" in proc.stderr


def test_polynomial_literal_syntax():
    """The documented literal forms parse as written."""
    from cyclecalc.scenario import TokenStream, parse_form, parse_poly, tokenize
    from cyclecalc.poly import ring_over
    from cyclecalc.forms import Form
    from fractions import Fraction

    R = ring_over(0, ["x", "y"])
    (stmt,) = tokenize("y - x^2")
    assert parse_poly(TokenStream(stmt), R) == R.var("y") - R.var("x") ** 2
    (stmt,) = tokenize("2/3*x*y^2")
    assert parse_poly(TokenStream(stmt), R) == (R.var("x") * R.var("y") ** 2).scale(Fraction(2, 3))
    (stmt,) = tokenize("[x d(x)]^[d(y)]")
    got = parse_form(TokenStream(stmt), R)
    want = Form.d(R.var("x")).scale(R.var("x")).wedge(Form.d(R.var("y")))
    assert got == want


def test_cli_char_override():
    """--char reruns a scenario over a different field."""
    from cyclecalc.scenario import parse_scenario

    text = (SCENARIOS / "covers.scn").read_text()
    env = parse_scenario(text, characteristic=5)
    assert env.characteristic == 5
    rep = run_scenario(env)
    assert rep.ok and rep.characteristic == 5


def test_pullback_form_op():
    from cyclecalc.geometry import Morphism, Space, affine, pullback_form
    from cyclecalc.forms import Form

    A1 = Space([affine("x")])
    A1y = Space([affine("y")])
    f = Morphism(A1, A1y, [(A1.ring.var("x") ** 2,)])
    got = pullback_form(f, Form.d(A1y.ring.var("y")))
    x = A1.ring.var("x")
    assert got == Form.d(x).scale(x.scale(2))
    # identity pulls back to the identity
    from cyclecalc.geometry import identity_morphism

    w = Form.d(A1.ring.var("x")).scale(x)
    assert pullback_form(identity_morphism(A1), w) == w


FAILING_TANGENCY = """
char 0
space A2 = space(affine(x, y))
symbol lhs = [ d(y) ^ d(y - x^2) / (y, y - x^2) ] on A2
symbol rhs = [ d(x) ^ d(y - x^2) / (x, y - x^2) ] on A2
assert lhs == 3 * rhs
"""


def test_wrong_multiplicity_reports_fail():
    rep = run_scenario_text(FAILING_TANGENCY)
    assert not rep.ok
    (task,) = rep.tasks
    assert task.verdict == "fail" and task.detail


def test_wrong_expected_main_reports_fail():
    text = """
char 0
space X = space(affine(x))
space Y = space(affine(y))
prime XV = { } on X noscreen
prime YV = { } on Y noscreen
support FX = full on X
support FY = full on Y
pair XY = X ** Y
pair YX = Y ** X
pair YY = Y ** Y
morphism f : X -> Y = (x^2)
prime G = { y@2 - x@1^2 } on XY noscreen
prime Gt = { y@1 - x@2^2 } on YX noscreen
corr Gf : [XV, FX] => [YV, FY] = 1*[G]
graph Gf . G = graph f
corr Gft : [YV, FY] => [XV, FX] = 1*[Gt]
graph Gft . Gt = transpose f
prime D = { y@1 - y@2 } on YY noscreen
compose p = Gf . Gft expect main = 3*[D]
"""
    rep = run_scenario_text(text)
    by_name = {t.name: t for t in rep.tasks}
    assert by_name["p"].verdict == "fail"
    assert "3" in by_name["p"].detail


def test_policy_reject_surfaces_in_report():
    text = """
char 0
space X = space(affine(x))
space Y = space(affine(y))
prime XV = { } on X noscreen
prime YV = { } on Y noscreen
support FX = full on X
support FY = full on Y
pair XY = X ** Y
prime H = { y@2 } on XY noscreen
corr bad : [XV, FX] => [YV, FY] = 1*[H]
"""
    rep = run_scenario_text(text)
    (task,) = rep.tasks
    assert task.name == "bad_P" and task.verdict == "policy-reject"
