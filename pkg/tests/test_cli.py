"""Command-line behavior: payloads, tables, exit codes, determinism."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from hilfer_mnc.cli import main
from hilfer_mnc.config import bundled_example, dump_config, parse_config
from hilfer_mnc.fractional import FracParams, closed_form_constant


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def _payload(out: str) -> dict:
    """Parse the JSON payload that ends a mixed table + payload stream."""
    idx = out.index("{")
    return json.loads(out[idx:])


def test_gamma_k_both_methods(capsys):
    code, out = _run(["gamma-k", "0.5", "1.5"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["k"] == 0.5
    assert data["z"] == 1.5
    assert data["difference"] < 1e-6
    assert data["integral"] == pytest.approx(data["identity"], abs=1e-6)


def test_gamma_k_integral_only(capsys):
    code, out = _run(["gamma-k", "1.0", "1.0", "--integral"], capsys)
    assert code == 0
    data = json.loads(out)
    assert "identity" not in data
    assert data["integral"] == pytest.approx(1.0, abs=1e-8)


def test_gamma_k_rejects_bad_order(capsys):
    code, out = _run(["gamma-k", "-0.5", "1.0"], capsys)
    assert code == 2
    data = json.loads(out)
    assert data["status"] == "error"
    assert data["error_type"] == "domain"


def test_frac_int_inline_params(capsys):
    code, out = _run(
        [
            "frac-int",
            "--expr", "1",
            "--x", "1.0", "2.0",
            "--k", "0.5",
            "--rho", "0.5",
            "--gamma-ord", "0.5",
            "--T", "3.0",
        ],
        capsys,
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "# frac-int"
    assert lines[1] == "x,value"
    assert lines[2] == "1.0,0.0"
    x_str, val_str = lines[3].split(",")
    assert x_str == "2.0"
    params = FracParams(k=0.5, rho=0.5, gamma_ord=0.5, T=3.0)
    assert float(val_str) == pytest.approx(closed_form_constant(params, 2.0), rel=1e-6)


def test_frac_int_requires_params(capsys):
    code, out = _run(["frac-int", "--expr", "1", "--x", "2.0"], capsys)
    assert code == 2
    data = json.loads(out)
    assert data["error_type"] == "config"


def test_frac_int_out_file(tmp_path, capsys):
    target = tmp_path / "table.csv"
    code, out = _run(
        [
            "frac-int",
            "--paper-example",
            "--expr", "x",
            "--x", "2.0",
            "--out", str(target),
        ],
        capsys,
    )
    assert code == 0
    assert out == ""
    lines = target.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == "x,value"
    assert lines[1].startswith("2.0,")


def test_check_without_override_fails_bundled_radius(capsys):
    code, out = _run(["check", "--paper-example"], capsys)
    assert code == 3
    data = json.loads(out)
    assert data["status"] == "fail"
    assert data["r0"] == 0.83
    assert data["system_admissible"] is False
    assert data["gamma_k_standard"] == pytest.approx(1.0 / 3.0, rel=1e-12)
    names = [rec["name"] for rec in data["equations"]]
    assert names == ["alpha", "beta"]
    for rec in data["equations"]:
        assert rec["passes"] is True
        assert rec["kernel_factor_overridden"] is True
        assert rec["gamma_k_overridden"] is False


def test_check_with_override_passes(capsys):
    code, out = _run(["check", "--paper-example", "--gamma-k-override", "2.4047"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "pass"
    assert data["system_admissible"] is True
    assert data["epsilon"] == pytest.approx(0.9988756740272524, rel=1e-12)
    rec = data["equations"][0]
    assert rec["gamma_k_overridden"] is True
    assert rec["threshold"] == pytest.approx(0.8311213415730024, rel=1e-12)


def test_check_explicit_radius(capsys):
    code, out = _run(
        ["check", "--paper-example", "--gamma-k-override", "2.4047", "--r0", "0.5"],
        capsys,
    )
    assert code == 0
    data = json.loads(out)
    assert data["r0"] == 0.5
    assert data["epsilon"] < 0.8


def test_check_structural_failure(tmp_path, capsys):
    data = json.loads(dump_config(bundled_example()))
    data["equations"] = [data["equations"][0]]
    data["equations"][0]["f"] = {"expr": "a", "lipschitz": 1.0, "zero_at_zero": True}
    data["kernel_factor_override"] = None
    p = tmp_path / "c1.json"
    p.write_text(json.dumps(data), encoding="utf-8")
    code, out = _run(["check", "--config", str(p)], capsys)
    assert code == 3
    payload = json.loads(out)
    assert payload["status"] == "fail"
    assert payload["equations"][0]["passes"] is False
    assert payload["equations"][0]["c1"] == 1.0


def test_solve_stdout_tables_and_summary(capsys):
    code, out = _run(["solve", "--paper-example", "--nodes", "65"], capsys)
    assert code == 0
    assert "# solve alpha" in out
    assert "# solve beta" in out
    assert out.count("p,step_sup,residual,sup_norm") == 2
    data = _payload(out)
    assert data["status"] == "ok"
    assert data["nodes"] == 65
    for rec in data["equations"]:
        assert rec["converged"] is True
        assert rec["residual"] <= 1e-10
        assert 0.0 <= rec["measured_rate"] < 1.0


def test_solve_zero_seed_single_row(capsys):
    code, out = _run(
        ["solve", "--paper-example", "--seed-value", "0", "--nodes", "33"], capsys
    )
    assert code == 0
    alpha_block = out.split("# solve alpha\n")[1].split("#")[0].strip().split("\n")
    assert alpha_block[0] == "p,step_sup,residual,sup_norm"
    assert alpha_block[1] == "1,0.0,0.0,0.0"
    assert len(alpha_block) == 2


def test_solve_out_files_per_equation(tmp_path, capsys):
    base = tmp_path / "trace.csv"
    code, out = _run(
        ["solve", "--paper-example", "--nodes", "65", "--out", str(base)], capsys
    )
    assert code == 0
    assert "# solve" not in out
    for name in ("alpha", "beta"):
        body = (tmp_path / f"trace_{name}.csv").read_text(encoding="utf-8")
        lines = body.strip().split("\n")
        assert lines[0] == "p,step_sup,residual,sup_norm"
        first = lines[1].split(",")
        assert first[0] == "1"
        assert float(first[1]) > 0.0


def test_solve_budget_exhaustion_exits_4(tmp_path, capsys):
    base = tmp_path / "trace.csv"
    code, out = _run(
        [
            "solve",
            "--paper-example",
            "--nodes", "33",
            "--tol", "1e-15",
            "--max-iter", "2",
            "--out", str(base),
        ],
        capsys,
    )
    assert code == 4
    data = _payload(out)
    assert data["status"] == "nonconverged"
    # the trace files are still written for post-mortem inspection
    assert (tmp_path / "trace_alpha.csv").exists()
    assert (tmp_path / "trace_beta.csv").exists()


def test_mnc_demo_table_and_payload(capsys):
    code, out = _run(["mnc-demo", "--paper-example"], capsys)
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "# mnc-demo alpha"
    assert lines[1] == "p,mu0,hausdorff,ratio"
    first = lines[2].split(",")
    assert first[0] == "0"
    assert first[3] == ""  # no ratio for the seed row
    cfg = bundled_example()
    table = [ln for ln in lines[2:] if ln and not ln.startswith(("{", " ", "}"))]
    assert len(table) == cfg.mnc.p_max + 1
    data = _payload(out)
    assert data["status"] == "pass"
    assert data["diagnostic_only"] is False
    assert data["step3_pass"] is True
    assert data["inequality_pass"] is True
    assert data["certificate"]["kernel_factor_overridden"] is True
    assert 0.0 < data["factor"] < 1.0
    assert data["zero_conditions"] is True


def test_mnc_demo_equation_selector(capsys):
    code, out = _run(["mnc-demo", "--paper-example", "--equation", "beta"], capsys)
    assert code == 0
    assert out.startswith("# mnc-demo beta\n")
    code, out = _run(["mnc-demo", "--paper-example", "--equation", "nope"], capsys)
    assert code == 2
    assert json.loads(out)["error_type"] == "config"


def test_mnc_demo_rejects_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("HILFER_THREADS", "fast")
    code, out = _run(["mnc-demo", "--paper-example"], capsys)
    assert code == 2
    assert json.loads(out)["error_type"] == "config"


def test_dump_config_round_trips(capsys):
    code, out = _run(["solve", "--paper-example", "--dump-config"], capsys)
    assert code == 0
    assert parse_config(json.loads(out)) == bundled_example()


def test_dump_config_reflects_override(capsys):
    code, out = _run(
        ["check", "--paper-example", "--gamma-k-override", "2.4047", "--dump-config"],
        capsys,
    )
    assert code == 0
    data = json.loads(out)
    assert data["gamma_k_override"] == 2.4047
    assert parse_config(data) == bundled_example().with_gamma_k_override(2.4047)


def test_missing_config_source_exits_2(capsys):
    code, out = _run(["check"], capsys)
    assert code == 2
    assert json.loads(out)["error_type"] == "config"


def test_invalid_json_config_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json", encoding="utf-8")
    code, out = _run(["solve", "--config", str(p)], capsys)
    assert code == 2
    data = json.loads(out)
    assert data["error_type"] == "config"
    assert "line 1" in data["message"]


def test_paper_example_bundle_without_override_fails(capsys):
    code, out = _run(["paper-example"], capsys)
    assert code == 3
    first = out.index("{")
    check_payload = json.loads(out[first : out.index("}\n# ", first) + 2])
    assert check_payload["status"] == "fail"


def test_paper_example_bundle_with_override(capsys):
    code, out = _run(["paper-example", "--gamma-k-override", "2.4047"], capsys)
    assert code == 0
    assert "# solve alpha" in out
    assert "# mnc-demo alpha" in out
    assert '"status": "pass"' in out


def _subprocess_env(threads: str) -> dict:
    env = dict(os.environ)
    env["HILFER_THREADS"] = threads
    env.setdefault("PYTHONHASHSEED", "0")
    return env


def test_mnc_demo_bytes_identical_across_threads():
    cmd = [sys.executable, "-m", "hilfer_mnc.cli", "mnc-demo", "--paper-example"]
    runs = {
        threads: subprocess.run(
            cmd, capture_output=True, env=_subprocess_env(threads), check=True
        )
        for threads in ("1", "4")
    }
    assert runs["1"].stdout == runs["4"].stdout
    assert runs["1"].stdout  # nonempty
    # a second single-thread run is byte-identical too
    again = subprocess.run(cmd, capture_output=True, env=_subprocess_env("1"), check=True)
    assert again.stdout == runs["1"].stdout
