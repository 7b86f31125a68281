"""Command-line surface: exit codes, JSON envelopes, determinism, config."""

import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from frflow import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def load_schema(name):
    with resources.files("frflow.schemas").joinpath(name).open() as fh:
        return json.load(fh)


class TestExitCodes:
    def test_usage_error_unknown_checker(self, capsys):
        assert cli.main(["check", "bogus"]) == 1

    def test_usage_error_unknown_generator(self, capsys):
        assert cli.main(["check", "gdc", "--gen", "nosuch"]) == 1
        capsys.readouterr()

    def test_dual_conjugate_requires_p(self, capsys):
        assert cli.main(["check", "dual-conjugate"]) == 1
        capsys.readouterr()

    def test_failed_check_is_one(self, capsys):
        code, env = run(["check", "convexity", "--gen", "kl"], capsys)
        assert code == 1
        assert env["report"]["passed"] is False

    def test_passed_check_is_zero(self, capsys):
        code, env = run(["check", "convexity", "--gen", "power:-2"], capsys)
        assert code == 0
        assert env["report"]["passed"] is True

    def test_numeric_failure_is_two(self, capsys):
        code = cli.main(["flow", "--gen", "chi2", "--pair", "random:K=16,seed=3",
                         "--T", "0.3", "--dt", "1e-3"])
        captured = capsys.readouterr()
        assert code == 2
        assert "reduce dt" in captured.err


class TestCheckEnvelope:
    def test_schema_and_content(self, capsys):
        code, env = run(
            ["check", "two-point", "--gen", "power:-2", "--alpha", "0.1"], capsys)
        assert code == 0
        jsonschema.validate(env, load_schema("inequality_report.schema.json"))
        assert env["command"] == "check"
        assert env["checker"] == "two-point"
        rep = env["report"]
        np.testing.assert_allclose(rep["min_ratio"], 1.0037059332467007, rtol=1e-9)
        assert rep["alpha_tested"] == 0.1

    def test_gdc_kl_reports_both_witness_families(self, capsys):
        code, env = run(["check", "gdc", "--gen", "kl", "--alpha", "0.01",
                         "--samples", "2000"], capsys)
        assert code == 1
        labels = {v["configuration"].get("label", "") for v in env["report"]["violations"]}
        assert any(lbl.startswith("two-point:") for lbl in labels)
        assert any(lbl.startswith("gaussian:") for lbl in labels)

    def test_lemma_gating_from_deep_scan(self, capsys):
        code, env = run(["check", "lemma-neighborhood", "--gen", "kl"], capsys)
        assert code == 0
        assert env["report"]["constants"]["gated"] is True
        code2, env2 = run(["check", "lemma-neighborhood", "--gen", "power:-2"], capsys)
        assert code2 == 0
        assert env2["report"]["constants"]["gated"] is False


class TestCounterexampleEnvelope:
    def test_gaussian_hessian(self, capsys):
        code, env = run(["counterexample", "gaussian-hessian"], capsys)
        assert code == 0
        jsonschema.validate(env, load_schema("counterexample_result.schema.json"))
        res = env["result"]
        np.testing.assert_allclose(res["closed_form_value"], -0.0234375, atol=1e-12)
        assert res["negative"] is True

    def test_twovalue_hessian_default(self, capsys):
        code, env = run(["counterexample", "twovalue-hessian"], capsys)
        assert code == 0
        np.testing.assert_allclose(
            env["result"]["closed_form_value"], -0.3021903386704896, rtol=1e-12)
        assert env["result"]["kl_budget"] <= 1.0

    def test_gdc_kinds(self, capsys):
        code, env = run(["counterexample", "gdc-gaussian"], capsys)
        assert code == 0
        np.testing.assert_allclose(
            env["result"]["closed_form_value"], 0.02876123249762321, rtol=1e-10)
        code2, env2 = run(["counterexample", "gdc-twovalue"], capsys)
        assert code2 == 0
        np.testing.assert_allclose(
            env2["result"]["closed_form_value"], 5.745778480324878e-07, rtol=1e-9)


class TestGeodesicEnvelope:
    def test_defaults(self, capsys):
        code, env = run(["geodesic"], capsys)
        assert code == 0
        jsonschema.validate(env, load_schema("geodesic_summary.schema.json"))
        s = env["summary"]
        np.testing.assert_allclose(s["distance_sq"], math.pi**2 / 36, atol=1e-9)
        np.testing.assert_allclose(
            s["midpoint"], [0.6294095225512604, 0.37059047744873963], rtol=1e-12)
        assert s["endpoint_sup_gap"] <= 1e-6
        assert s["speed_rel_variation"] <= 1e-6
        np.testing.assert_allclose(s["hellinger_sq"], 0.27259338968745367, rtol=1e-10)

    def test_trace_is_decimated_with_endpoints(self, capsys):
        code, env = run(["geodesic", "--rho0", "0.2,0.8", "--rho1", "0.6,0.4"], capsys)
        assert code == 0
        tr = env["summary"]["trace"]
        assert len(tr["t"]) <= 102
        assert tr["t"][0] == 0.0 and tr["t"][-1] == pytest.approx(1.0)


class TestFlowEnvelope:
    def test_two_point_rates_and_csv(self, capsys, tmp_path):
        out = tmp_path / "flow.json"
        code = cli.main(["flow", "--gen", "kl", "--pair", "two-point:e:1e-2",
                        "--T", "5", "--dt", "1e-3", "--out", str(out)])
        capsys.readouterr()
        assert code == 0
        env = json.loads(out.read_text())
        jsonschema.validate(env, load_schema("flow_summary.schema.json"))
        rates = env["summary"]["fitted_rates"]
        for key in ("D_f", "D_fbar", "grad_norm_sq", "dual_sum"):
            assert rates[key] >= 0.99
        csv_path = tmp_path / "flow.csv"
        assert csv_path.exists()
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("t,")
        assert "rho_0" in header

    def test_state_elided_for_large_k(self, capsys):
        code, env = run(["flow", "--gen", "kl", "--pair", "random:K=512,seed=0",
                         "--T", "0.05", "--dt", "1e-3"], capsys)
        assert code == 0
        assert env["summary"]["final_state"] == []


class TestDeterminismAndConfig:
    def test_byte_identical_reruns(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["check", "kpoint", "--gen", "power:-2", "--alpha", "0.5",
                "--samples", "3000", "--seed", "7"]
        assert cli.main(args + ["--out", str(a)]) == 0
        assert cli.main(args + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_matches_file(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        code = cli.main(["counterexample", "gaussian-hessian", "--out", str(out)])
        printed = capsys.readouterr().out
        assert code == 0
        assert json.loads(printed) == json.loads(out.read_text())

    def test_config_file_supplies_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('gen = "power:-2"\nalpha = 0.5\nsamples = 3000\nseed = 7\n')
        code, env = run(["check", "kpoint", "--config", str(cfg)], capsys)
        assert code == 0
        assert env["config"]["gen"] == "power:-2"
        assert env["config"]["samples"] == 3000

    def test_flag_beats_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('gen = "power:-2"\nalpha = 0.5\nsamples = 3000\nseed = 7\n')
        code, env = run(
            ["check", "kpoint", "--config", str(cfg), "--samples", "1000"], capsys)
        assert code == 0
        assert env["config"]["samples"] == 1000

    def test_no_timestamps_in_envelope(self, capsys):
        code, env = run(["counterexample", "gaussian-hessian"], capsys)
        flat = json.dumps(env).lower()
        assert "time" not in flat and "date" not in flat


class TestSchemasAreValidDocuments:
    def test_all_schemas_compile(self):
        for name in ("inequality_report.schema.json", "flow_summary.schema.json",
                     "geodesic_summary.schema.json", "counterexample_result.schema.json"):
            schema = load_schema(name)
            jsonschema.Draft202012Validator.check_schema(schema)
