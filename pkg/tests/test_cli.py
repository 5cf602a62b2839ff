import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from mvop.cli import ConfigError, build_parser, config_from_args, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def coeffs(poly_json):
    """Real parts of the coefficient stack of a serialised matrix polynomial."""
    return np.array(poly_json["coeffs"])[..., 0]


class TestExitCodes:
    def test_su2_full_suite_passes(self, capsys):
        code, rep = run_json(capsys, "verify", "--family", "su2", "--ell", "1", "--kappa", "0",
                             "--suite", "all")
        assert code == 0
        assert all(c["status"] != "fail" for c in rep["checks"])

    def test_scalar_shift_suite_passes(self, capsys):
        code, rep = run_json(capsys, "verify", "--family", "jacobi", "--alpha", "0", "--beta", "0",
                             "--suite", "shift")
        assert code == 0
        assert any(c["id"] == "shift.scalar_E+" for c in rep["checks"])

    def test_c1_small_rank_is_a_config_error(self, capsys):
        assert main(["verify", "--family", "c1", "--n", "2"]) == 2
        assert "configuration error" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["verify", "--family", "su2"],
        ["verify", "--family", "su2", "--ell", "1/3"],
        ["verify", "--family", "a1", "--n", "3", "--m", "1"],
        ["verify", "--family", "su2", "--ell", "1", "--kappa", "-1"],
        ["verify", "--family", "su2", "--ell", "1", "--dmax", "-1"],
        ["compute", "--family", "a1", "--n", "3", "--m", "1", "--i", "3"],
    ])
    def test_invalid_configurations(self, capsys, argv):
        assert main(argv) == 2

    def test_unknown_family_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--family", "nope"])
        assert exc.value.code == 2

    def test_plus_convention_fails_for_su2(self, capsys):
        code, rep = run_json(capsys, "verify", "--family", "su2", "--ell", "1", "--kappa", "1",
                             "--suite", "deform", "--convention", "plus")
        assert code == 1
        failed = {c["id"] for c in rep["checks"] if c["status"] == "fail"}
        assert "deform.conjugation" in failed

    def test_tiny_tolerance_scale_fails(self, capsys):
        code, _ = run(capsys, "verify", "--family", "su2", "--ell", "1", "--suite", "ortho",
                      "--tolerance-scale", "1e-30")
        assert code == 1

    def test_console_script_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "mvop.cli", "verify", "--family", "c1",
                               "--n", "2"], capture_output=True, text=True)
        assert proc.returncode == 2


@pytest.fixture(scope="module")
def report():
    buf = io.StringIO()
    stdout, sys.stdout = sys.stdout, buf
    try:
        main(["verify", "--family", "su2", "--ell", "1/2", "--kappa", "1", "--dmax", "4"])
    finally:
        sys.stdout = stdout
    return json.loads(buf.getvalue())


class TestReportSchema:
    def test_top_level_keys(self, report):
        assert set(report) == {"version", "config", "checks"}
        assert report["config"]["family"] == "su2"
        assert report["config"]["params"]["ell"] == "1/2"

    def test_check_keys(self, report):
        for c in report["checks"]:
            assert {"id", "reference", "params", "residual", "tolerance", "status", "kind"} <= set(c)
            assert c["status"] in {"pass", "fail", "skipped"}

    def test_float_checks_below_tolerance(self, report):
        for c in report["checks"]:
            if c["kind"] == "float":
                assert c["residual"] < c["tolerance"], c

    def test_exact_checks_are_rational_strings(self, report):
        exact = [c for c in report["checks"] if c["kind"] == "rational"]
        assert exact
        assert all(c["residual"] == "0/1" and c["tolerance"] is None for c in exact)

    def test_deterministic(self, capsys):
        argv = ["verify", "--family", "c1", "--n", "4", "--kappa", "0.5", "--dmax", "5"]
        _, a = run(capsys, *argv)
        _, b = run(capsys, *argv)
        assert a == b

    def test_skipped_checks_carry_a_reason(self, capsys):
        code, rep = run_json(capsys, "verify", "--family", "c1", "--n", "3",
                             "--suite", "commutator")
        assert code == 0
        (check,) = rep["checks"]
        assert check["status"] == "skipped" and check["reason"]

    def test_exact_suite_by_size(self, capsys):
        code, rep = run_json(capsys, "verify", "--family", "jacobi", "--suite", "krawtchouk",
                             "--two-ell", "5")
        assert code == 0
        assert all(c["params"]["two_ell"] == 5 for c in rep["checks"])

    def test_out_file(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        code = main(["verify", "--family", "jacobi", "--suite", "ortho", "--out", str(path)])
        assert code == 0
        assert json.loads(path.read_text())["checks"][0]["id"] == "ortho.cross_gram"


class TestCompute:
    def test_su2_half_shapes(self, capsys):
        code, out = run_json(capsys, "compute", "--family", "su2", "--ell", "1/2", "--dmax", "3")
        assert code == 0
        assert len(out["polys"]) == 4
        assert all(p["size"] == 2 for p in out["polys"])
        assert len(out["Lambda"]) == 4 and "recurrence" in out

    def test_shifted_legendre(self, capsys):
        _, out = run_json(capsys, "compute", "--family", "jacobi", "--alpha", "0", "--beta", "0",
                          "--dmax", "2")
        assert np.allclose(coeffs(out["polys"][2])[:, 0, 0], [1 / 6, -1, 1], atol=1e-13)
        assert out["recurrence"]["B"][0][0][0][0] == pytest.approx(0.5)
        assert out["recurrence"]["C"][1][0][0][0] == pytest.approx(1 / 12)

    def test_degree_zero(self, capsys):
        _, out = run_json(capsys, "compute", "--family", "a1", "--n", "3", "--m", "1", "--i", "1",
                          "--dmax", "0")
        assert len(out["polys"]) == 1
        assert np.array_equal(coeffs(out["polys"][0])[0], np.eye(2))
        assert "recurrence" not in out

    def test_bit_identical(self, capsys):
        argv = ["compute", "--family", "su2", "--ell", "3/2", "--kappa", "2", "--dmax", "5"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestOtherCommands:
    def test_deform_keys(self, capsys):
        code, out = run_json(capsys, "deform", "--family", "su2", "--ell", "1", "--kappa", "2")
        assert code == 0
        assert {"Tkappa", "Ckappa", "Ukappa", "Vkappa", "alpha_kappa", "beta_kappa",
                "Wpol_kappa", "certificates"} <= set(out)
        assert out["certificates"]["positivity"] is True

    def test_bench_csv(self, capsys):
        code, out = run(capsys, "bench", "--family", "su2", "--ell", "1", "--dmax", "5")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert out.splitlines()[0] == "degree,strategy,wall_time_ms,max_residual"
        assert {r["strategy"] for r in rows} == {"gs", "recurrence", "rodrigues"}
        assert max(float(r["max_residual"]) for r in rows) < 1e-8

    def test_bench_single_strategy(self, capsys):
        _, out = run(capsys, "bench", "--family", "c1", "--n", "3", "--dmax", "3",
                     "--strategy", "recurrence")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert {r["strategy"] for r in rows} == {"recurrence"}

    def test_quadrature_csv(self, capsys):
        code, out = run(capsys, "quadrature", "--alpha", "0", "--beta", "0", "--order", "1")
        assert code == 0
        assert out.splitlines() == ["node,weight", "0.5,1.0"]

    def test_quadrature_invalid_order(self, capsys):
        assert main(["quadrature", "--alpha", "0", "--beta", "0", "--order", "0"]) == 2


class TestConfig:
    def test_fraction_spin(self):
        ns = build_parser().parse_args(["verify", "--family", "su2", "--ell", "3/2"])
        cfg = config_from_args(ns)
        assert cfg.params["ell"] == pytest.approx(1.5)

    def test_missing_family_parameter(self):
        ns = build_parser().parse_args(["verify", "--family", "c1"])
        with pytest.raises(ConfigError):
            config_from_args(ns)
