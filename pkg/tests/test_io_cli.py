import json
import math

import numpy as np
import pytest

from curvehedge.cli import main
from curvehedge.errors import InputFormatError
from curvehedge.io import method_from_arg, read_cash_flow, read_curve


@pytest.fixture
def flat_curve_csv(tmp_path):
    path = tmp_path / "curve.csv"
    path.write_text("t,zero_yield\n1,0.03\n10,0.03\n200,0.03\n")
    return str(path)


@pytest.fixture
def lump_liability_csv(tmp_path):
    path = tmp_path / "liab.csv"
    path.write_text("lump,20,1.0\n")
    return str(path)


class TestReaders:
    def test_curve_csv_zero_yield(self, flat_curve_csv):
        curve = read_curve(flat_curve_csv)
        assert curve.zero_yield(10.0) == pytest.approx(0.03, abs=1e-14)

    def test_curve_csv_forward(self, tmp_path):
        path = tmp_path / "fwd.csv"
        path.write_text("t,forward\n0,0.01\n10,0.03\n")
        curve = read_curve(str(path))
        assert curve.forward_rate(5.0) == pytest.approx(0.02, abs=1e-15)

    def test_curve_json_rows_and_columns(self, tmp_path):
        rows = tmp_path / "rows.json"
        rows.write_text(json.dumps([{"t": 10, "zero_yield": 0.02}, {"t": 20, "zero_yield": 0.025}]))
        cols = tmp_path / "cols.json"
        cols.write_text(json.dumps({"t": [10, 20], "zero_yield": [0.02, 0.025]}))
        a = read_curve(str(rows))
        b = read_curve(str(cols))
        for t in (5.0, 10.0, 20.0):
            assert a.zero_yield(t) == b.zero_yield(t)

    def test_curve_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,rate\n1,0.03\n")
        with pytest.raises(InputFormatError, match="header"):
            read_curve(str(path))

    def test_curve_bad_value_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,zero_yield\n1,0.03\n2,oops\n")
        with pytest.raises(InputFormatError, match=":3"):
            read_curve(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFormatError, match="no such file"):
            read_curve(str(tmp_path / "nope.csv"))

    def test_cash_flow_csv(self, tmp_path):
        path = tmp_path / "flow.csv"
        path.write_text("lump,10,1.0\ndensity,12,14,0.5\n")
        flow = read_cash_flow(str(path))
        assert flow.lumps == ((10.0, 1.0),)
        assert flow.densities == ((12.0, 14.0, 0.5),)

    def test_cash_flow_unknown_kind(self, tmp_path):
        path = tmp_path / "flow.csv"
        path.write_text("lump,10,1.0\nswap,1,2\n")
        with pytest.raises(InputFormatError, match=":2"):
            read_cash_flow(str(path))

    def test_cash_flow_json(self, tmp_path):
        path = tmp_path / "flow.json"
        path.write_text(json.dumps([{"t": 10, "amount": 1.0}, {"a": 12, "b": 14, "rate": 0.5}]))
        flow = read_cash_flow(str(path))
        assert flow.lumps == ((10.0, 1.0),)
        assert flow.densities == ((12.0, 14.0, 0.5),)

    def test_method_inline_and_file(self, tmp_path):
        spec = method_from_arg('{"kind":"M5_SFSA","tau":10,"kappa":20,"ufr":0.042,"offset":0.0}')
        assert spec.kind == "M5_SFSA" and spec.kappa == 20
        path = tmp_path / "m.json"
        path.write_text('{"kind":"M3","tau":10,"ufr":0.042}')
        assert method_from_arg(f"@{path}").kind == "M3"
        with pytest.raises(InputFormatError):
            method_from_arg("{not json")


def run_cli(*argv):
    return main(list(argv))


class TestCliExtrapolate:
    def test_table_contains_expected_yield(self, flat_curve_csv, capsys):
        code = run_cli(
            "extrapolate",
            "--curve", flat_curve_csv,
            "--method", '{"kind":"M3","tau":10,"ufr":0.042}',
            "--step", "10",
        )
        out = capsys.readouterr().out
        assert code == 0
        row = [line for line in out.splitlines() if line.startswith("20 ")]
        assert row and "0.036" in row[0]
        assert "no defects" in out

    def test_defective_discrete_fit_exits_2(self, tmp_path, capsys):
        curve = tmp_path / "bond.csv"
        curve.write_text("t,zero_yield\n10,0.0\n")
        code = run_cli(
            "extrapolate",
            "--curve", str(curve),
            "--method", '{"kind":"M6_SW_discrete","tau":10,"ufr":0.042,"alpha":0.1}',
            "--scan-step", "0.01",
        )
        captured = capsys.readouterr()
        assert code == 2
        assert "negative_forward" in captured.out

    def test_missing_file_exits_1(self, capsys):
        code = run_cli(
            "extrapolate",
            "--curve", "/no/such/file.csv",
            "--method", '{"kind":"M3","tau":10,"ufr":0.042}',
        )
        captured = capsys.readouterr()
        assert code == 1
        assert "/no/such/file.csv" in captured.err

    def test_bad_method_exits_2(self, flat_curve_csv, capsys):
        code = run_cli(
            "extrapolate",
            "--curve", flat_curve_csv,
            "--method", '{"kind":"M3","tau":10}',
        )
        assert code == 2


class TestCliHedge:
    def test_m2_leverage_printed(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "hedge",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M2","tau":10}',
            "--shifts", "5",
        )
        out = capsys.readouterr().out
        assert code == 0
        leverage = [l for l in out.splitlines() if l.startswith("leverage:")]
        assert leverage and float(leverage[0].split(":")[1]) == pytest.approx(2.0, rel=1e-10)

    def test_m5_total_matches_liability(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "hedge",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M5_SFSA","tau":10,"kappa":20,"ufr":0.042}',
            "--shifts", "5",
            "--format", "json",
        )
        out = capsys.readouterr().out
        assert code == 0
        payload = json.loads(out)
        assert payload["total_value"] == pytest.approx(payload["liability_value"], rel=1e-10)
        for dens in payload["plan"]["densities"]:
            assert 10.0 <= dens["a"] < dens["b"] <= 20.0
        assert payload["max_first_order_residual"] < 1e-8

    def test_m6_emits_decomposition(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "hedge",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M6_SW_continuous","tau":10,"ufr":0.042,"alpha":0.2}',
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "unmatched forward coefficient" in out
        assert "fra quantity" in out

    def test_empty_shift_suite_is_a_domain_error(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "hedge",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M2","tau":10}',
            "--shifts", "0",
        )
        assert code == 2


class TestCliVerify:
    def test_bundled_sample_data_passes(self, capsys):
        """The shipped example curve and liabilities verify for every method."""
        import pathlib

        root = pathlib.Path(__file__).resolve().parents[1] / "sample_data"
        for method in (
            '{"kind":"M1","tau":10,"ufr":0.042}',
            '{"kind":"M2","tau":10}',
            '{"kind":"M3","tau":10,"ufr":0.042}',
            '{"kind":"M5_SFSA","tau":10,"kappa":20,"ufr":0.042}',
            '{"kind":"M6_SW_continuous","tau":10,"ufr":0.042,"alpha":0.2}',
        ):
            code = run_cli(
                "verify",
                "--curve", str(root / "curve.csv"),
                "--liabilities", str(root / "liabilities.csv"),
                "--method", method,
                "--shifts", "6",
                "--seed", "2",
            )
            assert code == 0, method

    def test_default_suite_passes(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "verify",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M5_SFSA","tau":10,"kappa":20,"ufr":0.042}',
            "--shifts", "8",
            "--seed", "4",
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "FAIL" not in out
        # all three check families ran
        assert "variation[0]" in out
        assert "hedge_equation[0]" in out
        assert "remainder_decay[0]" in out

    def test_m1_all_zero_variations(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "verify",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M1","tau":10,"ufr":0.042}',
            "--shifts", "5",
        )
        assert code == 0

    def test_corrupted_analytic_fails(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "verify",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M3","tau":10,"ufr":0.042}',
            "--shifts", "3",
            "--corrupt-analytic", "1e-3",
        )
        captured = capsys.readouterr()
        assert code == 3
        assert "verification failed" in captured.err

    def test_tolerance_override_env(self, flat_curve_csv, lump_liability_csv, monkeypatch, capsys):
        monkeypatch.setenv("CURVEHEDGE_TOL_OVERRIDE", '{"variation_abs": 10.0, "variation_rel": 1.0}')
        code = run_cli(
            "verify",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M3","tau":10,"ufr":0.042}',
            "--shifts", "3",
            "--corrupt-analytic", "1e-3",
        )
        assert code == 0

    def test_bad_tolerance_env(self, flat_curve_csv, lump_liability_csv, monkeypatch, capsys):
        monkeypatch.setenv("CURVEHEDGE_TOL_OVERRIDE", "{bad")
        code = run_cli(
            "verify",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M3","tau":10,"ufr":0.042}',
        )
        assert code == 1


class TestCliSensitivity:
    def test_m3_single_lump(self, flat_curve_csv, tmp_path, capsys):
        liab = tmp_path / "l30.csv"
        liab.write_text("lump,30,1.0\n")
        code = run_cli(
            "sensitivity",
            "--curve", flat_curve_csv,
            "--liabilities", str(liab),
            "--method", '{"kind":"M3","tau":10,"ufr":0.042}',
            "--format", "json",
        )
        out = capsys.readouterr().out
        assert code == 0
        assert json.loads(out)["S"] == pytest.approx(20.0, abs=1e-10)

    def test_m5_lump_beyond_kappa(self, flat_curve_csv, tmp_path, capsys):
        liab = tmp_path / "l30.csv"
        liab.write_text("lump,30,1.0\n")
        code = run_cli(
            "sensitivity",
            "--curve", flat_curve_csv,
            "--liabilities", str(liab),
            "--method", '{"kind":"M5_SFSA","tau":10,"kappa":20,"ufr":0.042}',
            "--format", "json",
        )
        out = capsys.readouterr().out
        assert code == 0
        assert json.loads(out)["S"] == pytest.approx(15.0, abs=1e-10)

    def test_m4_exits_2(self, flat_curve_csv, lump_liability_csv, capsys):
        code = run_cli(
            "sensitivity",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M4","tau":10}',
        )
        assert code == 2

    def test_sw_speed_sweep_is_monotone(self, flat_curve_csv, lump_liability_csv, capsys):
        """Sweeping the reversion speed raises S toward its fast limit."""
        values = []
        for alpha in (0.05, 0.1, 0.2, 0.4, 0.8):
            code = run_cli(
                "sensitivity",
                "--curve", flat_curve_csv,
                "--liabilities", lump_liability_csv,
                "--method", f'{{"kind":"M6_SW_continuous","tau":10,"ufr":0.042,"alpha":{alpha}}}',
                "--format", "json",
            )
            assert code == 0
            values.append(json.loads(capsys.readouterr().out)["S"])
        assert all(b > a for a, b in zip(values, values[1:])), values


class TestCliScanAndDeterminism:
    def test_scan_clean(self, flat_curve_csv, capsys):
        code = run_cli(
            "scan-arbitrage",
            "--curve", flat_curve_csv,
            "--method", '{"kind":"M3","tau":10,"ufr":0.042}',
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "no defects" in out

    def test_json_output_byte_identical(self, flat_curve_csv, lump_liability_csv, tmp_path):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        for out in (out1, out2):
            code = run_cli(
                "hedge",
                "--curve", flat_curve_csv,
                "--liabilities", lump_liability_csv,
                "--method", '{"kind":"M2","tau":10}',
                "--shifts", "6",
                "--seed", "42",
                "--format", "json",
                "--out", str(out),
            )
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_sw_alpha_resolved_from_kappa_epsilon(self, flat_curve_csv, lump_liability_csv, capsys):
        """A Smith-Wilson spec without alpha calibrates it from (kappa, epsilon)."""
        code = run_cli(
            "hedge",
            "--curve", flat_curve_csv,
            "--liabilities", lump_liability_csv,
            "--method", '{"kind":"M6_SW_continuous","tau":10,"ufr":0.042,"kappa":60,"epsilon":1e-4}',
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "unmatched forward coefficient" in out
