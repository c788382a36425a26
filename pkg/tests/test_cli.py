"""CLI behavior: subcommands, exit codes, output determinism."""

import json
import math

import pytest

from gmono.cli import main

GAUGES_UNIT = {"interval": {"a": "-inf", "b": "inf"}, "kind": "unit", "params": []}
GAUGES_61 = {
    "interval": {"a": "-inf", "b": "inf"},
    "kind": "exponential",
    "params": [0, 0, 0, -1, 2, 1],
}
NU_SPREAD = {"interval": {"a": "-inf", "b": "inf"},
             "atoms": [[-1.0, 0.5], [1.0, 0.5]]}
NU_POINT = {"interval": {"a": "-inf", "b": "inf"}, "atoms": [[0.0, 1.0]]}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, payload in [
        ("gu", GAUGES_UNIT),
        ("g61", GAUGES_61),
        ("nu1", NU_SPREAD),
        ("nu2", NU_POINT),
        ("fexp", {"name": "exp"}),
        ("fneg", {"name": "poly", "coeffs": [0.0, -1.0]}),
    ]:
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(payload))
        paths[name] = str(p)
    return paths


class TestExitCodes:
    def test_dominates_is_zero(self, files):
        code = main([
            "dominate", "--nu1", files["nu1"], "--nu2", files["nu2"],
            "--gauges", files["gu"], "--k", "2", "--n", "2",
            "--s", "0", "--z", "0",
        ])
        assert code == 0

    def test_fails_is_one(self, files):
        code = main([
            "dominate", "--nu1", files["nu2"], "--nu2", files["nu1"],
            "--gauges", files["gu"], "--k", "2", "--n", "2",
            "--s", "0", "--z", "0",
        ])
        assert code == 1

    def test_input_error_is_two(self, files, tmp_path):
        bad = tmp_path / "missing.json"
        code = main([
            "dominate", "--nu1", str(bad), "--nu2", files["nu1"],
            "--gauges", files["gu"], "--k", "2", "--n", "2",
        ])
        assert code == 2

    def test_member_zero_nonmember_one(self, files):
        assert main([
            "cone-check", "--gauges", files["gu"], "--function",
            files["fexp"], "--k", "1", "--n", "2",
        ]) == 0
        assert main([
            "cone-check", "--gauges", files["gu"], "--function",
            files["fneg"], "--k", "1", "--n", "1",
        ]) == 1


class TestChebCommand:
    def test_rho_rho_prints_fraction(self, files, capsys):
        code = main(["--format", "json", "cheb", "--pair", "rho", "rho"])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["schema"] == "gmono/1"
        assert out["exact_fraction"] == "384/245"
        assert abs(out["ratio"] - 384.0 / 245.0) < 1e-12
        # 17-significant-digit reproduction of the constant
        assert f"{out['ratio']:.11f}".startswith("1.56734693878")

    def test_scan(self, capsys):
        code = main(["--format", "json", "cheb", "--scan", "9"])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert abs(out["minimum"] - 384.0 / 245.0) < 1e-4


class TestDeterminism:
    def test_byte_identical_json(self, files, capsys):
        argv = [
            "--format", "json", "--seed", "11",
            "dominate", "--nu1", files["nu1"], "--nu2", files["nu2"],
            "--gauges", files["g61"], "--k", "2", "--n", "3",
            "--s", "0", "--z", "0",
        ]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        second = capsys.readouterr().out
        assert first == second
        payload = json.loads(first)
        assert payload["schema"] == "gmono/1"

    def test_report_reparses(self, files, capsys):
        main([
            "--format", "json",
            "martingale", "--fair-walk", "4", "--t-grid=-2:2:9",
        ])
        payload = json.loads(capsys.readouterr().out)
        assert payload["holds"] is True
        assert len(payload["rows"]) == 9


class TestSubcommands:
    def test_wpoly_value(self, files, capsys):
        code = main([
            "--format", "json", "wpoly", "--gauges", files["g61"],
            "--family", "az", "--z", "0", "--i", "0", "--k", "2",
            "--jj", "5", "--x", "1",
        ])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        val = out["rows"][0][1]
        assert val == pytest.approx((math.exp(2) - 3) / 24, rel=1e-10)

    def test_taylor_profile(self, files, capsys):
        code = main([
            "--format", "csv", "taylor", "--gauges", files["gu"],
            "--function", files["fexp"], "--k", "1", "--n", "2",
            "--z", "0", "--ys=-1,-2,-4,-8",
        ])
        lines = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert lines[0].split(",") == ["y", "sup_gap_right", "sup_gap_left"]
        assert len(lines) == 5

    def test_left_chain(self, capsys):
        code = main([
            "left-chain", "--n", "10", "--m", "2", "--s", "0.4",
            "--t-grid", "0:4:9",
        ])
        assert code == 0

    def test_diffineq(self, files, capsys):
        code = main(["diffineq", "--gauges", files["g61"], "--k", "2", "--n", "5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "f^(6) - 2*f^(5) - f^(4) + 2*f^(3) >= 0" in out

    def test_finiteness(self, files, capsys):
        code = main([
            "--format", "json", "finiteness", "--gauges", files["g61"],
            "--n", "5",
        ])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        table = {(j, m): fin for j, m, fin in out["rows"]}
        assert table[(2, 3)] is False and table[(2, 4)] is True

    def test_bad_config_rejected(self, files):
        code = main([
            "--tol", "-1",
            "cheb", "--pair", "rho", "rho",
        ])
        assert code == 2

    def test_cheb_text_prints_full_constant(self, capsys):
        main(["cheb", "--pair", "rho", "rho"])
        out = capsys.readouterr().out
        assert "1.5673469387755" in out
        assert "384/245" in out

    def test_function_with_gauged_table(self, files, tmp_path, capsys):
        import numpy as np
        from gmono.gderiv import function_from_dict

        xs = list(np.linspace(-5, 5, 201))
        spec = {
            "name": "poly",
            "coeffs": [0.0, 1.0],
            "gauged_table": {
                "xs": xs,
                "values": [[x for x in xs], [1.0] * len(xs)],
            },
        }
        f = function_from_dict(spec)
        assert f.gauged_data(1, 0.37) == 1.0
        assert f.gauged_data(0, 2.0) == pytest.approx(2.0)

    def test_selftest_exits_zero(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 11

    def test_dominate_json_zero_mean_gap(self, files, capsys):
        main([
            "--format", "json",
            "dominate", "--nu1", files["nu1"], "--nu2", files["nu2"],
            "--gauges", files["gu"], "--k", "2", "--n", "2",
            "--s", "0", "--z", "0",
        ])
        payload = json.loads(capsys.readouterr().out)
        assert payload["verdict"] == "dominates"
        mean_rows = [r for r in payload["rows"] if r[0] == "i"]
        assert all(abs(r[4]) < 1e-12 for r in mean_rows)

    def test_config_env_file(self, files, tmp_path, capsys, monkeypatch):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({"format": "json"}))
        monkeypatch.setenv("GMONO_CONFIG", str(cfgfile))
        main(["cheb", "--pair", "rho", "rho"])
        out = capsys.readouterr().out
        assert json.loads(out)["schema"] == "gmono/1"
