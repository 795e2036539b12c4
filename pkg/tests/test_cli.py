import io
import json
import math
import subprocess
import sys

import pytest

from published_tables import TABLE_138
from supercrit.cli import _OPTIONS, _SUBCOMMANDS, parse_nu, run
from supercrit.report import Dataset


def call(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), env=env or {}, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_classify():
    assert call("classify", "--Z", "121", "--j", "1/2")[:2] == (0, "subcritical\n")
    assert call("classify", "--Z", "100", "--j", "1/2")[1] == "nonsingular\n"
    assert call("classify", "--Z", "138")[1] == "overcritical\n"
    assert call("classify", "--j", "1/2", "--force-critical")[1] == "critical\n"


def test_params():
    assert call("params", "--Z", "266")[:2] == (0, "delta = 4\n")
    assert call("params", "--Z", "118")[1] == "delta = 0\n"


def test_levels_matches_table_3():
    code, out, _ = call("levels", "--Z", "138", "--j", "1/2", "--zeta", "+", "--nu", "0",
                        "--nmax", "5", "--format", "csv")
    assert code == 0
    ds = Dataset.from_csv(out)
    assert ds.columns[0] == "region"
    want = TABLE_138[0.0][0::2]
    for row in ds.rows:
        n = row["n"]
        if n < 5 and n != 3:
            assert row["E_over_m"] == pytest.approx(want[n], abs=2e-4)
        assert row["residual"] < 1e-10


def test_levels_nu_on_nonsingular_is_usage_error():
    code, out, err = call("levels", "--Z", "100", "--j", "1/2", "--zeta", "+", "--nu", "0.3")
    assert code == 2 and out == ""
    assert "unique" in err


def test_levels_nonsingular_without_nu():
    code, out, _ = call("levels", "--Z", "100", "--j", "1/2", "--zeta", "-", "--nmax", "2")
    assert code == 0 and len(Dataset.from_csv(out)) == 3


def test_usage_errors():
    assert call("levels", "--Z", "121", "--zeta", "+")[0] == 2
    assert call("levels", "--Z", "121", "--zeta", "+", "--nu", "0", "--j", "0.5")[0] == 2
    code, _, err = call("levels", "--Z", "121", "--zeta", "+", "--nu", "quarter")
    assert code == 2 and "multiple of pi" in err
    assert call("classify", "--Z", "121.5", "--integer-Z")[0] == 2
    assert call("classify", "--Z", "130", "--force-critical")[0] == 2
    assert call("levels", "--Z", "121", "--zeta", "+", "--nu", "0", "--format", "xml")[0] == 2
    assert call("bogus")[0] == 2
    assert call("levels", "--config", "/nonexistent/file", "--Z", "121")[0] == 2


def test_numerical_failure_exit_1():
    code, _, err = call("levels", "--Z", "121", "--zeta", "+", "--nu", "pi/4",
                        "--nmax", "400000000")
    assert code == 1
    assert "Z=121" in err and "nu=0.785" in err and "n=400000000" in err


def test_nu_literals():
    assert parse_nu("-pi/2") == -math.pi / 2
    assert parse_nu("pi/4") == math.pi / 4
    assert parse_nu("3pi/4") == 3 * math.pi / 4
    assert parse_nu("0.25*pi") == math.pi / 4
    assert parse_nu("0.3") == 0.3
    code, out, _ = call("levels", "--Z", "121", "--zeta", "-", "--nu", "-pi/2", "--nmax", "2")
    assert code == 0
    assert Dataset.from_csv(out).rows[0]["E_over_m"] == pytest.approx(-0.469411, abs=1e-6)


def test_precedence_flag_env_config(tmp_path):
    cfg = tmp_path / "settings.cfg"
    cfg.write_text("alpha_inv = 100\nnmax = 1\n")
    base = ("levels", "--Z", "121", "--zeta", "-", "--nu", "0", "--config", str(cfg))

    ds = Dataset.from_csv(call(*base)[1])
    assert ds.rows[0]["alpha_inv"] == 100.0 and max(ds.column("n")) == 1

    env = {"SUPERCRIT_ALPHA_INV": "130"}
    ds = Dataset.from_csv(call(*base, env=env)[1])
    assert ds.rows[0]["alpha_inv"] == 130.0 and max(ds.column("n")) == 1

    ds = Dataset.from_csv(call(*base, "--alpha-inv", "137.035999", env=env)[1])
    assert ds.rows[0]["alpha_inv"] == 137.035999

    env = {"SUPERCRIT_CONFIG": str(cfg)}
    ds = Dataset.from_csv(call("levels", "--Z", "121", "--zeta", "-", "--nu", "0", env=env)[1])
    assert max(ds.column("n")) == 1
    assert call("levels", "--Z", "121", "--zeta", "-", "--nu", "0",
                env={"SUPERCRIT_NMAX": "zero"})[0] == 2


def test_units_kev():
    code, out, _ = call("levels", "--Z", "138", "--zeta", "-", "--nu", "-pi/2", "--nmax", "1",
                        "--units", "keV", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["metadata"]["units"] == "keV"
    assert obj["rows"][0]["E_keV"] == pytest.approx(0.024086 * 510.99895, abs=0.2)
    plain = Dataset.from_csv(call("levels", "--Z", "138", "--zeta", "-", "--nu", "-pi/2",
                                  "--nmax", "1")[1])
    assert "E_over_m" in plain.columns


def test_table_and_notice():
    code, out, _ = call("table", "--j", "1/2", "--force-critical", "--nu-list", "-pi/2")
    ds = Dataset.from_csv(out)
    plus = [r["E_over_m"] for r in ds.rows if r["zeta"] == 1 and r["n"] >= 1]
    assert plus == pytest.approx([0.707107, 0.894427, 0.948683, 0.970143], abs=1e-6)
    code, out, err = call("table", "--Z", "100")
    assert code == 0 and "notice" in err


def test_scan_and_curves(tmp_path):
    path = tmp_path / "scan.csv"
    code, out, _ = call("scan-nu", "--Z", "121", "--points", "5", "--nmax", "3",
                        "--workers", "2", "--output", str(path))
    assert code == 0 and out == ""
    ds = Dataset.from_csv(path.read_text())
    assert len(ds) == 2 * 5 * 3
    code, out, _ = call("nu-lower", "--Z-from", "119", "--Z-to", "137", "--steps", "37")
    assert all(v < 0 for v in Dataset.from_csv(out).column("nu_lower"))
    code, out, _ = call("region-map", "--Z-max", "300", "--alpha-inv", "137.04")
    assert Dataset.from_csv(out).rows[1]["Z_c"] == pytest.approx(274.08)


def test_deterministic_output():
    argv = ("scan-nu", "--Z", "138", "--points", "9", "--nmax", "3", "--format", "json")
    first = call(*argv)[1]
    assert call(*argv, "--workers", "4")[1] == first
    assert call(*argv)[1] == first


@pytest.mark.parametrize("command", sorted(_SUBCOMMANDS))
def test_help_lists_every_flag(command):
    code, out, _ = call(command, "--help")
    assert code == 0
    for dest in _SUBCOMMANDS[command][1]:
        assert _OPTIONS[dest].flag in out
    assert "--config" in out and "default" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "supercrit", "classify", "--Z", "138"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "overcritical\n"
