import json
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from published_tables import TABLE_138, cells
from supercrit.channels import Channel
from supercrit.errors import RegionError
from supercrit.report import (
    GAP,
    LEVEL_COLUMNS,
    Dataset,
    NonsingularNotice,
    ScanSpec,
    level_dataset,
    make_table,
    nu_lower_curve,
    region_map,
    scan_nu,
    table_dataset,
    uniform_nu_grid,
    write_dataset,
)
from supercrit.spectra import SolverConfig, nu_lower, solve_levels

PI = math.pi


def test_csv_header_is_bit_exact():
    ds = level_dataset(solve_levels(Channel(138, "1/2", 1), 0.0, SolverConfig(n_max=2)))
    assert ds.to_csv().splitlines()[0] == "region,Z,alpha_inv,two_j,zeta,nu,n,E_over_m,residual"


def test_absent_cells_are_empty_fields():
    rows = make_table(138, "1/2", [PI / 2], n_count=2)
    text = table_dataset(rows, 138, "1/2").to_csv()
    first = text.splitlines()[1].split(",")
    assert first[6] == "0" and first[7] == "" and first[8] == ""


def test_round_trip_csv_and_json():
    rows = make_table(121, "1/2")
    ds = table_dataset(rows, 121, "1/2")
    back_csv = Dataset.from_csv(ds.to_csv())
    back_json = Dataset.from_json(ds.to_json())
    assert back_csv.columns == ds.columns == back_json.columns
    assert back_csv.rows == ds.rows
    assert back_json.rows == ds.rows
    assert back_json.metadata["theta_variant"] == "bracket-outside-gamma"
    assert back_json.metadata["alpha_inv"] == 137.035999


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    ds = Dataset(("E_over_m",), [{"E_over_m": x}])
    assert Dataset.from_csv(ds.to_csv()).rows[0]["E_over_m"] == x
    assert Dataset.from_json(ds.to_json()).rows[0]["E_over_m"] == x


def test_json_has_nu_pi_and_metadata():
    ds = level_dataset(solve_levels(Channel(138, "1/2", 1), -PI / 4, SolverConfig(n_max=1)))
    obj = json.loads(ds.to_json())
    assert obj["rows"][0]["nu_pi"] == pytest.approx(-0.25, abs=1e-15)
    assert set(obj["metadata"]) >= {"tool", "version", "alpha_inv", "theta_variant", "columns"}


def test_critical_ladder_row():
    rows = make_table(137.035999, "1/2", [-PI / 2], force_critical=True)
    row = rows[0]
    assert row.cell(0, 1).absent
    assert row.cell(0, -1).energy == 0.0
    want = [0.707107, 0.894427, 0.948683, 0.970143]
    assert [row.cell(n, 1).energy for n in range(1, 5)] == pytest.approx(want, abs=1e-6)


def test_table_138_absent_at_top_row():
    row = make_table(138, "1/2")[-1]
    assert row.nu.nu == PI / 2
    assert row.cell(0, 1).absent and row.cell(0, -1).absent
    assert not row.cell(1, 1).absent


def test_table_order_and_residuals():
    rows = make_table(180, "1/2")
    assert [r.nu.nu / PI for r in rows] == [-0.5, -0.25, 0.0, 0.25, 0.5]
    assert [(c.n, c.zeta) for c in rows[0].entries][:4] == [(0, 1), (0, -1), (1, 1), (1, -1)]
    assert all(c.residual < 1e-10 for r in rows for c in r.entries if not c.absent)


def test_nonsingular_table_notice():
    with pytest.warns(NonsingularNotice):
        rows = make_table(100, "1/2")
    assert len(rows) == 1 and rows[0].nu is None
    assert rows[0].cell(0, 1).absent and not rows[0].cell(0, -1).absent


def test_all_tables_fast():
    t = time.perf_counter()
    make_table(121, "1/2")
    make_table(137.035999, "1/2", force_critical=True)
    make_table(138, "1/2")
    make_table(180, "1/2")
    assert time.perf_counter() - t < 1.0


def test_uniform_grid():
    g = uniform_nu_grid(181)
    assert g[0].nu == -PI / 2 and g[-1].nu == PI / 2 and g[90].nu == 0.0
    assert all(b.nu > a.nu for a, b in zip(g, g[1:]))
    with pytest.raises(ValueError):
        uniform_nu_grid(1)


def test_scan_matches_table_3_slices():
    spec = ScanSpec(Z=138, j="1/2", nu_grid=181, n_list=range(5))
    ds = scan_nu(spec, workers=4)
    assert len(ds) == 2 * 181 * 5
    index = {(r["zeta"], r["nu"], r["n"]): r["E_over_m"] for r in ds.rows}
    for nu, frac, n, zeta, value in cells(TABLE_138):
        if frac not in (-0.5, 0.0, 0.5) or (frac, n, zeta) == (0.0, 3, 1):
            continue
        got = index[(zeta, nu, n)]
        if value is None:
            assert got is None
        else:
            assert got == pytest.approx(value, abs=2e-4)
    assert all(r["residual"] < 1e-10 for r in ds.rows if r["residual"] is not None)


def test_scan_gluing_and_degeneracy():
    ds = scan_nu(ScanSpec(Z=121, j="1/2", nu_grid=[-PI / 2, 0.0, PI / 2], n_list=range(1, 6)))
    e = {(r["zeta"], r["nu"], r["n"]): r["E_over_m"] for r in ds.rows}
    for zeta in (1, -1):
        for n in range(1, 5):
            assert abs(e[(zeta, -PI / 2, n)] - e[(zeta, PI / 2, n + 1)]) < 1e-9
    for n in range(2, 6):
        assert e[(1, 0.0, n)] == pytest.approx(e[(-1, 0.0, n)], abs=1e-12)


def test_scan_deterministic_across_workers():
    spec = ScanSpec(Z=(138, 180), j="1/2", nu_grid=21, n_list=(0, 1, 2))
    serial = scan_nu(spec).to_csv()
    assert scan_nu(spec, workers=6).to_csv() == serial
    assert scan_nu(spec, workers=3).to_csv() == serial


def test_scan_spec_validation():
    with pytest.raises(ValueError):
        ScanSpec(Z=138, j="1/2", nu_grid=[])
    with pytest.raises(ValueError):
        ScanSpec(Z=138, j="1/2", n_list=[])
    with pytest.raises(ValueError):
        ScanSpec(Z=121, j="1/2", zetas=(1,), n_list=(0, 1))
    with pytest.raises(RegionError):
        ScanSpec(Z=100, j="1/2")
    with pytest.raises(ValueError):
        ScanSpec(Z=138, j="1/2", fmt="xml")


def test_nu_lower_curve_subcritical():
    ds = nu_lower_curve(119, 137, 37, "1/2")
    values = ds.column("nu_lower")
    assert len(values) == 37 and all(v < 0 for v in values)
    for Z, v in zip(ds.column("Z"), values):
        assert v == nu_lower(Channel(Z, "1/2", 1)).nu
    at_121 = nu_lower_curve(121, 121.5, 2)
    assert at_121.rows[0]["nu_lower"] == pytest.approx(-0.036, abs=5e-4)


def test_nu_lower_curve_gap_and_single_point():
    ds = nu_lower_curve(110, 150, 41, "1/2")
    regions = ds.column("region")
    assert GAP in regions and "nonsingular" not in regions
    k = regions.index(GAP)
    assert set(regions[:k]) == {"subcritical"} and set(regions[k + 1:]) == {"overcritical"}
    assert ds.rows[k]["nu_lower"] is None
    single = nu_lower_curve(138, 138, 2)
    assert single.rows[0]["nu_lower"] == pytest.approx(0.215141, abs=1e-6)
    with pytest.raises(ValueError):
        nu_lower_curve(120, 130, 1)


def test_region_map():
    ds = region_map(1000, "11/2", alpha_inv=137.04)
    assert ds.rows[0]["Z_s"] == pytest.approx(118.68, abs=5e-3)
    assert ds.rows[0]["Z_c"] == pytest.approx(137.04, abs=1e-9)
    assert ds.rows[1]["Z_s"] == pytest.approx(265.37, abs=1e-2)
    assert ds.rows[1]["Z_c"] == pytest.approx(274.08, abs=1e-9)
    for col in ("Z_s", "Z_c"):
        v = ds.column(col)
        assert all(b > a for a, b in zip(v, v[1:]))
    assert max(ds.column("Z_s")) <= 1000
    assert ds.to_csv().splitlines()[0] == "two_j,j,Z_s,Z_c"


def test_units_kev():
    ds = level_dataset(solve_levels(Channel(138, "1/2", -1), -PI / 2, SolverConfig(n_max=1)))
    kev = ds.in_units("keV")
    assert "E_keV" in kev.columns and "E_over_m" not in kev.columns
    assert kev.rows[0]["E_keV"] == pytest.approx(0.024086 * 510.99895, abs=0.2)
    assert ds.in_units("m") is ds
    with pytest.raises(ValueError):
        ds.in_units("eV")


def test_write_dataset(tmp_path):
    ds = region_map(300)
    path = tmp_path / "map.json"
    text = write_dataset(ds, "json", str(path))
    assert path.read_text() == text
    assert Dataset.from_json(text).rows == ds.rows
    with pytest.raises(ValueError):
        write_dataset(ds, "yaml")
