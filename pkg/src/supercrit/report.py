"""Tables, parameter sweeps and their CSV/JSON serialisation.

Every dataset is a list of flat rows with a fixed column order.  Floats are
written with 17 significant digits so CSV and JSON both round-trip exactly;
a missing level is an empty CSV field or a JSON ``null``, never a number.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from .channels import (
    ALPHA_INV_DEFAULT,
    ELECTRON_REST_KEV,
    Channel,
    ExtensionAngle,
    HalfInteger,
    Region,
    z_critical,
    z_singular,
)
from .errors import RegionError
from .spectra import (
    DEFAULT_THETA_VARIANT,
    LevelSet,
    SolverConfig,
    ThetaVariant,
    nu_lower,
    solve_levels,
)

LEVEL_COLUMNS = ("region", "Z", "alpha_inv", "two_j", "zeta", "nu", "n", "E_over_m", "residual")
NU_LOWER_COLUMNS = ("region", "Z", "alpha_inv", "two_j", "zeta", "nu_lower")
REGION_MAP_COLUMNS = ("two_j", "j", "Z_s", "Z_c")

DEFAULT_NU_ROWS = (-0.5, -0.25, 0.0, 0.25, 0.5)  # multiples of pi
GAP = "gap"

_INT_COLUMNS = {"two_j", "zeta", "n"}
_STR_COLUMNS = {"region", "j"}


class NonsingularNotice(UserWarning):
    """Raised as a warning when a table is requested for a nonsingular channel."""


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _parse_cell(column: str, text: str):
    if text == "":
        return None
    if column in _STR_COLUMNS:
        return text
    if column in _INT_COLUMNS:
        return int(text)
    return float(text)


@dataclass
class Dataset:
    """Rows of a fixed schema plus free-form metadata.

    ``columns`` fixes the CSV header.  JSON carries the same rows as objects;
    level datasets also get a ``nu_pi`` field there (nu / pi) for reading by eye.
    """

    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for row in self.rows:
            obj = {c: row.get(c) for c in self.columns}
            if "nu" in self.columns:
                obj["nu_pi"] = None if row.get("nu") is None else row["nu"] / math.pi
            rows.append(obj)
        return json.dumps({"metadata": self.metadata, "rows": rows}, indent=2) + "\n"

    def dumps(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}; use csv or json")

    @classmethod
    def from_csv(cls, text: str, metadata: Optional[dict] = None) -> Dataset:
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        rows = [{c: _parse_cell(c, v) for c, v in zip(header, rec)} for rec in reader if rec]
        return cls(header, rows, dict(metadata or {}))

    @classmethod
    def from_json(cls, text: str) -> Dataset:
        obj = json.loads(text)
        rows = obj["rows"]
        columns = tuple(obj["metadata"].get("columns") or (k for k in rows[0] if k != "nu_pi"))
        clean = [{c: row.get(c) for c in columns} for row in rows]
        return cls(columns, clean, obj["metadata"])

    def in_units(self, units: str, rest_energy_kev: float = ELECTRON_REST_KEV) -> Dataset:
        """Return a copy with energies in ``units`` (``"m"`` or ``"keV"``)."""
        if units == "m":
            return self
        if units != "keV":
            raise ValueError(f"unknown units {units!r}; use m or keV")
        if "E_over_m" not in self.columns:
            return self
        columns = tuple("E_keV" if c == "E_over_m" else c for c in self.columns)
        rows = []
        for row in self.rows:
            new = {("E_keV" if k == "E_over_m" else k): v for k, v in row.items()}
            if new["E_keV"] is not None:
                new["E_keV"] = new["E_keV"] * rest_energy_kev
            rows.append(new)
        meta = dict(self.metadata, columns=list(columns), units="keV",
                    rest_energy_keV=rest_energy_kev)
        return Dataset(columns, rows, meta)


def _metadata(columns, alpha_inv: float, variant: ThetaVariant, **extra) -> dict:
    meta = {
        "tool": "supercrit",
        "version": __version__,
        "alpha_inv": alpha_inv,
        "theta_variant": str(variant),
        "units": "m",
        "columns": list(columns),
    }
    meta.update(extra)
    return meta


# --------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class TableCell:
    n: int
    zeta: int
    energy: Optional[float]
    residual: Optional[float]

    @property
    def absent(self) -> bool:
        return self.energy is None


@dataclass(frozen=True)
class TableRow:
    """One row of an energy table; ``nu`` is None for a nonsingular channel."""

    nu: Optional[ExtensionAngle]
    entries: tuple[TableCell, ...]

    def cell(self, n: int, zeta: int) -> TableCell:
        for c in self.entries:
            if c.n == n and c.zeta == zeta:
                return c
        raise KeyError((n, zeta))


def _channel(Z, j, zeta, alpha_inv, force_critical) -> Channel:
    hj = HalfInteger.coerce(j)
    if force_critical:
        ch = Channel(Z, hj, zeta, alpha_inv, critical=True)
        return ch
    return Channel(Z, hj, zeta, alpha_inv)


def _cells(levels: LevelSet, zeta: int, n_count: int) -> list[TableCell]:
    out = []
    for n in range(n_count):
        lv = next((lv for lv in levels.levels if lv.n == n), None)
        out.append(TableCell(n, zeta, None if lv is None else lv.energy,
                             None if lv is None else lv.residual))
    return out


def make_table(
    Z: float,
    j: Union[HalfInteger, str, float],
    nu_list: Optional[Sequence[Union[ExtensionAngle, float]]] = None,
    n_count: int = 5,
    alpha_inv: float = ALPHA_INV_DEFAULT,
    force_critical: bool = False,
    theta_variant: Union[ThetaVariant, str] = DEFAULT_THETA_VARIANT,
) -> list[TableRow]:
    """Energy table: one row per ``nu``, columns ``E_0 .. E_{n_count-1}`` for zeta = +, -.

    Cells with no level are ABSENT (``energy is None``).  That covers the
    lowest index when ``nu`` lies above ``nu_{-m}``, and also ``n = 0`` for
    zeta = + below the critical charge, an index that never exists there.

    A nonsingular channel has no ``nu``: a single Sommerfeld row is returned
    and a :class:`NonsingularNotice` is issued.
    """
    if n_count < 2:
        raise ValueError("n_count must be at least 2")
    cfg = SolverConfig(n_max=n_count - 1, theta_variant=ThetaVariant(theta_variant))
    probe = _channel(Z, j, 1, alpha_inv, force_critical)
    if probe.region is Region.NONSINGULAR:
        warnings.warn(
            f"{probe.Z:g} is below Z_s(j={probe.j}); the Hamiltonian is unique there, "
            "so the table reduces to the Sommerfeld levels",
            NonsingularNotice,
            stacklevel=2,
        )
        entries = []
        for zeta in (1, -1):
            entries += _cells(solve_levels(_channel(Z, j, zeta, alpha_inv, False), None, cfg),
                              zeta, n_count)
        return [TableRow(None, tuple(sorted(entries, key=lambda c: (c.n, -c.zeta))))]

    if nu_list is None:
        nu_list = [math.pi * f for f in DEFAULT_NU_ROWS]
    rows = []
    channels = {zeta: _channel(Z, j, zeta, alpha_inv, force_critical) for zeta in (1, -1)}
    for nu in nu_list:
        angle = nu if isinstance(nu, ExtensionAngle) else ExtensionAngle(nu)
        entries = []
        for zeta, ch in channels.items():
            entries += _cells(solve_levels(ch, angle, cfg), zeta, n_count)
        rows.append(TableRow(angle, tuple(sorted(entries, key=lambda c: (c.n, -c.zeta)))))
    return rows


def table_dataset(
    rows: Sequence[TableRow],
    Z: float,
    j: Union[HalfInteger, str, float],
    alpha_inv: float = ALPHA_INV_DEFAULT,
    force_critical: bool = False,
    theta_variant: Union[ThetaVariant, str] = DEFAULT_THETA_VARIANT,
) -> Dataset:
    """Flatten :func:`make_table` output into the level CSV schema."""
    hj = HalfInteger.coerce(j)
    ch = _channel(Z, hj, 1, alpha_inv, force_critical)
    region = str(ch.region)
    out = []
    for row in rows:
        for c in row.entries:
            out.append({
                "region": region, "Z": ch.Z, "alpha_inv": ch.alpha_inv,
                "two_j": hj.twice_value, "zeta": c.zeta,
                "nu": None if row.nu is None else row.nu.nu,
                "n": c.n, "E_over_m": c.energy, "residual": c.residual,
            })
    return Dataset(LEVEL_COLUMNS, out,
                   _metadata(LEVEL_COLUMNS, ch.alpha_inv, ThetaVariant(theta_variant)))


def level_dataset(levels: LevelSet, theta_variant=DEFAULT_THETA_VARIANT) -> Dataset:
    """One :class:`LevelSet` in the level CSV schema."""
    ch = levels.channel
    rows = [
        {
            "region": str(levels.region), "Z": ch.Z, "alpha_inv": ch.alpha_inv,
            "two_j": ch.j.twice_value, "zeta": ch.zeta,
            "nu": None if levels.nu is None else levels.nu.nu,
            "n": lv.n, "E_over_m": lv.energy, "residual": lv.residual,
        }
        for lv in levels.levels
    ]
    meta = _metadata(LEVEL_COLUMNS, ch.alpha_inv, ThetaVariant(theta_variant))
    if levels.diagnostics:
        meta["diagnostics"] = list(levels.diagnostics)
    return Dataset(LEVEL_COLUMNS, rows, meta)


# --------------------------------------------------------------------------
# sweeps


def uniform_nu_grid(count: int) -> tuple[ExtensionAngle, ...]:
    """``count`` equally spaced angles from -pi/2 to pi/2, both ends included.

    Both ends are kept since they label the same Hamiltonian differently;
    an odd ``count`` also hits ``nu = 0``.
    """
    if count < 2:
        raise ValueError("a uniform nu grid needs at least 2 points")
    half = 0.5 * math.pi
    pts = np.linspace(-half, half, count)
    pts[0], pts[-1] = -half, half
    if count % 2:
        pts[count // 2] = 0.0
    return tuple(ExtensionAngle(float(p)) for p in pts)


@dataclass(frozen=True)
class ScanSpec:
    """A sweep over ``nu`` for one or more charges of a fixed ``j``."""

    Z: tuple[float, ...]
    j: HalfInteger
    zetas: tuple[int, ...] = (1, -1)
    nu_grid: tuple[ExtensionAngle, ...] = field(default_factory=lambda: uniform_nu_grid(181))
    n_list: tuple[int, ...] = (0, 1, 2, 3, 4)
    alpha_inv: float = ALPHA_INV_DEFAULT
    force_critical: bool = False
    theta_variant: ThetaVariant = DEFAULT_THETA_VARIANT
    fmt: str = "csv"
    output: Optional[str] = None

    def __post_init__(self):
        z = (self.Z,) if np.isscalar(self.Z) else tuple(self.Z)
        object.__setattr__(self, "Z", tuple(float(v) for v in z))
        object.__setattr__(self, "j", HalfInteger.coerce(self.j))
        grid = self.nu_grid
        if isinstance(grid, int):
            grid = uniform_nu_grid(grid)
        grid = tuple(g if isinstance(g, ExtensionAngle) else ExtensionAngle(g) for g in grid)
        object.__setattr__(self, "nu_grid", grid)
        object.__setattr__(self, "n_list", tuple(sorted(set(int(n) for n in self.n_list))))
        object.__setattr__(self, "zetas", tuple(int(z) for z in self.zetas))
        object.__setattr__(self, "theta_variant", ThetaVariant(self.theta_variant))
        if not self.Z:
            raise ValueError("ScanSpec needs at least one Z")
        if not self.nu_grid:
            raise ValueError("nu_grid must not be empty")
        if not self.n_list:
            raise ValueError("n_list must not be empty")
        if any(n < 0 for n in self.n_list):
            raise ValueError("level indices must be nonnegative")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"unknown format {self.fmt!r}")
        for Z in self.Z:
            for zeta in self.zetas:
                ch = _channel(Z, self.j, zeta, self.alpha_inv, self.force_critical)
                if not ch.region.is_singular:
                    raise RegionError(f"{ch} is nonsingular; a nu scan needs a singular channel")
                if self.n_list[0] < ch.lowest_index:
                    raise ValueError(
                        f"n = {self.n_list[0]} is not an index of {ch} "
                        f"(lowest is {ch.lowest_index})"
                    )


def scan_nu(spec: ScanSpec, workers: Optional[int] = None) -> Dataset:
    """Levels on a ``nu`` grid, rows ordered by (Z, zeta, nu, n).

    Grid points are independent; with ``workers > 1`` they are solved on a
    thread pool and collected back in grid order, so output does not depend
    on scheduling.  A level missing at some ``nu`` gives a row with empty
    energy and residual.
    """
    cfg = SolverConfig(n_max=max(spec.n_list[-1], 1), theta_variant=spec.theta_variant)
    jobs = []
    for Z in spec.Z:
        for zeta in spec.zetas:
            ch = _channel(Z, spec.j, zeta, spec.alpha_inv, spec.force_critical)
            jobs += [(ch, nu) for nu in spec.nu_grid]

    def run(job):
        return solve_levels(job[0], job[1], cfg)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    rows, diagnostics = [], []
    for (ch, nu), levels in zip(jobs, results):
        diagnostics += [f"{ch}, nu={nu.nu:.17g}: {d}" for d in levels.diagnostics]
        for n in spec.n_list:
            e = levels.energy(n)
            res = None if e is None else next(lv.residual for lv in levels.levels if lv.n == n)
            rows.append({
                "region": str(levels.region), "Z": ch.Z, "alpha_inv": ch.alpha_inv,
                "two_j": ch.j.twice_value, "zeta": ch.zeta, "nu": nu.nu,
                "n": n, "E_over_m": e, "residual": res,
            })
    meta = _metadata(LEVEL_COLUMNS, spec.alpha_inv, spec.theta_variant)
    if diagnostics:
        meta["diagnostics"] = diagnostics
    return Dataset(LEVEL_COLUMNS, rows, meta)


def nu_lower_curve(
    Z_from: float,
    Z_to: float,
    steps: int,
    j: Union[HalfInteger, str, float] = "1/2",
    alpha_inv: float = ALPHA_INV_DEFAULT,
    zeta: int = 1,
) -> Dataset:
    """``nu_{-m}`` against ``Z`` on ``steps`` equally spaced charges.

    ``nu`` means a different boundary condition in each region, so a range
    crossing a region boundary is split into segments separated by a row
    with ``region = "gap"`` and empty values.  Nonsingular charges have no
    ``nu_{-m}`` and are skipped.  ``zeta`` matters only at the critical
    charge itself, the one place where ``nu_{-m}`` depends on it.
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not 0 < Z_from <= Z_to:
        raise ValueError("need 0 < Z_from <= Z_to")
    hj = HalfInteger.coerce(j)
    z_c = z_critical(hj, alpha_inv)
    rows: list[dict] = []
    last_region = None
    for Z in np.linspace(Z_from, Z_to, steps):
        Z = float(Z)
        ch = Channel(Z, hj, zeta, alpha_inv, critical=(Z == z_c))
        region = ch.region
        if region is Region.NONSINGULAR:
            continue
        if last_region is not None and region is not last_region:
            rows.append({c: None for c in NU_LOWER_COLUMNS} | {"region": GAP})
        last_region = region
        rows.append({
            "region": str(region), "Z": Z, "alpha_inv": float(alpha_inv),
            "two_j": hj.twice_value, "zeta": zeta, "nu_lower": nu_lower(ch).nu,
        })
    return Dataset(NU_LOWER_COLUMNS, rows,
                   _metadata(NU_LOWER_COLUMNS, float(alpha_inv), DEFAULT_THETA_VARIANT))


def region_map(
    Z_max: float = 1000.0,
    j_max: Union[HalfInteger, str, float] = "11/2",
    alpha_inv: float = ALPHA_INV_DEFAULT,
) -> Dataset:
    """Boundary charges ``Z_s(j)`` and ``Z_c(j)`` for ``j = 1/2 .. j_max``.

    Rows whose ``Z_s`` already exceeds ``Z_max`` are dropped.
    """
    if not Z_max > 0:
        raise ValueError("Z_max must be positive")
    top = HalfInteger.coerce(j_max)
    rows = []
    for two_j in range(1, top.twice_value + 1, 2):
        hj = HalfInteger(two_j)
        zs = z_singular(hj, alpha_inv)
        if zs > Z_max:
            break
        rows.append({"two_j": two_j, "j": str(hj), "Z_s": zs, "Z_c": z_critical(hj, alpha_inv)})
    return Dataset(REGION_MAP_COLUMNS, rows,
                   _metadata(REGION_MAP_COLUMNS, float(alpha_inv), DEFAULT_THETA_VARIANT))


def write_dataset(ds: Dataset, fmt: str, path: Optional[str] = None) -> str:
    """Serialise ``ds``; write to ``path`` when given, and return the text."""
    text = ds.dumps(fmt)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


__all__ = [
    "Dataset", "LEVEL_COLUMNS", "NU_LOWER_COLUMNS", "REGION_MAP_COLUMNS", "GAP",
    "NonsingularNotice", "ScanSpec", "TableCell", "TableRow", "make_table",
    "table_dataset", "level_dataset", "uniform_nu_grid", "scan_nu", "nu_lower_curve",
    "region_map", "write_dataset",
]
