"""Command-line front end.

Settings resolve as: command-line flag, then ``SUPERCRIT_<NAME>`` environment
variable, then a flat ``key = value`` config file (``--config`` or
``SUPERCRIT_CONFIG``), then the built-in default.

Exit status: 0 on success, 2 on usage errors, 1 when a level cannot be
computed (the message names the channel, nu and index).
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import re
import sys
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, TextIO

from . import __version__
from .channels import (
    ALPHA_INV_DEFAULT,
    CRITICAL_SNAP_TOL,
    ELECTRON_REST_KEV,
    Channel,
    ExtensionAngle,
    HalfInteger,
    Region,
    classify,
    num_extension_params,
    z_critical,
)
from .errors import RegionError, SupercritError
from .report import (
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
from .spectra import DEFAULT_THETA_VARIANT, SolverConfig, ThetaVariant, solve_levels

ENV_PREFIX = "SUPERCRIT_"

NU_FORMS = "a number in radians, or a multiple of pi such as pi, -pi/2, pi/4, 3pi/4, 0.25*pi"
_NU_PI = re.compile(r"^\s*([+-])?\s*(\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(\d+))?\s*$")


class UsageError(Exception):
    """Bad flag values or combinations; exit status 2."""


# --------------------------------------------------------------------------
# value parsers


def parse_nu(text: str) -> float:
    """Parse an extension angle in radians; multiples of pi are exact."""
    m = _NU_PI.match(text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = int(m.group(3)) if m.group(3) else 1
        if den == 0:
            raise argparse.ArgumentTypeError(f"invalid nu {text!r}: zero denominator")
        return sign * math.pi * num / den
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid nu {text!r}; accepted forms: {NU_FORMS}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"invalid nu {text!r}; must be finite")
    return value


def parse_nu_list(text: str) -> list[float]:
    return [parse_nu(part) for part in text.split(",") if part.strip()]


def parse_j(text: str) -> HalfInteger:
    try:
        return HalfInteger.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_zeta(text: str) -> int:
    t = text.strip()
    if t in ("+", "+1", "1"):
        return 1
    if t in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError(f"invalid zeta {text!r}; use + or -")


def parse_zetas(text: str) -> tuple[int, ...]:
    if text.strip() == "both":
        return (1, -1)
    return (parse_zeta(text),)


def _positive(kind: Callable):
    def parse(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return value

    return parse


def parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise argparse.ArgumentTypeError(f"invalid boolean {text!r}")


# --------------------------------------------------------------------------
# option table


@dataclass(frozen=True)
class Option:
    flag: str
    dest: str
    parse: Callable
    default: object
    help: str
    metavar: Optional[str] = None
    is_switch: bool = False


_OPTIONS = {
    o.dest: o
    for o in (
        Option("--Z", "Z", _positive(float), None, "nuclear charge (real; E/m units are dimensionless)", "Z"),
        Option("--j", "j", parse_j, HalfInteger(1), "total angular momentum as a fraction, e.g. 1/2, 3/2", "J"),
        Option("--zeta", "zeta", parse_zeta, None, "spin-orbit sign, + or -", "{+,-}"),
        Option("--nu", "nu", parse_nu, None, f"extension angle: {NU_FORMS}", "NU"),
        Option("--nmax", "nmax", _positive(int), 4, "highest level index to report", "N"),
        Option("--alpha-inv", "alpha_inv", _positive(float), ALPHA_INV_DEFAULT,
               "inverse fine-structure constant", "A"),
        Option("--format", "format", str, "csv", "output format: csv or json", "{csv,json}"),
        Option("--output", "output", str, None, "write to this file instead of stdout", "PATH"),
        Option("--force-critical", "force_critical", parse_bool, False,
               f"snap onto Z_c(j) = (j+1/2) alpha_inv; Z may be omitted, "
               f"else it must match to |q-(j+1/2)| <= {CRITICAL_SNAP_TOL:g}", is_switch=True),
        Option("--theta-variant", "theta_variant", ThetaVariant, DEFAULT_THETA_VARIANT,
               "overcritical phase convention: "
               + ", ".join(v.value for v in ThetaVariant), "V"),
        Option("--units", "units", str, "m", "energy units: m (E/m) or keV", "{m,keV}"),
        Option("--rest-energy-kev", "rest_energy_kev", _positive(float), ELECTRON_REST_KEV,
               "electron rest energy used by --units keV, in keV", "KEV"),
        Option("--integer-Z", "integer_z", parse_bool, False, "reject non-integer Z", is_switch=True),
        Option("--nu-list", "nu_list", parse_nu_list, None,
               "comma-separated nu rows (default -pi/2,-pi/4,0,pi/4,pi/2)", "LIST"),
        Option("--zetas", "zetas", parse_zetas, (1, -1), "zeta values to scan: +, - or both",
               "{+,-,both}"),
        Option("--points", "points", _positive(int), 181,
               "number of nu points from -pi/2 to pi/2 inclusive", "N"),
        Option("--workers", "workers", _positive(int), 1, "threads for grid evaluation", "N"),
        Option("--Z-from", "z_from", _positive(float), 119.0, "first charge of the sweep", "Z"),
        Option("--Z-to", "z_to", _positive(float), 180.0, "last charge of the sweep", "Z"),
        Option("--steps", "steps", _positive(int), 62, "number of charges in the sweep", "N"),
        Option("--Z-max", "z_max", _positive(float), 1000.0, "largest charge to map", "Z"),
        Option("--j-max", "j_max", parse_j, HalfInteger(11), "largest j to map, as a fraction", "J"),
    )
}

_COMMON = ("alpha_inv", "format", "output", "units", "rest_energy_kev")
_SUBCOMMANDS = {
    "classify": ("Print the region of (Z, j): nonsingular, subcritical, critical or overcritical.",
                 ("Z", "j", "alpha_inv", "force_critical", "integer_z")),
    "levels": ("Solve the discrete levels of one channel for one extension angle.",
               ("Z", "j", "zeta", "nu", "nmax", "force_critical", "theta_variant", "integer_z")
               + _COMMON),
    "table": ("Energy table over a list of nu rows, both zeta signs.",
              ("Z", "j", "nu_list", "nmax", "force_critical", "theta_variant", "integer_z")
              + _COMMON),
    "scan-nu": ("Levels on a uniform nu grid, for plotting E_n(nu).",
                ("Z", "j", "zetas", "points", "nmax", "workers", "force_critical",
                 "theta_variant") + _COMMON),
    "nu-lower": ("The angle nu_{-m}(Z) at which the lowest level reaches E = -m.",
                 ("z_from", "z_to", "steps", "j", "zeta") + _COMMON),
    "region-map": ("Boundary charges Z_s(j) and Z_c(j) of the regions.",
                   ("z_max", "j_max") + _COMMON),
    "params": ("Number of extension parameters of the full Hamiltonian at charge Z.",
               ("Z", "alpha_inv", "integer_z")),
}


def _describe_default(opt: Option) -> str:
    d = opt.default
    if d is None:
        return "required" if opt.dest == "Z" else "none"
    if isinstance(d, tuple):
        return "both"
    return str(d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supercrit",
        description="Dirac-Coulomb bound states with self-adjoint extensions. "
                    "Energies are E/m unless --units keV; angles are in radians.",
        epilog=f"Every option can also be set as {ENV_PREFIX}<NAME> in the environment "
               "or as 'name = value' in a --config file; flags win over both.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (summary, dests) in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=summary, description=summary)
        p.add_argument("--config", default=None, metavar="PATH",
                       help="flat 'key = value' settings file (default: none)")
        for dest in dests:
            opt = _OPTIONS[dest]
            text = f"{opt.help} (default: {_describe_default(opt)})"
            if opt.is_switch:
                p.add_argument(opt.flag, dest=dest, action="store_const", const=True,
                               default=None, help=text)
            else:
                p.add_argument(opt.flag, dest=dest, type=opt.parse, default=None,
                               metavar=opt.metavar, help=text)
    return parser


def _read_config(path: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_string("[supercrit]\n" + fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise UsageError(f"malformed config file {path}: {exc}") from None
    return {k.replace("-", "_").lower(): v for k, v in cp["supercrit"].items()}


def resolve(args: argparse.Namespace, env: Mapping[str, str]) -> dict:
    """Merge flags, environment, config file and defaults, in that order."""
    config_path = args.config or env.get(ENV_PREFIX + "CONFIG")
    config = _read_config(config_path) if config_path else {}
    settings = {}
    for dest in _SUBCOMMANDS[args.command][1]:
        opt = _OPTIONS[dest]
        value = getattr(args, dest, None)
        if value is None:
            raw, where = env.get(ENV_PREFIX + dest.upper()), f"{ENV_PREFIX}{dest.upper()}"
            if raw is None:
                raw, where = config.get(dest.lower()), f"config key {dest.lower()}"
            if raw is not None:
                try:
                    value = opt.parse(raw)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"{where}: {exc}") from None
        settings[dest] = opt.default if value is None else value
    return settings


# --------------------------------------------------------------------------
# commands


def _check_common(s: dict) -> None:
    if s.get("format", "csv") not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, not {s['format']!r}")
    if s.get("units", "m") not in ("m", "keV"):
        raise UsageError(f"--units must be m or keV, not {s['units']!r}")


def _charge(s: dict) -> float:
    Z = s.get("Z")
    if Z is None:
        if s.get("force_critical"):
            return z_critical(s["j"], s["alpha_inv"])
        raise UsageError("--Z is required")
    if s.get("integer_z") and Z != int(Z):
        raise UsageError(f"--integer-Z is set but Z = {Z:g} is not an integer")
    return Z


def _channel(s: dict, zeta: int) -> Channel:
    Z = _charge(s)
    try:
        return Channel(Z, s["j"], zeta, s["alpha_inv"], critical=bool(s.get("force_critical")))
    except RegionError as exc:
        raise UsageError(f"--force-critical: {exc}") from None


def _emit(ds, s: dict, out: TextIO) -> None:
    ds = ds.in_units(s.get("units", "m"), s.get("rest_energy_kev", ELECTRON_REST_KEV))
    text = write_dataset(ds, s.get("format", "csv"), s.get("output"))
    if not s.get("output"):
        out.write(text)


def cmd_classify(s: dict, out: TextIO, err: TextIO) -> int:
    ch = _channel(s, 1)
    try:
        region = classify(ch, force_critical=bool(s.get("force_critical")))
    except RegionError as exc:
        raise UsageError(str(exc)) from None
    out.write(f"{region}\n")
    return 0


def cmd_params(s: dict, out: TextIO, err: TextIO) -> int:
    Z = _charge(s)
    out.write(f"delta = {num_extension_params(Z, s['alpha_inv'])}\n")
    return 0


def _diagnose(levels, err: TextIO) -> None:
    for d in levels.diagnostics:
        err.write(f"warning: {levels.channel}: {d}\n")


def cmd_levels(s: dict, out: TextIO, err: TextIO) -> int:
    _check_common(s)
    if s["zeta"] is None:
        raise UsageError("--zeta is required (+ or -)")
    ch = _channel(s, s["zeta"])
    region = ch.region
    nu = s["nu"]
    if region is Region.NONSINGULAR and nu is not None:
        raise UsageError(
            f"{ch} is nonsingular (Z <= Z_s(j)): the self-adjoint Hamiltonian is unique "
            "there, so no extension parameter --nu applies"
        )
    if region.is_singular and nu is None:
        raise UsageError(f"{ch} is {region}: --nu is required to select the extension")
    cfg = SolverConfig(n_max=s["nmax"], theta_variant=s["theta_variant"])
    levels = solve_levels(ch, None if nu is None else ExtensionAngle(nu), cfg)
    _diagnose(levels, err)
    _emit(level_dataset(levels, cfg.theta_variant), s, out)
    return 0


def cmd_table(s: dict, out: TextIO, err: TextIO) -> int:
    _check_common(s)
    ch = _channel(s, 1)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonsingularNotice)
        rows = make_table(ch.Z, ch.j, s["nu_list"], s["nmax"] + 1, ch.alpha_inv,
                          bool(s.get("force_critical")), s["theta_variant"])
    for w in caught:
        err.write(f"notice: {w.message}\n")
    _emit(table_dataset(rows, ch.Z, ch.j, ch.alpha_inv, bool(s.get("force_critical")),
                        s["theta_variant"]), s, out)
    return 0


def cmd_scan_nu(s: dict, out: TextIO, err: TextIO) -> int:
    _check_common(s)
    Z = _charge(s)
    if s["points"] < 2:
        raise UsageError("--points must be at least 2")
    try:
        spec = ScanSpec(Z, s["j"], s["zetas"], uniform_nu_grid(s["points"]),
                        tuple(range(0, s["nmax"] + 1)), s["alpha_inv"],
                        bool(s.get("force_critical")), s["theta_variant"], s["format"],
                        s["output"])
    except RegionError as exc:
        raise UsageError(str(exc)) from None
    except ValueError:
        # zeta = + has no n = 0 below the critical charge; start the list where it may
        lowest = max(_channel(s, z).lowest_index for z in s["zetas"])
        spec = ScanSpec(Z, s["j"], s["zetas"], uniform_nu_grid(s["points"]),
                        tuple(range(lowest, s["nmax"] + 1)), s["alpha_inv"],
                        bool(s.get("force_critical")), s["theta_variant"], s["format"],
                        s["output"])
    ds = scan_nu(spec, workers=s["workers"])
    for d in ds.metadata.get("diagnostics", []):
        err.write(f"warning: {d}\n")
    _emit(ds, s, out)
    return 0


def cmd_nu_lower(s: dict, out: TextIO, err: TextIO) -> int:
    _check_common(s)
    if s["z_to"] < s["z_from"]:
        raise UsageError("--Z-to must not be below --Z-from")
    if s["steps"] < 2:
        raise UsageError("--steps must be at least 2")
    ds = nu_lower_curve(s["z_from"], s["z_to"], s["steps"], s["j"], s["alpha_inv"],
                        s["zeta"] or 1)
    if not ds.rows:
        err.write("notice: the whole range is nonsingular; nu_{-m} is not defined there\n")
    _emit(ds, s, out)
    return 0


def cmd_region_map(s: dict, out: TextIO, err: TextIO) -> int:
    _check_common(s)
    _emit(region_map(s["z_max"], s["j_max"], s["alpha_inv"]), s, out)
    return 0


_COMMANDS = {
    "classify": cmd_classify,
    "levels": cmd_levels,
    "table": cmd_table,
    "scan-nu": cmd_scan_nu,
    "nu-lower": cmd_nu_lower,
    "region-map": cmd_region_map,
    "params": cmd_params,
}


_VALUE_FLAGS = {o.flag for o in _OPTIONS.values() if not o.is_switch} | {"--config"}


def _glue_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--nu -pi/2`` into ``--nu=-pi/2`` so values may start with '-'."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(
    argv: Sequence[str],
    env: Optional[Mapping[str, str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Run one invocation and return its exit status."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    env = os.environ if env is None else env
    parser = build_parser()
    try:
        saved = sys.stdout, sys.stderr
        sys.stdout, sys.stderr = out, err
        try:
            args = parser.parse_args(_glue_values(argv))
        finally:
            sys.stdout, sys.stderr = saved
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        settings = resolve(args, env)
        return _COMMANDS[args.command](settings, out, err)
    except (UsageError, RegionError) as exc:
        err.write(f"supercrit {args.command}: error: {exc}\n")
        return 2
    except SupercritError as exc:
        err.write(f"supercrit {args.command}: numerical failure: {exc}\n")
        return 1
    except OSError as exc:
        err.write(f"supercrit {args.command}: error: {exc}\n")
        return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
