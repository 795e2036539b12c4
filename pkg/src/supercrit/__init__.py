"""Bound states of the radial Dirac-Coulomb problem beyond the singular charge.

For ``Z`` above ``Z_s(j)`` the radial Hamiltonian has a one-parameter family
of self-adjoint extensions labelled by an angle ``nu``; this package computes
their discrete spectra in the subcritical, critical and overcritical regions.
"""

__version__ = "0.1.0"

from .channels import (
    ALPHA_INV_DEFAULT,
    ELECTRON_REST_KEV,
    Channel,
    ExtensionAngle,
    HalfInteger,
    Region,
    classify,
    nonrel_energy,
    num_extension_params,
    pole_ladder,
    sommerfeld_energy,
    z_critical,
    z_singular,
)
from .errors import PoleError, RegionError, ResolutionError, SupercritError
from .report import (
    Dataset,
    ScanSpec,
    TableCell,
    TableRow,
    make_table,
    nu_lower_curve,
    region_map,
    scan_nu,
)
from .spectra import (
    DEFAULT_THETA_VARIANT,
    Level,
    LevelSet,
    SolverConfig,
    ThetaVariant,
    brute_force_levels,
    f_subcritical,
    g_critical,
    nu_lower,
    solve_levels,
    theta_overcritical,
)

__all__ = [
    "ALPHA_INV_DEFAULT", "ELECTRON_REST_KEV", "Channel", "ExtensionAngle", "HalfInteger",
    "Region", "classify", "nonrel_energy", "num_extension_params", "pole_ladder",
    "sommerfeld_energy", "z_critical", "z_singular", "PoleError", "RegionError",
    "ResolutionError", "SupercritError", "Dataset", "ScanSpec", "TableCell", "TableRow",
    "make_table", "nu_lower_curve", "region_map", "scan_nu", "DEFAULT_THETA_VARIANT",
    "Level", "LevelSet", "SolverConfig", "ThetaVariant", "brute_force_levels",
    "f_subcritical", "g_critical", "nu_lower", "solve_levels", "theta_overcritical",
]
