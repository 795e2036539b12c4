"""Radial channels of the Dirac-Coulomb problem and their closed-form spectra.

A channel is fixed by the nuclear charge ``Z``, the total angular momentum
``j`` and the sign ``zeta`` of the spin operator.  Energies are dimensionless
(E/m) throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import RegionError

ALPHA_INV_DEFAULT = 137.035999
ELECTRON_REST_KEV = 510.998950

# |q - (j + 1/2)| allowed when snapping a channel onto the critical curve
CRITICAL_SNAP_TOL = 1e-6

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True, order=True)
class HalfInteger:
    """A positive half-odd integer ``j``, stored exactly as ``2j``."""

    twice_value: int

    def __post_init__(self):
        if not isinstance(self.twice_value, int) or isinstance(self.twice_value, bool):
            raise TypeError("twice_value must be an int")
        if self.twice_value < 1 or self.twice_value % 2 == 0:
            raise ValueError(f"2j must be a positive odd integer, got {self.twice_value}")

    @classmethod
    def parse(cls, text: str) -> HalfInteger:
        """Parse ``"1/2"``, ``"3/2"``, ...; decimals are rejected on purpose."""
        text = text.strip()
        if "/" not in text:
            raise ValueError(f"j must be written as a fraction like 1/2 or 3/2, got {text!r}")
        num, _, den = text.partition("/")
        try:
            frac = Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse j from {text!r}") from None
        if (2 * frac).denominator != 1:
            raise ValueError(f"j = {text} is not a half-integer")
        twice = int(2 * frac)
        if twice % 2 == 0:
            raise ValueError(f"j = {text} is an integer, expected 1/2, 3/2, ...")
        return cls(twice)

    @classmethod
    def coerce(cls, value: Union[HalfInteger, str, float, Fraction]) -> HalfInteger:
        if isinstance(value, HalfInteger):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        twice = 2 * Fraction(value)
        if twice.denominator != 1:
            raise ValueError(f"j = {value} is not a half-integer")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_value / 2.0

    @property
    def k(self) -> int:
        """``j + 1/2``, a positive integer."""
        return (self.twice_value + 1) // 2

    def __str__(self) -> str:
        return f"{self.twice_value}/2"


class Region(str, enum.Enum):
    NONSINGULAR = "nonsingular"
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    OVERCRITICAL = "overcritical"

    def __str__(self) -> str:
        return self.value

    @property
    def is_singular(self) -> bool:
        return self is not Region.NONSINGULAR


@dataclass(frozen=True)
class ExtensionAngle:
    """The self-adjoint extension parameter ``nu``.

    ``nu`` lives on a circle of circumference pi.  Inputs outside
    ``[-pi/2, pi/2]`` are reduced into ``(-pi/2, pi/2]``.  The two ends are the
    same Hamiltonian, but ``-pi/2`` is kept as given: it stands for the limit
    ``nu -> -pi/2 + 0`` and so carries a different level labelling than
    ``+pi/2``.
    """

    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        if not math.isfinite(nu):
            raise ValueError("nu must be finite")
        if abs(abs(nu) - _HALF_PI) <= 4e-16:
            nu = math.copysign(_HALF_PI, nu)
        elif abs(nu) > _HALF_PI:
            nu = nu - math.pi * math.ceil((nu - _HALF_PI) / math.pi)
            if nu <= -_HALF_PI:
                nu = _HALF_PI
        object.__setattr__(self, "nu", nu)

    def __float__(self) -> float:
        return self.nu

    @property
    def is_edge(self) -> bool:
        """True at ``nu = +-pi/2`` where the spectrum is the pole ladder."""
        return abs(self.nu) == _HALF_PI


def _coerce_angle(nu: Union[ExtensionAngle, float]) -> ExtensionAngle:
    return nu if isinstance(nu, ExtensionAngle) else ExtensionAngle(nu)


def z_singular(j: Union[HalfInteger, str, float], alpha_inv: float = ALPHA_INV_DEFAULT) -> float:
    """Charge above which channel ``j`` needs a self-adjoint extension."""
    if alpha_inv <= 0:
        raise ValueError("alpha_inv must be positive")
    jv = HalfInteger.coerce(j).value
    return math.sqrt(jv * (jv + 1.0)) * alpha_inv


def z_critical(j: Union[HalfInteger, str, float], alpha_inv: float = ALPHA_INV_DEFAULT) -> float:
    """Charge at which ``gamma = sqrt((j+1/2)^2 - q^2)`` vanishes."""
    if alpha_inv <= 0:
        raise ValueError("alpha_inv must be positive")
    return HalfInteger.coerce(j).k * alpha_inv


@dataclass(frozen=True)
class Channel:
    """One radial sector ``(Z, j, zeta)`` at a given fine-structure constant.

    ``critical=True`` pins ``q`` to exactly ``j + 1/2``; use
    :meth:`Channel.at_critical` or ``classify(..., force_critical=True)``.
    """

    Z: float
    j: HalfInteger
    zeta: int
    alpha_inv: float = ALPHA_INV_DEFAULT
    critical: bool = field(default=False)

    def __post_init__(self):
        object.__setattr__(self, "j", HalfInteger.coerce(self.j))
        object.__setattr__(self, "Z", float(self.Z))
        object.__setattr__(self, "alpha_inv", float(self.alpha_inv))
        if self.zeta not in (1, -1):
            raise ValueError(f"zeta must be +1 or -1, got {self.zeta!r}")
        if not (self.Z > 0 and math.isfinite(self.Z)):
            raise ValueError(f"Z must be positive, got {self.Z}")
        if not self.alpha_inv > 0:
            raise ValueError("alpha_inv must be positive")
        if self.critical and abs(self.Z / self.alpha_inv - self.j.k) > CRITICAL_SNAP_TOL:
            raise RegionError(
                f"Z = {self.Z} is not on the critical curve Z_c({self.j}) = "
                f"{z_critical(self.j, self.alpha_inv):.6f}"
            )

    @classmethod
    def at_critical(
        cls, j: Union[HalfInteger, str, float], zeta: int, alpha_inv: float = ALPHA_INV_DEFAULT
    ) -> Channel:
        hj = HalfInteger.coerce(j)
        return cls(z_critical(hj, alpha_inv), hj, zeta, alpha_inv, critical=True)

    @property
    def K(self) -> int:
        """``j + 1/2``."""
        return self.j.k

    @property
    def kappa(self) -> int:
        return self.zeta * self.j.k

    @property
    def q(self) -> float:
        return float(self.K) if self.critical else self.Z / self.alpha_inv

    @property
    def gamma(self) -> float:
        if self.critical:
            return 0.0
        d = self.K * self.K - self.q * self.q
        if d < 0:
            raise RegionError(f"gamma is imaginary for {self}; use sigma")
        return math.sqrt(d)

    @property
    def sigma(self) -> float:
        if self.critical:
            return 0.0
        d = self.q * self.q - self.K * self.K
        if d <= 0:
            raise RegionError(f"sigma is not defined for {self}; use gamma")
        return math.sqrt(d)

    @property
    def region(self) -> Region:
        return classify(self, force_critical=self.critical)

    @property
    def lowest_index(self) -> int:
        """Smallest admissible level index in this channel's region."""
        if self.region is Region.OVERCRITICAL:
            return 0
        return 1 if self.zeta == 1 else 0

    def __str__(self) -> str:
        sign = "+" if self.zeta == 1 else "-"
        return f"Z={self.Z:g}, j={self.j}, zeta={sign}"


def classify(channel: Channel, force_critical: bool = False) -> Region:
    """Return the region of ``channel`` in the ``(j, Z)`` plane.

    The critical curve is reachable only with ``force_critical``; a channel
    sitting exactly on it otherwise is ambiguous and rejected.
    """
    if force_critical or channel.critical:
        if abs(channel.Z / channel.alpha_inv - channel.K) > CRITICAL_SNAP_TOL:
            raise RegionError(
                f"force_critical: |q - (j+1/2)| = "
                f"{abs(channel.Z / channel.alpha_inv - channel.K):.3g} exceeds {CRITICAL_SNAP_TOL}"
            )
        return Region.CRITICAL
    z_s = z_singular(channel.j, channel.alpha_inv)
    z_c = z_critical(channel.j, channel.alpha_inv)
    if channel.Z <= z_s:
        return Region.NONSINGULAR
    if channel.Z < z_c:
        return Region.SUBCRITICAL
    if channel.Z > z_c:
        return Region.OVERCRITICAL
    raise RegionError(f"{channel} lies exactly on the critical curve; pass force_critical")


def num_extension_params(Z: float, alpha_inv: float = ALPHA_INV_DEFAULT) -> int:
    """Number of extension angles of the full Dirac Hamiltonian at charge ``Z``.

    Each singular ``j`` contributes one angle per sign of ``zeta``, so the
    count is ``2 k(Z)`` with ``k(Z) = #{l >= 1 : l < sqrt(1/4 + q^2)}``.  A
    charge exactly on a singular value is not counted.
    """
    if Z <= 0:
        raise ValueError("Z must be positive")
    q = Z / alpha_inv
    s = math.sqrt(0.25 + q * q)
    return 2 * (math.ceil(s) - 1)


def _check_index(channel: Channel, n: int) -> None:
    if not isinstance(n, (int,)) or n < 0:
        raise ValueError(f"level index must be a nonnegative integer, got {n!r}")
    if channel.zeta == 1 and n < 1:
        raise ValueError("zeta = + requires n >= 1")


def sommerfeld_energy(channel: Channel, n: int) -> float:
    """Sommerfeld level ``(n + gamma) / sqrt(q^2 + (n + gamma)^2)``."""
    if channel.region is Region.OVERCRITICAL:
        raise RegionError("the Sommerfeld formula needs real gamma (q <= j + 1/2)")
    _check_index(channel, n)
    s = n + channel.gamma
    return s / math.hypot(channel.q, s)


def pole_ladder(channel: Channel, n: int) -> float:
    """Level at ``nu = +-pi/2`` (a pole of the level function).

    Subcritical: ``(n - gamma) / sqrt(q^2 + (n - gamma)^2)``.
    Critical: ``n / sqrt((j + 1/2)^2 + n^2)``.
    """
    region = channel.region
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"ladder index must be a nonnegative integer, got {n!r}")
    if region is Region.SUBCRITICAL:
        s = n - channel.gamma
        return s / math.hypot(channel.q, s)
    if region is Region.CRITICAL:
        return n / math.hypot(channel.K, n)
    raise RegionError(f"pole ladder is closed-form only in the subcritical/critical regions, not {region}")


def nonrel_energy(channel: Channel, n: int) -> float:
    """Nonrelativistic binding energy ``-q^2 / (2 n^2)`` (the E - m asymptote)."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("n must be a positive integer")
    return -channel.q ** 2 / (2.0 * n * n)


def angle_or_none(nu: Optional[Union[ExtensionAngle, float]]) -> Optional[ExtensionAngle]:
    return None if nu is None else _coerce_angle(nu)
