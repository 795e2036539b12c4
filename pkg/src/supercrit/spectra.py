"""Discrete spectra of the self-adjoint radial Dirac-Coulomb Hamiltonians.

Each singular region has its own level function:

* subcritical: ``f(E)``, levels at ``f cos(nu) + Gamma(1 - 2 gamma) sin(nu) = 0``;
* critical: ``g(E)``, levels at ``tan(nu) = g(E)``;
* overcritical: a continuous phase ``Theta(E)``, levels at ``cos(Theta - nu) = 0``.

All three are recast as one increasing *phase* ``P(E; nu)`` whose zeros mod pi
are the levels.  At the lower continuum edge ``P(-1; nu) = nu - nu_{-m}``, which
is what fixes the index of the lowest level.  :func:`solve_levels` brackets
roots analytically (ladder poles, or the index equation on the monotone
overcritical phase).  :func:`brute_force_levels` is an independent oracle that
unwraps the reduced phase on a dense grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .channels import (
    Channel,
    ExtensionAngle,
    Region,
    pole_ladder,
    sommerfeld_energy,
)
from .errors import RegionError, ResolutionError
from .specfun import (
    EULER_GAMMA,
    SignLog,
    _digamma_arrays,
    _lgamma_ratio_arrays,
    _lgamma_signed_arrays,
    arg_gamma_continuous,
    ln_gamma_signed,
)

_HALF_PI = 0.5 * math.pi

RESIDUAL_BOUND = 1e-10
# bisection keeps going past bisect_tol until the phase residual is this small
_POLISH_RESIDUAL = 1e-12
# smallest gap between neighbouring brackets that still counts as resolved
_MIN_BRACKET = 64 * np.finfo(float).eps


class ThetaVariant(str, enum.Enum):
    """How the overcritical phase treats the third factor ``B3``.

    ``BRACKET_OUTSIDE_GAMMA`` uses ``arg B3`` and ``ALL_INSIDE_GAMMA`` uses
    ``arg Gamma(B3)``.  The first one reproduces the published tables.
    """

    BRACKET_OUTSIDE_GAMMA = "bracket-outside-gamma"
    ALL_INSIDE_GAMMA = "all-inside-gamma"

    def __str__(self) -> str:
        return self.value


DEFAULT_THETA_VARIANT = ThetaVariant.BRACKET_OUTSIDE_GAMMA


@dataclass(frozen=True)
class SolverConfig:
    n_max: int = 5
    bisect_tol: float = 1e-13
    scan_points: int = 4096
    theta_variant: ThetaVariant = DEFAULT_THETA_VARIANT

    def __post_init__(self):
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise ValueError("n_max must be a positive integer")
        if not self.bisect_tol > 0:
            raise ValueError("bisect_tol must be positive")
        if self.scan_points < 16:
            raise ValueError("scan_points must be at least 16")
        object.__setattr__(self, "theta_variant", ThetaVariant(self.theta_variant))


class Level(NamedTuple):
    n: int
    energy: float
    residual: float


@dataclass(frozen=True)
class LevelSet:
    """Discrete levels of one ``(channel, nu)`` pair, ordered by index."""

    channel: Channel
    nu: Optional[ExtensionAngle]
    region: Region
    levels: tuple[Level, ...]
    diagnostics: tuple[str, ...] = field(default=())

    def __iter__(self):
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def indices(self) -> list[int]:
        return [lv.n for lv in self.levels]

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    def energy(self, n: int) -> Optional[float]:
        for lv in self.levels:
            if lv.n == n:
                return lv.energy
        return None


# --------------------------------------------------------------------------
# level functions


def _tau(E: np.ndarray) -> np.ndarray:
    return np.sqrt((1.0 - E) * (1.0 + E))


def _check_region(channel: Channel, *allowed: Region) -> Region:
    region = channel.region
    if region not in allowed:
        names = "/".join(r.value for r in allowed)
        raise RegionError(f"{channel} is {region}, operation needs {names}")
    return region


def _check_open_interval(E: np.ndarray) -> None:
    if not np.all((E > -1.0) & (E < 1.0)):
        raise ValueError("E/m must lie strictly inside (-1, 1)")


def _f_sub_arrays(E: np.ndarray, channel: Channel) -> tuple[np.ndarray, np.ndarray]:
    q, g, kappa = channel.q, channel.gamma, channel.kappa
    tau = _tau(E)
    x = q * E / tau
    u = q * (1.0 - E) / tau
    # The Gamma factors and brackets as printed cancel 0*inf at E = +-gamma
    # for zeta = +; after Gamma(z+1) = z Gamma(z) the brackets reduce to
    # (u + kappa + gamma)/(u + kappa - gamma) with u = q (1 - E)/tau.
    sr, lr = _lgamma_ratio_arrays(1.0 - g - x, 1.0 + g - x)
    num = u + kappa + g
    den = u + kappa - g
    with np.errstate(divide="ignore", invalid="ignore"):
        lb = np.log(np.abs(num)) - np.log(np.abs(den))
    sb = np.sign(num) * np.sign(den)
    log_mag = math.lgamma(1.0 + 2.0 * g) + lr + lb - 2.0 * g * np.log(2.0 * tau)
    sign = (sr * sb).astype(int)
    pole = (den == 0) | np.isposinf(lr)
    zero = (num == 0) | np.isneginf(lr)
    log_mag = np.where(pole, np.inf, np.where(zero, -np.inf, log_mag))
    sign = np.where(pole, np.where(sign == 0, 1, sign), np.where(zero, 0, sign))
    return sign, log_mag


def f_subcritical(E, channel: Channel) -> SignLog:
    """Subcritical level function ``f(E)`` as a :class:`SignLog`.

    Poles (the ``nu = +-pi/2`` ladder) come out with ``log_mag = +inf``; zeros
    (the Sommerfeld levels) with ``sign = 0``.
    """
    _check_region(channel, Region.SUBCRITICAL)
    arr = np.atleast_1d(np.asarray(E, dtype=float))
    _check_open_interval(arr)
    sign, log_mag = _f_sub_arrays(arr, channel)
    if np.ndim(E) == 0:
        return SignLog(int(sign[0]), float(log_mag[0]))
    return SignLog(sign, log_mag)


def f_subcritical_lower_limit(channel: Channel) -> SignLog:
    """``f(-1) = Gamma(1 + 2 gamma) (2q)^(-2 gamma)``."""
    _check_region(channel, Region.SUBCRITICAL)
    g = channel.gamma
    return SignLog(1, math.lgamma(1.0 + 2.0 * g) - 2.0 * g * math.log(2.0 * channel.q))


def _g_crit_arrays(E: np.ndarray, channel: Channel) -> np.ndarray:
    K, zeta = channel.K, channel.zeta
    tau = _tau(E)
    y = -K * E / tau
    # (tau - 1)/E = -E/(1 + tau) removes the 0/0 at E = 0; for zeta = + the
    # psi(y) pole at E = 0 cancels against the bracket, leaving psi(1 + y).
    tail = E / (2.0 * K * (1.0 + tau))
    if zeta == 1:
        psi = _digamma_arrays(1.0 + y)
        rest = 0.5 / K - tail
    else:
        psi = _digamma_arrays(y)
        rest = -0.5 / K + tail
    return np.log(2.0 * tau) + psi + rest + 2.0 * EULER_GAMMA


def g_critical(E, channel: Channel):
    """Critical level function ``g(E)``; levels satisfy ``tan(nu) = g(E)``."""
    _check_region(channel, Region.CRITICAL)
    arr = np.atleast_1d(np.asarray(E, dtype=float))
    _check_open_interval(arr)
    out = _g_crit_arrays(arr, channel)
    return float(out[0]) if np.ndim(E) == 0 else out


def g_critical_lower_limit(channel: Channel) -> float:
    """``g(-1) = ln(2 q_c) - 2 psi(1) + zeta / q_c``."""
    _check_region(channel, Region.CRITICAL)
    K = channel.K
    return math.log(2.0 * K) + 2.0 * EULER_GAMMA + channel.zeta / K


def _theta_arrays(E: np.ndarray, channel: Channel, variant: ThetaVariant) -> np.ndarray:
    q, K, zeta, s = channel.q, channel.K, channel.zeta, channel.sigma
    tau = _tau(E)
    x = q * E / tau
    a1 = -arg_gamma_continuous(0.0, 2.0 * s)
    a2 = np.asarray(arg_gamma_continuous(-x, np.full_like(x, s)))
    b3_re = tau * K - zeta * q * (1.0 - E)
    b3_im = -zeta * s * tau
    if variant is ThetaVariant.BRACKET_OUTSIDE_GAMMA:
        a3 = np.arctan2(b3_im, b3_re)
    else:
        a3 = np.asarray(arg_gamma_continuous(b3_re, b3_im))
    return a1 + a2 + a3 + s * np.log(2.0 * tau)


def theta_overcritical(
    E, channel: Channel, variant: Union[ThetaVariant, str] = DEFAULT_THETA_VARIANT
):
    """Overcritical phase ``Theta(E)``, continuous on ``(-1, 1)``.

    Never reduced mod pi: built only from the continuous branch of
    ``arg Gamma``, the principal ``arg B3`` (``Im B3`` has a fixed sign inside
    the interval, so no branch cut is crossed) and a real logarithm.
    """
    _check_region(channel, Region.OVERCRITICAL)
    variant = ThetaVariant(variant)
    arr = np.atleast_1d(np.asarray(E, dtype=float))
    _check_open_interval(arr)
    out = _theta_arrays(arr, channel, variant)
    return float(out[0]) if np.ndim(E) == 0 else out


def theta_lower_limit(
    channel: Channel, variant: Union[ThetaVariant, str] = DEFAULT_THETA_VARIANT
) -> float:
    """``Theta(-m)``: the E -> -1 limit of :func:`theta_overcritical`.

    ``arg Gamma(B2) + sigma ln(2 tau)`` tends to ``sigma ln(2q)``, and ``B3``
    tends to ``-2 zeta q`` from the side of ``Im B3 = -zeta * 0``.
    """
    _check_region(channel, Region.OVERCRITICAL)
    variant = ThetaVariant(variant)
    q, zeta, s = channel.q, channel.zeta, channel.sigma
    a1 = -arg_gamma_continuous(0.0, 2.0 * s)
    if variant is ThetaVariant.BRACKET_OUTSIDE_GAMMA:
        a3 = -math.pi if zeta == 1 else 0.0
    else:
        a3 = arg_gamma_continuous(-2.0 * zeta * q, -zeta * 1e-300)
    return a1 + s * math.log(2.0 * q) + a3


def _wrap(phase):
    """Reduce a phase into ``(-pi/2, pi/2]``."""
    return phase - math.pi * np.ceil(np.asarray(phase) / math.pi - 0.5)


def nu_lower(channel: Channel) -> ExtensionAngle:
    """Extension angle at which the lowest level touches ``E = -m``."""
    region = _check_region(channel, Region.SUBCRITICAL, Region.CRITICAL, Region.OVERCRITICAL)
    if region is Region.SUBCRITICAL:
        ratio = f_subcritical_lower_limit(channel) / ln_gamma_signed(1.0 - 2.0 * channel.gamma)
        return ExtensionAngle(-math.atan(ratio.value()))
    if region is Region.CRITICAL:
        return ExtensionAngle(math.atan(g_critical_lower_limit(channel)))
    s = channel.sigma
    nu = _HALF_PI - arg_gamma_continuous(0.0, 2.0 * s) + s * math.log(2.0 * channel.q)
    return ExtensionAngle(float(_wrap(nu)))


# --------------------------------------------------------------------------
# phase functions shared by the solver and the oracle


def _phase_function(
    channel: Channel, nu: float, variant: ThetaVariant
) -> Callable[[np.ndarray], np.ndarray]:
    """Raw phase ``P(E; nu)``: increasing in E, levels where ``P = 0 mod pi``.

    Subcritical and critical phases jump by -pi at ladder poles; the
    overcritical one is continuous.  ``E = -1`` returns the analytic limit.
    """
    region = channel.region
    if region is Region.SUBCRITICAL:
        lg = _lgamma_signed_arrays(np.array([1.0 - 2.0 * channel.gamma]))[1][0]
        lower = math.atan(f_subcritical_lower_limit(channel).value() / math.exp(lg))

        def phase(E):
            inner = E > -1.0
            out = np.full(E.shape, lower + nu)
            if inner.any():
                sign, log_mag = _f_sub_arrays(E[inner], channel)
                with np.errstate(over="ignore", invalid="ignore"):
                    ratio = np.where(sign == 0, 0.0, sign * np.exp(log_mag - lg))
                out[inner] = np.arctan(ratio) + nu
            return out

        return phase

    if region is Region.CRITICAL:
        lower = math.atan(g_critical_lower_limit(channel))

        def phase(E):
            inner = E > -1.0
            out = np.full(E.shape, nu - lower)
            if inner.any():
                with np.errstate(divide="ignore", invalid="ignore"):
                    out[inner] = nu - np.arctan(_g_crit_arrays(E[inner], channel))
            return out

        return phase

    if region is Region.OVERCRITICAL:
        lower = theta_lower_limit(channel, variant)

        def phase(E):
            inner = E > -1.0
            out = np.full(E.shape, nu - lower - _HALF_PI)
            if inner.any():
                out[inner] = nu - _theta_arrays(E[inner], channel, variant) - _HALF_PI
            return out

        return phase

    raise RegionError(f"{channel} is nonsingular; its extension is unique")


def _residual(phase_values: np.ndarray) -> np.ndarray:
    return np.abs(_wrap(phase_values))


def level_residual(
    channel: Channel,
    nu: Union[ExtensionAngle, float],
    energies,
    variant: Union[ThetaVariant, str] = DEFAULT_THETA_VARIANT,
) -> np.ndarray:
    """Distance (mod pi) of the level equation's phase from zero at ``energies``."""
    nu = nu if isinstance(nu, ExtensionAngle) else ExtensionAngle(nu)
    phase = _phase_function(channel, nu.nu, ThetaVariant(variant))
    return _residual(phase(np.atleast_1d(np.asarray(energies, dtype=float))))


# --------------------------------------------------------------------------
# bisection


def _bisect(
    fun: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    tol: float,
    residual: Callable[[np.ndarray], np.ndarray],
    f_lo: Optional[np.ndarray] = None,
    f_hi: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Vectorised bracketed root search for increasing ``fun`` (fun(lo) < 0 < fun(hi)).

    With endpoint values ``f_lo``/``f_hi`` a few Illinois (modified regula
    falsi) steps run first; plain bisection then finishes any bracket still
    wider than ``tol`` or whose residual is above the polish threshold, until
    the bracket cannot shrink further.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if lo.size == 0:
        return lo
    done = np.zeros(lo.size, dtype=bool)
    best = 0.5 * (lo + hi)
    if f_lo is not None and f_hi is not None:
        flo = np.array(f_lo, dtype=float)
        fhi = np.array(f_hi, dtype=float)
        side = np.zeros(lo.size, dtype=int)
        for _ in range(60):
            with np.errstate(invalid="ignore", divide="ignore"):
                x = (lo * fhi - hi * flo) / (fhi - flo)
            x = np.where(np.isfinite(x) & (x > lo) & (x < hi), x, 0.5 * (lo + hi))
            val = fun(x)
            best = np.where(done, best, x)
            hit = residual(val) <= 0.01 * _POLISH_RESIDUAL
            done |= hit | ~((x > lo) & (x < hi))
            if done.all():
                return _ulp_polish(fun, best, residual)
            right = val < 0
            upd = ~done
            # Illinois: halve the stale endpoint's value when it is kept twice
            flo = np.where(upd & ~right & (side == -1), 0.5 * flo, flo)
            fhi = np.where(upd & right & (side == 1), 0.5 * fhi, fhi)
            lo = np.where(upd & right, x, lo)
            flo = np.where(upd & right, val, flo)
            hi = np.where(upd & ~right, x, hi)
            fhi = np.where(upd & ~right, val, fhi)
            side = np.where(upd, np.where(right, 1, -1), side)
    for _ in range(2100):
        mid = 0.5 * (lo + hi)
        movable = (mid > lo) & (mid < hi)
        if not (movable & ~done).any():
            break
        val = fun(mid)
        wide = (hi - lo) > tol
        active = ~done & movable & (wide | (residual(val) > _POLISH_RESIDUAL))
        if not active.any():
            break
        right = val < 0
        lo = np.where(active & right, mid, lo)
        hi = np.where(active & ~right, mid, hi)
    mid = 0.5 * (lo + hi)
    # pick the endpoint or midpoint with the smallest residual
    cands = np.stack([mid, lo, hi])
    res = np.stack([residual(fun(c)) for c in cands])
    pick = cands[np.argmin(res, axis=0), np.arange(mid.size)]
    return _ulp_polish(fun, np.where(done, best, pick), residual)


def _ulp_polish(fun, x: np.ndarray, residual, reach: int = 3) -> np.ndarray:
    """Move each root to the float within ``reach`` ulps with the smallest residual."""
    steps = np.arange(-reach, reach + 1)
    cands = x[None, :] + steps[:, None] * np.spacing(x)[None, :]
    res = np.stack([residual(fun(c)) for c in cands])
    return cands[np.argmin(res, axis=0), np.arange(x.size)]


# --------------------------------------------------------------------------
# solvers


def _nonsingular_levels(channel: Channel, cfg: SolverConfig) -> LevelSet:
    levels = tuple(
        Level(n, sommerfeld_energy(channel, n), 0.0)
        for n in range(channel.lowest_index, cfg.n_max + 1)
    )
    return LevelSet(channel, None, Region.NONSINGULAR, levels)


def _ladder_levels(
    channel: Channel, nu: ExtensionAngle, cfg: SolverConfig, region: Region
) -> LevelSet:
    n0 = channel.lowest_index
    phase = _phase_function(channel, nu.nu, cfg.theta_variant)
    ladder = [pole_ladder(channel, k) for k in range(n0, cfg.n_max + 1)]
    for k, (a, b) in enumerate(zip(ladder[:-1], ladder[1:]), start=n0):
        if not b - a > _MIN_BRACKET or b >= 1.0:
            raise ResolutionError(
                f"{channel}, nu={nu.nu:.17g}: level n={k + 1} is not resolvable in double "
                f"precision (ladder spacing {b - a:.3g})"
            )

    if nu.is_edge:
        # nu = -pi/2: E_n is the n-th pole; nu = +pi/2: E_{n+1} is the n-th pole
        shift = 0 if nu.nu < 0 else 1
        pairs = [(k + shift, e) for k, e in zip(range(n0, cfg.n_max + 1), ladder)]
        pairs = [(n, e) for n, e in pairs if n <= cfg.n_max]
        es = np.array([e for _, e in pairs])
        res = _residual(phase(es)) if es.size else es
        levels = tuple(Level(n, float(e), float(r)) for (n, e), r in zip(pairs, res))
        return LevelSet(channel, nu, region, levels)

    nu_m = nu_lower(channel).nu
    idx, lo, hi = [], [], []
    lowest_at_edge = False
    if nu.nu < nu_m:
        idx.append(n0)
        lo.append(-1.0)
        hi.append(ladder[0])
    elif nu.nu == nu_m:
        lowest_at_edge = True
    for k in range(n0, cfg.n_max):
        idx.append(k + 1)
        lo.append(ladder[k - n0])
        hi.append(ladder[k - n0 + 1])

    lo_arr, hi_arr = np.array(lo), np.array(hi)
    # phase is -pi/2 + nu just right of a pole and +pi/2 + nu just left of the
    # next one; the pole endpoints themselves are never evaluated.
    f_lo = np.where(lo_arr == -1.0, nu.nu - nu_m, nu.nu - _HALF_PI)
    roots = _bisect(
        lambda E: _guard_poles(phase, E, lo_arr, hi_arr, nu.nu),
        lo_arr,
        hi_arr,
        cfg.bisect_tol,
        _residual,
        f_lo,
        np.full(hi_arr.shape, nu.nu + _HALF_PI),
    )
    res = _residual(phase(roots)) if roots.size else roots
    levels = [Level(n, float(e), float(r)) for n, e, r in zip(idx, roots, res)]
    if lowest_at_edge:
        levels.insert(0, Level(n0, -1.0, float(_residual(phase(np.array([-1.0])))[0])))
    return LevelSet(channel, nu, region, tuple(levels))


def _guard_poles(phase, E, lo, hi, nu):
    val = phase(E)
    val = np.where(E <= lo, np.where(lo == -1.0, val, nu - _HALF_PI), val)
    return np.where(E >= hi, nu + _HALF_PI, val)


def _scan_grid(channel: Channel, n_top: float, points: int) -> np.ndarray:
    """Grid on [-1, E_top], clustered towards both edges.

    ``E_top`` is where ``q E / tau`` reaches ``n_top``; one level sits roughly
    per unit of that variable near the accumulation point.
    """
    q = channel.q
    e_top = n_top / math.hypot(q, n_top)
    t_top = math.acos(-e_top) / math.pi
    n_log = max(points // 8, 16)
    edge = -1.0 + np.logspace(-12, -2, n_log)
    t = np.linspace(math.acos(-(-1.0 + 1e-2)) / math.pi, t_top, points - n_log)
    bulk = -np.cos(np.pi * t)
    return np.unique(np.concatenate([[-1.0], edge, bulk]))


def _overcritical_levels(channel: Channel, nu: ExtensionAngle, cfg: SolverConfig) -> LevelSet:
    nu_m = nu_lower(channel).nu
    theta0 = theta_lower_limit(channel, cfg.theta_variant)
    variant = cfg.theta_variant

    def index_phase(E):
        # Theta(-m) - Theta(E): zero at E = -1, increasing
        out = np.zeros(E.shape)
        inner = E > -1.0
        if inner.any():
            out[inner] = theta0 - _theta_arrays(E[inner], channel, variant)
        return out

    n_first = 0 if nu.nu <= nu_m else 1
    ns = np.arange(n_first, cfg.n_max + 1)
    targets = math.pi * ns + (nu_m - nu.nu)
    diagnostics = []

    n_top = float(cfg.n_max + 10)
    for _ in range(40):
        grid = _scan_grid(channel, n_top, cfg.scan_points)
        vals = index_phase(grid)
        if targets.size == 0 or vals[-1] > targets[-1]:
            break
        n_top *= 2.0
        if n_top / math.hypot(channel.q, n_top) >= 1.0:
            break
    else:  # pragma: no cover - the loop always breaks
        pass
    if targets.size and not vals[-1] > targets[-1]:
        raise ResolutionError(
            f"{channel}, nu={nu.nu:.17g}: level n={cfg.n_max} lies beyond double-precision "
            f"resolution of the accumulation at E -> m"
        )
    steps = np.diff(vals)
    if np.any(steps < 0):
        where = grid[1:][steps < 0]
        diagnostics.append(
            f"Theta is not monotone on the scan grid near E = {where[0]:.6g} "
            f"({int(np.sum(steps < 0))} decreasing steps)"
        )

    pos = np.searchsorted(vals, targets, side="left")
    pos = np.clip(pos, 1, grid.size - 1)
    lo, hi = grid[pos - 1], grid[pos]
    if np.any(np.diff(np.concatenate([[-1.0], hi])) <= 0) and ns.size > 1:
        close = np.min(np.diff(hi)) if hi.size > 1 else 0.0
        if close < _MIN_BRACKET:
            raise ResolutionError(
                f"{channel}, nu={nu.nu:.17g}: levels up to n={cfg.n_max} are not resolvable"
            )

    at_edge = targets == 0.0
    roots = _bisect(
        lambda E: index_phase(E) - targets,
        lo,
        hi,
        cfg.bisect_tol,
        np.abs,
        vals[pos - 1] - targets,
        vals[pos] - targets,
    )
    roots = np.where(at_edge, -1.0, roots)
    phase = _phase_function(channel, nu.nu, variant)
    res = _residual(phase(roots)) if roots.size else roots
    levels = tuple(Level(int(n), float(e), float(r)) for n, e, r in zip(ns, roots, res))
    return LevelSet(channel, nu, Region.OVERCRITICAL, levels, tuple(diagnostics))


def _check_resolvable(channel: Channel, nu, n_max: int) -> None:
    """Fail early when levels near ``n_max`` are closer than double precision.

    Near E -> m every region's levels approach the hydrogen-like spacing of
    ``n / sqrt(q^2 + n^2)``; this check runs before any bracket is built.
    """
    q = channel.q
    gap = n_max / math.hypot(q, n_max) - (n_max - 1) / math.hypot(q, n_max - 1)
    if not gap > 4 * _MIN_BRACKET:
        nu_txt = "none" if nu is None else f"{float(nu):.17g}"
        raise ResolutionError(
            f"{channel}, nu={nu_txt}: level n={n_max} is not resolvable in double precision "
            f"(spacing near E = m is about {gap:.2g})"
        )


def solve_levels(
    channel: Channel,
    nu: Optional[Union[ExtensionAngle, float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> LevelSet:
    """Discrete levels of ``channel`` for extension angle ``nu``, up to ``cfg.n_max``.

    In the nonsingular region the Hamiltonian is unique, ``nu`` must be
    omitted and the Sommerfeld levels are returned.  In the singular regions
    the lowest index is present only for ``nu`` in ``[-pi/2, nu_{-m}]``.

    Raises
    ------
    RegionError
        ``nu`` given for a nonsingular channel, or missing for a singular one.
    ResolutionError
        ``n_max`` reaches past what double precision can separate near E = m.
    """
    cfg = cfg or SolverConfig()
    region = channel.region
    _check_resolvable(channel, nu, cfg.n_max)
    if region is Region.NONSINGULAR:
        if nu is not None:
            raise RegionError(
                f"{channel} is nonsingular: the self-adjoint Hamiltonian is unique, "
                "no extension parameter applies"
            )
        return _nonsingular_levels(channel, cfg)
    if nu is None:
        raise RegionError(f"{channel} is {region}: an extension angle nu is required")
    nu = nu if isinstance(nu, ExtensionAngle) else ExtensionAngle(nu)
    if region is Region.OVERCRITICAL:
        out = _overcritical_levels(channel, nu, cfg)
    else:
        out = _ladder_levels(channel, nu, cfg, region)
    loose = [lv.n for lv in out.levels if lv.residual > RESIDUAL_BOUND]
    if loose:
        note = (
            f"residual above {RESIDUAL_BOUND:g} for n = {', '.join(map(str, loose[:5]))}"
            f"{', ...' if len(loose) > 5 else ''}: the level equation is steeper there "
            "than double precision in E can follow"
        )
        out = replace(out, diagnostics=out.diagnostics + (note,))
    return out


_MAX_SCAN_STEP = 0.25


def _oracle_grid(channel: Channel, n_top: float, points: int) -> np.ndarray:
    """Cosine-clustered grid merged with one uniform in ``t = q E / tau``.

    Levels are roughly one per unit of ``t`` near the accumulation point, so
    the second part keeps ``points`` samples per level all the way up.
    The analytic endpoint ``E = -1`` is left out.
    """
    q = channel.q
    t = np.linspace(-n_top, n_top, int(2 * n_top * points) + 1)
    uniform = t / np.hypot(q, t)
    merged = np.union1d(_scan_grid(channel, n_top, 8 * points)[1:], uniform)
    return merged[(merged > -1.0) & (merged < 1.0)]


def _refine_scan(phase, grid: np.ndarray, center: float, rounds: int = 120):
    """Bisect grid cells until the reduced phase is resolved.

    A cell is split when the reduced phase moves by more than
    ``_MAX_SCAN_STEP`` across it, or when ``phase - center`` drops from
    positive to negative.  The latter marks a pole of the level function; a
    full turn of the phase squeezed next to such a pole is invisible mod pi
    and would otherwise be missed.
    """
    vals = phase(grid)
    tiny = 4 * np.finfo(float).eps

    def needs_split(xl, vl, xr, vr):
        steps = np.abs(_wrap(vr - vl))
        split = (steps > _MAX_SCAN_STEP) | ((vl > center) & (vr < center))
        return split & (xr - xl > tiny * np.abs(xr))

    bad = needs_split(grid[:-1], vals[:-1], grid[1:], vals[1:])
    xl, vl, xr, vr = grid[:-1][bad], vals[:-1][bad], grid[1:][bad], vals[1:][bad]
    new_x, new_v = [grid], [vals]
    for _ in range(rounds):
        if xl.size == 0:
            break
        xm = 0.5 * (xl + xr)
        vm = phase(xm)
        new_x.append(xm)
        new_v.append(vm)
        left = needs_split(xl, vl, xm, vm)
        right = needs_split(xm, vm, xr, vr)
        xl, vl, xr, vr = (
            np.concatenate([xl[left], xm[right]]),
            np.concatenate([vl[left], vm[right]]),
            np.concatenate([xm[left], xr[right]]),
            np.concatenate([vm[left], vr[right]]),
        )
    grid = np.concatenate(new_x)
    vals = np.concatenate(new_v)
    order = np.argsort(grid, kind="stable")
    return grid[order], vals[order]


def brute_force_levels(
    channel: Channel,
    nu: Union[ExtensionAngle, float],
    cfg: Optional[SolverConfig] = None,
) -> LevelSet:
    """Oracle: levels from a dense scan of the reduced phase.

    The phase reduced into ``(-pi/2, pi/2]`` is sampled with ``scan_points``
    samples per level, refined wherever it moves fast, and unwrapped.  Its starting value
    is aligned to ``nu - nu_{-m}``, with ``nu_{-m}`` read off the scan
    itself.  Every crossing of ``k * pi`` is one level with index
    ``lowest_index + k``, refined by bisection.  No ladder or index-equation
    logic from :func:`solve_levels` is used.
    """
    cfg = cfg or SolverConfig()
    region = channel.region
    if region is Region.NONSINGULAR:
        raise RegionError(f"{channel} is nonsingular: no extension parameter applies")
    nu = nu if isinstance(nu, ExtensionAngle) else ExtensionAngle(nu)
    phase = _phase_function(channel, nu.nu, cfg.theta_variant)
    n0 = channel.lowest_index
    diagnostics = []

    k_needed = cfg.n_max - n0 + 1
    n_top = float(cfg.n_max + 12)
    for _ in range(40):
        # the oracle never evaluates the analytic E = -1 limit
        grid = _oracle_grid(channel, n_top, cfg.scan_points)
        grid, raw = _refine_scan(phase, grid, nu.nu)
        steps = _wrap(np.diff(raw))
        unwrapped = raw[0] + np.concatenate([[0.0], np.cumsum(steps)])
        nu_m = float(_wrap(nu.nu - raw[0]))
        unwrapped += (nu.nu - nu_m) - unwrapped[0]
        if unwrapped[-1] > k_needed * math.pi + 1.0:
            break
        n_top *= 2.0
        if n_top > 16 * (cfg.n_max + 12):
            raise ResolutionError(
                f"{channel}, nu={nu.nu:.17g}: brute-force scan phase stalls below n={cfg.n_max}"
            )
    else:
        raise ResolutionError(f"{channel}: brute-force scan could not reach n={cfg.n_max}")

    if np.any(np.abs(steps) > _MAX_SCAN_STEP):
        diagnostics.append(
            f"scan under-resolved: max phase step {np.abs(steps).max():.3f} rad"
        )

    k_lo = np.ceil(unwrapped[:-1] / math.pi)
    k_hi = np.floor(unwrapped[1:] / math.pi)
    cells, ks = [], []
    for i in np.nonzero(k_hi >= k_lo)[0]:
        for k in range(int(k_lo[i]), int(k_hi[i]) + 1):
            if unwrapped[i] < k * math.pi <= unwrapped[i + 1]:
                cells.append(i)
                ks.append(k)
    down = np.nonzero(np.floor(unwrapped[1:] / math.pi) < np.floor(unwrapped[:-1] / math.pi))[0]
    if down.size:
        diagnostics.append(f"phase decreases across a root near E = {grid[down[0]]:.6g}")

    cells_arr = np.array(cells, dtype=int)
    ks_arr = np.array(ks, dtype=int)
    keep = (ks_arr >= 0) & (n0 + ks_arr <= cfg.n_max)
    cells_arr, ks_arr = cells_arr[keep], ks_arr[keep]
    lo, hi = grid[cells_arr], grid[cells_arr + 1]

    def reduced_phase(E):
        return _wrap(phase(E))

    roots = _bisect(reduced_phase, lo, hi, cfg.bisect_tol, np.abs)
    res = _residual(phase(roots)) if roots.size else roots
    levels = tuple(
        Level(int(n0 + k), float(e), float(r)) for k, e, r in zip(ks_arr, roots, res)
    )
    return LevelSet(channel, nu, region, levels, tuple(diagnostics))


def level_sets_agree(a: LevelSet, b: LevelSet, tol: float = 1e-9) -> bool:
    """Same indices and energies within ``tol``."""
    if a.indices != b.indices:
        return False
    return bool(np.all(np.abs(a.energies - b.energies) <= tol)) if len(a) else True


def solve_many(
    channel: Channel, nus: Sequence[Union[ExtensionAngle, float]], cfg: Optional[SolverConfig] = None
) -> list[LevelSet]:
    return [solve_levels(channel, nu, cfg) for nu in nus]
