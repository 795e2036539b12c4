"""Gamma-function kernels for the level equations.

Three quantities are needed by the solver: ``ln|Gamma(x)|`` with its sign on
the real line, the digamma function on the real line, and a branch of
``arg Gamma(x + iy)`` that stays continuous as ``x`` runs over the whole real
axis at fixed ``y``.  Everything is built from the Stirling series, upward
recurrence and the reflection formula, and is vectorised over numpy arrays.
Scalars in give Python floats out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import PoleError

ArrayLike = Union[float, np.ndarray]

EULER_GAMMA = 0.57721566490153286060651209008240243
LOG_PI = math.log(math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Stirling is applied at or above these real parts; below, recurrence shifts up.
_LGAMMA_SHIFT = 10.0
_ARG_SHIFT = 8.0

# B_{2k} / (2k (2k-1)), k = 1..9
_LGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
)
# B_{2k} / (2k), k = 1..9
_DIGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
)


@dataclass(frozen=True)
class SignLog:
    """A real number stored as ``sign * exp(log_mag)``.

    ``sign`` is -1, 0 or +1 and ``log_mag`` is the natural log of the
    magnitude.  Zero is ``(0, -inf)``; a pole is encoded as ``(+-1, +inf)``.
    Both fields may be numpy arrays of equal shape, in which case all
    arithmetic is elementwise.
    """

    sign: ArrayLike
    log_mag: ArrayLike

    @classmethod
    def from_value(cls, x: ArrayLike) -> SignLog:
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            log_mag = np.log(np.abs(x_arr))
        sign = np.sign(x_arr).astype(int)
        if x_arr.ndim == 0:
            return cls(int(sign), float(log_mag))
        return cls(sign, log_mag)

    def __mul__(self, other: SignLog) -> SignLog:
        return SignLog(self.sign * other.sign, self.log_mag + other.log_mag)

    def __truediv__(self, other: SignLog) -> SignLog:
        return SignLog(self.sign * other.sign, self.log_mag - other.log_mag)

    def __neg__(self) -> SignLog:
        return SignLog(-self.sign, self.log_mag)

    @property
    def is_pole(self) -> ArrayLike:
        return np.isposinf(self.log_mag) & (np.asarray(self.sign) != 0)

    def value(self) -> ArrayLike:
        """Return the plain float value; overflows to +-inf rather than raising."""
        sign = np.asarray(self.sign, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.where(sign == 0, 0.0, sign * np.exp(self.log_mag))
        return float(out) if out.ndim == 0 else out


def _as_float_array(x: ArrayLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr).copy(), arr.ndim == 0


def _unwrap_scalar(arr: np.ndarray, scalar: bool):
    return float(arr[0]) if scalar else arr


def _is_nonpositive_integer(x: np.ndarray) -> np.ndarray:
    return (x <= 0) & (x == np.floor(x))


def sinpi(x: ArrayLike) -> ArrayLike:
    """``sin(pi x)`` with exact argument reduction."""
    x_arr = np.asarray(x, dtype=float)
    n = np.round(x_arr)
    s = np.sin(np.pi * (x_arr - n))
    out = np.where(np.fmod(n, 2.0) == 0.0, s, -s)
    return float(out) if out.ndim == 0 else out


def _cotpi(x: np.ndarray) -> np.ndarray:
    r = x - np.round(x)
    with np.errstate(divide="ignore"):
        return 1.0 / np.tan(np.pi * r)


def _stirling_lgamma(z: np.ndarray) -> np.ndarray:
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    for c in reversed(_LGAMMA_COEF):
        series = series * inv2 + c
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + series * inv


def _lgamma_large_half(x: np.ndarray) -> np.ndarray:
    """ln Gamma(x) for x >= 0.5."""
    z = x.copy()
    shift = np.ones_like(x)
    for _ in range(int(_LGAMMA_SHIFT) + 1):
        low = z < _LGAMMA_SHIFT
        if not low.any():
            break
        shift = np.where(low, shift * z, shift)
        z = np.where(low, z + 1.0, z)
    return _stirling_lgamma(z) - np.log(shift)


def _lgamma_signed_arrays(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sign and ln|Gamma| without pole checks (poles give sign +1, log +inf)."""
    reflect = x < 0.5
    sign = np.ones(x.shape, dtype=int)
    log_mag = np.empty_like(x)
    if (~reflect).any():
        log_mag[~reflect] = _lgamma_large_half(x[~reflect])
    if reflect.any():
        xr = x[reflect]
        s = np.asarray(sinpi(xr))
        with np.errstate(divide="ignore"):
            log_mag[reflect] = LOG_PI - np.log(np.abs(s)) - _lgamma_large_half(1.0 - xr)
        sign[reflect] = np.where(s < 0, -1, 1)
    # Gamma(1) = Gamma(2) = 1 exactly
    log_mag[(x == 1.0) | (x == 2.0)] = 0.0
    return sign, log_mag


def ln_gamma_signed(x: ArrayLike) -> SignLog:
    """Return ``Gamma(x)`` as a :class:`SignLog`.

    Raises
    ------
    PoleError
        If any ``x`` is a non-positive integer.
    """
    arr, scalar = _as_float_array(x)
    if not np.all(np.isfinite(arr)):
        raise ValueError("ln_gamma_signed requires finite arguments")
    if _is_nonpositive_integer(arr).any():
        raise PoleError(f"Gamma has a pole at {arr[_is_nonpositive_integer(arr)][0]:g}")
    sign, log_mag = _lgamma_signed_arrays(arr)
    if scalar:
        return SignLog(int(sign[0]), float(log_mag[0]))
    return SignLog(sign, log_mag)


def _stirling_lgamma_tail(z: np.ndarray) -> np.ndarray:
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    for c in reversed(_LGAMMA_COEF):
        series = series * inv2 + c
    return series * inv


def _lgamma_ratio_arrays(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sign and log of Gamma(a)/Gamma(b), accurate when a and b are large and close."""
    sign = np.ones(a.shape, dtype=int)
    log_mag = np.empty_like(a)

    both_neg = (a < 0.5) & (b < 0.5)
    # Gamma(a)/Gamma(b) = [sin(pi b)/sin(pi a)] Gamma(1-b)/Gamma(1-a)
    if both_neg.any():
        sa = np.asarray(sinpi(a[both_neg]))
        sb = np.asarray(sinpi(b[both_neg]))
        s_sub, l_sub = _lgamma_ratio_arrays(1.0 - b[both_neg], 1.0 - a[both_neg])
        with np.errstate(divide="ignore"):
            log_mag[both_neg] = np.log(np.abs(sb)) - np.log(np.abs(sa)) + l_sub
        sgn = np.sign(sa) * np.sign(sb) * s_sub
        # sin(pi a) = 0 marks a pole of the ratio
        sgn = np.where(sa == 0, 1, sgn)
        sign[both_neg] = sgn.astype(int)

    big = ~both_neg & (a >= _LGAMMA_SHIFT) & (b >= _LGAMMA_SHIFT)
    if big.any():
        ab, bb = a[big], b[big]
        d = ab - bb
        log_mag[big] = (
            (ab - 0.5) * np.log1p(d / bb)
            + d * (np.log(bb) - 1.0)
            + _stirling_lgamma_tail(ab)
            - _stirling_lgamma_tail(bb)
        )

    rest = ~both_neg & ~big
    if rest.any():
        sa, la = _lgamma_signed_arrays(a[rest])
        sb, lb = _lgamma_signed_arrays(b[rest])
        pole_a = _is_nonpositive_integer(a[rest])
        pole_b = _is_nonpositive_integer(b[rest])
        with np.errstate(invalid="ignore"):
            lr = la - lb
        lr = np.where(pole_a & ~pole_b, np.inf, lr)
        lr = np.where(pole_b & ~pole_a, -np.inf, lr)
        sr = np.where(pole_b & ~pole_a, 0, sa * sb)
        log_mag[rest] = lr
        sign[rest] = sr
    return sign, log_mag


def ln_gamma_ratio(a: ArrayLike, b: ArrayLike) -> SignLog:
    """Return ``Gamma(a) / Gamma(b)`` as a :class:`SignLog`.

    Unlike dividing two :func:`ln_gamma_signed` results, this keeps full
    relative precision when ``a`` and ``b`` are both large and differ by
    O(1), and treats poles of either factor as +-inf / zero instead of
    raising.
    """
    a_arr, a_scalar = _as_float_array(a)
    b_arr, b_scalar = _as_float_array(b)
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    sign, log_mag = _lgamma_ratio_arrays(a_arr.astype(float), b_arr.astype(float))
    if a_scalar and b_scalar:
        return SignLog(int(sign[0]), float(log_mag[0]))
    return SignLog(sign, log_mag)


def _digamma_large_half(x: np.ndarray) -> np.ndarray:
    z = x.copy()
    acc = np.zeros_like(x)
    for _ in range(int(_LGAMMA_SHIFT) + 1):
        low = z < _LGAMMA_SHIFT
        if not low.any():
            break
        acc = np.where(low, acc - 1.0 / z, acc)
        z = np.where(low, z + 1.0, z)
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for c in reversed(_DIGAMMA_COEF):
        series = series * inv2 + c
    return acc + np.log(z) - 0.5 / z - series * inv2


def _digamma_arrays(x: np.ndarray) -> np.ndarray:
    """Digamma without pole checks; poles come out as +-inf."""
    out = np.empty_like(x)
    reflect = x < 0.5
    if (~reflect).any():
        out[~reflect] = _digamma_large_half(x[~reflect])
    if reflect.any():
        xr = x[reflect]
        # psi(x) = psi(1 - x) - pi cot(pi x)
        out[reflect] = _digamma_large_half(1.0 - xr) - np.pi * _cotpi(xr)
    return out


def digamma(x: ArrayLike) -> ArrayLike:
    """The digamma function ``psi(x) = Gamma'(x)/Gamma(x)`` on the real line."""
    arr, scalar = _as_float_array(x)
    if not np.all(np.isfinite(arr)):
        raise ValueError("digamma requires finite arguments")
    if _is_nonpositive_integer(arr).any():
        raise PoleError(f"digamma has a pole at {arr[_is_nonpositive_integer(arr)][0]:g}")
    return _unwrap_scalar(_digamma_arrays(arr), scalar)


def _stirling_arg(z: np.ndarray) -> np.ndarray:
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    for c in reversed(_LGAMMA_COEF):
        series = series * inv2 + c
    return np.imag((z - 0.5) * np.log(z) - z + series * inv)


def _arg_gamma_right(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Im ln Gamma(x + iy) for x >= 0.5, y > 0, via upward recurrence."""
    z = x + 1j * y
    acc = np.zeros_like(x)
    for _ in range(int(_ARG_SHIFT) + 1):
        low = z.real < _ARG_SHIFT
        if not low.any():
            break
        acc = np.where(low, acc + np.angle(z), acc)
        z = np.where(low, z + 1.0, z)
    return _stirling_arg(z) - acc


def _arg_gamma_upper(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Continuous arg Gamma(x + iy) for y > 0 and any real x."""
    reflect = x < 0.5
    xr = np.where(reflect, 1.0 - x, x)
    out = _arg_gamma_right(xr, y)
    if reflect.any():
        # ln Gamma(z) + ln Gamma(1 - z) = ln pi - ln sin(pi z) holds with no
        # 2 pi i offset in the upper half plane when the continuous branch
        # arg sin(pi z) = pi/2 - pi x + arg(1 - exp(2 pi i z)) is used.
        r = x - np.round(x)
        w = np.exp(-2.0 * np.pi * y) * np.exp(2j * np.pi * r)
        corr = -0.5 * np.pi + np.pi * x - np.angle(1.0 - w)
        out = np.where(reflect, out + corr, out)
    return out


def arg_gamma_continuous(x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Branch of ``arg Gamma(x + iy)`` continuous in ``x`` at fixed ``y != 0``.

    This is the imaginary part of the analytic continuation of ``ln Gamma``
    from the positive real axis (the branch produced by the Stirling series),
    so ``arg_gamma_continuous(x, -y) == -arg_gamma_continuous(x, y)``.  Large
    negative ``x`` is handled by reflection rather than by recurrence, so the
    cost does not grow with ``|x|``.
    """
    x_arr, xs = _as_float_array(x)
    y_arr, ys = _as_float_array(y)
    x_arr, y_arr = np.broadcast_arrays(x_arr, y_arr)
    if np.any(y_arr == 0.0):
        raise ValueError("arg_gamma_continuous requires y != 0")
    if not (np.all(np.isfinite(x_arr)) and np.all(np.isfinite(y_arr))):
        raise ValueError("arg_gamma_continuous requires finite arguments")
    ay = np.abs(y_arr)
    out = _arg_gamma_upper(x_arr.astype(float), ay.astype(float))
    out = np.where(y_arr < 0, -out, out)
    return _unwrap_scalar(out, xs and ys)
