import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supercrit.channels import (
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
from supercrit.errors import RegionError


def test_half_integer_parsing():
    assert HalfInteger.parse("1/2").twice_value == 1
    assert HalfInteger.parse(" 5/2 ").k == 3
    assert str(HalfInteger.parse("3/2")) == "3/2"
    assert HalfInteger.parse("2/4") == HalfInteger(1)
    for bad in ("0.5", "1", "2/2", "1/3", "-1/2", "a/b", "1/0"):
        with pytest.raises(ValueError):
            HalfInteger.parse(bad)
    assert HalfInteger.coerce(Fraction(3, 2)) == HalfInteger(3)
    assert HalfInteger.coerce(0.5) == HalfInteger(1)


@pytest.mark.parametrize(
    "fn, j, alpha_inv, want, tol",
    [
        (z_singular, "1/2", 137.04, 118.68, 5e-3),
        (z_singular, "3/2", 137.04, 265.37, 1e-2),
        (z_singular, "1/2", 2.0, math.sqrt(3), 1e-12),
        (z_critical, "1/2", 137.04, 137.04, 1e-12),
        (z_critical, "5/2", 137.04, 411.12, 1e-9),
        (z_critical, "1/2", 2.0, 2.0, 0.0),
    ],
)
def test_boundary_charges(fn, j, alpha_inv, want, tol):
    assert fn(j, alpha_inv) == pytest.approx(want, abs=tol)


@pytest.mark.parametrize("Z, region", [(100, Region.NONSINGULAR), (121, Region.SUBCRITICAL),
                                       (138, Region.OVERCRITICAL)])
def test_classify_examples(Z, region):
    assert classify(Channel(Z, "1/2", 1)) is region


def test_critical_only_on_request():
    ch = Channel.at_critical("1/2", -1)
    assert ch.region is Region.CRITICAL and ch.q == 1.0 and ch.gamma == 0.0
    assert classify(Channel(137.0359995, "1/2", 1), force_critical=True) is Region.CRITICAL
    with pytest.raises(RegionError):
        classify(Channel(137.2, "1/2", 1), force_critical=True)
    with pytest.raises(RegionError):
        Channel(136.0, "1/2", 1, critical=True)
    with pytest.raises(RegionError):
        classify(Channel(137.035999, "1/2", 1))


def test_gamma_sigma_exposed_per_region():
    sub = Channel(121, "1/2", 1)
    assert sub.gamma == pytest.approx(0.469411, abs=1e-6)
    with pytest.raises(RegionError):
        sub.sigma
    over = Channel(138, "1/2", 1)
    assert over.sigma == pytest.approx(0.118823, abs=1e-6)
    with pytest.raises(RegionError):
        over.gamma
    assert Channel(121, "3/2", -1).kappa == -2


def test_channel_validation():
    with pytest.raises(ValueError):
        Channel(121, "1/2", 0)
    with pytest.raises(ValueError):
        Channel(-1, "1/2", 1)
    with pytest.raises(ValueError):
        Channel(121, "1/2", 1, alpha_inv=0)


def test_classify_consistent_on_grid():
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        twice = int(rng.choice(np.arange(1, 22, 2)))
        Z = float(rng.uniform(1, 1600))
        region = classify(Channel(Z, HalfInteger(twice), 1))
        zs, zc = z_singular(HalfInteger(twice)), z_critical(HalfInteger(twice))
        want = (Region.NONSINGULAR if Z <= zs else Region.SUBCRITICAL if Z < zc
                else Region.OVERCRITICAL)
        assert region is want


def brute_delta(Z, alpha_inv=137.035999):
    count, twice = 0, 1
    while twice <= 501:
        if Z > z_singular(HalfInteger(twice), alpha_inv):
            count += 1
        twice += 2
    return 2 * count


def test_num_extension_params_matches_count():
    assert [num_extension_params(Z) for Z in (118, 119, 266)] == [0, 2, 4]
    for Z in range(1, 1001):
        assert num_extension_params(Z) == brute_delta(Z)


def test_sommerfeld_examples():
    ch = Channel(121, "1/2", 1)
    assert sommerfeld_energy(ch, 1) == pytest.approx(0.85715, abs=1e-5)
    low = Channel(121, "1/2", -1)
    assert sommerfeld_energy(low, 0) == pytest.approx(low.gamma, abs=1e-15)
    assert sommerfeld_energy(Channel.at_critical("1/2", 1), 1) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValueError):
        sommerfeld_energy(ch, 0)
    with pytest.raises(RegionError):
        sommerfeld_energy(Channel(138, "1/2", 1), 1)


def test_pole_ladder_examples():
    ch = Channel(121, "1/2", 1)
    assert pole_ladder(ch, 1) == pytest.approx(0.515067, abs=1e-6)
    assert pole_ladder(ch, 0) == pytest.approx(-ch.gamma, abs=1e-15)
    assert pole_ladder(Channel.at_critical("1/2", 1), 2) == pytest.approx(2 / math.sqrt(5))
    with pytest.raises(RegionError):
        pole_ladder(Channel(100, "1/2", 1), 1)
    with pytest.raises(RegionError):
        pole_ladder(Channel(138, "1/2", 1), 1)


def test_nonrel_energy():
    ch = Channel(121, "1/2", 1)
    assert nonrel_energy(Channel(137.035999, "1/2", 1, critical=True), 1) == -0.5
    assert nonrel_energy(ch, 10) == pytest.approx(-0.003898, abs=1e-6)
    assert 2 * 7 ** 2 * nonrel_energy(ch, 7) / ch.q ** 2 == pytest.approx(-1.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 3, 5, 7]), st.floats(0.01, 0.999))
def test_sommerfeld_monotone_and_degenerate(twice, frac):
    hj = HalfInteger(twice)
    Z = frac * z_critical(hj)
    plus, minus = Channel(Z, hj, 1), Channel(Z, hj, -1)
    seq = [sommerfeld_energy(plus, n) for n in range(1, 30)]
    assert all(b > a for a, b in zip(seq, seq[1:])) and seq[-1] < 1
    assert seq == [sommerfeld_energy(minus, n) for n in range(1, 30)]


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 3, 5]), st.floats(0.001, 0.999))
def test_ladder_interlaces(twice, frac):
    hj = HalfInteger(twice)
    zs, zc = z_singular(hj), z_critical(hj)
    ch = Channel(zs + frac * (zc - zs), hj, -1)
    ladder = [pole_ladder(ch, n) for n in range(0, 25)]
    assert all(b > a for a, b in zip(ladder, ladder[1:]))
    assert all(pole_ladder(ch, n) < sommerfeld_energy(ch, n) for n in range(0, 25))


def test_z_singular_below_critical():
    for twice in range(1, 200, 2):
        assert z_singular(HalfInteger(twice)) < z_critical(HalfInteger(twice))


@settings(max_examples=300, deadline=None)
@given(st.floats(-100, 100))
def test_extension_angle_normalisation(nu):
    a = ExtensionAngle(nu)
    assert -math.pi / 2 <= a.nu <= math.pi / 2
    if abs(nu) < math.pi / 2:
        assert a.nu == nu
    else:
        k = (nu - a.nu) / math.pi
        assert abs(k - round(k)) < 1e-9


def test_extension_angle_ends_stay_distinct():
    assert ExtensionAngle(-math.pi / 2).nu == -math.pi / 2
    assert ExtensionAngle(math.pi / 2).nu == math.pi / 2
    assert ExtensionAngle(-math.pi / 2).is_edge and not ExtensionAngle(0.3).is_edge
    assert ExtensionAngle(math.pi).nu == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        ExtensionAngle(float("nan"))
