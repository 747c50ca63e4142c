import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pflion.constants import ATOMIC_MASS_UNIT, YB_LINEWIDTH
from pflion.errors import ConvergenceError, InvalidParameterError
from pflion.trap_physics import (IonScene, TrapParams, doppler_temperature, equilibrium_positions,
                                 ion_spacing, thermal_rms)

import oracles

# frozen from the mpmath oracle (tests/oracles.py)
SPACING_174U_882KHZ = 3.7324928016472423e-06
SPACING_171U_1MHZ = 3.452728382905709e-06
DOPPLER_LIMIT_19_6MHZ = 4.70325820901712e-04
NU_FOR_15NM = 1590635.7976905773


def trap(mass_u=174, nu=882e3, **kw):
    return TrapParams.from_amu(mass_u, nu, 1.6e6 if nu < 1.5e6 else 4 * nu, **kw)


def test_frozen_values_match_oracles():
    assert oracles.two_ion_spacing(174, 882e3) == pytest.approx(SPACING_174U_882KHZ, rel=1e-12)
    assert oracles.two_ion_spacing(171, 1e6) == pytest.approx(SPACING_171U_1MHZ, rel=1e-12)
    assert oracles.doppler_limit(19.6e6) == pytest.approx(DOPPLER_LIMIT_19_6MHZ, rel=1e-12)
    assert oracles.frequency_for_rms(DOPPLER_LIMIT_19_6MHZ, 174, 15e-9) == pytest.approx(
        NU_FOR_15NM, rel=1e-12)


def test_spacing_against_oracle():
    assert ion_spacing(trap(174, 882e3)) == pytest.approx(SPACING_174U_882KHZ, rel=1e-12)
    assert ion_spacing(trap(171, 1e6)) == pytest.approx(SPACING_171U_1MHZ, rel=1e-12)


def test_spacing_frequency_doubling():
    ratio = ion_spacing(trap(nu=1.0e6)) / ion_spacing(trap(nu=0.5e6))
    assert ratio == pytest.approx(2 ** (-2 / 3), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 300.0), st.floats(1e4, 3e6))
def test_spacing_times_nu_two_thirds_is_constant(mass_u, nu):
    t = TrapParams.from_amu(mass_u, nu, nu, drive_frequency=2 * math.pi * 100e6)
    ref = TrapParams.from_amu(mass_u, 1e6, 1e6, drive_frequency=2 * math.pi * 100e6)
    assert ion_spacing(t) * nu ** (2 / 3) == pytest.approx(ion_spacing(ref) * 1e6 ** (2 / 3),
                                                            rel=1e-12)


def test_two_ion_equilibrium_matches_closed_form():
    t = trap()
    x = equilibrium_positions(2, t)
    assert x[1] - x[0] == pytest.approx(ion_spacing(t), rel=1e-9)
    assert x[0] == pytest.approx(-x[1], rel=1e-12)


def test_three_ion_equilibrium_against_brute_force():
    t = trap()
    scale = ion_spacing(t) / 2 ** (1 / 3)  # dimensionless length unit
    brute = oracles.three_ion_brute_force()
    x = equilibrium_positions(3, t) / scale
    assert np.allclose(x, brute, atol=1e-6)
    # the outer ions sit at +-(5/4)^(1/3)
    assert x[2] == pytest.approx((5 / 4) ** (1 / 3), rel=1e-9)
    assert x[1] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7, 10])
def test_equilibrium_is_symmetric_and_sorted(n):
    x = equilibrium_positions(n, trap())
    assert np.all(np.diff(x) > 0)
    assert np.allclose(x, -x[::-1], atol=1e-12 * abs(x).max())
    # inner spacings are the smallest
    d = np.diff(x)
    assert d[len(d) // 2] <= d[0] * (1 + 1e-12)


def test_single_ion_sits_at_centre():
    assert equilibrium_positions(1, trap()).tolist() == [0.0]


def test_equilibrium_errors():
    with pytest.raises(InvalidParameterError):
        equilibrium_positions(0, trap())
    with pytest.raises(ConvergenceError) as err:
        equilibrium_positions(6, trap(), max_iter=2)
    assert err.value.residual > 0


def test_linear_chain_scene():
    scene = IonScene.linear_chain(trap(), 2, motion_rms=(15e-9, 15e-9, 0))
    assert scene.n_ions == 2
    assert scene.positions[1, 0] - scene.positions[0, 0] == pytest.approx(SPACING_174U_882KHZ,
                                                                           rel=1e-9)
    assert scene.motion_rms == (15e-9, 15e-9, 0.0)


def test_scene_validation():
    with pytest.raises(InvalidParameterError):
        IonScene(np.zeros((2, 3)))
    with pytest.raises(InvalidParameterError):
        IonScene(np.zeros((1, 3)), motion_rms=(-1e-9, 0, 0))
    with pytest.raises(InvalidParameterError):
        IonScene(np.zeros((0, 3)))


def test_trap_validation():
    with pytest.raises(InvalidParameterError):
        trap(nu=0.0)
    with pytest.raises(InvalidParameterError):
        trap(temperature=-1.0)
    with pytest.raises(InvalidParameterError):
        TrapParams.from_amu(174, 882e3, 1.6e6, drive_frequency=2 * math.pi * 5e6)
    with pytest.raises(InvalidParameterError):
        TrapParams.from_amu(-1, 882e3, 1.6e6)


def test_doppler_limit():
    assert doppler_temperature(YB_LINEWIDTH) == pytest.approx(DOPPLER_LIMIT_19_6MHZ, rel=1e-9)
    assert doppler_temperature(YB_LINEWIDTH) == pytest.approx(0.47e-3, rel=0.01)
    with pytest.raises(InvalidParameterError):
        doppler_temperature(0.0)


def test_thermal_rms_at_doppler_limit():
    m = 174 * ATOMIC_MASS_UNIT
    t_d = doppler_temperature(YB_LINEWIDTH)
    assert thermal_rms(t_d, m, NU_FOR_15NM) == pytest.approx(15e-9, rel=1e-9)
    assert NU_FOR_15NM == pytest.approx(1.59e6, rel=0.01)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1.0), st.floats(1e4, 1e7), st.floats(1.01, 10.0))
def test_thermal_rms_scaling(temperature, nu, factor):
    m = 174 * ATOMIC_MASS_UNIT
    base = thermal_rms(temperature, m, nu)
    assert thermal_rms(temperature * factor, m, nu) == pytest.approx(base * math.sqrt(factor),
                                                                     rel=1e-12)
    assert thermal_rms(temperature, m, nu * factor) == pytest.approx(base / factor, rel=1e-12)
    assert thermal_rms(temperature * factor, m, nu) > base
    assert thermal_rms(temperature, m, nu * factor) < base


def test_thermal_rms_errors():
    m = 174 * ATOMIC_MASS_UNIT
    assert thermal_rms(0.0, m, 1e6) == 0.0
    with pytest.raises(InvalidParameterError):
        thermal_rms(1e-3, m, 0.0)
    with pytest.raises(InvalidParameterError):
        thermal_rms(-1e-3, m, 1e6)
