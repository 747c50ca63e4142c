import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pflion.errors import AliasingError, InvalidParameterError
from pflion.image_formation import gaussian_psf
from pflion.pfl_design import ZonePlateSpec, design_zoneplate, numerical_aperture
from pflion.wave_optics import (Psf, RadialPupil, ScalarField, airy_fwhm,
                                angular_spectrum_propagate, binary_grating_efficiency,
                                cross_check_engines, focal_amplitude_radial, focal_field_radial,
                                ideal_pupil, knife_edge_scan, psf_fwhm, pupil_from_zoneplate)

from conftest import D, F, LAM

# frozen from oracles.airy_fwhm_brute(369.5e-9, NA(3 mm, 5 mm))
AIRY_FWHM_NOMINAL = 2.9695605836404256e-07
GAUSS_10_90 = 2.563103131089201  # oracles.gaussian_10_90_width(1)


def test_frozen_values_match_oracles():
    import oracles
    assert oracles.airy_fwhm_brute(LAM, numerical_aperture(F, D)) == pytest.approx(
        AIRY_FWHM_NOMINAL, rel=1e-9)
    assert oracles.gaussian_10_90_width(1.0) == pytest.approx(GAUSS_10_90, rel=1e-12)
    assert airy_fwhm(LAM, numerical_aperture(F, D)) == pytest.approx(AIRY_FWHM_NOMINAL, rel=1e-6)


# --- pupils -----------------------------------------------------------------

def test_single_zone_pupil():
    r1 = np.sqrt(LAM * F + LAM ** 2 / 4)
    spec = design_zoneplate(LAM, F, 2 * r1 * 1.2)
    assert spec.n_zones == 1
    pupil = pupil_from_zoneplate(spec, 4)
    assert pupil.radii[4] == pytest.approx(r1, rel=1e-15)
    assert np.allclose(pupil.transmission[:4], 1)
    assert np.allclose(pupil.transmission[4:], -1)


def test_parity_flip_is_global_phase():
    a = pupil_from_zoneplate(design_zoneplate(LAM, F, 0.4e-3))
    b = pupil_from_zoneplate(design_zoneplate(LAM, F, 0.4e-3, first_zone_etched=True))
    assert np.allclose(b.transmission, a.transmission * np.exp(1j * np.pi))


def test_nominal_pupil_honours_boundaries(nominal_spec):
    pupil = pupil_from_zoneplate(nominal_spec, 4)
    assert np.all(np.isin(nominal_spec.zone_boundaries, pupil.radii))
    widths = np.diff(nominal_spec.zone_boundaries)
    cells = np.diff(pupil.radii)
    # at least 4 cells in the narrowest (outermost full) zone
    assert cells[-8:].max() <= widths.min() / 4 * 1.0001
    assert pupil.aperture_radius == pytest.approx(D / 2)


def test_pupil_errors(nominal_spec):
    with pytest.raises(InvalidParameterError):
        pupil_from_zoneplate(nominal_spec, 3)
    empty = ZonePlateSpec(LAM, F, D, np.array([]), 390e-9, 1.47)
    with pytest.raises(InvalidParameterError):
        pupil_from_zoneplate(empty)
    with pytest.raises(InvalidParameterError):
        RadialPupil([0, 1e-6], [2.0], LAM)
    with pytest.raises(InvalidParameterError):
        RadialPupil([1e-6, 2e-6], [1.0], LAM)


# --- radial diffraction integral -------------------------------------------

@pytest.fixture(scope="module")
def ideal_psf():
    return focal_field_radial(ideal_pupil(LAM, F, D), F, 1.0e-6, 401)


def test_ideal_pupil_matches_airy(ideal_psf):
    fwhm = psf_fwhm(ideal_psf)
    assert fwhm == pytest.approx(AIRY_FWHM_NOMINAL, rel=0.05)
    # same as the 0.514 lam / NA rule of thumb
    assert 0.514 * LAM / numerical_aperture(F, D) == pytest.approx(AIRY_FWHM_NOMINAL, rel=2e-3)


def test_binary_pupil_close_to_ideal(nominal_psf, ideal_psf):
    assert psf_fwhm(nominal_psf) == pytest.approx(psf_fwhm(ideal_psf), rel=0.05)


def _direct_quadrature_intensity(spec, rho, per_zone=64):
    """Midpoint rule over every zone at 16x the default cell density."""
    k = 2 * np.pi / LAM
    _, inner, outer, phase = spec.zones()
    t = (np.arange(per_zone) + 0.5) / per_zone
    r = np.sqrt(inner[:, None] ** 2 + t[None, :] * (outer ** 2 - inner ** 2)[:, None])
    dr2 = ((outer ** 2 - inner ** 2) / per_zone)[:, None] * np.ones_like(t)
    tr = np.exp(1j * phase)[:, None] * np.ones_like(t)
    r, dr2, tr = r.ravel(), dr2.ravel(), tr.ravel()
    r0 = np.hypot(r, F)
    from scipy.special import j0
    out = []
    for p in rho:
        integrand = tr * np.exp(1j * k * (r0 + p * p / (2 * r0))) * F / r0 ** 2 * j0(k * p * r / r0)
        out.append(abs(np.sum(integrand * np.pi * dr2)) ** 2)
    return np.array(out)


def test_binary_focus_against_direct_quadrature(nominal_spec, nominal_psf):
    rho = np.array([0.0, 0.1e-6, 0.142e-6, 0.2e-6])
    direct = _direct_quadrature_intensity(nominal_spec, rho)
    amp = focal_amplitude_radial(pupil_from_zoneplate(nominal_spec), F, rho)
    ours = np.abs(amp) ** 2
    assert np.allclose(ours / ours[0], direct / direct[0], atol=2e-4)


def test_half_aperture_scaling():
    small = 0.3e-3
    full = focal_field_radial(ideal_pupil(LAM, F, small), F, 12e-6, 401)
    half = focal_field_radial(ideal_pupil(LAM, F, small / 2), F, 24e-6, 401)
    assert psf_fwhm(half) / psf_fwhm(full) == pytest.approx(2.0, rel=0.01)
    # at high NA the ratio follows the exact NA, not d
    wide = focal_field_radial(ideal_pupil(LAM, F, D / 2), F, 2e-6, 401)
    ratio = numerical_aperture(F, D) / numerical_aperture(F, D / 2)
    full_hi = focal_field_radial(ideal_pupil(LAM, F, D), F, 1e-6, 401)
    assert psf_fwhm(wide) / psf_fwhm(full_hi) == pytest.approx(ratio, rel=0.05)


def test_normalization(nominal_psf, ideal_psf):
    for psf in (nominal_psf, ideal_psf):
        assert psf.total() == pytest.approx(1.0, abs=1e-9)
        assert np.all(psf.intensity >= 0)


def test_parity_invariance():
    a = design_zoneplate(LAM, F, 1e-3)
    b = design_zoneplate(LAM, F, 1e-3, first_zone_etched=True)
    ia = focal_field_radial(pupil_from_zoneplate(a), F, 2e-6, 101).intensity
    ib = focal_field_radial(pupil_from_zoneplate(b), F, 2e-6, 101).intensity
    assert np.max(np.abs(ia - ib)) <= 1e-9 * ia.max()


def test_radial_errors(nominal_spec):
    pupil = ideal_pupil(LAM, F, D)
    for args in [(F, 0.0, 10), (F, 1e-6, 1), (0.0, 1e-6, 10), (-F, 1e-6, 10)]:
        with pytest.raises(InvalidParameterError):
            focal_field_radial(pupil, *args)
    _, inner, outer, phase = nominal_spec.zones()
    coarse = RadialPupil(np.concatenate(([0.0], outer)), np.exp(1j * phase), LAM)
    with pytest.raises(AliasingError):
        focal_field_radial(coarse, F, 1e-6, 11)


def test_dual_engine_agreement():
    report = cross_check_engines()
    assert report["rms"] < 0.01
    assert report["fwhm_2d_m"][0] == pytest.approx(report["fwhm_radial_m"], rel=0.01)


# --- angular spectrum -------------------------------------------------------

def _gaussian_field(n=256, pitch=0.25e-6, w0=3e-6, lam=0.5e-6):
    c = (np.arange(n) - n // 2) * pitch
    g = np.exp(-(c[:, None] ** 2 + c[None, :] ** 2) / w0 ** 2).astype(complex)
    return ScalarField(g, pitch, lam)


def test_asm_identity():
    f = _gaussian_field()
    out = angular_spectrum_propagate(f, 0.0)
    assert out.grid.tobytes() == f.grid.tobytes()


def test_asm_gaussian_rayleigh_range():
    lam, w0, pitch, n = 0.5e-6, 5e-6, 0.5e-6, 512
    f = _gaussian_field(n, pitch, w0, lam)
    zr = np.pi * w0 ** 2 / lam
    out = angular_spectrum_propagate(f, zr)
    i = np.abs(out.grid) ** 2
    c = out.coords()
    # 1/e^2 intensity radius from the second moment: <x^2> = w^2 / 4
    w = 2 * np.sqrt(np.sum(i * c[None, :] ** 2) / i.sum())
    assert w == pytest.approx(w0 * np.sqrt(2), rel=5e-3)


def test_asm_plane_wave():
    n, pitch = 64, 0.2e-6
    f = ScalarField(np.ones((n, n), complex), pitch, 0.5e-6)
    out = angular_spectrum_propagate(f, 37e-6)
    assert np.allclose(np.abs(out.grid), 1.0, atol=1e-12)
    assert out.power == pytest.approx(f.power, rel=1e-9)


def test_asm_power_and_composition():
    f = _gaussian_field()
    a = angular_spectrum_propagate(f, 20e-6)
    ab = angular_spectrum_propagate(a, 30e-6)
    direct = angular_spectrum_propagate(f, 50e-6)
    assert a.power == pytest.approx(f.power, rel=1e-9)
    err = np.linalg.norm(ab.grid - direct.grid) / np.linalg.norm(direct.grid)
    assert err < 1e-9
    back = angular_spectrum_propagate(direct, -50e-6)
    assert np.allclose(back.grid, f.grid, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-100e-6, 100e-6))
def test_asm_never_gains_power(seed, z):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    # pitch below lam/2 so part of the spectrum is evanescent
    f = ScalarField(g, 0.1e-6, 0.5e-6)
    assert angular_spectrum_propagate(f, z).power <= f.power * (1 + 1e-12)


def test_asm_rejects_non_finite():
    g = np.ones((8, 8), complex)
    g[0, 0] = np.nan
    with pytest.raises(InvalidParameterError):
        angular_spectrum_propagate(ScalarField(g, 1e-6, 0.5e-6), 1e-6)


# --- knife edge -------------------------------------------------------------

def _ten_ninety(scan):
    x, frac = scan[:, 0], scan[:, 1]
    return np.interp(0.1, frac[::-1], x[::-1]) - np.interp(0.9, frac[::-1], x[::-1])


def test_knife_edge_gaussian_2d():
    sigma = 50e-9
    psf = gaussian_psf(sigma, 2e-9, 501)
    scan = knife_edge_scan(psf, "x", np.linspace(-300e-9, 300e-9, 3001))
    assert _ten_ninety(scan) == pytest.approx(GAUSS_10_90 * sigma, rel=2e-3)


def test_knife_edge_gaussian_radial():
    sigma = 50e-9
    r = np.linspace(0, 400e-9, 801)
    psf = Psf.normalized(np.exp(-r ** 2 / (2 * sigma ** 2)), r[1])
    scan = knife_edge_scan(psf, "y", np.linspace(-300e-9, 300e-9, 3001))
    assert _ten_ninety(scan) == pytest.approx(GAUSS_10_90 * sigma, rel=2e-3)


@pytest.mark.parametrize("radial", [True, False])
def test_knife_edge_limits(nominal_psf, radial):
    psf = nominal_psf if radial else gaussian_psf(100e-9, 10e-9, 201)
    edge = psf.coords()[-1] + psf.sample_pitch
    positions = np.linspace(-edge, edge, 101)
    scan = knife_edge_scan(psf, "x", positions)
    assert scan[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert scan[-1, 1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(scan[:, 1]) <= 1e-15)
    assert knife_edge_scan(psf, "x", [0.0])[0, 1] == pytest.approx(0.5, abs=1e-9)


def test_knife_edge_errors(nominal_psf):
    with pytest.raises(InvalidParameterError):
        knife_edge_scan(nominal_psf, "x", [])
    with pytest.raises(InvalidParameterError):
        knife_edge_scan(nominal_psf, "z", [0.0])


# --- grating efficiency -----------------------------------------------------

def test_grating_efficiency():
    import oracles
    for m in (1, -1, 3, -3, 5):
        assert binary_grating_efficiency(m) == pytest.approx(oracles.square_wave_efficiency(m),
                                                             rel=1e-6)
    assert binary_grating_efficiency(1) == pytest.approx(0.4053, abs=1e-4)
    for m in (0, 2, -2, 4):
        assert binary_grating_efficiency(m) == 0.0
        assert oracles.square_wave_efficiency(m) < 1e-20
