"""Scalar diffraction of the phase Fresnel lens.

Two engines are provided:

* ``focal_field_radial`` evaluates the Rayleigh-Sommerfeld integral for a
  circularly symmetric pupil. The azimuthal integral is done analytically
  (zero-order Bessel kernel) and the radial one by Gauss-Legendre quadrature
  on every pupil cell, so the piecewise-constant binary profile is integrated
  without staircase error. This is the production path; it handles the full
  5 mm aperture.
* ``angular_spectrum_propagate`` is the exact 2-D transfer-function method,
  used to cross-check the radial engine on small apertures.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import j0, j1

from .errors import AliasingError, InvalidParameterError
from .pfl_design import ZonePlateSpec, numerical_aperture

_GL_ORDER = 8
_CHUNK = 8


@dataclass(frozen=True, eq=False)
class RadialPupil:
    """Circularly symmetric pupil, piecewise constant on annular cells.

    ``radii`` holds the cell edges (starting at 0) and ``transmission`` the
    complex amplitude of each cell, so ``len(transmission) == len(radii) - 1``.
    If ``lens_focal_length`` is set, an ideal thin-lens phase
    ``exp(-ik(sqrt(r^2 + fl^2) - fl))`` multiplies the transmission
    analytically; this is how a perfect (non-binary) lens is represented.
    """

    radii: np.ndarray = field(repr=False)
    transmission: np.ndarray = field(repr=False)
    wavelength: float
    lens_focal_length: float | None = None

    def __post_init__(self):
        r = np.array(self.radii, dtype=float)
        t = np.array(self.transmission, dtype=complex)
        if r.ndim != 1 or r.size < 2 or r[0] != 0 or np.any(np.diff(r) <= 0):
            raise InvalidParameterError("pupil radii must start at 0 and increase strictly")
        if t.shape != (r.size - 1,):
            raise InvalidParameterError("need exactly one transmission value per pupil cell")
        if np.any(np.abs(t) > 1 + 1e-12):
            raise InvalidParameterError("|transmission| must not exceed 1")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "transmission", t)

    @property
    def aperture_radius(self):
        return float(self.radii[-1])


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Square sampled complex field. Pixel ``N // 2`` sits on the optical axis."""

    grid: np.ndarray = field(repr=False)
    sample_pitch: float
    wavelength: float

    def __post_init__(self):
        g = np.asarray(self.grid)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 2:
            raise InvalidParameterError("field grid must be square with N >= 2")
        if not (self.sample_pitch > 0 and self.wavelength > 0):
            raise InvalidParameterError("pitch and wavelength must be positive")

    @property
    def power(self):
        return float(np.sum(np.abs(self.grid) ** 2) * self.sample_pitch ** 2)

    def coords(self):
        n = self.grid.shape[0]
        return (np.arange(n) - n // 2) * self.sample_pitch


@dataclass(frozen=True, eq=False)
class Psf:
    """Normalized intensity, either radial (1-D, samples at ``r = i * pitch``)
    or Cartesian (2-D square grid centred on pixel ``N // 2``).
    """

    intensity: np.ndarray = field(repr=False)
    sample_pitch: float

    def __post_init__(self):
        i = np.array(self.intensity, dtype=float)
        if i.ndim not in (1, 2) or np.any(i < 0) or not np.all(np.isfinite(i)):
            raise InvalidParameterError("PSF intensity must be finite, non-negative, 1-D or 2-D")
        if not self.sample_pitch > 0:
            raise InvalidParameterError("sample_pitch must be positive")
        i.setflags(write=False)
        object.__setattr__(self, "intensity", i)

    @property
    def radial(self):
        return self.intensity.ndim == 1

    def coords(self):
        n = self.intensity.shape[0]
        if self.radial:
            return np.arange(n) * self.sample_pitch
        return (np.arange(n) - n // 2) * self.sample_pitch

    def total(self):
        return _discrete_integral(self.intensity, self.sample_pitch)

    @classmethod
    def normalized(cls, intensity, sample_pitch):
        intensity = np.asarray(intensity, dtype=float)
        norm = _discrete_integral(intensity, sample_pitch)
        if not norm > 0:
            raise InvalidParameterError("PSF has zero integrated intensity")
        return cls(intensity / norm, sample_pitch)


def _discrete_integral(intensity, pitch):
    if intensity.ndim == 1:
        r = np.arange(intensity.size) * pitch
        return float(np.trapezoid(2 * np.pi * r * intensity, r))
    return float(intensity.sum() * pitch ** 2)


def ideal_pupil(wavelength, focal_length, aperture_diameter, n_cells=2048):
    """Uniformly illuminated aberration-free lens of the given aperture."""
    if not (wavelength > 0 and focal_length > 0 and aperture_diameter > 0 and n_cells >= 1):
        raise InvalidParameterError("ideal pupil parameters must be positive")
    a = aperture_diameter / 2
    edges = a * np.sqrt(np.linspace(0.0, 1.0, n_cells + 1))
    return RadialPupil(edges, np.ones(n_cells, complex), wavelength, lens_focal_length=focal_length)


def pupil_from_zoneplate(spec: ZonePlateSpec, samples_per_zone=4):
    """Sample a zone plate as a 0/pi radial pupil.

    Each zone is split into ``samples_per_zone`` cells of equal area, so cell
    edges always fall on the zone boundaries.
    """
    if samples_per_zone < 4:
        raise InvalidParameterError("samples_per_zone must be at least 4")
    if spec.n_zones == 0:
        raise InvalidParameterError("zone plate has no zones")
    _, inner, outer, phase = spec.zones()
    frac = np.arange(1, samples_per_zone + 1) / samples_per_zone
    edges = np.sqrt(inner[:, None] ** 2 + frac[None, :] * (outer ** 2 - inner ** 2)[:, None])
    edges = np.concatenate(([0.0], edges.ravel()))
    t = np.repeat(np.exp(1j * phase), samples_per_zone)
    return RadialPupil(edges, t, spec.design_wavelength)


def _integrand_phase(pupil, r, z):
    k = 2 * np.pi / pupil.wavelength
    phi = k * np.sqrt(r * r + z * z)
    if pupil.lens_focal_length is not None:
        fl = pupil.lens_focal_length
        phi = phi - k * (np.sqrt(r * r + fl * fl) - fl)
    return phi


def _check_sampling(pupil, z, r_max):
    r = pupil.radii
    k = 2 * np.pi / pupil.wavelength
    dphi = np.abs(np.diff(_integrand_phase(pupil, r, z)))
    dbessel = k * r_max * np.abs(np.diff(r / np.sqrt(r * r + z * z)))
    worst = float(np.max(dphi + dbessel))
    if worst > np.pi / 2:
        raise AliasingError(
            f"pupil cells span up to {worst:.3g} rad of kernel phase (limit pi/2); "
            "refine the pupil sampling"
        )


def focal_amplitude_radial(pupil: RadialPupil, z, rho):
    """Complex field at distance ``z`` and radial positions ``rho``.

    Uses the first-kind Rayleigh-Sommerfeld kernel with the path length
    expanded as ``R ~ R0 + rho^2 / (2 R0) - r rho cos(phi) / R0``, which
    makes the azimuthal integral a Bessel J0. The dropped term is of order
    ``k r^2 rho^2 / R0^3`` (a few mrad for a 5 mm, f = 3 mm lens within 2 um of the
    axis). Overall constant prefactors are omitted.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    k = 2 * np.pi / pupil.wavelength
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    a, b = pupil.radii[:-1], pupil.radii[1:]
    half = (b - a) / 2
    r = ((a + b) / 2)[:, None] + half[:, None] * x[None, :]
    weights = (half[:, None] * w[None, :] * pupil.transmission[:, None]).ravel()
    r = r.ravel()
    r0 = np.sqrt(r * r + z * z)
    base = weights * np.exp(1j * _integrand_phase(pupil, r, z)) * z / r0 ** 2 * 2 * np.pi * r
    out = np.empty(rho.size, complex)
    for s in range(0, rho.size, _CHUNK):
        p = rho[s:s + _CHUNK, None]
        kern = j0(k * p * r[None, :] / r0[None, :]) * np.exp(1j * k * p * p / (2 * r0[None, :]))
        out[s:s + _CHUNK] = kern @ base
    return out / (1j * pupil.wavelength)


def focal_field_radial(pupil: RadialPupil, z, r_max, n_r):
    """Normalized radial intensity on ``[0, r_max]`` at distance ``z``.

    Raises
    ------
    AliasingError
        If any pupil cell spans more than pi/2 of kernel phase.
    """
    if not (np.isfinite(z) and z > 0):
        raise InvalidParameterError("z must be positive")
    if not (r_max > 0 and int(n_r) >= 2):
        raise InvalidParameterError("r_max must be positive and n_r >= 2")
    n_r = int(n_r)
    _check_sampling(pupil, z, r_max)
    rho = np.linspace(0.0, r_max, n_r)
    amp = focal_amplitude_radial(pupil, z, rho)
    return Psf.normalized(np.abs(amp) ** 2, r_max / (n_r - 1))


def angular_spectrum_propagate(field: ScalarField, z, workers=None):
    """Propagate a field by ``z`` (negative values back-propagate).

    The exact transfer function ``exp(i 2 pi z sqrt(1/lam^2 - fx^2 - fy^2))``
    is applied; evanescent components are set to zero.
    """
    grid = np.asarray(field.grid)
    if not np.all(np.isfinite(grid)):
        raise InvalidParameterError("field contains non-finite values")
    if not np.isfinite(z):
        raise InvalidParameterError("z must be finite")
    if z == 0:
        return ScalarField(grid.copy(), field.sample_pitch, field.wavelength)
    n = grid.shape[0]
    f = scipy.fft.fftfreq(n, d=field.sample_pitch)
    f2 = f[:, None] ** 2 + f[None, :] ** 2
    arg = 1.0 / field.wavelength ** 2 - f2
    prop = arg > 0
    h = np.zeros((n, n), complex)
    h[prop] = np.exp(2j * np.pi * z * np.sqrt(arg[prop]))
    spec = scipy.fft.fft2(scipy.fft.ifftshift(grid), workers=workers)
    out = scipy.fft.fftshift(scipy.fft.ifft2(spec * h, workers=workers))
    return ScalarField(out, field.sample_pitch, field.wavelength)


def knife_edge_scan(psf: Psf, axis, positions):
    """Fraction of PSF power in the half plane beyond each knife position.

    Returns an ``(n, 2)`` array of ``(position, transmitted_fraction)``. For a
    radial PSF the axis label is irrelevant.
    """
    positions = np.asarray(list(positions), dtype=float)
    if positions.size == 0:
        raise InvalidParameterError("knife positions must not be empty")
    if axis not in ("x", "y"):
        raise InvalidParameterError(f"axis must be 'x' or 'y', got {axis!r}")
    if psf.radial:
        frac = _knife_edge_radial(psf, positions)
    else:
        p = psf.sample_pitch
        marginal = psf.intensity.sum(axis=0 if axis == "x" else 1) * p * p
        marginal = marginal / marginal.sum()
        c = psf.coords()
        cover = np.clip((c[None, :] + p / 2 - positions[:, None]) / p, 0.0, 1.0)
        frac = cover @ marginal
    return np.column_stack([positions, frac])


def _knife_edge_radial(psf, positions, n_quad=4001):
    rho = psf.coords()
    r_max = rho[-1]
    s2 = np.linspace(0.0, 1.0, n_quad) ** 2

    def beyond(x0):
        # substitution rho = x0 + (r_max - x0) s^2 smooths the sqrt edge
        r = x0 + (r_max - x0) * s2
        ang = 2 * np.arccos(np.clip(x0 / np.maximum(r, 1e-300), -1, 1)) if x0 > 0 else np.pi
        return np.trapezoid(np.interp(r, rho, psf.intensity) * r * ang, r)

    total = 2 * beyond(0.0)
    out = np.empty(positions.size)
    for i, x0 in enumerate(positions):
        if abs(x0) >= r_max:
            out[i] = 0.0 if x0 > 0 else 1.0
        elif x0 >= 0:
            out[i] = beyond(x0) / total
        else:
            out[i] = 1.0 - beyond(-x0) / total
    return out


def binary_grating_efficiency(order):
    """Power in diffraction order ``order`` of an ideal 50 % duty pi-step grating."""
    m = int(order)
    if m % 2 == 0:
        return 0.0
    return 4.0 / (m * m * np.pi ** 2)


def _half_max_crossing(x, y, level):
    i = int(np.argmax(y < level))
    if y[i] >= level:
        raise InvalidParameterError("profile never drops below half maximum inside the window")
    lo, hi = x[i - 1], x[i]
    j0_, j1_ = max(i - 3, 0), min(i + 3, x.size)
    spline = CubicSpline(x[j0_:j1_], y[j0_:j1_])
    try:
        return brentq(lambda t: spline(t) - level, lo, hi)
    except ValueError:
        return lo + (y[i - 1] - level) / (y[i - 1] - y[i]) * (hi - lo)


def psf_fwhm(psf: Psf):
    """FWHM of a PSF.

    Radial PSFs return a float; 2-D PSFs return ``(fwhm_x, fwhm_y)`` measured
    along the central row and column.
    """
    if psf.radial:
        rho = psf.coords()
        peak = psf.intensity.max()
        k = int(np.argmax(psf.intensity))
        return 2 * _half_max_crossing(rho[k:], psf.intensity[k:], peak / 2)
    c = psf.coords()
    iy, ix = np.unravel_index(np.argmax(psf.intensity), psf.intensity.shape)
    widths = []
    for prof in (psf.intensity[iy, :], psf.intensity[:, ix]):
        k = int(np.argmax(prof))
        level = prof[k] / 2
        right = _half_max_crossing(c[k:], prof[k:], level)
        left = -_half_max_crossing(-c[k::-1], prof[k::-1], level)
        widths.append(right - left)
    return tuple(widths)


def airy_intensity(rho, wavelength, na):
    """Peak-normalized Airy pattern (2 J1(v) / v)^2 with v = 2 pi NA rho / lam."""
    v = 2 * np.pi * na * np.asarray(rho, dtype=float) / wavelength
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(v == 0, 1.0, (2 * j1(v) / np.where(v == 0, 1, v)) ** 2)
    return out


def airy_fwhm(wavelength, na):
    """FWHM of the Airy pattern, about 0.5145 lam / NA."""
    v_half = brentq(lambda v: (2 * j1(v) / v) ** 2 - 0.5, 1.0, 2.0)
    return 2 * v_half * wavelength / (2 * np.pi * na)


def lens_field_2d(wavelength, focal_length, aperture_diameter, n, pitch, supersample=4):
    """Ideal lens of a given aperture sampled on an ``n x n`` grid.

    Edge pixels get fractional amplitude from ``supersample**2`` sub-samples
    of the aperture disc.
    """
    c = (np.arange(n) - n // 2) * pitch
    sub = (np.arange(supersample) + 0.5) / supersample - 0.5
    xs = (c[:, None] + sub[None, :] * pitch).ravel()
    inside = (xs[:, None] ** 2 + xs[None, :] ** 2) <= (aperture_diameter / 2) ** 2
    cover = inside.reshape(n, supersample, n, supersample).mean(axis=(1, 3))
    k = 2 * np.pi / wavelength
    r2 = c[:, None] ** 2 + c[None, :] ** 2
    phase = -k * (np.sqrt(r2 + focal_length ** 2) - focal_length)
    return ScalarField(cover * np.exp(1j * phase), pitch, wavelength)


def cross_check_engines(wavelength=369.5e-9, focal_length=150e-6, aperture_diameter=30e-6,
                        n=1024, pitch=0.1e-6, window=None, workers=None):
    """Compare radial and 2-D focal intensities for a small ideal lens.

    Both intensities are peak-normalized. The RMS difference is taken over
    the grid points within ``window`` of the axis (default: two Airy FWHM).

    Returns
    -------
    dict
        ``rms`` difference, ``max_abs`` difference, the two FWHMs and ``na``.
    """
    na = numerical_aperture(focal_length, aperture_diameter)
    if window is None:
        window = 2 * airy_fwhm(wavelength, na)
    field2d = lens_field_2d(wavelength, focal_length, aperture_diameter, n, pitch)
    focal = angular_spectrum_propagate(field2d, focal_length, workers=workers)
    i2d = np.abs(focal.grid) ** 2
    i2d = i2d / i2d[n // 2, n // 2]

    c = focal.coords()
    rr = np.sqrt(c[:, None] ** 2 + c[None, :] ** 2)
    mask = rr <= window
    rho = np.linspace(0.0, window * 1.05, 400)
    amp = focal_amplitude_radial(ideal_pupil(wavelength, focal_length, aperture_diameter, 512),
                                 focal_length, rho)
    irad = np.abs(amp) ** 2
    irad = irad / irad[0]
    irad_on_grid = np.interp(rr[mask], rho, irad)
    diff = i2d[mask] - irad_on_grid
    return {
        "na": na,
        "rms": float(np.sqrt(np.mean(diff ** 2))),
        "max_abs": float(np.max(np.abs(diff))),
        "fwhm_radial_m": psf_fwhm(Psf.normalized(irad, rho[1])),
        "fwhm_2d_m": psf_fwhm(Psf.normalized(i2d, pitch)),
    }
