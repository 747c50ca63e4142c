"""Spot fitting and magnification calibration.

The spot model is an axis-aligned elliptical Gaussian on a constant offset::

    A * exp(-(x - x0)^2 / (2 sx^2) - (y - y0)^2 / (2 sy^2)) + B

fitted by weighted Levenberg-Marquardt with an analytic Jacobian. Pixel
coordinates are ``(x, y) = (column, row)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import (ConvergenceError, FlatFieldError, InvalidParameterError, SpotCountError,
                     UnresolvableSpotsError)
from .image_formation import CcdFrame, CcdModel
from .trap_physics import TrapParams, ion_spacing

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
N_PARAMS = 6
# 7 counting the (fixed) tilt term
MIN_PIXELS = 10 * 7


def gaussian_model(p, x, y):
    a, x0, y0, sx, sy, b = p
    return a * np.exp(-(x - x0) ** 2 / (2 * sx ** 2) - (y - y0) ** 2 / (2 * sy ** 2)) + b


def gaussian_jacobian(p, x, y):
    """Derivatives of ``gaussian_model`` with respect to
    ``(A, x0, y0, sx, sy, B)``, shape ``(npix, 6)``.
    """
    a, x0, y0, sx, sy, _ = p
    dx, dy = x - x0, y - y0
    g = np.exp(-dx ** 2 / (2 * sx ** 2) - dy ** 2 / (2 * sy ** 2))
    ag = a * g
    return np.column_stack([
        g,
        ag * dx / sx ** 2,
        ag * dy / sy ** 2,
        ag * dx ** 2 / sx ** 3,
        ag * dy ** 2 / sy ** 3,
        np.ones_like(g),
    ])


@dataclass(frozen=True, eq=False)
class GaussianFitResult:
    amplitude: float
    center: tuple
    sigma: tuple
    offset: float
    covariance: np.ndarray = field(repr=False)
    reduced_chi2: float
    converged: bool
    n_iter: int = 0

    @property
    def params(self):
        return np.array([self.amplitude, *self.center, *self.sigma, self.offset])

    @property
    def errors(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    @property
    def fwhm(self):
        """``(fwhm_x, fwhm_y)`` in pixels."""
        return (FWHM_PER_SIGMA * self.sigma[0], FWHM_PER_SIGMA * self.sigma[1])

    @property
    def fwhm_error(self):
        e = self.errors
        return (FWHM_PER_SIGMA * e[3], FWHM_PER_SIGMA * e[4])


class ObjectPlaneFwhm(NamedTuple):
    fwhm_x: float
    fwhm_y: float
    error_x: float
    error_y: float


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    magnification: float
    magnification_uncertainty: float
    pixel_separation: float
    pixel_separation_uncertainty: float
    predicted_spacing: float
    predicted_spacing_uncertainty: float
    fits: tuple = field(default=(), repr=False)


def _counts(frame):
    return np.asarray(frame.counts if isinstance(frame, CcdFrame) else frame, dtype=float)


def _moments_init(z, x, y):
    b = float(np.median(z))
    d = np.clip(z - b, 0, None)
    s = d.sum()
    if s <= 0:
        raise FlatFieldError("no signal above the median background")
    x0 = float((d * x).sum() / s)
    y0 = float((d * y).sum() / s)
    sx = math.sqrt(max((d * (x - x0) ** 2).sum() / s, 0.25))
    sy = math.sqrt(max((d * (y - y0) ** 2).sum() / s, 0.25))
    return np.array([float(z.max() - b), x0, y0, sx, sy, b])


def fit_gaussian_2d(frame, roi=None, init=None, max_iter=200, step_tol=1e-10):
    """Weighted least-squares fit of an elliptical Gaussian plus offset.

    Parameters
    ----------
    frame : CcdFrame or ndarray
        Counts image.
    roi : tuple, optional
        ``(col0, row0, col1, row1)`` half-open pixel rectangle; whole frame
        if omitted.
    init : sequence, optional
        Starting ``(A, x0, y0, sx, sy, B)`` in frame pixel coordinates.
        Moment estimates are used otherwise.
    step_tol : float
        Convergence when every parameter step is below ``step_tol`` relative
        to the parameter scale (amplitude for A and B, width for centres and
        widths).

    Returns
    -------
    GaussianFitResult
        ``converged`` is False if the iteration cap was reached; the last
        iterate is returned. The covariance is ``(J^T W J)^-1`` scaled by the
        reduced chi-square, with weights ``1 / max(counts, 1)``.
    """
    img = _counts(frame)
    rows, cols = img.shape
    if roi is None:
        roi = (0, 0, cols, rows)
    c0, r0, c1, r1 = (int(v) for v in roi)
    if not (0 <= c0 < c1 <= cols and 0 <= r0 < r1 <= rows):
        raise InvalidParameterError(f"ROI {roi} lies outside the {cols}x{rows} frame")
    z = img[r0:r1, c0:c1].ravel()
    if z.size < MIN_PIXELS:
        raise InvalidParameterError(f"ROI has {z.size} pixels; at least {MIN_PIXELS} required")
    if np.ptp(z) == 0:
        raise FlatFieldError("ROI has zero variance")
    yy, xx = np.mgrid[r0:r1, c0:c1]
    x, y = xx.ravel().astype(float), yy.ravel().astype(float)
    w = 1.0 / np.maximum(z, 1.0)
    sw = np.sqrt(w)

    p = np.asarray(init, dtype=float).copy() if init is not None else _moments_init(z, x, y)
    amp_scale = max(abs(p[0]), abs(p[5]), 1.0)

    def chi2_of(q):
        return float(np.sum(w * (z - gaussian_model(q, x, y)) ** 2))

    chi2 = chi2_of(p)
    lam = 1e-3
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        jw = gaussian_jacobian(p, x, y) * sw[:, None]
        rw = (z - gaussian_model(p, x, y)) * sw
        jtj = jw.T @ jw
        grad = jw.T @ rw
        scale = np.array([amp_scale, abs(p[3]), abs(p[4]), abs(p[3]), abs(p[4]), amp_scale])
        improved = small = False
        while lam < 1e20:
            a = jtj + lam * np.diag(np.diag(jtj))
            try:
                delta = np.linalg.solve(a, grad)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = p + delta
            small = bool(np.all(np.abs(delta) <= step_tol * scale))
            chi2_trial = chi2_of(trial)
            if chi2_trial <= chi2:
                p, chi2 = trial, chi2_trial
                lam = max(lam / 10, 1e-12)
                improved = True
                break
            if small:
                break
            lam *= 10
        if small:
            converged = True
            break
        if not improved:
            break

    p[3], p[4] = abs(p[3]), abs(p[4])
    jw = gaussian_jacobian(p, x, y) * sw[:, None]
    dof = max(z.size - N_PARAMS, 1)
    red = chi2 / dof
    try:
        cov = np.linalg.inv(jw.T @ jw) * red
    except np.linalg.LinAlgError:
        cov = np.full((N_PARAMS, N_PARAMS), np.nan)
    cov = 0.5 * (cov + cov.T)
    return GaussianFitResult(float(p[0]), (float(p[1]), float(p[2])), (float(p[3]), float(p[4])),
                             float(p[5]), cov, float(red), converged, n_iter)


def object_plane_fwhm(fit: GaussianFitResult, magnification, pixel_pitch,
                      magnification_uncertainty=0.0):
    """Convert fitted widths to object-plane FWHM [m] with 1-sigma errors.

    Width and magnification errors are combined in quadrature.
    """
    if not fit.converged:
        raise InvalidParameterError("fit did not converge")
    if not magnification > 0:
        raise InvalidParameterError("magnification must be positive")
    out = []
    for fwhm_px, err_px in zip(fit.fwhm, fit.fwhm_error):
        value = fwhm_px * pixel_pitch / magnification
        err = math.hypot(err_px * pixel_pitch / magnification,
                         value * magnification_uncertainty / magnification)
        out.append((value, err))
    return ObjectPlaneFwhm(out[0][0], out[1][0], out[0][1], out[1][1])


def detect_spots(frame, smoothing=1.5, min_separation=3, rel_threshold=0.25, nsigma=5.0):
    """Local maxima of the smoothed image that stand out from the background.

    A peak counts when it exceeds the median by ``nsigma`` robust standard
    deviations and by ``rel_threshold`` of the brightest peak. Peaks closer
    than ``min_separation`` pixels to a brighter one are dropped. Returned
    ``(x, y)`` positions are ordered left to right.
    """
    img = _counts(frame)
    s = ndimage.gaussian_filter(img, smoothing) if smoothing > 0 else img
    bg = float(np.median(s))
    noise = 1.4826 * float(np.median(np.abs(s - bg)))
    size = 2 * int(min_separation) + 1
    is_max = (s == ndimage.maximum_filter(s, size=size, mode="nearest"))
    height = s - bg
    thresh = max(nsigma * noise, rel_threshold * float(height.max()), 0.0)
    rows, cols = np.nonzero(is_max & (height > thresh))
    order = np.lexsort((cols, rows, -height[rows, cols]))
    kept = []
    for i in order:
        pt = (int(cols[i]), int(rows[i]))
        if all(math.hypot(pt[0] - q[0], pt[1] - q[1]) >= min_separation for q in kept):
            kept.append(pt)
    return sorted(kept)


def _roi_around(pt, half, shape):
    rows, cols = shape
    x, y = pt
    return (max(x - half, 0), max(y - half, 0), min(x + half + 1, cols), min(y + half + 1, rows))


def fit_single_spot(frame, roi_half_size=25, smoothing=1.5):
    """Fit the brightest spot of a frame inside a square ROI."""
    img = _counts(frame)
    spots = detect_spots(img, smoothing)
    if not spots:
        raise SpotCountError("no spot found")
    s = ndimage.gaussian_filter(img, smoothing)
    brightest = max(spots, key=lambda q: s[q[1], q[0]])
    return fit_gaussian_2d(img, _roi_around(brightest, roi_half_size, img.shape))


def calibrate_magnification(frame, trap: TrapParams, ccd: CcdModel, roi_half_size=None,
                            smoothing=1.5):
    """Magnification from the image separation of a two-ion crystal.

    The object-plane spacing comes from the two-ion Coulomb equilibrium at
    the trap's axial frequency; its error follows from the frequency error
    (``dl / l = 2/3 dnu / nu``) and is combined in quadrature with the
    centroid-fit error of the separation.
    """
    img = _counts(frame)
    spots = detect_spots(img, smoothing)
    if len(spots) != 2:
        raise SpotCountError(f"expected 2 spots, found {len(spots)}")
    sep0 = math.dist(*spots)
    half = roi_half_size or int(min(max(sep0 / 2 - 1, 5), 40))
    fits = []
    for pt in spots:
        fit = fit_gaussian_2d(img, _roi_around(pt, half, img.shape))
        if not fit.converged:
            raise ConvergenceError(f"spot fit near {pt} did not converge")
        fits.append(fit)

    (x1, y1), (x2, y2) = fits[0].center, fits[1].center
    sep = math.hypot(x2 - x1, y2 - y1)
    fwhm = 0.5 * (fits[0].fwhm[0] + fits[1].fwhm[0])
    if sep < 2 * fwhm:
        raise UnresolvableSpotsError(f"separation {sep:.2f} px is below 2 FWHM ({2 * fwhm:.2f} px)")
    u = np.array([x2 - x1, y2 - y1]) / sep
    var = u @ (fits[0].covariance[1:3, 1:3] + fits[1].covariance[1:3, 1:3]) @ u
    sep_err = math.sqrt(max(var, 0.0))

    spacing = ion_spacing(trap)
    spacing_err = spacing * (2 / 3) * trap.axial_frequency_uncertainty / trap.axial_frequency
    mag = sep * ccd.pixel_pitch / spacing
    mag_err = mag * math.hypot(sep_err / sep, spacing_err / spacing)
    return CalibrationResult(mag, mag_err, sep, sep_err, spacing, spacing_err, tuple(fits))


def displacement_crosscheck(frames, physical_displacement, magnification, ccd: CcdModel,
                            roi_half_size=25):
    """Relative mismatch between a known displacement and the image shift.

    Returns ``|shift * pitch / M - d| / d``.
    """
    first, second = frames
    if physical_displacement == 0:
        raise ZeroDivisionError("physical displacement is zero")
    fits = [fit_single_spot(f, roi_half_size) for f in (first, second)]
    for fit in fits:
        if not fit.converged:
            raise ConvergenceError("spot fit did not converge")
    shift_px = math.dist(fits[0].center, fits[1].center)
    measured = shift_px * ccd.pixel_pitch / magnification
    return abs(measured - abs(physical_displacement)) / abs(physical_displacement)
