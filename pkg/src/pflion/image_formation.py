"""Synthetic CCD frames of trapped-ion scenes.

Pipeline: optical PSF (object plane) -> Gaussian thermal-motion blur ->
magnification -> 4x4 sub-pixel integration -> Poisson shot noise, dark
counts, Gaussian read noise -> gain, bias and saturation.

Image coordinates are ``(x, y) = (column, row)`` in pixel units with the
optical axis at ``((nx - 1) / 2, (ny - 1) / 2)``. The object x axis is the
needle axis; image inversion is ignored.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InvalidParameterError
from .pfl_design import ZonePlateSpec, solid_angle_fraction
from .trap_physics import IonScene
from .wave_optics import Psf, binary_grating_efficiency

_SUBPIXEL = 4


@dataclass(frozen=True, eq=False)
class ImagingSystem:
    """Optical PSF, magnification and photon collection efficiency.

    ``psf_plane`` says whether ``psf`` is referenced to the object plane
    (``"object"``, the usual case) or already to the image plane.
    """

    magnification: float
    psf: Psf
    collection_fraction: float
    psf_plane: str = "object"
    magnification_uncertainty: float = 0.0

    def __post_init__(self):
        if not self.magnification > 0:
            raise InvalidParameterError("magnification must be positive")
        if not 0 < self.collection_fraction < 1:
            raise InvalidParameterError("collection_fraction must lie in (0, 1)")
        if self.psf_plane not in ("object", "image"):
            raise InvalidParameterError("psf_plane must be 'object' or 'image'")

    @classmethod
    def from_zoneplate(cls, spec: ZonePlateSpec, psf, magnification, transmission=1.0, **kwargs):
        """Collection = solid-angle fraction x first-order efficiency x transmission."""
        fraction = (solid_angle_fraction(spec.geometry.numerical_aperture)
                    * binary_grating_efficiency(1) * transmission)
        return cls(magnification, psf, fraction, **kwargs)


@dataclass(frozen=True)
class CcdModel:
    """Camera model. ``array_size`` is ``(rows, cols)``.

    Defaults other than the pixel pitch and array size are assumptions
    (cooled back-illuminated UV CCD), not measured values.
    """

    pixel_pitch: float = 13e-6
    array_size: tuple = (512, 512)
    quantum_efficiency: float = 0.35
    read_noise: float = 10.0
    dark_rate: float = 0.0
    gain: float = 1.0
    saturation: int = 65535
    bias: float = 100.0

    def __post_init__(self):
        if not self.pixel_pitch > 0:
            raise InvalidParameterError("pixel_pitch must be positive")
        if not 0 < self.quantum_efficiency <= 1:
            raise InvalidParameterError("quantum_efficiency must lie in (0, 1]")
        if self.read_noise < 0 or self.dark_rate < 0:
            raise InvalidParameterError("read_noise and dark_rate must be non-negative")
        if not self.gain > 0:
            raise InvalidParameterError("gain must be positive")
        rows, cols = self.array_size
        if rows < 1 or cols < 1:
            raise InvalidParameterError("array_size must be positive")
        if not 0 < self.saturation <= 65535:
            raise InvalidParameterError("saturation must lie in (0, 65535]")


@dataclass(frozen=True, eq=False)
class CcdFrame:
    counts: np.ndarray = field(repr=False)
    exposure: float
    rng_seed: int | None
    metadata: dict = field(default_factory=dict, repr=False)
    saturated: bool = False

    @property
    def shape(self):
        return self.counts.shape


def gaussian_psf(sigma, pitch, n):
    """2-D Gaussian PSF. ``sigma`` is a scalar or ``(sigma_x, sigma_y)``."""
    sx, sy = np.broadcast_to(np.asarray(sigma, dtype=float), 2)
    c = (np.arange(n) - n // 2) * pitch
    img = np.exp(-c[None, :] ** 2 / (2 * sx ** 2) - c[:, None] ** 2 / (2 * sy ** 2))
    return Psf.normalized(img, pitch)


def _radial_to_grid(psf: Psf):
    rho = psf.coords()
    n_half = rho.size - 1
    c = np.arange(-n_half, n_half + 1) * psf.sample_pitch
    rr = np.hypot(c[None, :], c[:, None])
    img = np.interp(rr, rho, psf.intensity, right=0.0)
    return img


def effective_image_psf(system: ImagingSystem, scene: IonScene):
    """Image-plane PSF including thermal motion blur.

    The optical PSF is convolved with a Gaussian of per-axis sigma equal to
    the scene's x and y motion RMS, then its pitch is scaled by the
    magnification. Blur widths below half a PSF sample are treated as a
    delta function.
    """
    psf = system.psf
    img = _radial_to_grid(psf) if psf.radial else np.array(psf.intensity)
    scale = system.magnification if system.psf_plane == "object" else 1.0
    blur_scale = 1.0 if system.psf_plane == "object" else system.magnification
    sigma_px = [scene.motion_rms[1] * blur_scale / psf.sample_pitch,
                scene.motion_rms[0] * blur_scale / psf.sample_pitch]
    sigma_px = [s if s >= 0.5 else 0.0 for s in sigma_px]
    if any(sigma_px):
        img = ndimage.gaussian_filter(img, sigma_px, mode="constant", truncate=6.0)
    return Psf.normalized(img, psf.sample_pitch * scale)


def displace_scene(scene: IonScene, delta):
    """Translate every ion by ``delta`` (3-vector, metres)."""
    return scene.displaced(delta)


def ion_pixel_positions(scene: IonScene, magnification, ccd: CcdModel):
    """Expected image positions ``(x, y)`` in pixel coordinates, one row per ion."""
    rows, cols = ccd.array_size
    centre = np.array([(cols - 1) / 2, (rows - 1) / 2])
    return centre + scene.positions[:, :2] * magnification / ccd.pixel_pitch


def _pixel_probabilities(image_psf: Psf, x_pix, y_pix, ccd: CcdModel):
    """Fraction of one ion's light in each pixel of its footprint.

    Returns ``(row0, col0, block)``; the block is normalized to 1 before any
    clipping to the frame so photon bookkeeping is exact.
    """
    p = ccd.pixel_pitch
    n = image_psf.intensity.shape[0]
    half = (n // 2) * image_psf.sample_pitch / p
    c0, c1 = int(np.floor(x_pix - half)) - 1, int(np.ceil(x_pix + half)) + 1
    r0, r1 = int(np.floor(y_pix - half)) - 1, int(np.ceil(y_pix + half)) + 1
    sub = (np.arange(_SUBPIXEL) + 0.5) / _SUBPIXEL - 0.5
    xs = (np.arange(c0, c1 + 1)[:, None] + sub[None, :]).ravel()
    ys = (np.arange(r0, r1 + 1)[:, None] + sub[None, :]).ravel()
    # sub-sample positions in PSF grid index units
    gx = (xs - x_pix) * p / image_psf.sample_pitch + n // 2
    gy = (ys - y_pix) * p / image_psf.sample_pitch + n // 2
    gyy, gxx = np.meshgrid(gy, gx, indexing="ij")
    dens = ndimage.map_coordinates(image_psf.intensity, [gyy, gxx], order=1,
                                   mode="constant", cval=0.0)
    block = dens.reshape(r1 - r0 + 1, _SUBPIXEL, c1 - c0 + 1, _SUBPIXEL).mean(axis=(1, 3))
    total = block.sum()
    if total <= 0:
        raise InvalidParameterError("PSF footprint is empty")
    return r0, c0, block / total


def expected_electrons(system: ImagingSystem, scene: IonScene, ccd: CcdModel, exposure,
                       photon_rate, background_rate=0.0, image_psf=None):
    """Mean photoelectrons per pixel (signal + uniform background + dark)."""
    if not exposure > 0:
        raise InvalidParameterError("exposure must be positive")
    if photon_rate < 0 or background_rate < 0:
        raise InvalidParameterError("rates must be non-negative")
    if image_psf is None:
        image_psf = effective_image_psf(system, scene)
    rows, cols = ccd.array_size
    out = np.zeros((rows, cols))
    per_ion = photon_rate * exposure * system.collection_fraction * ccd.quantum_efficiency
    for x_pix, y_pix in ion_pixel_positions(scene, system.magnification, ccd):
        r0, c0, block = _pixel_probabilities(image_psf, x_pix, y_pix, ccd)
        rs, cs = max(r0, 0), max(c0, 0)
        re, ce = min(r0 + block.shape[0], rows), min(c0 + block.shape[1], cols)
        if rs < re and cs < ce:
            out[rs:re, cs:ce] += per_ion * block[rs - r0:re - r0, cs - c0:ce - c0]
    out += (background_rate + ccd.dark_rate) * exposure
    return out


def scenario_hash(obj):
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def render_frame(system: ImagingSystem, scene: IonScene, ccd: CcdModel, exposure, photon_rate,
                 seed, background_rate=0.0, noise=True, metadata=None):
    """Render one CCD frame.

    Photoelectrons are Poisson distributed (signal + background + dark), read
    noise is Gaussian, then ``counts = round(e / gain) + bias`` clipped to
    ``[0, saturation]``. The RNG is a Philox stream keyed on ``seed``; all
    pixels are drawn in one vectorized pass so the result does not depend on
    how the work is split.

    Sets ``saturated`` (and warns) when more than 1 % of the pixels have an
    expected level above saturation.
    """
    if not exposure > 0:
        raise InvalidParameterError("exposure must be positive")
    mean_e = expected_electrons(system, scene, ccd, exposure, photon_rate, background_rate)
    if noise:
        rng = np.random.Generator(np.random.Philox(key=int(seed)))
        electrons = rng.poisson(mean_e).astype(float)
        if ccd.read_noise > 0:
            electrons += rng.normal(0.0, ccd.read_noise, size=mean_e.shape)
    else:
        electrons = mean_e
    counts = np.clip(np.rint(electrons / ccd.gain + ccd.bias), 0, ccd.saturation).astype(np.int32)

    expected_counts = mean_e / ccd.gain + ccd.bias
    saturated = bool(np.mean(expected_counts > ccd.saturation) > 0.01)
    if saturated:
        warnings.warn("more than 1% of pixels are expected to saturate", RuntimeWarning,
                      stacklevel=2)
    meta = {
        "exposure_s": exposure,
        "photon_rate_per_s": photon_rate,
        "background_rate_e_per_s": background_rate,
        "magnification": system.magnification,
        "collection_fraction": system.collection_fraction,
        "ion_positions_m": scene.positions.tolist(),
        "motion_rms_m": list(scene.motion_rms),
        "pixel_pitch_m": ccd.pixel_pitch,
        "bias_counts": ccd.bias,
        "gain_e_per_count": ccd.gain,
        "seed": seed,
        "noise": noise,
    }
    if metadata:
        meta.update(metadata)
    return CcdFrame(counts, exposure, seed, meta, saturated)
