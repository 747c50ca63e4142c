"""Binary phase Fresnel lens design.

Zone radii follow the half-wave path condition for a lens of focal length
``f`` at wavelength ``lam``::

    r_n**2 = n*lam*f + (n*lam/2)**2

so that the path from ``r_n`` to the focus is ``f + n*lam/2``. Alternate
zones are etched to a pi phase step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NoPhaseContrastError

# Malitson (1965) three-term Sellmeier coefficients for fused silica,
# wavelengths in micrometres.
_SELLMEIER_B = (0.6961663, 0.4079426, 0.8974794)
_SELLMEIER_C = (0.0684043, 0.1162414, 9.896161)


def _require_positive(**values):
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")


def fused_silica_index(wavelength):
    """Refractive index of fused silica from the Sellmeier dispersion model.

    Parameters
    ----------
    wavelength : float
        Vacuum wavelength [m]. Valid roughly from 0.21 to 3.7 um.
    """
    _require_positive(wavelength=wavelength)
    lam2 = (wavelength * 1e6) ** 2
    n2 = 1.0 + sum(b * lam2 / (lam2 - c * c) for b, c in zip(_SELLMEIER_B, _SELLMEIER_C))
    return math.sqrt(n2)


def pi_etch_depth(wavelength, substrate_index):
    """Etch depth giving a pi phase step between etched and unetched zones."""
    _require_positive(wavelength=wavelength)
    if not np.isfinite(substrate_index):
        raise InvalidParameterError(f"substrate_index must be finite, got {substrate_index!r}")
    if substrate_index <= 1:
        raise NoPhaseContrastError(f"substrate_index must exceed 1, got {substrate_index}")
    return wavelength / (2.0 * (substrate_index - 1.0))


def zone_radius(n, wavelength, focal_length):
    """Outer radius of zone ``n`` (``n = 0`` gives the optical axis)."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(n * wavelength * focal_length + (n * wavelength / 2.0) ** 2)


def numerical_aperture(focal_length, aperture_diameter):
    """Exact NA = sin(arctan(d / 2f)).

    Always smaller than the paraxial estimate ``d / 2f``.
    """
    for name, value in (("focal_length", focal_length), ("aperture_diameter", aperture_diameter)):
        if not np.isfinite(value) or value < 0:
            raise InvalidParameterError(f"{name} must be finite and non-negative, got {value!r}")
    if focal_length == 0:
        raise InvalidParameterError("focal_length must be positive")
    return math.sin(math.atan(aperture_diameter / (2.0 * focal_length)))


def solid_angle_fraction(na):
    """Fraction of the full 4 pi sphere inside a cone of numerical aperture ``na``."""
    if not (np.isfinite(na) and 0.0 <= na <= 1.0):
        raise InvalidParameterError(f"na must lie in [0, 1], got {na!r}")
    return (1.0 - math.sqrt(1.0 - na * na)) / 2.0


@dataclass(frozen=True)
class LensGeometry:
    numerical_aperture: float
    f_number: float
    solid_angle_fraction: float

    @classmethod
    def from_lens(cls, focal_length, aperture_diameter):
        na = numerical_aperture(focal_length, aperture_diameter)
        return cls(na, focal_length / aperture_diameter, solid_angle_fraction(na))


@dataclass(frozen=True, eq=False)
class ZonePlateSpec:
    """A designed binary phase Fresnel lens.

    ``zone_boundaries[k]`` is the outer radius of zone ``k + 1``; zone 1 is
    the central disc. When ``first_zone_etched`` is false the even-numbered
    zones carry the pi phase.
    """

    design_wavelength: float
    focal_length: float
    aperture_diameter: float
    zone_boundaries: np.ndarray = field(repr=False)
    etch_depth: float
    substrate_index: float
    first_zone_etched: bool = False

    def __post_init__(self):
        b = np.array(self.zone_boundaries, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "zone_boundaries", b)
        if b.size and (b[0] <= 0 or np.any(np.diff(b) <= 0)):
            raise InvalidParameterError("zone boundaries must be positive and strictly increasing")
        if b.size and b[-1] > self.aperture_diameter / 2 * (1 + 1e-15):
            raise InvalidParameterError("last zone boundary lies outside the aperture")
        if self.etch_depth <= 0:
            raise InvalidParameterError("etch_depth must be positive")
        if self.substrate_index <= 1:
            raise NoPhaseContrastError("substrate_index must exceed 1")

    @property
    def n_zones(self):
        return int(self.zone_boundaries.size)

    @property
    def geometry(self):
        return LensGeometry.from_lens(self.focal_length, self.aperture_diameter)

    def zone_is_etched(self, n):
        """Whether zone ``n`` (1-based) carries the pi phase."""
        return (np.asarray(n) % 2 == 0) != self.first_zone_etched

    def zones(self):
        """Table of annuli ``(n, inner, outer, phase)`` covering the full aperture.

        The last row is the partial zone between the outermost full boundary
        and the aperture edge, when one exists.
        """
        edges = np.concatenate(([0.0], self.zone_boundaries))
        rim = self.aperture_diameter / 2
        if edges[-1] < rim:
            edges = np.append(edges, rim)
        n = np.arange(1, edges.size)
        phase = np.where(self.zone_is_etched(n), np.pi, 0.0)
        return n, edges[:-1], edges[1:], phase


def design_zoneplate(wavelength, focal_length, aperture_diameter, substrate_index=None,
                     first_zone_etched=False, grid=None):
    """Design a binary phase Fresnel lens.

    Parameters
    ----------
    wavelength : float
        Design wavelength [m].
    focal_length : float
        First-order focal length [m].
    aperture_diameter : float
        Clear aperture diameter [m].
    substrate_index : float, optional
        Substrate refractive index at the design wavelength. Defaults to the
        fused-silica Sellmeier value.
    first_zone_etched : bool
        Etch parity. Only changes a global phase of the focal field.
    grid : float, optional
        Fabrication grid [m]; when given, boundaries are snapped to it.

    Returns
    -------
    ZonePlateSpec
    """
    _require_positive(wavelength=wavelength, focal_length=focal_length,
                      aperture_diameter=aperture_diameter)
    if substrate_index is None:
        substrate_index = fused_silica_index(wavelength)
    depth = pi_etch_depth(wavelength, substrate_index)

    rim = aperture_diameter / 2
    if rim < zone_radius(1, wavelength, focal_length):
        raise InvalidParameterError("aperture is smaller than the first zone")
    # invert r_N = d/2 for N, then trim any rounding overshoot
    lam = wavelength
    n_max = int(math.floor((-focal_length + math.sqrt(focal_length ** 2 + rim ** 2)) * 2 / lam)) + 1
    n = np.arange(1, n_max + 1)
    radii = zone_radius(n, lam, focal_length)
    radii = radii[radii <= rim]

    if grid is not None:
        _require_positive(grid=grid)
        radii = np.round(radii / grid) * grid
        radii = np.unique(radii[(radii > 0) & (radii <= rim)])

    return ZonePlateSpec(
        design_wavelength=wavelength,
        focal_length=focal_length,
        aperture_diameter=aperture_diameter,
        zone_boundaries=radii,
        etch_depth=depth,
        substrate_index=substrate_index,
        first_zone_etched=first_zone_etched,
    )
