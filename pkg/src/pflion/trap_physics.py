"""Trapped-ion observables: Coulomb crystal spacing, thermal motion, Doppler limit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import (ATOMIC_MASS_UNIT, BOLTZMANN, ELEMENTARY_CHARGE, HBAR,
                        VACUUM_PERMITTIVITY, YB_COOLING_WAVELENGTH)
from .errors import ConvergenceError, InvalidParameterError


@dataclass(frozen=True)
class TrapParams:
    """Trap and ion parameters in SI units.

    ``axial_frequency`` is the secular frequency along the needle axis (Hz).
    ``drive_voltage`` and ``drive_frequency`` (rad/s) are carried as scenario
    metadata only.
    """

    ion_mass: float
    axial_frequency: float
    radial_frequency: float
    temperature: float = 0.0
    drive_voltage: float = 200.0
    drive_frequency: float = 2 * math.pi * 20e6
    axial_frequency_uncertainty: float = 0.0

    def __post_init__(self):
        for name in ("ion_mass", "axial_frequency", "radial_frequency", "drive_frequency"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")
        if not self.temperature >= 0:
            raise InvalidParameterError("temperature must be non-negative")
        if self.axial_frequency_uncertainty < 0:
            raise InvalidParameterError("axial_frequency_uncertainty must be non-negative")
        slowest_drive = self.drive_frequency / (2 * math.pi)
        if slowest_drive <= 5 * max(self.axial_frequency, self.radial_frequency):
            raise InvalidParameterError("drive frequency must exceed 5x the secular frequencies")

    @classmethod
    def from_amu(cls, mass_u, axial_frequency, radial_frequency, **kwargs):
        return cls(mass_u * ATOMIC_MASS_UNIT, axial_frequency, radial_frequency, **kwargs)


@dataclass(frozen=True, eq=False)
class IonScene:
    """Ion positions (object plane, x along the needle axis, z along the
    optical axis) with per-axis RMS thermal excursion.
    """

    positions: np.ndarray = field(repr=False)
    motion_rms: tuple = (0.0, 0.0, 0.0)
    emission_wavelength: float = YB_COOLING_WAVELENGTH

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 3)
        if pos.shape[0] == 0:
            raise InvalidParameterError("scene needs at least one ion")
        if pos.shape[0] > 1:
            d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
            if np.any(d[np.triu_indices(len(pos), 1)] == 0):
                raise InvalidParameterError("ion positions must be pairwise distinct")
        rms = tuple(float(v) for v in np.broadcast_to(self.motion_rms, 3))
        if any(not (math.isfinite(v) and v >= 0) for v in rms):
            raise InvalidParameterError("motion_rms must be finite and non-negative")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "motion_rms", rms)

    @property
    def n_ions(self):
        return self.positions.shape[0]

    def displaced(self, delta):
        return replace(self, positions=self.positions + np.asarray(delta, dtype=float))

    @classmethod
    def linear_chain(cls, params: TrapParams, n_ions, motion_rms=(0.0, 0.0, 0.0), **kwargs):
        """Ions at their equilibrium positions along the needle (x) axis."""
        x = equilibrium_positions(n_ions, params)
        pos = np.zeros((n_ions, 3))
        pos[:, 0] = x
        return cls(pos, motion_rms, **kwargs)


def _length_scale(mass, frequency):
    omega = 2 * math.pi * frequency
    return (ELEMENTARY_CHARGE ** 2 / (4 * math.pi * VACUUM_PERMITTIVITY * mass * omega ** 2)) ** (1 / 3)


def ion_spacing(params: TrapParams):
    """Equilibrium distance of two ions along the weak axis,
    ``l = (e^2 / (8 pi^3 eps0 M nu^2))^(1/3)``.
    """
    m, nu = params.ion_mass, params.axial_frequency
    return (ELEMENTARY_CHARGE ** 2 / (8 * math.pi ** 3 * VACUUM_PERMITTIVITY * m * nu ** 2)) ** (1 / 3)


def _potential(u):
    d = u[:, None] - u[None, :]
    iu = np.triu_indices(u.size, 1)
    return 0.5 * np.sum(u * u) + np.sum(1.0 / np.abs(d[iu]))


def _gradient(u):
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    return u - np.sum(np.sign(d) / d ** 2, axis=1)


def equilibrium_positions(n_ions, params: TrapParams, tol=1e-12, max_iter=100_000):
    """Axial equilibrium positions of a linear ion chain [m], sorted.

    Minimizes the harmonic + Coulomb energy in dimensionless units (length
    scale ``(e^2 / (4 pi eps0 M w^2))^(1/3)``) by gradient descent with
    backtracking.

    Raises
    ------
    ConvergenceError
        If the gradient norm is still above ``tol`` after ``max_iter`` steps.
    """
    n = int(n_ions)
    if n < 1:
        raise InvalidParameterError("n_ions must be at least 1")
    scale = _length_scale(params.ion_mass, params.axial_frequency)
    if n == 1:
        return np.zeros(1)

    u = (np.arange(n) - (n - 1) / 2) * 1.0
    energy = _potential(u)
    g = _gradient(u)
    gnorm = float(np.linalg.norm(g))
    step = 0.5
    for _ in range(max_iter):
        if gnorm < tol:
            break
        step = min(step * 2.0, 1.0)
        while step > 1e-18:
            trial = u - step * g
            # the ordering check keeps a long step from hopping over a neighbour
            if np.all(np.diff(trial) > 0):
                e_trial = _potential(trial)
                # near the minimum the energy decrease drops below rounding;
                # there a shrinking gradient is the acceptance test instead
                if 0.5 * step * gnorm ** 2 < 1e-13 * abs(energy):
                    if np.linalg.norm(_gradient(trial)) < gnorm:
                        break
                elif e_trial <= energy - 0.5 * step * gnorm ** 2:
                    break
            step *= 0.5
        else:
            raise ConvergenceError("line search failed in equilibrium search", residual=gnorm)
        u, energy = trial, e_trial
        g = _gradient(u)
        gnorm = float(np.linalg.norm(g))
    if gnorm >= tol:
        raise ConvergenceError("equilibrium search did not converge", residual=gnorm)
    return u * scale


def thermal_rms(temperature, ion_mass, frequency):
    """Classical RMS position spread ``sqrt(kT / (M w^2))`` of a harmonically bound ion."""
    if not (frequency > 0 and math.isfinite(frequency)):
        raise InvalidParameterError("frequency must be positive")
    if temperature < 0 or ion_mass <= 0:
        raise InvalidParameterError("temperature must be >= 0 and ion_mass > 0")
    omega = 2 * math.pi * frequency
    return math.sqrt(BOLTZMANN * temperature / (ion_mass * omega ** 2))


def doppler_temperature(linewidth):
    """Doppler cooling limit ``hbar * Gamma / (2 k_B)`` for linewidth ``Gamma`` [rad/s]."""
    if not linewidth > 0:
        raise InvalidParameterError("linewidth must be positive")
    return HBAR * linewidth / (2 * BOLTZMANN)
