"""Simulation and analysis of trapped-ion imaging through a binary phase Fresnel lens."""

__version__ = "0.1.0"

from .analysis import (CalibrationResult, GaussianFitResult, calibrate_magnification,
                       displacement_crosscheck, fit_gaussian_2d, object_plane_fwhm)
from .image_formation import (CcdFrame, CcdModel, ImagingSystem, displace_scene,
                              effective_image_psf, render_frame)
from .pfl_design import (LensGeometry, ZonePlateSpec, design_zoneplate, fused_silica_index,
                         numerical_aperture, pi_etch_depth, solid_angle_fraction)
from .trap_physics import (IonScene, TrapParams, doppler_temperature, equilibrium_positions,
                           ion_spacing, thermal_rms)
from .wave_optics import (Psf, RadialPupil, ScalarField, angular_spectrum_propagate,
                          binary_grating_efficiency, focal_field_radial, knife_edge_scan,
                          pupil_from_zoneplate)
