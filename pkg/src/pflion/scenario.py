"""Scenario files: JSON documents describing one simulated experiment.

All quantities are SI except the ion mass (unified atomic mass units).
Unknown keys are rejected. Missing optional keys take the defaults below.
"""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .constants import YB_COOLING_WAVELENGTH, YB_LINEWIDTH
from .errors import ScenarioError
from .image_formation import CcdModel, ImagingSystem
from .pfl_design import design_zoneplate
from .trap_physics import IonScene, TrapParams, equilibrium_positions, ion_spacing

SCHEMA_VERSION = "1.0"

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}


def _block(properties, required=()):
    return {"type": "object", "properties": properties, "required": list(required),
            "additionalProperties": False}


SCHEMA = _block({
    "schema_version": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "lens": _block({
        "wavelength_m": _POS,
        "focal_length_m": _POS,
        "aperture_diameter_m": _POS,
        "substrate_index": {"type": ["number", "null"], "exclusiveMinimum": 1},
        "first_zone_etched": {"type": "boolean"},
        "grid_m": {"type": ["number", "null"], "exclusiveMinimum": 0},
    }, required=("wavelength_m", "focal_length_m", "aperture_diameter_m")),
    "trap": _block({
        "ion_mass_u": _POS,
        "axial_frequency_hz": _POS,
        "axial_frequency_uncertainty_hz": _NONNEG,
        "radial_frequency_hz": _POS,
        "temperature_k": _NONNEG,
        "drive_voltage_v": _NUM,
        "drive_frequency_rad_s": _POS,
        "linewidth_rad_s": _POS,
    }, required=("ion_mass_u", "axial_frequency_hz")),
    "scene": _block({
        "n_ions": {"type": "integer", "minimum": 1},
        "spacing_m": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "positions_m": {"type": ["array", "null"], "items": _VEC3, "minItems": 1},
        "offset_m": _VEC3,
        "motion_rms_m": _VEC3,
        "emission_wavelength_m": _POS,
    }),
    "imaging": _block({
        "magnification": _POS,
        "magnification_uncertainty": _NONNEG,
        "transmission": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "psf_r_max_m": _POS,
        "psf_samples": {"type": "integer", "minimum": 2},
        "samples_per_zone": {"type": "integer", "minimum": 4},
    }),
    "ccd": _block({
        "pixel_pitch_m": _POS,
        "array_size": {"type": "array", "items": {"type": "integer", "minimum": 1},
                       "minItems": 2, "maxItems": 2},
        "quantum_efficiency": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "read_noise_e": _NONNEG,
        "dark_rate_e_per_s": _NONNEG,
        "gain_e_per_count": _POS,
        "saturation_counts": {"type": "integer", "minimum": 1, "maximum": 65535},
        "bias_counts": _NONNEG,
    }),
    "render": _block({
        "exposure_s": _POS,
        "photon_rate_per_s": _NONNEG,
        "background_rate_e_per_s": _NONNEG,
        "noise": {"type": "boolean"},
    }),
    "analysis": _block({
        "roi_half_size_px": {"type": ["integer", "null"], "minimum": 5},
        "smoothing_px": _NONNEG,
        "knife_edge_points": {"type": "integer", "minimum": 2},
    }),
}, required=("schema_version", "lens"))

DEFAULTS = {
    "seed": 0,
    "lens": {"substrate_index": None, "first_zone_etched": False, "grid_m": None},
    "trap": {
        "ion_mass_u": 174.0, "axial_frequency_hz": 882e3, "axial_frequency_uncertainty_hz": 0.0,
        "radial_frequency_hz": 1.6e6, "temperature_k": 0.0, "drive_voltage_v": 200.0,
        "drive_frequency_rad_s": 2 * np.pi * 20e6, "linewidth_rad_s": YB_LINEWIDTH,
    },
    "scene": {
        "n_ions": 1, "spacing_m": None, "positions_m": None, "offset_m": [0.0, 0.0, 0.0],
        "motion_rms_m": [0.0, 0.0, 0.0], "emission_wavelength_m": YB_COOLING_WAVELENGTH,
    },
    "imaging": {
        "magnification": 615.0, "magnification_uncertainty": 0.0, "transmission": 1.0,
        "psf_r_max_m": 2e-6, "psf_samples": 201, "samples_per_zone": 4,
    },
    "ccd": {
        "pixel_pitch_m": 13e-6, "array_size": [512, 512], "quantum_efficiency": 0.35,
        "read_noise_e": 10.0, "dark_rate_e_per_s": 0.0, "gain_e_per_count": 1.0,
        "saturation_counts": 65535, "bias_counts": 100.0,
    },
    "render": {"exposure_s": 0.5, "photon_rate_per_s": 2e7, "background_rate_e_per_s": 0.0,
               "noise": True},
    "analysis": {"roi_half_size_px": None, "smoothing_px": 1.5, "knife_edge_points": 201},
}


def bundled_scenarios():
    return sorted(p.name[:-5] for p in resources.files("pflion.scenarios").iterdir()
                  if p.name.endswith(".json"))


def load_scenario(source):
    """Load, validate and fill defaults.

    ``source`` is a path, the name of a bundled scenario (``paper_nominal``,
    ``paper_two_ion``) or an already parsed dict.
    """
    if isinstance(source, dict):
        raw = copy.deepcopy(source)
    else:
        path = Path(source)
        if not path.exists() and str(source) in bundled_scenarios():
            text = resources.files("pflion.scenarios").joinpath(f"{source}.json").read_text()
        else:
            try:
                text = path.read_text()
            except OSError as exc:
                raise ScenarioError(f"cannot read scenario {source}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: line {exc.lineno} column {exc.colno}: "
                                f"{exc.msg}") from exc
    validate(raw)
    out = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if isinstance(value, dict):
            out.setdefault(key, {}).update(value)
        else:
            out[key] = value
    return out


def validate(raw):
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {exc.message}") from exc
    version = str(raw["schema_version"])
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ScenarioError(f"schema_version {version} is incompatible with {SCHEMA_VERSION}")


def build_zoneplate(sc):
    lens = sc["lens"]
    return design_zoneplate(lens["wavelength_m"], lens["focal_length_m"],
                            lens["aperture_diameter_m"], lens["substrate_index"],
                            lens["first_zone_etched"], lens["grid_m"])


def build_trap(sc):
    t = sc["trap"]
    return TrapParams.from_amu(
        t["ion_mass_u"], t["axial_frequency_hz"], t["radial_frequency_hz"],
        temperature=t["temperature_k"], drive_voltage=t["drive_voltage_v"],
        drive_frequency=t["drive_frequency_rad_s"],
        axial_frequency_uncertainty=t["axial_frequency_uncertainty_hz"],
    )


def build_scene(sc, trap=None):
    s = sc["scene"]
    if s["positions_m"] is not None:
        pos = np.array(s["positions_m"], dtype=float)
    else:
        n = s["n_ions"]
        pos = np.zeros((n, 3))
        if n > 1:
            if s["spacing_m"] is not None:
                pos[:, 0] = (np.arange(n) - (n - 1) / 2) * s["spacing_m"]
            else:
                pos[:, 0] = equilibrium_positions(n, trap or build_trap(sc))
    pos = pos + np.asarray(s["offset_m"], dtype=float)
    return IonScene(pos, tuple(s["motion_rms_m"]), s["emission_wavelength_m"])


def build_ccd(sc):
    c = sc["ccd"]
    return CcdModel(c["pixel_pitch_m"], tuple(c["array_size"]), c["quantum_efficiency"],
                    c["read_noise_e"], c["dark_rate_e_per_s"], c["gain_e_per_count"],
                    c["saturation_counts"], c["bias_counts"])


def build_imaging(sc, spec, psf):
    im = sc["imaging"]
    return ImagingSystem.from_zoneplate(spec, psf, im["magnification"], im["transmission"],
                                        magnification_uncertainty=im["magnification_uncertainty"])


def predicted_separation_px(sc):
    """Expected image separation of a two-ion scene, from the Coulomb
    equilibrium spacing or the explicit ``spacing_m``."""
    spacing = sc["scene"]["spacing_m"] or ion_spacing(build_trap(sc))
    return spacing * sc["imaging"]["magnification"] / sc["ccd"]["pixel_pitch_m"]
