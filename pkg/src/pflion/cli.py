"""Command-line entry point: ``pflion <command> --scenario S --out DIR``.

Exit codes: 0 success, 2 input or validation error, 3 numerical
non-convergence. Errors are printed to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, export
from . import scenario as scn
from .analysis import calibrate_magnification, fit_single_spot
from .errors import ConvergenceError, PflionError
from .image_formation import ion_pixel_positions, render_frame, scenario_hash
from .trap_physics import ion_spacing
from .wave_optics import (airy_fwhm, cross_check_engines, focal_field_radial, ideal_pupil,
                          knife_edge_scan, psf_fwhm, pupil_from_zoneplate)


def _radial_psf(sc, spec, ideal=False):
    im = sc["imaging"]
    if ideal:
        pupil = ideal_pupil(spec.design_wavelength, spec.focal_length, spec.aperture_diameter)
    else:
        pupil = pupil_from_zoneplate(spec, im["samples_per_zone"])
    return focal_field_radial(pupil, spec.focal_length, im["psf_r_max_m"], im["psf_samples"])


def cmd_design(sc, out, args):
    spec = scn.build_zoneplate(sc)
    geo = spec.geometry
    export.write_atomic(out / "zones.csv", export.zoneplate_csv(spec))
    export.write_atomic(out / "lens.json", export.to_json(export.zoneplate_dict(spec)))
    report = {
        "numerical_aperture": geo.numerical_aperture,
        "paraxial_na": spec.aperture_diameter / (2 * spec.focal_length),
        "f_number": geo.f_number,
        "solid_angle_fraction": geo.solid_angle_fraction,
        "zone_count": spec.n_zones,
        "first_zone_radius_m": float(spec.zone_boundaries[0]),
        "outer_zone_width_m": float(spec.zone_boundaries[-1] - spec.zone_boundaries[-2]),
        "etch_depth_m": spec.etch_depth,
        "substrate_index": spec.substrate_index,
    }
    export.write_atomic(out / "geometry.json", export.to_json(report))
    return report


def cmd_psf(sc, out, args):
    spec = scn.build_zoneplate(sc)
    na = spec.geometry.numerical_aperture
    psf = _radial_psf(sc, spec)
    ideal = _radial_psf(sc, spec, ideal=True)
    r_max = sc["imaging"]["psf_r_max_m"]
    knife = knife_edge_scan(psf, "x", np.linspace(-r_max, r_max, sc["analysis"]["knife_edge_points"]))
    export.write_atomic(out / "psf_radial.csv", export.psf_csv(psf))
    export.write_atomic(out / "psf_radial.json", export.to_json(export.psf_sidecar(psf)))
    export.write_atomic(out / "knife_edge.csv", export.knife_edge_csv(knife))
    summary = {
        "fwhm_m": psf_fwhm(psf),
        "ideal_pupil_fwhm_m": psf_fwhm(ideal),
        "airy_reference_fwhm_m": airy_fwhm(spec.design_wavelength, na),
        "numerical_aperture": na,
        "model": "scalar Rayleigh-Sommerfeld, radial Bessel kernel",
    }
    if args.cross_check:
        summary["cross_check"] = cross_check_engines(spec.design_wavelength, workers=args.threads)
    export.write_atomic(out / "psf_summary.json", export.to_json(summary))
    return summary


def cmd_simulate(sc, out, args):
    spec = scn.build_zoneplate(sc)
    trap = scn.build_trap(sc)
    scene = scn.build_scene(sc, trap)
    ccd = scn.build_ccd(sc)
    system = scn.build_imaging(sc, spec, _radial_psf(sc, spec))
    r = sc["render"]
    frame = render_frame(system, scene, ccd, r["exposure_s"], r["photon_rate_per_s"], sc["seed"],
                         r["background_rate_e_per_s"], noise=r["noise"],
                         metadata={"scenario_hash": scenario_hash(sc)})
    meta = dict(frame.metadata)
    meta["saturated"] = frame.saturated
    meta["expected_spot_centers_px"] = ion_pixel_positions(scene, system.magnification, ccd).tolist()
    export.write_atomic(out / "frame.png", export.frame_png(frame))
    export.write_atomic(out / "frame.csv", export.frame_csv(frame))
    export.write_atomic(out / "frame.json", export.to_json(meta))
    return meta


def _load_frame(args):
    if not args.frame:
        raise PflionError("--frame is required for this command")
    return export.read_frame_csv(args.frame)


def cmd_fit(sc, out, args):
    counts = _load_frame(args)
    an = sc["analysis"]
    fit = fit_single_spot(counts, an["roi_half_size_px"] or 25, an["smoothing_px"])
    if not fit.converged:
        raise ConvergenceError("Gaussian fit did not converge")
    im = sc["imaging"]
    report = export.fit_report(fit, im["magnification"], sc["ccd"]["pixel_pitch_m"],
                               im["magnification_uncertainty"])
    export.write_atomic(out / "fit.json", export.to_json(report))
    return report


def cmd_calibrate(sc, out, args):
    counts = _load_frame(args)
    trap = scn.build_trap(sc)
    cal = calibrate_magnification(counts, trap, scn.build_ccd(sc),
                                  sc["analysis"]["roi_half_size_px"], sc["analysis"]["smoothing_px"])
    report = export.calibration_report(cal)
    report["trap_axial_frequency_hz"] = trap.axial_frequency
    report["ion_spacing_m"] = ion_spacing(trap)
    export.write_atomic(out / "calibration.json", export.to_json(report))
    return report


COMMANDS = {
    "design": cmd_design,
    "psf": cmd_psf,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "calibrate": cmd_calibrate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="pflion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"pflion {__version__} (scenario schema {scn.SCHEMA_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True,
                       help="scenario JSON path or bundled name (%s)" % ", ".join(scn.bundled_scenarios()))
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--seed", type=int, help="overrides the scenario seed")
        p.add_argument("--threads", type=int, default=None,
                       help="FFT worker count; results do not depend on it")
        if name in ("fit", "calibrate"):
            p.add_argument("--frame", required=True, help="counts CSV from 'simulate'")
        if name == "psf":
            p.add_argument("--cross-check", action="store_true",
                           help="also compare radial and 2-D engines at reduced aperture")
    return parser


def _fail(code, exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("line", "column", "residual"):
        if getattr(exc, attr, None) is not None:
            payload[attr] = getattr(exc, attr)
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        sc = scn.load_scenario(args.scenario)
        if args.seed is not None:
            sc["seed"] = args.seed
        result = COMMANDS[args.command](sc, args.out, args)
    except ConvergenceError as exc:
        return _fail(3, exc)
    except (PflionError, ValueError, OSError) as exc:
        return _fail(2, exc)
    print(json.dumps(result, sort_keys=True, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
