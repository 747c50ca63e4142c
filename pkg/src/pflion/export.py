"""Plain-text and PNG serializations of the pipeline's products."""
from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FrameParseError


def _f(x):
    return f"{x:.15e}"


def write_atomic(path, data):
    """Write ``data`` (str or bytes) via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def zoneplate_csv(spec):
    n, inner, outer, phase = spec.zones()
    lines = ["n,inner_radius_m,outer_radius_m,phase_rad"]
    lines += [f"{k},{_f(a)},{_f(b)},{_f(p)}" for k, a, b, p in zip(n, inner, outer, phase)]
    return "\n".join(lines) + "\n"


def zoneplate_dict(spec):
    return {
        "design_wavelength_m": spec.design_wavelength,
        "focal_length_m": spec.focal_length,
        "aperture_diameter_m": spec.aperture_diameter,
        "etch_depth_m": spec.etch_depth,
        "substrate_index": spec.substrate_index,
        "first_zone_etched": spec.first_zone_etched,
        "n_zones": spec.n_zones,
        "zone_boundaries_m": [float(_f(r)) for r in spec.zone_boundaries],
    }


def psf_csv(psf):
    if psf.radial:
        lines = ["r_m,intensity"]
        lines += [f"{_f(r)},{_f(v)}" for r, v in zip(psf.coords(), psf.intensity)]
    else:
        n = psf.intensity.shape[0]
        lines = [f"# N={n},pitch_m={_f(psf.sample_pitch)},order=row-major", "intensity"]
        lines += [_f(v) for v in psf.intensity.ravel()]
    return "\n".join(lines) + "\n"


def psf_sidecar(psf):
    return {
        "kind": "radial" if psf.radial else "cartesian",
        "sample_pitch_m": psf.sample_pitch,
        "samples": list(psf.intensity.shape),
        "normalization": ("2*pi*trapz(r*I, r) = 1 over [0, r_max]" if psf.radial
                          else "sum(I) * pitch^2 = 1"),
        "integral": psf.total(),
    }


def knife_edge_csv(scan):
    lines = ["position_m,transmitted_fraction"]
    lines += [f"{_f(x)},{_f(v)}" for x, v in scan]
    return "\n".join(lines) + "\n"


def frame_png(frame):
    buf = io.BytesIO()
    Image.fromarray(np.asarray(frame.counts, dtype=np.uint16)).save(buf, format="PNG")
    return buf.getvalue()


def frame_csv(frame):
    return "\n".join(",".join(str(int(v)) for v in row) for row in frame.counts) + "\n"


def read_frame_csv(path):
    """Parse a counts CSV written by ``frame_csv``.

    Raises
    ------
    FrameParseError
        With the 1-based line and column of the first bad cell.
    """
    rows = []
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            row = []
            for j, cell in enumerate(line.split(","), start=1):
                try:
                    row.append(int(cell))
                except ValueError:
                    raise FrameParseError(f"{path}: line {i} column {j}: not an integer: {cell!r}",
                                          i, j) from None
            if rows and len(row) != len(rows[0]):
                raise FrameParseError(f"{path}: line {i}: expected {len(rows[0])} columns, "
                                      f"got {len(row)}", i, None)
            rows.append(row)
    if not rows:
        raise FrameParseError(f"{path}: empty frame", 1, None)
    return np.array(rows, dtype=np.int64)


def fit_report(fit, magnification=None, pixel_pitch=None, magnification_uncertainty=0.0):
    from .analysis import object_plane_fwhm

    names = ["amplitude", "x0", "y0", "sigma_x", "sigma_y", "offset"]
    err = fit.errors
    report = {
        "converged": fit.converged,
        "iterations": fit.n_iter,
        "parameters": dict(zip(names, map(float, fit.params))),
        "uncertainties": dict(zip(names, map(float, err))),
        "uncertainty_method": "covariance (J^T W J)^-1 scaled by reduced chi2",
        "covariance": fit.covariance.tolist(),
        "reduced_chi2": fit.reduced_chi2,
        "fwhm_px": {"x": fit.fwhm[0], "y": fit.fwhm[1],
                    "x_err": fit.fwhm_error[0], "y_err": fit.fwhm_error[1]},
    }
    if magnification and pixel_pitch and fit.converged:
        obj = object_plane_fwhm(fit, magnification, pixel_pitch, magnification_uncertainty)
        report["fwhm_object_nm"] = {"x": obj.fwhm_x * 1e9, "y": obj.fwhm_y * 1e9,
                                    "x_err": obj.error_x * 1e9, "y_err": obj.error_y * 1e9}
    return report


def calibration_report(cal):
    return {
        "magnification": cal.magnification,
        "magnification_uncertainty": cal.magnification_uncertainty,
        "pixel_separation": cal.pixel_separation,
        "pixel_separation_uncertainty": cal.pixel_separation_uncertainty,
        "predicted_spacing_m": cal.predicted_spacing,
        "predicted_spacing_uncertainty_m": cal.predicted_spacing_uncertainty,
        "spot_centers_px": [list(f.center) for f in cal.fits],
    }
