"""Render CCD frames of one and two ions.

The optical spot is blurred by thermal motion, magnified onto the camera,
integrated over pixels and given shot and read noise.

Run:  python3 demos/04_ccd_frames.py [output_dir]
"""
import sys
from pathlib import Path

from pflion import export
from pflion import scenario as scn
from pflion.image_formation import render_frame
from pflion.wave_optics import focal_field_radial, pupil_from_zoneplate

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)

for name in ("paper_nominal", "paper_two_ion"):
    sc = scn.load_scenario(name)
    spec = scn.build_zoneplate(sc)
    psf = focal_field_radial(pupil_from_zoneplate(spec), spec.focal_length, 2e-6, 201)
    system = scn.build_imaging(sc, spec, psf)
    r = sc["render"]
    frame = render_frame(system, scn.build_scene(sc), scn.build_ccd(sc), r["exposure_s"],
                         r["photon_rate_per_s"], sc["seed"])
    export.write_atomic(out / f"{name}.png", export.frame_png(frame))
    export.write_atomic(out / f"{name}.csv", export.frame_csv(frame))
    print(f"{name:14s} peak {frame.counts.max():5d} counts, "
          f"collection {system.collection_fraction:.4f}, written to {out / (name + '.png')}")
