"""Measure spot size and calibrate magnification from synthetic frames.

A Gaussian fit to a single-ion image gives the spot size in the object
plane. The known spacing of a two-ion crystal fixes the magnification, and
moving the ion by a known distance checks that calibration.

Run:  python3 demos/05_fit_and_calibrate.py
"""
from pflion import scenario as scn
from pflion.analysis import (calibrate_magnification, displacement_crosscheck, fit_single_spot,
                             object_plane_fwhm)
from pflion.image_formation import render_frame
from pflion.wave_optics import focal_field_radial, psf_fwhm, pupil_from_zoneplate

sc = scn.load_scenario("paper_two_ion")
spec = scn.build_zoneplate(sc)
psf = focal_field_radial(pupil_from_zoneplate(spec), spec.focal_length, 2e-6, 201)
system = scn.build_imaging(sc, spec, psf)
ccd = scn.build_ccd(sc)
trap = scn.build_trap(sc)

two = render_frame(system, scn.build_scene(sc, trap), ccd, 0.5, 2e7, seed=1)
cal = calibrate_magnification(two, trap, ccd)
print(f"spot separation     {cal.pixel_separation:.2f} +- {cal.pixel_separation_uncertainty:.2f} px")
print(f"magnification       {cal.magnification:.1f} +- {cal.magnification_uncertainty:.1f}")

single = scn.load_scenario("paper_nominal")
scene = scn.build_scene(single)
frame = render_frame(system, scene, ccd, 0.5, 2e7, seed=2)
fwhm = object_plane_fwhm(fit_single_spot(frame), cal.magnification, ccd.pixel_pitch,
                         cal.magnification_uncertainty)
print(f"optical FWHM        {psf_fwhm(psf) * 1e9:.0f} nm")
print(f"fitted FWHM         {fwhm.fwhm_x * 1e9:.0f} +- {fwhm.error_x * 1e9:.0f} nm (x), "
      f"{fwhm.fwhm_y * 1e9:.0f} nm (y)")

moved = render_frame(system, scene.displaced((5e-6, 0, 0)), ccd, 0.5, 2e7, seed=3)
err = displacement_crosscheck([frame, moved], 5e-6, cal.magnification, ccd)
print(f"5 um move mismatch  {err:.2%}")
