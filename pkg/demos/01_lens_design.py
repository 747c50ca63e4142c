"""Design a binary phase Fresnel lens for 369.5 nm light.

A 5 mm aperture at 3 mm focal length is etched into fused silica. Each
zone boundary sits where the path to focus grows by half a wavelength, and
every second zone is etched to give a pi phase step.

Run:  python3 demos/01_lens_design.py [output_dir]
"""
import sys
from pathlib import Path

from pflion import export
from pflion.pfl_design import design_zoneplate
from pflion.wave_optics import binary_grating_efficiency

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)

spec = design_zoneplate(369.5e-9, 3e-3, 5e-3)
geo = spec.geometry
widths = spec.zone_boundaries[1:] - spec.zone_boundaries[:-1]

print(f"zones                 {spec.n_zones}")
print(f"first zone radius     {spec.zone_boundaries[0] * 1e6:.3f} um")
print(f"outermost zone width  {widths[-1] * 1e9:.1f} nm")
print(f"substrate index       {spec.substrate_index:.6f}")
print(f"pi etch depth         {spec.etch_depth * 1e9:.2f} nm")
print(f"numerical aperture    {geo.numerical_aperture:.4f}")
print(f"solid angle fraction  {geo.solid_angle_fraction:.4f}")

# A binary pi-step profile sends 4/pi^2 of the light into the +1 order.
eta = binary_grating_efficiency(1)
print(f"first-order eff.      {eta:.4f}")
print(f"light to focus        {geo.solid_angle_fraction * eta:.4f} of 4 pi")

export.write_atomic(out / "zones.csv", export.zoneplate_csv(spec))
print(f"zone table written to {out / 'zones.csv'}")
