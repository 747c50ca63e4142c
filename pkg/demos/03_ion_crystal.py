"""Two- and three-ion crystals in a needle trap.

The spacing of a two-ion crystal follows from balancing the trap force
against Coulomb repulsion. Longer chains are found numerically. The
Doppler limit sets how far each ion wanders around its equilibrium.

Run:  python3 demos/03_ion_crystal.py
"""
from pflion.constants import ATOMIC_MASS_UNIT, YB_LINEWIDTH
from pflion.trap_physics import (TrapParams, doppler_temperature, equilibrium_positions,
                                 ion_spacing, thermal_rms)

trap = TrapParams.from_amu(174, 882e3, 1.6e6)
print(f"two-ion spacing at 882 kHz   {ion_spacing(trap) * 1e6:.4f} um")

for n in (2, 3, 4):
    x = equilibrium_positions(n, trap)
    print(f"{n} ions at                  " + "  ".join(f"{v * 1e6:+.3f}" for v in x) + " um")

t_d = doppler_temperature(YB_LINEWIDTH)
m = 174 * ATOMIC_MASS_UNIT
print(f"Doppler limit                {t_d * 1e3:.3f} mK")
print(f"RMS motion at 882 kHz        {thermal_rms(t_d, m, 882e3) * 1e9:.1f} nm")
print(f"RMS motion at 1.6 MHz        {thermal_rms(t_d, m, 1.6e6) * 1e9:.1f} nm")
