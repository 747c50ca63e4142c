"""Physical constants (CODATA 2018) and a few atomic-data defaults."""

ELEMENTARY_CHARGE = 1.602176634e-19  # C, exact
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
BOLTZMANN = 1.380649e-23  # J/K, exact
HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg

# Yb+ S1/2 - P1/2 cooling transition. External atomic data, used as scenario
# defaults only.
YB_COOLING_WAVELENGTH = 369.5e-9  # m
YB_LINEWIDTH = 2 * 3.141592653589793 * 19.6e6  # rad/s
