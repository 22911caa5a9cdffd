"""Physical constants (CODATA 2018, SI units).

Kept as literals rather than pulled from :mod:`scipy.constants` so results do
not drift when a newer CODATA release ships with scipy.
"""

SPEED_OF_LIGHT = 299792458.0  # m/s
HBAR = 1.054571817e-34  # J s
BOLTZMANN = 1.380649e-23  # J/K
ELEMENTARY_CHARGE = 1.602176634e-19  # C
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
ELECTRON_MASS = 9.1093837015e-31  # kg

ZETA3 = 1.2020569031595942853997381615114

