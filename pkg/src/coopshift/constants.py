"""Physical constants and lab defaults.

Internal units: frequencies in MHz, distances in um, wavenumbers in rad/um.
"""
from scipy import constants as _c

ELEMENTARY_CHARGE = _c.e  # C
EPSILON_0 = _c.epsilon_0  # F/m
ATOMIC_MASS = _c.physical_constants["atomic mass constant"][0]  # kg

# 88Sr+ on the 5S1/2 -> 5P1/2 line
SR88_MASS_U = 87.906
SR_WAVELENGTH_UM = 0.4216
SR_OSCILLATOR_STRENGTH_MHZ = 20.05
SR_NATURAL_LINEWIDTH_MHZ = 21.5
SR_OBSERVED_LINEWIDTH_MHZ = 24.63

# spin-flip share of the total oscillator strength (Clebsch-Gordan weight)
SPIN_FLIP_FRACTION = 2.0 / 3.0
