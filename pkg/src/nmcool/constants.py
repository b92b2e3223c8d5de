"""Physical constants (SI) shared across the package.

Everything with dimensions of frequency, rate, or energy is carried as an
ANGULAR rate in rad/s throughout the package: a value quoted as "x kHz"
elsewhere means 2*pi*x*1e3 here.  Energies are stored as E/hbar.
"""

import math

from scipy.constants import physical_constants
from scipy.constants import e as E_CHARGE
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import hbar as HBAR
from scipy.constants import k as K_B

BOHR_RADIUS = physical_constants["Bohr radius"][0]  # m

TWO_PI = 2.0 * math.pi

# 1 barn in m^2 (quadrupole moments are tabulated in barn)
BARN = 1e-28

__all__ = [
    "BARN",
    "BOHR_RADIUS",
    "E_CHARGE",
    "EPS0",
    "HBAR",
    "K_B",
    "TWO_PI",
]
