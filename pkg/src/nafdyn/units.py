"""Unit conversions and physical constants (Hartree atomic units internally)."""

# 1 hartree in wavenumbers (CODATA)
HARTREE_TO_CM1 = 219474.6313632

# Boltzmann constant in hartree/K
KB_AU = 3.166811563e-6

# speed of light in atomic units
C_LIGHT_AU = 137.036

# vacuum permittivity in Gaussian atomic units
EPS0_AU = 1.0 / (4.0 * 3.141592653589793)

# 1 fs in atomic time units
FS_TO_AU = 41.341373335182114


def cm1_to_au(x):
    return x / HARTREE_TO_CM1


def au_to_cm1(x):
    return x * HARTREE_TO_CM1


def kelvin_to_beta(T):
    """Inverse temperature (hartree^-1) for a temperature in kelvin."""
    return 1.0 / (KB_AU * T)
