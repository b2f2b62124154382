"""Unit system and physical constants.

Every module works in the same fixed units:

==========  =========
quantity    unit
==========  =========
energy      μeV (quantum modules), meV (trap module)
time        ns
field       T
length      Å
mass        amu
==========  =========
"""

HBAR = 0.6582119569  # μeV·ns
MU_B = 57.88381806  # Bohr magneton, μeV/T
MU_N = 3.15245125844e-2  # nuclear magneton, μeV/T
G_PROTON = 5.5856946893

# μ0/(4π)·μ1·μ2/r³ in μeV for moments in μeV/T and r in Å:
# 1e-7 T·m/A · (1.602176634e-25 J per μeV) · 1e30 Å³/m³
DIPOLE_PREFACTOR = 1e-7 * 1.602176634e-25 * 1e30  # μeV·Å³ / (μeV/T)²

# sqrt(meV / (Å²·amu)) expressed as a wavenumber in cm⁻¹
_MEV = 1.602176634e-22
_AMU = 1.66053906660e-27
_C_CM = 2.99792458e10
WAVENUMBER_PER_SQRT_MEV_A2_AMU = (_MEV / 1e-20 / _AMU) ** 0.5 / (2.0 * 3.141592653589793 * _C_CM)
