"""Unit conventions: energies and rates in meV with hbar = 1, times in hbar/meV.

The conversion constants below are used only when reading or writing
picosecond/Kelvin quantities; all internal arithmetic stays in meV units.
"""

import numpy as np

HBAR_MEV_PS = 0.65821          # hbar in meV * ps
KB_MEV_PER_K = 0.08617333      # Boltzmann constant in meV / K


def thermal_beta(temperature_k: float) -> float:
    """Inverse thermal energy 1/(kB T) in 1/meV; T = 0 maps to +inf."""
    if temperature_k < 0:
        raise ValueError(f"temperature must be >= 0 K, got {temperature_k}")
    if temperature_k == 0:
        return np.inf
    return 1.0 / (KB_MEV_PER_K * temperature_k)


def time_to_ps(t_inv_mev):
    """Convert a time in hbar/meV to picoseconds (display only)."""
    return np.asarray(t_inv_mev) * HBAR_MEV_PS
