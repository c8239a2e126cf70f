"""Quantum optics of a waveguide cavity closed by a Fano mirror.

Pipeline: coupled-mode-theory scattering amplitudes -> analytic LDOS ->
two-coupled-dissipative-mode reservoir mapping -> polaron master equation
-> filtered two-colour emission spectrum -> photon indistinguishability,
plus the equivalent Fabry-Perot baseline.
"""

from .errors import (ConfigError, ConvergenceError, DegeneracyError,
                     InfeasibleError, NumericsError)
from .ldos import EmitterCoupling, SpectralCurve, fp_ldos, ldos_at, ldos_midpoint
from .mapping import (ComplexPole, FitOptions, FitReport, MappedPair,
                      constrained_pair, find_poles, fit, fit_cavity,
                      mapped_spectral_density, residue_contour)
from .observables import (DynamicsSettings, EmissionResult, IndistResult,
                          Spectrum2D, bulk_emission, dipole_spectrum,
                          emitted_energy, fano_emission, filter_spectrum,
                          fp_baseline, fp_sweep, indistinguishability,
                          simulate_emission, sweep)
from .phonons import (PhononCorrelations, PhononEnv, franck_condon, lambda_x,
                      lambda_y, phi, phonon_sd, polaron_shift)
from .scattering import (CavityGeometry, FanoMirror, ScatteringAmplitudes,
                         fano_reflectivity, fano_transmittivity,
                         fp_green_function, green_function, mirror_phases,
                         scattering_amplitudes)

__version__ = "0.1.0"

__all__ = [
    "CavityGeometry", "ComplexPole", "ConfigError", "ConvergenceError",
    "DegeneracyError", "DynamicsSettings", "EmissionResult", "EmitterCoupling",
    "FanoMirror", "FitOptions", "FitReport", "IndistResult", "InfeasibleError",
    "MappedPair", "NumericsError", "PhononCorrelations", "PhononEnv",
    "ScatteringAmplitudes", "SpectralCurve", "Spectrum2D", "bulk_emission",
    "constrained_pair", "dipole_spectrum", "emitted_energy", "fano_emission",
    "fano_reflectivity", "fano_transmittivity", "filter_spectrum",
    "find_poles", "fit", "fit_cavity", "fp_baseline", "fp_green_function",
    "fp_ldos", "fp_sweep", "franck_condon", "green_function",
    "indistinguishability", "lambda_x", "lambda_y", "ldos_at", "ldos_midpoint",
    "mapped_spectral_density", "mirror_phases", "phi", "phonon_sd",
    "polaron_shift", "residue_contour", "scattering_amplitudes",
    "simulate_emission", "sweep",
]
