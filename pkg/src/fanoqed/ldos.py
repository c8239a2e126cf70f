"""Electromagnetic local density of states seen by the emitter.

The LDOS at dimensionless position x in [-1, 1] inside the cavity is

    J(x, omega) = Gamma0 * Re[ (1 + r1)(1 + r2) / (1 - r1 r2) ],
    r1 = r0 exp{i (1+x) omega/Delta},   r2 = r_F(omega) exp{i (1-x) omega/Delta},

with Gamma0 the bare-waveguide emission rate.  `ldos_analytic` returns the
Schwarz-reflection continuation J(z) = Gamma0/2 [F(z) + conj(F(conj z))],
which coincides with J on the real axis and is what the mapping module
integrates around complex poles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError
from .scattering import CavityGeometry, FanoMirror, fano_reflectivity

DEGENERACY_FLOOR = 1e-14
POINTS_PER_LINEWIDTH = 40


@dataclass(frozen=True)
class EmitterCoupling:
    """Emitter decay channels and transition frequency (meV)."""

    gamma0: float              # spontaneous emission into the bare waveguide
    gamma_r: float             # spontaneous emission into radiation modes
    omega_eg: float            # emitter transition frequency

    def __post_init__(self):
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if self.gamma_r < 0:
            raise ValueError("gamma_r must be >= 0")
        if self.omega_eg <= 0:
            raise ValueError("omega_eg must be positive")


@dataclass
class SpectralCurve:
    """Real nonnegative samples on a monotonically increasing frequency grid."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.omega.ndim != 1 or self.omega.shape != self.values.shape:
            raise ValueError("omega and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")

    def write_csv(self, path, gamma0: float, header_comment: str = ""):
        """Write as 'omega_meV,J_over_Gamma0' CSV."""
        with open(path, "w", encoding="utf-8") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write("omega_meV,J_over_Gamma0\n")
            for w, v in zip(self.omega, self.values):
                fh.write(f"{w:.10e},{v / gamma0:.10e}\n")


def _ratio(r1, r2, floor):
    den = 1.0 - r1 * r2
    if np.min(np.abs(den)) < floor:
        raise DegeneracyError(f"LDOS denominator |1 - r1 r2| below {floor:g}")
    return (1.0 + r1) * (1.0 + r2) / den


def _fano_f(mirror, geometry, x_tilde, z, floor):
    phase_left = np.exp(1j * (1.0 + x_tilde) * np.asarray(z) / geometry.fsr)
    phase_right = np.exp(1j * (1.0 - x_tilde) * np.asarray(z) / geometry.fsr)
    r1 = geometry.r0 * phase_left
    r2 = fano_reflectivity(mirror, z) * phase_right
    return _ratio(r1, r2, floor)


def _fp_f(r, geometry, x_tilde, z, floor):
    phase_left = np.exp(1j * (1.0 + x_tilde) * np.asarray(z) / geometry.fsr)
    phase_right = np.exp(1j * (1.0 - x_tilde) * np.asarray(z) / geometry.fsr)
    return _ratio(geometry.r0 * phase_left, r * phase_right, floor)


def ldos_at(mirror: FanoMirror, geometry: CavityGeometry, coupling: EmitterCoupling,
            x_tilde: float, omega, floor: float = DEGENERACY_FLOOR):
    """LDOS J(x, omega) in meV at dimensionless position x_tilde."""
    if not -1.0 <= x_tilde <= 1.0:
        raise ValueError("x_tilde must lie in [-1, 1]")
    return coupling.gamma0 * np.real(_fano_f(mirror, geometry, x_tilde, omega, floor))


def ldos_midpoint(mirror: FanoMirror, geometry: CavityGeometry,
                  coupling: EmitterCoupling, omega,
                  floor: float = DEGENERACY_FLOOR):
    """LDOS at the cavity midpoint (x_tilde = 0)."""
    return ldos_at(mirror, geometry, coupling, 0.0, omega, floor)


def fp_ldos(r: float, geometry: CavityGeometry, coupling: EmitterCoupling, omega,
            floor: float = DEGENERACY_FLOOR):
    """Midpoint LDOS of the Fabry-Perot cavity with constant right mirror r."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    return coupling.gamma0 * np.real(_fp_f(r, geometry, 0.0, omega, floor))


def ldos_analytic(mirror: FanoMirror, geometry: CavityGeometry,
                  coupling: EmitterCoupling, x_tilde: float = 0.0,
                  floor: float = DEGENERACY_FLOOR):
    """Analytic continuation of J to complex frequency, as a callable z -> J(z)."""

    def J(z):
        z = np.asarray(z, dtype=complex)
        f = _fano_f(mirror, geometry, x_tilde, z, floor)
        f_mirror = np.conj(_fano_f(mirror, geometry, x_tilde, np.conj(z), floor))
        return 0.5 * coupling.gamma0 * (f + f_mirror)

    return J


def fp_ldos_analytic(r: float, geometry: CavityGeometry, coupling: EmitterCoupling,
                     floor: float = DEGENERACY_FLOOR):
    """Analytic continuation of the Fabry-Perot midpoint LDOS."""

    def J(z):
        z = np.asarray(z, dtype=complex)
        f = _fp_f(r, geometry, 0.0, z, floor)
        f_mirror = np.conj(_fp_f(r, geometry, 0.0, np.conj(z), floor))
        return 0.5 * coupling.gamma0 * (f + f_mirror)

    return J


def default_grid(window: tuple[float, float], narrowest_linewidth: float,
                 min_points: int = 4001, max_points: int = 400_001) -> np.ndarray:
    """Frequency grid resolving the narrowest feature with >= 40 points."""
    lo, hi = window
    if hi <= lo:
        raise ValueError("window must satisfy hi > lo")
    width = max(narrowest_linewidth, 1e-12)
    n = int(np.ceil(POINTS_PER_LINEWIDTH * (hi - lo) / width)) + 1
    n = int(np.clip(n, min_points, max_points))
    return np.linspace(lo, hi, n)


def peak_and_dip(omega: np.ndarray, values: np.ndarray,
                 dip_search_halfwidth: float | None = None):
    """Locate the principal LDOS peak and the dip nearest to it.

    Returns (omega_peak, omega_dip).  The dip search is restricted to a
    window around the peak so that remote Fabry-Perot minima are ignored.
    """
    i_pk = int(np.argmax(values))
    w_pk = omega[i_pk]
    if dip_search_halfwidth is None:
        dip_search_halfwidth = (omega[-1] - omega[0]) / 3.0
    mask = np.abs(omega - w_pk) <= dip_search_halfwidth
    masked = np.where(mask, values, np.inf)
    return w_pk, omega[int(np.argmin(masked))]
