"""Coupled-mode-theory S-matrix of a Fano mirror and cavity Green's functions.

A Fano mirror is a partially transmitting waveguide element (background
reflectivity r_B, transmittivity t_B = sqrt(1 - r_B^2)) side-coupled to a
nanocavity with resonance omega_F, waveguide coupling rates gamma_1/gamma_2
and intrinsic loss gamma_0.  All frequencies and rates are in meV (hbar = 1).
The closed forms are rational in frequency, so every function accepts complex
frequency for analytic continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError

DENOMINATOR_FLOOR = 1e-14


@dataclass(frozen=True)
class FanoMirror:
    """Physical parameters of the side-coupled nanocavity mirror."""

    r_b: float                 # background reflectivity, in [-1, 1]
    gamma_1: float             # nanocavity coupling to the left waveguide (meV)
    gamma_2: float             # nanocavity coupling to the right waveguide (meV)
    gamma_0: float             # intrinsic nanocavity loss (meV)
    omega_f: float             # nanocavity resonance (meV)
    parity: int = +1           # +1 or -1

    def __post_init__(self):
        if not -1.0 <= self.r_b <= 1.0:
            raise ValueError(f"r_b must lie in [-1, 1], got {self.r_b}")
        if self.gamma_1 <= 0 or self.gamma_2 <= 0:
            raise ValueError("gamma_1 and gamma_2 must be positive")
        if self.gamma_0 < 0:
            raise ValueError("gamma_0 must be >= 0")
        if self.parity not in (+1, -1):
            raise ValueError(f"parity must be +1 or -1, got {self.parity}")

    @classmethod
    def symmetric(cls, r_b, gamma_f, gamma_0, omega_f, parity=+1):
        """Mirror with equal couplings gamma_1 = gamma_2 = gamma_f."""
        return cls(r_b, gamma_f, gamma_f, gamma_0, omega_f, parity)

    @property
    def t_b(self) -> float:
        """Background transmittivity of the lossless element, t_b >= 0."""
        return math.sqrt(max(0.0, 1.0 - self.r_b**2))

    @property
    def chi(self) -> float:
        """Coupling asymmetry ratio gamma_2 / gamma_1."""
        return self.gamma_2 / self.gamma_1

    @property
    def gamma_t(self) -> float:
        """Total nanocavity loss rate gamma_1 + gamma_2 + gamma_0."""
        return self.gamma_1 + self.gamma_2 + self.gamma_0


@dataclass(frozen=True)
class CavityGeometry:
    """Waveguide cavity: free-spectral-range parameter and left mirror.

    fsr is Delta = c/(n L) in meV; the angular free spectral range of the
    resonator is pi * fsr.  r0 is the (complex) reflectivity of the
    conventional left mirror; the emitter sits at dimensionless position
    x_tilde in [-1, 1] with 0 the cavity midpoint.
    """

    fsr: float
    r0: complex = -1.0
    x_tilde: float = 0.0

    def __post_init__(self):
        if self.fsr <= 0:
            raise ValueError("fsr must be positive")
        if abs(self.r0) > 1.0 + 1e-12:
            raise ValueError(f"|r0| must be <= 1, got {abs(self.r0)}")
        if not -1.0 <= self.x_tilde <= 1.0:
            raise ValueError("x_tilde must lie in [-1, 1]")

    @property
    def phi1(self) -> float:
        """Left-mirror reflection phase, arg(r0)."""
        return float(np.angle(self.r0))


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Fano mirror r_F and t_F sampled on a frequency grid."""

    omega: np.ndarray
    r_f: np.ndarray
    t_f: np.ndarray


def mirror_phases(mirror: FanoMirror, chi: float | None = None):
    """Coupling phases of the Fano mirror for asymmetry ratio chi.

    Returns (theta_1, exp(i(theta_1 - theta_2))).  The square-root branch is
    fixed so that chi = 1 reduces to cos(2 theta_1) = -r_B and
    sin(2 theta_1) = P t_B for either sign of r_B.
    """
    if chi is None:
        chi = mirror.chi
    r_b, t_b, parity = mirror.r_b, mirror.t_b, mirror.parity
    if r_b == 0.0:
        raise ValueError("phase relations require r_b != 0")
    arg = 4.0 * chi - t_b**2 * (1.0 + chi) ** 2
    if arg < 0.0:
        raise ValueError(
            f"no physical phase solution: 4 chi - t_b^2 (1+chi)^2 = {arg} < 0")
    cos2t = 0.5 * (t_b**2 / r_b) * (chi - 1.0) - r_b
    sin2t = parity * t_b * math.sqrt(arg) / (2.0 * abs(r_b))
    theta_1 = 0.5 * math.atan2(sin2t, cos2t)
    e2it1 = complex(cos2t, sin2t)
    phase_factor = (e2it1 + r_b) / (1j * t_b * math.sqrt(chi))
    return theta_1, phase_factor


def _lorentzian_denominator(mirror, omega, chi):
    gamma_1 = mirror.gamma_1
    gamma_t = gamma_1 * (1.0 + chi) + mirror.gamma_0
    return -1j * (np.asarray(omega) - mirror.omega_f) + gamma_t


def fano_reflectivity(mirror: FanoMirror, omega, chi: float | None = None):
    """Complex reflectivity r_F(omega) of the Fano mirror.

    omega may be real or complex (analytic continuation); r_F is rational in
    omega with a single simple pole at omega_f - i gamma_t.
    """
    if chi is None:
        chi = mirror.chi
    theta_1, _ = mirror_phases(mirror, chi)
    e2it1 = np.exp(2j * theta_1)
    return mirror.r_b + 2.0 * mirror.gamma_1 * e2it1 / _lorentzian_denominator(
        mirror, omega, chi)


def fano_reflectivity_derivative(mirror: FanoMirror, omega, chi: float | None = None):
    """d r_F / d omega, used by Newton pole refinement."""
    if chi is None:
        chi = mirror.chi
    theta_1, _ = mirror_phases(mirror, chi)
    e2it1 = np.exp(2j * theta_1)
    return 2j * mirror.gamma_1 * e2it1 / _lorentzian_denominator(
        mirror, omega, chi) ** 2


def fano_transmittivity(mirror: FanoMirror, omega, chi: float | None = None):
    """Complex transmittivity t_F(omega) of the Fano mirror."""
    if chi is None:
        chi = mirror.chi
    _, phase_factor = mirror_phases(mirror, chi)
    gamma_1 = mirror.gamma_1
    gamma_2 = gamma_1 * chi
    # e^{i(theta_2 - theta_1)} = 1/phase_factor; |phase_factor| = 1 exactly
    numerator = 2.0 * (1j * mirror.t_b * gamma_2
                       - mirror.r_b * math.sqrt(gamma_1 * gamma_2) / phase_factor)
    return -1j * mirror.t_b + numerator / _lorentzian_denominator(mirror, omega, chi)


def scattering_amplitudes(mirror: FanoMirror, omega, chi: float | None = None):
    """Evaluate (r_F, t_F) on a frequency grid."""
    omega = np.asarray(omega, dtype=float)
    return ScatteringAmplitudes(
        omega=omega,
        r_f=fano_reflectivity(mirror, omega, chi),
        t_f=fano_transmittivity(mirror, omega, chi),
    )


def _guard_denominator(den, floor):
    if np.min(np.abs(den)) < floor:
        raise DegeneracyError(
            f"Green's-function denominator below floor {floor:g}")


def green_function(mirror: FanoMirror, geometry: CavityGeometry, omega,
                   chi: float | None = None, floor: float = DENOMINATOR_FLOOR):
    """Optical Green's function of the Fano cavity.

    G(omega) = (1 + r0 e^{i omega/Delta}) t_F(omega)
               / (1 - r0 r_F(omega) e^{2 i omega/Delta}).
    """
    omega = np.asarray(omega)
    phase = np.exp(1j * omega / geometry.fsr)
    r_f = fano_reflectivity(mirror, omega, chi)
    den = 1.0 - geometry.r0 * r_f * phase**2
    _guard_denominator(den, floor)
    return (1.0 + geometry.r0 * phase) * fano_transmittivity(mirror, omega, chi) / den


def fp_green_function(r: float, geometry: CavityGeometry, omega,
                      floor: float = DENOMINATOR_FLOOR):
    """Green's function of the equivalent Fabry-Perot cavity with right mirror r."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"right-mirror reflectivity must lie in [0, 1], got {r}")
    omega = np.asarray(omega)
    t = math.sqrt(max(0.0, 1.0 - r * r))
    if t == 0.0:
        # fully reflecting right mirror: no transmission at any frequency
        return np.zeros_like(omega, dtype=complex)
    phase = np.exp(1j * omega / geometry.fsr)
    den = 1.0 - geometry.r0 * r * phase**2
    _guard_denominator(den, floor)
    return (1.0 + geometry.r0 * phase) * t / den
