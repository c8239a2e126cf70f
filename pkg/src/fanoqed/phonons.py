"""Phonon environment of the solid-state emitter.

Super-ohmic spectral density with Gaussian cutoff,
J_P(nu) = alpha nu^3 exp(-nu^2/nu_c^2), thermal correlation function

    phi(tau) = int_0^inf dnu J_P(nu)/nu^2 [coth(beta nu/2) cos(nu tau)
                                           - i sin(nu tau)],

Franck-Condon factor B0 = exp(-phi(0)/2) and the polaron-frame correlation
functions Lambda_X = B0^2 (e^phi + e^-phi - 2)/2, Lambda_Y =
B0^2 (e^phi - e^-phi)/2.  The nu -> 0 limit of the integrand is finite
(2 alpha / beta for the thermal part), so plain Gauss-Legendre quadrature
on [0, 8 nu_c] converges spectrally; the cutoff tail beyond is < 1e-14 of
the peak.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError
from .units import HBAR_MEV_PS, thermal_beta

NU_SUPPORT_FACTOR = 8.0        # integrate J_P over [0, 8 nu_c]
PHI_DECAY_THRESHOLD = 1e-9     # |phi| below this fraction of phi(0) counts as decayed


@dataclass(frozen=True)
class PhononEnv:
    """Coupling strength alpha (1/meV^2), cutoff nu_c (meV), temperature (K)."""

    alpha: float
    nu_c: float
    temperature: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.nu_c <= 0:
            raise ValueError("nu_c must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0 K")

    @property
    def beta(self) -> float:
        return thermal_beta(self.temperature)


def phonon_sd(env: PhononEnv, nu):
    """Phonon spectral density J_P(nu) = alpha nu^3 exp(-nu^2/nu_c^2), nu >= 0."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0):
        raise ValueError("nu must be >= 0")
    return env.alpha * nu**3 * np.exp(-((nu / env.nu_c) ** 2))


@lru_cache(maxsize=4)
def _gl_panel(n_nodes: int = 64):
    return np.polynomial.legendre.leggauss(n_nodes)


def composite_gl_nodes(a: float, b: float, n_panels: int,
                       nodes_per_panel: int = 64):
    """Composite Gauss-Legendre rule on [a, b]: spectral accuracy per panel,
    linear cost in the panel count."""
    x, w = _gl_panel(nodes_per_panel)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _phi_fixed(env: PhononEnv, tau: np.ndarray, n_panels: int) -> np.ndarray:
    nu, wq = composite_gl_nodes(0.0, NU_SUPPORT_FACTOR * env.nu_c, n_panels)
    if np.isinf(env.beta):
        coth = np.ones_like(nu)
    else:
        coth = 1.0 / np.tanh(0.5 * env.beta * nu)
    weight = env.alpha * nu * np.exp(-((nu / env.nu_c) ** 2))  # J_P / nu^2
    core = weight * (coth * np.cos(np.outer(tau, nu))
                     - 1j * np.sin(np.outer(tau, nu)))
    return core @ wq


def phi(env: PhononEnv, tau, rtol: float = 1e-11, max_panels: int = 1024):
    """Phonon cumulant phi(tau); phi(-tau) = conj(phi(tau)).

    Adaptive composite Gauss-Legendre with panel doubling; raises
    ConvergenceError if the budget is exhausted before the tolerance.
    """
    tau_in = np.asarray(tau, dtype=float)
    scalar = tau_in.ndim == 0
    tau_abs = np.abs(np.atleast_1d(tau_in))
    if env.alpha == 0.0:
        out = np.zeros(tau_abs.shape, dtype=complex)
        return out[0] if scalar else out
    # a 64-node panel resolves ~16 oscillation periods of cos(nu tau)
    periods = NU_SUPPORT_FACTOR * env.nu_c * float(np.max(tau_abs)) / (2 * np.pi)
    n = max(4, int(np.ceil(periods / 16.0)))
    # tolerance scale: decayed tails are judged against phi(0), not themselves
    if np.isinf(env.beta):
        phi0_scale = 0.5 * env.alpha * env.nu_c**2
    else:
        phi0_scale = 0.5 * env.alpha * env.nu_c**2 * max(
            1.0, 2.0 / (env.beta * env.nu_c))
    prev = _phi_fixed(env, tau_abs, n)
    while True:
        n *= 2
        if n > max_panels:
            raise ConvergenceError(
                f"phi quadrature did not reach rtol={rtol:g} within "
                f"{max_panels} panels")
        cur = _phi_fixed(env, tau_abs, n)
        scale = max(np.max(np.abs(cur)), phi0_scale, 1e-300)
        if np.max(np.abs(cur - prev)) <= rtol * scale:
            break
        prev = cur
    out = np.where(np.atleast_1d(tau_in) >= 0, cur, np.conj(cur))
    return out[0] if scalar else out


def franck_condon(env: PhononEnv) -> float:
    """B0 = exp(-phi(0)/2), the thermal expectation of the displacement operator."""
    return float(np.exp(-0.5 * np.real(phi(env, 0.0))))


def lambda_x(env: PhononEnv, tau):
    """Lambda_X(tau) = B0^2 [e^phi + e^-phi - 2] / 2."""
    p = phi(env, tau)
    return 0.5 * franck_condon(env) ** 2 * (np.exp(p) + np.exp(-p) - 2.0)


def lambda_y(env: PhononEnv, tau):
    """Lambda_Y(tau) = B0^2 [e^phi - e^-phi] / 2."""
    p = phi(env, tau)
    return 0.5 * franck_condon(env) ** 2 * (np.exp(p) - np.exp(-p))


def polaron_shift(env: PhononEnv, rtol: float = 1e-12) -> float:
    """int_0^inf J_P(nu)/nu dnu = alpha sqrt(pi) nu_c^3 / 4, by quadrature."""
    hi = NU_SUPPORT_FACTOR * env.nu_c

    def shot(m):
        nu, w = composite_gl_nodes(0.0, hi, m)
        return np.sum(w * env.alpha * nu**2 * np.exp(-((nu / env.nu_c) ** 2)))

    n = 2
    prev = shot(n)
    while n <= 256:
        n *= 2
        cur = shot(n)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return float(cur)
        prev = cur
    raise ConvergenceError("polaron shift quadrature did not converge")


@dataclass
class PhononCorrelations:
    """Bundled phonon inputs for the master equation.

    Carries B0 and vectorized callables for phi, Lambda_X, Lambda_Y, plus a
    decay time tau_max after which the correlations are negligible.
    """

    env: PhononEnv
    b0: float
    _phi0: float = field(default=0.0, repr=False)
    _tau_max: float | None = field(default=None, repr=False)

    @classmethod
    def from_env(cls, env: PhononEnv) -> "PhononCorrelations":
        phi0 = float(np.real(phi(env, 0.0))) if env.alpha > 0 else 0.0
        return cls(env=env, b0=float(np.exp(-0.5 * phi0)), _phi0=phi0)

    def phi(self, tau):
        return phi(self.env, tau)

    def lambda_x(self, tau):
        p = self.phi(tau)
        return 0.5 * self.b0**2 * (np.exp(p) + np.exp(-p) - 2.0)

    def lambda_y(self, tau):
        p = self.phi(tau)
        return 0.5 * self.b0**2 * (np.exp(p) - np.exp(-p))

    def decay_time(self) -> float:
        """Smallest tau with |phi| below PHI_DECAY_THRESHOLD * phi(0)."""
        if self._tau_max is None:
            if self.env.alpha == 0.0 or self._phi0 == 0.0:
                self._tau_max = 1.0 / self.env.nu_c
                return self._tau_max
            taus = np.linspace(0.0, 400.0 / self.env.nu_c, 4096)
            mags = np.abs(self.phi(taus))
            below = np.nonzero(mags < PHI_DECAY_THRESHOLD * self._phi0)[0]
            if len(below) == 0:
                self._tau_max = float(taus[-1])
            else:
                self._tau_max = float(taus[below[0]]) * 1.25 + 2.0 / self.env.nu_c
        return self._tau_max


def half_fourier_nodes(correlations: PhononCorrelations, rtol: float = 1e-8,
                       frequencies=None, refine: int = 1):
    """Quadrature nodes/weights for int_0^inf Lambda(tau) e^{-iE tau} dtau.

    Composite Gauss-Legendre over [0, tau_max] with the panel count set by
    the fastest oscillation among `frequencies`; the integrand beyond
    tau_max is below the Lambda decay threshold.  `refine` doubles the
    panel count for convergence studies.
    """
    tau_max = correlations.decay_time()
    f_max = 1.0 if frequencies is None else float(np.max(np.abs(frequencies)))
    periods = tau_max * max(f_max, 1e-12) / (2.0 * np.pi)
    n_panels = max(8, int(np.ceil(periods / 8.0))) * max(1, refine)
    return composite_gl_nodes(0.0, tau_max, n_panels)


def write_correlations_csv(correlations: PhononCorrelations, taus, path_prefix: str):
    """Dump phi, Lambda_X, Lambda_Y as 'tau_ps,re,im' CSV files."""
    taus = np.asarray(taus, dtype=float)
    for name, fn in (("phi", correlations.phi),
                     ("lambda_x", correlations.lambda_x),
                     ("lambda_y", correlations.lambda_y)):
        vals = np.atleast_1d(fn(taus))
        with open(f"{path_prefix}_{name}.csv", "w", encoding="utf-8") as fh:
            fh.write("tau_ps,re,im\n")
            for t, v in zip(taus, vals):
                fh.write(f"{t * HBAR_MEV_PS:.10e},{v.real:.10e},{v.imag:.10e}\n")
