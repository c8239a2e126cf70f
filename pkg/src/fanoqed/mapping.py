"""Two-coupled-dissipative-mode representation of a structured LDOS.

The continuum seen by the emitter is replaced by two coupled bosonic modes
(frequencies omega_1/omega_2, couplings g and V0 e^{i varphi}) dissipating
into a common Markovian reservoir (rates kappa_1/kappa_2).  Its spectral
density is

    J'(w) = 2 g^2 Re[ (2i(w - w2) - k2) /
            (2(w - w2)(w - w1) + i k1 (w - w2) + i k2 (w - w1)
             + 2i V0 sqrt(k1 k2) cos(varphi) - 2 V0^2) ].

Matching the two complex poles of J' to the two cavity poles of J and the
imaginary part of the residue sum fixes five of the seven parameters; the
remaining two (the mode splitting delta_m = w2 - w1 and k2) are found by
least squares on the real axis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import minimum_filter
from scipy.optimize import minimize

from .errors import ConvergenceError, InfeasibleError, NumericsError
from .ldos import EmitterCoupling, default_grid, ldos_analytic, fp_ldos_analytic
from .scattering import (CavityGeometry, FanoMirror, fano_reflectivity,
                         fano_reflectivity_derivative)


@dataclass(frozen=True)
class ComplexPole:
    """Pole location z (meV) and residue (meV^2) of the continued LDOS."""

    z: complex
    residue: complex

    def __post_init__(self):
        if self.z.imag > 1e-9:
            raise ValueError(f"pole must lie in the lower half plane, got {self.z}")
        if not np.isfinite(self.residue):
            raise ValueError("residue must be finite")


@dataclass(frozen=True)
class MappedPair:
    """Parameters of the two-mode dissipative representation (meV units)."""

    g: float
    omega_1: float
    omega_2: float
    v0: float
    varphi: float
    kappa_1: float
    kappa_2: float

    def __post_init__(self):
        if self.g < 0 or self.v0 < 0:
            raise ValueError("g and v0 must be >= 0")
        if self.kappa_1 < -1e-12 or self.kappa_2 < -1e-12:
            raise ValueError("kappa_1 and kappa_2 must be >= 0")
        if not -1e-12 <= self.varphi <= np.pi + 1e-12:
            raise ValueError("varphi must lie in [0, pi]")

    @property
    def v_complex(self) -> complex:
        return self.v0 * np.exp(1j * self.varphi)


@dataclass
class FitOptions:
    """Settings for the two-parameter spectral-density fit."""

    coarse_points: int = 20          # log-spaced grid points per axis and sign
    nm_maxiter: int = 6000
    nm_xatol: float = 1e-10
    nm_fatol_rel: float = 1e-15      # f tolerance relative to the J^2 norm
    multistart: int = 3              # refine from this many best coarse points
    grid_points: int | None = None   # fit grid size; None = linewidth rule


@dataclass
class FitReport:
    """Result of the two-mode fit."""

    pair: MappedPair
    epsilon: float                   # integral of (J - J')^2 over the window (meV^3)
    epsilon_rel: float               # epsilon / integral of J^2
    window: tuple[float, float]
    poles: list[ComplexPole]         # targets (z, residue)
    delta_m: float                   # free parameter omega_2 - omega_1
    kappa_2: float                   # free parameter
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "g": self.pair.g,
            "omega1": self.pair.omega_1,
            "omega2": self.pair.omega_2,
            "V0": self.pair.v0,
            "varphi": self.pair.varphi,
            "kappa1": self.pair.kappa_1,
            "kappa2": self.pair.kappa_2,
            "epsilon": self.epsilon,
            "epsilon_rel": self.epsilon_rel,
            "window": list(self.window),
            "poles": [
                {"re": p.z.real, "im": p.z.imag,
                 "res_re": p.residue.real, "res_im": p.residue.imag}
                for p in self.poles
            ],
            "delta_m": self.delta_m,
            "kappa_2": self.kappa_2,
            "diagnostics": self.diagnostics,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# pole location
# ---------------------------------------------------------------------------

def cavity_pole_equation(mirror: FanoMirror, geometry: CavityGeometry):
    """Denominator D(z) = 1 - r0 r_F(z) e^{2iz/Delta} and its derivative."""

    def den(z):
        return 1.0 - geometry.r0 * fano_reflectivity(mirror, z) * np.exp(
            2j * np.asarray(z) / geometry.fsr)

    def dden(z):
        r_f = fano_reflectivity(mirror, z)
        drf = fano_reflectivity_derivative(mirror, z)
        return -geometry.r0 * (drf + 2j * r_f / geometry.fsr) * np.exp(
            2j * np.asarray(z) / geometry.fsr)

    return den, dden


def default_pole_seeds(mirror: FanoMirror, geometry: CavityGeometry,
                       center: float | None = None, n_seeds: int = 2,
                       min_required: int | None = None):
    """Seed guesses from a coarse scan of |D| over the complex window.

    The scan covers one angular free spectral range around `center`
    (default: the nanocavity resonance) down to Im z = -4 gamma_t, with a
    log-spaced imaginary grid that resolves near-real poles.
    """
    if center is None:
        center = mirror.omega_f
    if min_required is None:
        min_required = n_seeds
    den, _ = cavity_pole_equation(mirror, geometry)
    half = np.pi * geometry.fsr / 2.0
    x = np.linspace(center - half, center + half, 481)
    y = -np.geomspace(1e-6 * geometry.fsr, 4.0 * mirror.gamma_t, 281)
    z = x[None, :] + 1j * y[:, None]
    a = np.abs(den(z))
    local_min = (a == minimum_filter(a, size=7)) & (a < 0.5)
    ii, jj = np.where(local_min)
    if len(ii) < min_required:
        raise NumericsError(
            f"pole seed scan found {len(ii)} candidate minima, "
            f"needed {min_required}")
    order = np.argsort(a[ii, jj])
    return [complex(z[ii[k], jj[k]]) for k in order[:n_seeds]]


def _newton(den, dden, z0, avoid=None, tol=1e-12, max_iter=200):
    z = complex(z0)
    for _ in range(max_iter):
        d = den(z)
        if abs(d) < tol:
            return z
        dp = dden(z)
        if avoid is not None:
            # deflated iteration on D(z)/(z - avoid)
            d_defl = d / (z - avoid)
            dp = (dp - d_defl) / (z - avoid)
            d = d_defl
        if dp == 0 or not np.isfinite(dp):
            raise ConvergenceError("Newton derivative vanished or overflowed")
        z = z - d / dp
        if not np.isfinite(z):
            raise ConvergenceError("Newton iterate diverged")
    raise ConvergenceError(
        f"Newton failed to reach |D| < {tol:g} after {max_iter} iterations")


def find_poles(den, seeds, dden=None, tol=1e-12, max_iter=200,
               coincidence_tol=1e-9):
    """Two distinct roots of the denominator, refined by Newton iteration.

    `seeds` are two complex guesses inside the basins of the two poles; the
    second root is found with the first deflated to keep them distinct.
    Returns the roots ordered by real part.
    """
    if dden is None:
        h = 1e-6

        def dden(z):
            return (den(z + h) - den(z - h)) / (2.0 * h)

    z1 = _newton(den, dden, seeds[0], tol=tol, max_iter=max_iter)
    z2 = _newton(den, dden, seeds[1], avoid=z1, tol=tol, max_iter=max_iter)
    scale = max(abs(z1), abs(z2), 1.0)
    if abs(z1 - z2) < coincidence_tol * scale:
        raise NumericsError(f"coincident roots: z1 = {z1}, z2 = {z2}")
    return sorted([z1, z2], key=lambda z: z.real)


# ---------------------------------------------------------------------------
# residues
# ---------------------------------------------------------------------------

def default_contour_radius(z: complex, z_other: complex, fsr: float) -> float:
    """Circle radius enclosing only z.

    Besides the other tracked pole and the neighbouring free-spectral-range
    poles, the Schwarz-reflected continuation has a mirror pole at conj(z),
    a distance 2|Im z| away; the radius must stay below all three.
    """
    return min(abs(z - z_other), np.pi * fsr, 2.0 * abs(z.imag)) / 4.0


def residue_contour(j_analytic, z: complex, radius: float, n_points: int = 256,
                    check: bool = True, check_rtol: float = 1e-6) -> complex:
    """Residue of j_analytic at z by uniform quadrature on a circle.

    R = (Z0/N) sum_k J(z + Z0 e^{i phi_k}) e^{i phi_k}, spectrally accurate
    for the periodic integrand.  With check=True the quadrature is repeated
    at half the radius; disagreement signals an enclosure violation.
    """
    if n_points < 64:
        raise ValueError("n_points must be >= 64")
    if radius <= 0:
        raise ValueError("radius must be positive")

    def one(rad):
        phi = 2.0 * np.pi * np.arange(n_points) / n_points
        ring = z + rad * np.exp(1j * phi)
        vals = np.asarray(j_analytic(ring)) * np.exp(1j * phi)
        return rad / n_points * np.sum(vals)

    r_full = one(radius)
    if check:
        r_half = one(radius / 2.0)
        scale = max(abs(r_full), abs(r_half))
        if scale > 0 and abs(r_full - r_half) > check_rtol * scale:
            raise NumericsError(
                "contour enclosure violation: residues at radius and radius/2 "
                f"differ by {abs(r_full - r_half) / scale:.2e} relative")
    return r_full


def track_poles_and_residues(mirror: FanoMirror, geometry: CavityGeometry,
                             coupling: EmitterCoupling, x_tilde: float = 0.0,
                             center: float | None = None,
                             n_quad: int = 256) -> list[ComplexPole]:
    """Locate the two cavity poles of J and compute their residues."""
    den, dden = cavity_pole_equation(mirror, geometry)
    seeds = default_pole_seeds(mirror, geometry, center)
    z_minus, z_plus = find_poles(den, seeds, dden=dden)
    j_an = ldos_analytic(mirror, geometry, coupling, x_tilde)
    poles = []
    for z, other in ((z_minus, z_plus), (z_plus, z_minus)):
        radius = default_contour_radius(z, other, geometry.fsr)
        poles.append(ComplexPole(z, residue_contour(j_an, z, radius, n_quad)))
    return poles


# ---------------------------------------------------------------------------
# constraint equations
# ---------------------------------------------------------------------------

def constrained_pair(z_plus: complex, z_minus: complex, r_plus: complex,
                     r_minus: complex, delta_m: float, kappa_2: float,
                     degenerate_tol: float = 1e-9) -> MappedPair | None:
    """Solve the five constraint equations for given free (delta_m, kappa_2).

    Pins the two poles of J' to (z_plus, z_minus) and the imaginary part of
    the residue sum; returns None when the point is infeasible (kappa_1 < 0,
    V0^2 < 0, |cos varphi| > 1 or Im[R_+ + R_-] < 0).
    """
    kappa_sum = -2.0 * np.imag(z_plus + z_minus)
    kappa_1 = kappa_sum - kappa_2
    if kappa_2 < 0 or kappa_1 < 0:
        return None
    if kappa_2 < 1e-15 * kappa_sum:
        kappa_2 = 0.0
        kappa_1 = kappa_sum
    big_omega = 0.5 * np.real(z_plus + z_minus)
    diff_sq = (z_plus - z_minus) ** 2
    v0_sq = 0.25 * np.real(diff_sq) + (kappa_sum / 4.0) ** 2 - delta_m**2 / 4.0
    scale_sq = abs(diff_sq) + kappa_sum**2
    if v0_sq < -1e-14 * scale_sq:
        return None
    v0 = math.sqrt(max(v0_sq, 0.0))
    if v0 < 1e-14 * math.sqrt(scale_sq):
        v0 = 0.0
    target = (delta_m / 4.0) * (kappa_1 - kappa_2) - 0.25 * np.imag(diff_sq)
    denom = math.sqrt(max(kappa_1 * kappa_2, 0.0)) * v0
    if denom == 0.0:
        # cos(varphi) drops out of J'; accept only if its equation is trivial
        if abs(target) > degenerate_tol * max(1.0, abs(diff_sq)):
            return None
        cos_phi = 0.0
    else:
        cos_phi = target / denom
    if abs(cos_phi) > 1.0:
        return None
    residue_im_sum = np.imag(r_plus + r_minus)
    if residue_im_sum < 0:
        return None
    return MappedPair(
        g=math.sqrt(residue_im_sum),
        omega_1=big_omega - delta_m / 2.0,
        omega_2=big_omega + delta_m / 2.0,
        v0=v0,
        varphi=math.acos(np.clip(cos_phi, -1.0, 1.0)),
        kappa_1=kappa_1,
        kappa_2=kappa_2,
    )


# ---------------------------------------------------------------------------
# mapped spectral density and its analytic structure
# ---------------------------------------------------------------------------

def _mapped_half(pair: MappedPair, z):
    z = np.asarray(z)
    if pair.kappa_2 == 0.0 and pair.v0 == 0.0:
        # decoupled empty mode: the (z - omega_2) factor cancels exactly
        return 2j / (2.0 * (z - pair.omega_1) + 1j * pair.kappa_1)
    num = 2j * (z - pair.omega_2) - pair.kappa_2
    den = (2.0 * (z - pair.omega_2) * (z - pair.omega_1)
           + 1j * pair.kappa_1 * (z - pair.omega_2)
           + 1j * pair.kappa_2 * (z - pair.omega_1)
           + 2j * pair.v0 * math.sqrt(pair.kappa_1 * pair.kappa_2) * math.cos(pair.varphi)
           - 2.0 * pair.v0**2)
    return num / den


def mapped_spectral_density(pair: MappedPair, omega):
    """J'(omega); real for real omega, Schwarz continuation for complex omega."""
    omega = np.asarray(omega)
    if np.iscomplexobj(omega):
        half = _mapped_half(pair, omega)
        mirror = np.conj(_mapped_half(pair, np.conj(omega)))
        return pair.g**2 * (half + mirror)
    return 2.0 * pair.g**2 * np.real(_mapped_half(pair, omega))


def mapped_poles(pair: MappedPair) -> tuple[complex, complex]:
    """The two complex poles of J', ordered by real part."""
    kappa_sum = pair.kappa_1 + pair.kappa_2
    delta_m = pair.omega_2 - pair.omega_1
    big_omega = 0.5 * (pair.omega_1 + pair.omega_2)
    disc = (pair.v0**2 - (kappa_sum / 4.0) ** 2
            + 1j * delta_m * (pair.kappa_1 - pair.kappa_2) / 4.0
            + delta_m**2 / 4.0
            - 1j * math.sqrt(pair.kappa_1 * pair.kappa_2) * pair.v0
            * math.cos(pair.varphi))
    root = np.sqrt(complex(disc))
    centre = big_omega - 1j * kappa_sum / 4.0
    z_a, z_b = centre + root, centre - root
    return tuple(sorted((z_a, z_b), key=lambda z: z.real))


def mapped_residues(pair: MappedPair) -> tuple[complex, complex]:
    """Residues of the continued J' at mapped_poles(pair); their sum is i g^2."""
    z_a, z_b = mapped_poles(pair)
    res_a = pair.g**2 * (1j * (z_a - pair.omega_2) - pair.kappa_2 / 2.0) / (z_a - z_b)
    res_b = pair.g**2 * (1j * (z_b - pair.omega_2) - pair.kappa_2 / 2.0) / (z_b - z_a)
    return res_a, res_b


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def default_window(z_plus: complex, z_minus: complex, fsr: float):
    """Window centred on the pole centroid, one angular FSR wide."""
    centre = 0.5 * np.real(z_plus + z_minus)
    half = np.pi * fsr / 2.0
    return (centre - half, centre + half)


def fit(omega: np.ndarray, j_values: np.ndarray, poles: list[ComplexPole],
        window: tuple[float, float], options: FitOptions | None = None) -> FitReport:
    """Least-squares fit of the two free parameters (delta_m, kappa_2).

    omega/j_values sample the target spectral density; only the part inside
    `window` enters the error integral.  The poles (with residues) pin the
    other five parameters.  Deterministic: a fixed coarse grid over both
    signs of delta_m followed by Nelder-Mead refinement from the best coarse
    points.
    """
    options = options or FitOptions()
    z_plus, z_minus = poles[0].z, poles[1].z
    r_plus, r_minus = poles[0].residue, poles[1].residue
    lo, hi = window
    if not (lo < z_plus.real < hi and lo < z_minus.real < hi):
        raise InfeasibleError(
            f"fit window [{lo:g}, {hi:g}] must contain both pole real parts "
            f"({z_plus.real:g}, {z_minus.real:g})")
    mask = (omega >= lo) & (omega <= hi)
    if mask.sum() < 16:
        raise InfeasibleError("fit window contains fewer than 16 grid points")
    w = omega[mask]
    j_target = j_values[mask]
    j_norm = np.trapezoid(j_target**2, w)

    def objective(x):
        pair = constrained_pair(z_plus, z_minus, r_plus, r_minus, x[0], x[1])
        if pair is None:
            return np.inf
        with np.errstate(all="ignore"):
            value = np.trapezoid(
                (j_target - mapped_spectral_density(pair, w)) ** 2, w)
        return value if np.isfinite(value) else np.inf

    kappa_sum = -2.0 * np.imag(z_plus + z_minus)
    dm_hi = 2.0 * abs(np.real(z_plus - z_minus)) + kappa_sum
    dm_grid = np.geomspace(1e-3 * max(dm_hi, 1e-12), dm_hi, options.coarse_points)
    dm_grid = np.concatenate([-dm_grid[::-1], dm_grid])
    k2_grid = np.geomspace(1e-4 * kappa_sum, 0.9999 * kappa_sum,
                           options.coarse_points)
    candidates = [(dm, k2) for dm in dm_grid for k2 in k2_grid]
    # the feasible set can be a thin ridge around cos(varphi) = 0 when one
    # mode decouples; add its centre line (and the kappa_2 = 0 edge) so the
    # coarse stage cannot miss it
    im_diff_sq = np.imag((z_plus - z_minus) ** 2)
    for k2 in np.concatenate([[0.0], k2_grid]):
        kappa_1 = kappa_sum - k2
        if abs(kappa_1 - k2) > 1e-12 * kappa_sum:
            dm_star = im_diff_sq / (kappa_1 - k2)
            candidates.append((dm_star, k2))
    coarse = []
    for dm, k2 in candidates:
        coarse.append((objective((dm, k2)), dm, k2))
    coarse.sort(key=lambda t: (not np.isfinite(t[0]), t[0]))
    if not np.isfinite(coarse[0][0]):
        raise InfeasibleError("every coarse grid point is infeasible")

    best = None
    n_eval = 0
    fatol = max(options.nm_fatol_rel * j_norm, 1e-300)
    for _, dm, k2 in coarse[:options.multistart]:
        with np.errstate(invalid="ignore"):
            # infeasible probes return inf; silence the simplex bookkeeping
            res = minimize(objective, [dm, k2], method="Nelder-Mead",
                           options={"xatol": options.nm_xatol,
                                    "fatol": fatol,
                                    "maxiter": options.nm_maxiter,
                                    "maxfev": options.nm_maxiter})
        n_eval += res.nfev
        if best is None or res.fun < best.fun:
            best = res
    pair = constrained_pair(z_plus, z_minus, r_plus, r_minus, *best.x)
    if pair is None:
        raise InfeasibleError("optimizer terminated on an infeasible point")
    achieved = mapped_poles(pair)
    targets = sorted([z_plus, z_minus], key=lambda z: z.real)
    pole_err = max(abs(a - t) for a, t in zip(achieved, targets)) / max(
        abs(targets[0]), abs(targets[1]), 1.0)
    return FitReport(
        pair=pair,
        epsilon=float(best.fun),
        epsilon_rel=float(best.fun / j_norm) if j_norm > 0 else np.inf,
        window=(lo, hi),
        poles=list(poles),
        delta_m=float(best.x[0]),
        kappa_2=float(best.x[1]),
        diagnostics={"objective_evaluations": int(n_eval),
                     "pole_enforcement_rel_error": float(pole_err),
                     "grid_points_in_window": int(mask.sum())},
    )


def fit_cavity(mirror: FanoMirror, geometry: CavityGeometry,
               coupling: EmitterCoupling, x_tilde: float = 0.0,
               window: tuple[float, float] | None = None,
               options: FitOptions | None = None) -> FitReport:
    """Full mapping pipeline: poles, residues, grid, two-parameter fit."""
    options = options or FitOptions()
    poles = track_poles_and_residues(mirror, geometry, coupling, x_tilde)
    z_a, z_b = poles[0].z, poles[1].z
    if window is None:
        window = default_window(z_a, z_b, geometry.fsr)
    narrowest = min(2.0 * abs(z_a.imag), 2.0 * abs(z_b.imag))
    if options.grid_points is None:
        grid = default_grid(window, narrowest)
    else:
        grid = np.linspace(window[0], window[1], options.grid_points)
    j_an = ldos_analytic(mirror, geometry, coupling, x_tilde)
    j_values = np.real(j_an(grid))
    return fit(grid, j_values, poles, window, options)


# ---------------------------------------------------------------------------
# Fabry-Perot single-mode extraction
# ---------------------------------------------------------------------------

def fp_single_mode(r: float, geometry: CavityGeometry, coupling: EmitterCoupling,
                   near: float, n_quad: int = 256):
    """Single tracked pole of the Fabry-Perot LDOS near frequency `near`.

    For r0 = -1 the round-trip condition r0 r e^{2iz/Delta} = 1 has the
    closed-form roots z = pi Delta (k + 1/2) + i (Delta/2) ln r.  Returns
    (pole, kappa, g_coupling) with kappa = -2 Im z and g from the residue.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie strictly between 0 and 1")
    fsr = geometry.fsr
    log_r0r = np.log(complex(geometry.r0 * r))
    k = round((near / (np.pi * fsr)) - np.imag(log_r0r) / (2.0 * np.pi))
    z = 0.5 * fsr * (np.imag(log_r0r) + 2.0 * np.pi * k) + 0.5j * fsr * np.real(
        log_r0r)
    j_an = fp_ldos_analytic(r, geometry, coupling)
    radius = min(np.pi * fsr, 2.0 * abs(z.imag)) / 4.0
    residue = residue_contour(j_an, z, radius, n_quad)
    if np.imag(residue) < 0:
        raise InfeasibleError("Fabry-Perot residue has negative imaginary part")
    pole = ComplexPole(z, residue)
    return pole, -2.0 * z.imag, math.sqrt(np.imag(residue))
