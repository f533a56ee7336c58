"""Pressure laws, constitutive relations, and energy diagnostics.

The barotropic pressure p(rho) induces a convex potential P with
rho * P''(rho) = p'(rho); its derivative P' is the static part of the total
specific enthalpy h = eps^2 w^2 / 2 + P'(rho).  The functionals below
(energy, dissipation, relative energy, weighted norms) are evaluated on
discrete states with a fixed 3-point Gauss rule per element, which integrates
every polynomial integrand of the scheme exactly; only |w|^3-type integrands
on elements where the velocity changes sign are approximate.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigurationError, DomainError
from .mesh import GAUSS3


# ---------------------------------------------------------------------------
# Pressure laws
# ---------------------------------------------------------------------------

class IsothermalLaw:
    """p(rho) = c^2 rho with sound speed c; all derived quantities closed form."""

    def __init__(self, c=1.0):
        if c <= 0:
            raise ConfigurationError(f"sound speed must be positive, got {c}")
        self.c = float(c)

    def pressure(self, rho):
        return self.c ** 2 * rho

    def pressure_prime(self, rho):
        return self.c ** 2 * np.ones_like(np.asarray(rho, dtype=float))

    def potential(self, rho):
        return self.c ** 2 * rho * np.log(rho)

    def potential_prime(self, rho):
        return self.c ** 2 * (np.log(rho) + 1.0)

    def potential_second(self, rho):
        return self.c ** 2 / rho

    def potential_prime_inverse(self, value):
        return math.exp(value / self.c ** 2 - 1.0)


class BarotropicLaw:
    """User-supplied smooth monotone pressure p(rho).

    The potential P(rho) = rho * int_1^rho p(r)/r^2 dr and its derivative are
    obtained by adaptive quadrature to 1e-12; P'' = p'(rho)/rho, with p'
    supplied or approximated by fourth-order central differences.
    """

    def __init__(self, p, p_prime=None):
        self._p = p
        self._dp = p_prime

    def pressure(self, rho):
        return np.vectorize(self._p, otypes=[float])(rho)

    def pressure_prime(self, rho):
        if self._dp is not None:
            return np.vectorize(self._dp, otypes=[float])(rho)

        def fd(r):
            s = 1e-3 * (1.0 + abs(r))
            return (
                -self._p(r + 2 * s) + 8 * self._p(r + s) - 8 * self._p(r - s) + self._p(r - 2 * s)
            ) / (12 * s)

        return np.vectorize(fd, otypes=[float])(rho)

    def _integral(self, rho):
        val, _ = quad(lambda r: self._p(r) / r ** 2, 1.0, rho, epsabs=1e-12, epsrel=1e-12)
        return val

    def potential(self, rho):
        return np.vectorize(lambda r: r * self._integral(r), otypes=[float])(rho)

    def potential_prime(self, rho):
        # P'(rho) = p(rho)/rho + int_1^rho p(r)/r^2 dr
        return np.vectorize(
            lambda r: self._p(r) / r + self._integral(r), otypes=[float]
        )(rho)

    def potential_second(self, rho):
        return self.pressure_prime(rho) / np.asarray(rho, dtype=float)

    def potential_prime_inverse(self, value, bracket=(1e-8, 1e8)):
        from scipy.optimize import brentq

        return brentq(
            lambda r: float(self.potential_prime(r)) - value,
            bracket[0],
            bracket[1],
            xtol=1e-15,
            rtol=8.9e-16,
        )


# ---------------------------------------------------------------------------
# Parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingParams:
    """Dimensionless single-pipe parameters after rescaling.

    `epsilon` is the Mach-like scaling parameter (0 gives the parabolic
    limit); `eps_bar` is the upper bound the admissibility analysis uses.
    """

    epsilon: float
    gamma: float = 1.0
    area: float = 1.0
    ell: float = 1.0
    eps_bar: float = None

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigurationError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.gamma <= 0 or self.area <= 0 or self.ell <= 0:
            raise ConfigurationError("gamma, area and length must be positive")
        if self.eps_bar is None:
            object.__setattr__(self, "eps_bar", max(self.epsilon, 0.0))
        elif self.epsilon > self.eps_bar:
            raise ConfigurationError(
                f"epsilon {self.epsilon} exceeds its bound {self.eps_bar}"
            )


@dataclass(frozen=True)
class PhysicalParams:
    """Pipe data in physical units, before rescaling."""

    length: float          # m
    diameter: float        # m
    friction_lambda: float # dimensionless Darcy friction factor
    sound_speed: float     # m/s
    horizon: float         # s

    def __post_init__(self):
        for name in ("length", "diameter", "friction_lambda", "sound_speed", "horizon"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")


@dataclass(frozen=True)
class AdmissibleBounds:
    """Density/velocity box of the reference solution plus the enlarged
    admissible box [2 rho_min/3, 3 rho_max/2] x [-3 w_max/2, 3 w_max/2] on
    which the energy is uniformly convex (factor pair 2/3, 3/2)."""

    rho_min: float
    rho_max: float
    w_max: float
    eps_bar: float = 0.0
    enlarge_lo: float = 2.0 / 3.0
    enlarge_hi: float = 3.0 / 2.0

    def __post_init__(self):
        if not (0 < self.rho_min <= self.rho_max) or self.w_max <= 0:
            raise ConfigurationError("bounds must satisfy 0 < rho_min <= rho_max, w_max > 0")
        if self.eps_bar < 0:
            raise ConfigurationError("eps_bar must be >= 0")

    @property
    def rho_range(self):
        return (self.enlarge_lo * self.rho_min, self.enlarge_hi * self.rho_max)

    @property
    def w_range(self):
        return (-self.enlarge_hi * self.w_max, self.enlarge_hi * self.w_max)

    def subsonic_margin(self, law, samples=10000):
        """min over the enlarged density range of rho*P''(rho) - 4 eps_bar^2 w_max^2."""
        lo, hi = self.rho_range
        rho = np.linspace(lo, hi, samples)
        return float(np.min(rho * law.potential_second(rho))) - 4.0 * self.eps_bar ** 2 * self.w_max ** 2

    def check_subsonic(self, law):
        if self.subsonic_margin(law) < 0:
            raise ConfigurationError(
                "subsonic condition violated: rho*P''(rho) < 4*eps_bar^2*w_max^2 "
                "somewhere on the enlarged admissible density range"
            )


def max_admissible_eps_bar(law, bounds, samples=10000):
    """Largest eps_bar for which the subsonic condition holds for these bounds."""
    lo, hi = bounds.rho_range
    rho = np.linspace(lo, hi, samples)
    m = float(np.min(rho * law.potential_second(rho)))
    return math.sqrt(m) / (2.0 * bounds.w_max)


# ---------------------------------------------------------------------------
# Pointwise constitutive relations
# ---------------------------------------------------------------------------

def _check_rho(rho):
    r = np.asarray(rho, dtype=float)
    if np.any(r <= 0.0):
        bad = float(np.min(r))
        raise DomainError(f"non-positive density {bad}")
    return r


def enthalpy(law, eps, area, rho, m):
    """Total specific enthalpy eps^2 m^2/(2 a^2 rho^2) + P'(rho).

    For eps = 0 the kinetic term is omitted exactly.
    """
    r = _check_rho(rho)
    static = law.potential_prime(r)
    if eps == 0.0:
        return static if np.ndim(rho) else float(static)
    out = eps ** 2 * np.asarray(m, dtype=float) ** 2 / (2.0 * area ** 2 * r ** 2) + static
    return out if np.ndim(rho) or np.ndim(m) else float(out)


def velocity(area, rho, m):
    """Flow velocity w = m / (a rho)."""
    r = _check_rho(rho)
    out = np.asarray(m, dtype=float) / (area * r)
    return out if np.ndim(rho) or np.ndim(m) else float(out)


# ---------------------------------------------------------------------------
# Quadrature helpers on discrete states
# ---------------------------------------------------------------------------

_G, _W = GAUSS3


def _w_gauss(rho, m, area):
    """Velocity at the Gauss points of every element, shape (cells, points)."""
    mg = np.outer(m[:-1], 1.0 - _G) + np.outer(m[1:], _G)
    return mg / (area * rho[:, None]), mg


def _edge_arrays(state, edge_index):
    rho = state.rho(edge_index)
    m = state.m(edge_index)
    if np.any(rho <= 0.0):
        e = state.topo.edges[edge_index]
        j = int(np.argmin(rho))
        raise DomainError(f"non-positive density {rho[j]} in cell {j} of edge {e.name}")
    return rho, m


def energy(state, law, eps):
    """Total energy: sum over edges of int a (eps^2 rho w^2 / 2 + P(rho)) dx."""
    total = 0.0
    for i, e in enumerate(state.topo.edges):
        rho, m = _edge_arrays(state, i)
        h = state.topo.grid(i).h
        pot = law.potential(rho)
        cell = pot.copy()
        if eps != 0.0:
            wg, _ = _w_gauss(rho, m, e.area)
            cell = cell + 0.5 * eps ** 2 * rho * ((wg * wg) @ _W)
        total += e.area * h * float(np.sum(cell))
    return total


def dissipation(state):
    """Friction power: sum over edges of int a gamma rho |w|^3 dx >= 0."""
    total = 0.0
    for i, e in enumerate(state.topo.edges):
        rho, m = _edge_arrays(state, i)
        h = state.topo.grid(i).h
        wg, _ = _w_gauss(rho, m, e.area)
        total += e.area * e.gamma * h * float(np.sum(rho * (np.abs(wg) ** 3 @ _W)))
    return total


def relative_energy(state, ref, law, eps):
    """Bregman distance of the energy between `state` and `ref`.

    H(u) - H(u_ref) - <H'(u_ref), u - u_ref> with variational derivative
    H' = (a h, eps^2 m).  Nonnegative whenever both states are admissible.
    """
    state.check_same_grid(ref)
    total = energy(state, law, eps) - energy(ref, law, eps)
    for i, e in enumerate(state.topo.edges):
        rho, m = _edge_arrays(state, i)
        rho_r, m_r = _edge_arrays(ref, i)
        h = state.topo.grid(i).h
        wg_r, mg_r = _w_gauss(rho_r, m_r, e.area)
        h_gp = law.potential_prime(rho_r)[:, None] + 0.5 * eps ** 2 * wg_r * wg_r
        # <a h_ref, rho - rho_ref>: density difference is constant per cell
        total -= e.area * h * float(np.sum((rho - rho_r) * (h_gp @ _W)))
        if eps != 0.0:
            wg, _ = _w_gauss(rho, m, e.area)
            total -= eps ** 2 * h * float(np.sum((mg_r * (wg - wg_r)) @ _W))
    return total


def relative_dissipation(state, ref):
    """int gamma a rho_ref |w - w_ref|^2 (|w_ref| + |w|) / 4 dx >= 0."""
    state.check_same_grid(ref)
    total = 0.0
    for i, e in enumerate(state.topo.edges):
        rho, m = _edge_arrays(state, i)
        rho_r, m_r = _edge_arrays(ref, i)
        h = state.topo.grid(i).h
        wg, _ = _w_gauss(rho, m, e.area)
        wg_r, _ = _w_gauss(rho_r, m_r, e.area)
        integ = (wg - wg_r) ** 2 * (np.abs(wg_r) + np.abs(wg))
        total += 0.25 * e.gamma * e.area * h * float(np.sum(rho_r * (integ @ _W)))
    return total


def eps_norm(state, ref, eps):
    """Weighted distance (||rho_diff||_L2^2 + eps^2 ||w_diff||_L2^2)^(1/2).

    For eps = 0 this is exactly the L2 norm of the density difference.
    """
    state.check_same_grid(ref)
    acc = 0.0
    for i, e in enumerate(state.topo.edges):
        rho, m = _edge_arrays(state, i)
        rho_r, m_r = _edge_arrays(ref, i)
        h = state.topo.grid(i).h
        d = rho - rho_r
        acc += h * float(np.sum(d * d))
        if eps != 0.0:
            wg, _ = _w_gauss(rho, m, e.area)
            wg_r, _ = _w_gauss(rho_r, m_r, e.area)
            dw = wg - wg_r
            acc += eps ** 2 * h * float(np.sum((dw * dw) @ _W))
    return math.sqrt(acc)


def eps_inf_norm(state, ref, eps):
    """Weighted sup distance ||rho_diff||_inf + eps ||w_diff||_inf.

    Velocities are piecewise linear per element, so their extrema sit at
    element endpoints.
    """
    state.check_same_grid(ref)
    rho_max = 0.0
    w_max = 0.0
    for i, e in enumerate(state.topo.edges):
        rho, m = _edge_arrays(state, i)
        rho_r, m_r = _edge_arrays(ref, i)
        rho_max = max(rho_max, float(np.max(np.abs(rho - rho_r))))
        if eps != 0.0:
            wl = m[:-1] / (e.area * rho) - m_r[:-1] / (e.area * rho_r)
            wr = m[1:] / (e.area * rho) - m_r[1:] / (e.area * rho_r)
            w_max = max(w_max, float(np.max(np.abs(wl))), float(np.max(np.abs(wr))))
    return rho_max + eps * w_max


def convexity_constant(law, bounds, area_min):
    """Uniform convexity constant of the energy on the admissible box.

    alpha = min(area_min * c_P / 4, area_min * rho_min / 6) with
    c_P = inf P'' over the enlarged density range, found by dense sampling.
    Requires the subsonic condition to hold for the stored eps_bar.
    """
    bounds.check_subsonic(law)
    lo, hi = bounds.rho_range
    c_p = float(np.min(law.potential_second(np.linspace(lo, hi, 10000))))
    return min(area_min * c_p / 4.0, area_min * bounds.rho_min / 6.0)


# ---------------------------------------------------------------------------
# Admissibility classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    edge: str
    kind: str       # "rho_low" | "rho_high" | "velocity"
    index: int      # cell index (rho) or element endpoint node index (w)
    value: float
    limit: float


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    violations: tuple

    def __bool__(self):
        return self.admissible


def check_admissible(state, bounds):
    """Classify a state against the enlarged admissible box.

    Densities are checked cellwise, velocities at element endpoints (where
    the per-element linear velocity attains its extrema).  The box is closed:
    values exactly on the boundary are admissible.
    """
    rho_lo, rho_hi = bounds.rho_range
    w_hi = bounds.enlarge_hi * bounds.w_max
    violations = []
    for i, e in enumerate(state.topo.edges):
        rho = state.rho(i)
        m = state.m(i)
        for j in np.flatnonzero(rho < rho_lo):
            violations.append(Violation(e.name, "rho_low", int(j), float(rho[j]), rho_lo))
        for j in np.flatnonzero(rho > rho_hi):
            violations.append(Violation(e.name, "rho_high", int(j), float(rho[j]), rho_hi))
        if np.all(rho > 0):
            wl = np.abs(m[:-1] / (e.area * rho))
            wr = np.abs(m[1:] / (e.area * rho))
            for j in np.flatnonzero((wl > w_hi) | (wr > w_hi)):
                violations.append(
                    Violation(e.name, "velocity", int(j), float(max(wl[j], wr[j])), w_hi)
                )
    return AdmissibilityReport(not violations, tuple(violations))
