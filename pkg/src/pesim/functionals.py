"""Diagnostic functionals evaluated on simulation states.

Everything here is a pure midpoint-quadrature evaluation: total masses and the
asymptotic mass bound, the homogeneous steady states, the logarithmic
quasi-entropy F with its dissipation rate D, the coexistence pair (E1, D1),
the extinction pair (E2, D2), the gradient functional y used as a conditional
quasi-entropy, and the weak-form residual of a sampled trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grid import diff1_values, diff2_values, integrate_values
from .model import KineticParams, RegParams, State

__all__ = [
    "Regime",
    "SteadyStates",
    "DiagnosticsRecord",
    "steady_states",
    "m_infinity",
    "phi",
    "quasi_entropy_F",
    "dissipation_D",
    "entropy_E1",
    "dissipation_rate_D1",
    "entropy_E2",
    "dissipation_rate_D2",
    "conditional_y",
    "cross_entropy_productions",
    "CosineBumpTestFunction",
    "weak_residual",
    "diagnostics_record",
]

_trapz = getattr(np, "trapezoid", None) or np.trapz


class Regime(Enum):
    COEXISTENCE = "coexistence"
    EXTINCTION = "extinction"


@dataclass(frozen=True)
class SteadyStates:
    u_star: float
    v_star: float
    regime: Regime


def steady_states(kp: KineticParams) -> SteadyStates:
    """Attracting homogeneous state: coexistence iff lambda2 > a2*lambda1,
    otherwise the prey-extinction state (lambda1, 0); ties go to extinction."""
    if kp.lambda2 > kp.a2 * kp.lambda1:
        denom = 1.0 + kp.a1 * kp.a2
        return SteadyStates(
            (kp.lambda1 + kp.a1 * kp.lambda2) / denom,
            (kp.lambda2 - kp.a2 * kp.lambda1) / denom,
            Regime.COEXISTENCE,
        )
    return SteadyStates(kp.lambda1, 0.0, Regime.EXTINCTION)


def m_infinity(kp: KineticParams, omega_len: float) -> float:
    """Size of the L1 absorbing set that all trajectories eventually enter."""
    if not omega_len > 0.0:
        raise ValueError("omega_len must be positive")
    beta = max(kp.a1**2, 1.0)
    r = 1.0 / (2.0 * math.sqrt(3.0))
    return (
        omega_len / 2.0 * (kp.lambda1 + r + 1.0 + beta * kp.a2 * r) ** 2
        + omega_len / 2.0 * (kp.lambda2 + r + 1.0) ** 2 * beta
    )


def phi(xi_star: float, xi):
    """Bregman distance xi - xi_star - xi_star*ln(xi/xi_star) to xi_star; >= 0."""
    if not xi_star > 0.0:
        raise ValueError("xi_star must be positive")
    if np.any(np.asarray(xi) <= 0.0):
        raise ValueError("xi must be positive")
    return xi - xi_star - xi_star * np.log(xi / xi_star)


# ---------------------------------------------------------------------------
# entropy / dissipation functionals
# ---------------------------------------------------------------------------

def _require_positive(state: State):
    if state.u.min() <= 0.0 or state.v.min() <= 0.0:
        raise ValueError("state must be strictly positive")


def _quad(values, grid) -> float:
    return integrate_values(np.asarray(values), grid)


def quasi_entropy_F(state: State, kp: KineticParams, rp: RegParams) -> float:
    """Logarithmic quasi-entropy with the regularization's inverse-power tail."""
    _require_positive(state)
    g = state.grid
    u, v = state.u.values, state.v.values
    rho = kp.chi1 / kp.chi2

    def one(w, n):
        tail = rp.eps / ((3.0 - n) * (4.0 - n)) * _quad(w ** -(3.0 - n), g)
        return _quad(w * np.log(w), g) - _quad(w, g) + tail

    return one(u, rp.n1) + rho * one(v, rp.n2)


def dissipation_D(state: State, kp: KineticParams, rp: RegParams) -> float:
    """Dissipation rate paired with the quasi-entropy; nonnegative."""
    _require_positive(state)
    g = state.grid
    rho = kp.chi1 / kp.chi2

    def one(w, d, n):
        wx = diff1_values(w, g.dx)
        wxx = diff2_values(w, g.dx)
        return (
            d / 2.0 * _quad(wx**2 / w, g)
            + rp.eps * _quad(w ** (n - 1.0) * wxx**2, g)
            + d * rp.eps * _quad(wx**2 / w ** (5.0 - n), g)
        )

    return one(state.u.values, kp.d1, rp.n1) + rho * one(state.v.values, kp.d2, rp.n2)


def entropy_E1(state: State, kp: KineticParams, rp: RegParams) -> float:
    """Coexistence relative entropy; only defined when the prey persists."""
    _require_positive(state)
    ss = steady_states(kp)
    if ss.regime is not Regime.COEXISTENCE:
        raise ValueError("coexistence entropy undefined in the extinction regime")
    g = state.grid
    u, v = state.u.values, state.v.values
    a = kp.a1 / kp.a2
    return (
        _quad(phi(ss.u_star, u), g)
        + ss.u_star * rp.eps / 6.0 * _quad(u**-2, g)
        + a * _quad(phi(ss.v_star, v), g)
        + a * ss.v_star * rp.eps / 6.0 * _quad(v**-2, g)
    )


def dissipation_rate_D1(state: State, kp: KineticParams, rp: RegParams) -> float:
    """Dissipation rate paired with the coexistence entropy; nonnegative."""
    _require_positive(state)
    ss = steady_states(kp)
    g = state.grid
    u, v = state.u.values, state.v.values
    ux = diff1_values(u, g.dx)
    vx = diff1_values(v, g.dx)
    epow = rp.eps ** ((rp.alpha + 2.0) / 2.0)
    return (
        _quad(ux**2 / u**2, g)
        + _quad(vx**2 / v**2, g)
        + _quad((u - ss.u_star) ** 2, g)
        + _quad((v - ss.v_star) ** 2, g)
        + epow * _quad(u ** (-rp.alpha - 4.0) * ux**2, g)
        + epow * _quad(v ** (-rp.alpha - 4.0) * vx**2, g)
    )


def entropy_E2(state: State, kp: KineticParams, rp: RegParams) -> float:
    """Extinction entropy: relative entropy to lambda1 in u plus prey penalties."""
    _require_positive(state)
    g = state.grid
    u, v = state.u.values, state.v.values
    a = kp.a1 / kp.a2
    return (
        _quad(phi(kp.lambda1, u), g)
        + kp.lambda1 * rp.eps / 6.0 * _quad(u**-2, g)
        + a * _quad(v, g)
        + a / (2.0 * kp.lambda2) * _quad(v**2, g)
        + a * rp.eps / (2.0 * kp.lambda2) * _quad(1.0 / v, g)
    )


def dissipation_rate_D2(state: State, kp: KineticParams, rp: RegParams) -> float:
    """Dissipation rate paired with the extinction entropy; nonnegative."""
    _require_positive(state)
    g = state.grid
    u, v = state.u.values, state.v.values
    ux = diff1_values(u, g.dx)
    vx = diff1_values(v, g.dx)
    epow = rp.eps ** ((rp.alpha + 2.0) / 2.0)
    return (
        _quad(ux**2 / u**2, g)
        + _quad(vx**2, g)
        + _quad((u - kp.lambda1) ** 2, g)
        + _quad(v**3, g)
        + epow * _quad(u ** (-rp.alpha - 4.0) * ux**2, g)
        + epow * _quad(v ** (-rp.alpha - 3.0) * vx**2, g)
    )


def conditional_y(state: State, gamma: float = 1.0) -> float:
    """Gradient functional  int u_x^2 + gamma * int v_x^2  (gamma > 0)."""
    if not gamma > 0.0:
        raise ValueError("gamma must be positive")
    g = state.grid
    ux = diff1_values(state.u.values, g.dx)
    vx = diff1_values(state.v.values, g.dx)
    return _quad(ux**2, g) + gamma * _quad(vx**2, g)


def cross_entropy_productions(state: State, kp: KineticParams, rp: RegParams):
    """The two discrete cross-diffusion entropy productions.

    Testing the u-equation's taxis flux with the regularized log-entropy
    weight collapses the face factor h(u) * L''(u) to 1, and the same happens
    on the v side, so both productions reduce to the same face sum of
    u_x * v_x.  The pair returned here is (chi1 * S, -(chi1/chi2) * chi2 * S);
    in exact arithmetic they cancel, and in floating point they agree to a
    few ulp.
    """
    _require_positive(state)
    g = state.grid
    u, v = state.u.values, state.v.values
    ux = (u[1:] - u[:-1]) / g.dx
    vx = (v[1:] - v[:-1]) / g.dx
    s = g.dx * float((ux * vx).sum())
    return kp.chi1 * s, -(kp.chi1 / kp.chi2) * kp.chi2 * s


# ---------------------------------------------------------------------------
# weak-form residual
# ---------------------------------------------------------------------------

class CosineBumpTestFunction:
    """Separable test function cos(k*pi*s(x)) * psi(t) with s the unit-scaled
    coordinate and psi a smooth bump with psi(t_end) = psi'(t_end) = 0."""

    def __init__(self, mode: int, t_end: float, x_left: float = 0.0, x_right: float = 1.0):
        if mode < 0:
            raise ValueError("mode must be nonnegative")
        if not t_end > 0.0:
            raise ValueError("t_end must be positive")
        self.mode = mode
        self.t_end = t_end
        self.x_left = x_left
        self.length = x_right - x_left

    def _s(self, x):
        return (np.asarray(x) - self.x_left) / self.length

    def _psi(self, t):
        return math.cos(math.pi * t / (2.0 * self.t_end)) ** 2

    def _psi_t(self, t):
        return -math.pi / (2.0 * self.t_end) * math.sin(math.pi * t / self.t_end)

    def value(self, x, t):
        return np.cos(self.mode * math.pi * self._s(x)) * self._psi(t)

    def time_deriv(self, x, t):
        return np.cos(self.mode * math.pi * self._s(x)) * self._psi_t(t)

    def space_deriv(self, x, t):
        k = self.mode * math.pi / self.length
        return -k * np.sin(self.mode * math.pi * self._s(x)) * self._psi(t)


def weak_residual(sample_log, kp: KineticParams, test_fn) -> tuple[float, float]:
    """Absolute defects of the weak form of the limit system on a sampled run.

    Space integrals use the midpoint rule, time integrals the trapezoid rule
    over the (ordered) sample log; gradients come from the mirrored central
    difference.  The test function must vanish at the final sample time.
    """
    samples = list(sample_log)
    if len(samples) < 3:
        raise ValueError("need at least 3 samples")
    grid = samples[0].grid
    x = grid.centers
    times = np.array([s.t for s in samples])

    iu_pt = np.empty(len(samples))
    iv_pt = np.empty(len(samples))
    iu_flux = np.empty(len(samples))
    iv_flux = np.empty(len(samples))
    iu_react = np.empty(len(samples))
    iv_react = np.empty(len(samples))
    for k, s in enumerate(samples):
        u, v = s.u.values, s.v.values
        ux = diff1_values(u, grid.dx)
        vx = diff1_values(v, grid.dx)
        ph = np.asarray(test_fn.value(x, s.t))
        ph_t = np.asarray(test_fn.time_deriv(x, s.t))
        ph_x = np.asarray(test_fn.space_deriv(x, s.t))
        iu_pt[k] = _quad(u * ph_t, grid)
        iv_pt[k] = _quad(v * ph_t, grid)
        iu_flux[k] = _quad((-kp.d1 * ux + kp.chi1 * u * vx) * ph_x, grid)
        iv_flux[k] = _quad((-kp.d2 * vx - kp.chi2 * v * ux) * ph_x, grid)
        iu_react[k] = _quad(u * (kp.lambda1 - u + kp.a1 * v) * ph, grid)
        iv_react[k] = _quad(v * (kp.lambda2 - v - kp.a2 * u) * ph, grid)

    u0, v0 = samples[0].u.values, samples[0].v.values
    ph0 = np.asarray(test_fn.value(x, samples[0].t))
    lhs_u = -_trapz(iu_pt, times) - _quad(u0 * ph0, grid)
    lhs_v = -_trapz(iv_pt, times) - _quad(v0 * ph0, grid)
    rhs_u = _trapz(iu_flux, times) + _trapz(iu_react, times)
    rhs_v = _trapz(iv_flux, times) + _trapz(iv_react, times)
    return abs(lhs_u - rhs_u), abs(lhs_v - rhs_v)


# ---------------------------------------------------------------------------
# one sampled row of everything
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass_u: float
    mass_v: float
    F: float
    D: float
    E1: float | None
    D1: float | None
    E2: float
    D2: float
    y: float
    min_u: float
    min_v: float
    max_u: float
    max_v: float
    h1_u: float
    h1_v: float

    CSV_COLUMNS = (
        "t", "mass_u", "mass_v", "F", "D", "E1", "D1", "E2", "D2", "y",
        "min_u", "min_v", "max_u", "max_v", "h1_u", "h1_v",
    )


def diagnostics_record(state: State, kp: KineticParams, rp: RegParams,
                       gamma: float = 1.0) -> DiagnosticsRecord:
    """Evaluate every monitored functional on one state.

    In the extinction regime the coexistence pair (E1, D1) is undefined and
    reported as None (empty in CSV output) rather than infinity or NaN.
    """
    g = state.grid
    u, v = state.u.values, state.v.values
    coexist = steady_states(kp).regime is Regime.COEXISTENCE
    ux = diff1_values(u, g.dx)
    vx = diff1_values(v, g.dx)
    h1_u = _quad(ux**2, g)
    h1_v = _quad(vx**2, g)
    return DiagnosticsRecord(
        t=state.t,
        mass_u=_quad(u, g),
        mass_v=_quad(v, g),
        F=quasi_entropy_F(state, kp, rp),
        D=dissipation_D(state, kp, rp),
        E1=entropy_E1(state, kp, rp) if coexist else None,
        D1=dissipation_rate_D1(state, kp, rp) if coexist else None,
        E2=entropy_E2(state, kp, rp),
        D2=dissipation_rate_D2(state, kp, rp),
        y=h1_u + gamma * h1_v,
        min_u=state.u.min(),
        min_v=state.v.min(),
        max_u=state.u.max(),
        max_v=state.v.max(),
        h1_u=h1_u,
        h1_v=h1_v,
    )
