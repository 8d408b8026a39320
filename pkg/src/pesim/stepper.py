"""Time integration: linearly-implicit IMEX (default) and backward Euler with
damped Newton iteration, both backed by banded LU solves.

IMEX treats the stiff parts implicitly with coefficients frozen at the old
state (plain diffusion, the fourth-order thin-film term, and the singular
fast-diffusion correction); cross-diffusion fluxes and reactions are explicit.
That gives one banded solve per field per step.

The fully implicit scheme solves the backward-Euler residual
R(w) = w - w_old - dt * rhs(w) on the interleaved unknown vector
(u0, v0, u1, v1, ...) by damped Newton.  The Jacobian freezes the nonlinear
flux coefficients at the current iterate and differentiates through the
derivative factors and the reactions, which keeps the matrix banded with
half-bandwidth 5 -- matrices are not symmetric, so banded LU with partial
pivoting (LAPACK gbsv) does the solves.

Positivity is enforced by step rejection, never by clamping: clamped values
would silently break the entropy identities the diagnostics monitor.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import solve_banded

from .grid import Field
from .model import (
    KineticParams,
    ModelKind,
    RegParams,
    State,
    compute_rhs,
    diffusion_face_coeff,
    face_gradient,
    reaction_jacobian,
    reaction_terms,
    taxis_face_coeff,
    thinfilm_face_coeff,
)

__all__ = [
    "Scheme",
    "StepperConfig",
    "StepOutcome",
    "StepperFailure",
    "step",
    "run_until",
]


class Scheme(Enum):
    IMEX = "imex"
    FULLY_IMPLICIT = "fully_implicit"


@dataclass(frozen=True)
class StepperConfig:
    dt_init: float = 1e-3
    dt_min: float = 1e-10
    dt_max: float = 5e-2
    scheme: Scheme = Scheme.IMEX
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    positivity_floor: float = 1e-12
    safety: float = 0.5
    growth: float = 1.2

    def __post_init__(self):
        if not (0.0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if self.newton_tol <= 0.0 or self.positivity_floor <= 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.safety < 1.0:
            raise ValueError("safety must lie in (0, 1)")
        if not self.growth > 1.0:
            raise ValueError("growth must exceed 1")


@dataclass(frozen=True)
class StepOutcome:
    state: State
    dt_used: float
    accepted: bool
    newton_iters: int
    min_u: float
    min_v: float


class StepperFailure(RuntimeError):
    """dt underflowed dt_min after repeated rejections; carries the last valid state."""

    def __init__(self, message, last_state: State, samples=None):
        super().__init__(message)
        self.last_state = last_state
        self.samples = list(samples) if samples is not None else []


# ---------------------------------------------------------------------------
# banded assembly helpers
#
# A band dictionary maps offset k to a length-n array d with d[i] = A[i, i+k]
# (zero-padded where the column falls outside the matrix).
# ---------------------------------------------------------------------------

def _diags_to_ab(diags: dict, l: int, u: int, n: int) -> np.ndarray:
    ab = np.zeros((l + u + 1, n))
    for g, d in diags.items():
        if g >= 0:
            ab[u - g, g:n] = d[: n - g]
        else:
            ab[u - g, : n + g] = d[-g:]
    return ab


def _tri_bands(sigma: float, c_face: np.ndarray, dx: float):
    """Bands of w -> sigma * div(c_face * w_x) for a face coefficient with zero ends."""
    s = sigma / (dx * dx)
    lo = s * c_face[:-1]
    di = -s * (c_face[:-1] + c_face[1:])
    up = s * c_face[1:]
    return {-1: lo, 0: di, 1: up}


def _penta_bands(tf_face: np.ndarray, dx: float):
    """Bands of w -> -div(tf_face * w_xxx) with w_xxx the face difference of the
    mirrored cell second derivative (tf_face carries the eps*m4 coefficient)."""
    n = tf_face.shape[0] - 1
    inv2 = 1.0 / (dx * dx)
    m = tf_face * inv2  # combiner weights, boundary entries are zero
    tl = m[:-1]
    td = -(m[:-1] + m[1:])
    tu = m[1:]
    # mirrored cell second-derivative bands
    zl = np.full(n, inv2)
    zl[0] = 0.0
    zd = np.full(n, -2.0 * inv2)
    zd[0] = -inv2
    zd[-1] = -inv2
    zu = np.full(n, inv2)
    zu[-1] = 0.0
    # band product P = T @ Z, then negate
    p_m2 = np.zeros(n)
    p_m1 = np.zeros(n)
    p_0 = td * zd
    p_p1 = np.zeros(n)
    p_p2 = np.zeros(n)
    p_m2[1:] = tl[1:] * zl[:-1]
    p_m1[1:] = tl[1:] * zd[:-1] + td[1:] * zl[1:]
    p_0[1:] += tl[1:] * zu[:-1]
    p_0[:-1] += tu[:-1] * zl[1:]
    p_p1[:-1] = td[:-1] * zu[:-1] + tu[:-1] * zd[1:]
    p_p2[:-2] = tu[:-2] * zu[1:-1]
    return {-2: -p_m2, -1: -p_m1, 0: -p_0, 1: -p_p1, 2: -p_p2}


def _merge_bands(*dicts):
    out = {}
    for d in dicts:
        for k, arr in d.items():
            if k in out:
                out[k] = out[k] + arr
            else:
                out[k] = arr.copy()
    return out


def _implicit_operator_bands(w, dx, d_coeff, n_exp, rp, kind):
    """Bands of the stiff linear-in-highest-derivative operator for one field."""
    bands = _tri_bands(1.0, diffusion_face_coeff(w, d_coeff, rp, kind), dx)
    if kind is ModelKind.REGULARIZED:
        bands = _merge_bands(bands, _penta_bands(thinfilm_face_coeff(w, n_exp, rp), dx))
    return bands


# ---------------------------------------------------------------------------
# IMEX scheme
# ---------------------------------------------------------------------------

def _imex_advance(u, v, dx, dt, kp, rp, kind):
    ux = face_gradient(u, dx)
    vx = face_gradient(v, dx)
    ru, rv = reaction_terms(u, v, kp, rp, kind)

    flux_xu = -kp.chi1 * taxis_face_coeff(u, rp.n1, rp, kind) * vx
    flux_xv = kp.chi2 * taxis_face_coeff(v, rp.n2, rp, kind) * ux
    rhs_u = u + dt * ((flux_xu[1:] - flux_xu[:-1]) / dx + ru)
    rhs_v = v + dt * ((flux_xv[1:] - flux_xv[:-1]) / dx + rv)

    new = []
    for w, rhs, d_coeff, n_exp in ((u, rhs_u, kp.d1, rp.n1), (v, rhs_v, kp.d2, rp.n2)):
        bands = _implicit_operator_bands(w, dx, d_coeff, n_exp, rp, kind)
        diags = {k: -dt * arr for k, arr in bands.items()}
        diags[0] = diags[0] + 1.0
        width = 2 if kind is ModelKind.REGULARIZED else 1
        ab = _diags_to_ab(diags, width, width, w.shape[0])
        new.append(solve_banded((width, width), ab, rhs))
    return new[0], new[1]


# ---------------------------------------------------------------------------
# fully implicit scheme
# ---------------------------------------------------------------------------

_HALFWIDTH = 5  # interleaved stencil: radius 2 per field, two fields


def _interleave(u, v):
    w = np.empty(u.shape[0] * 2)
    w[0::2] = u
    w[1::2] = v
    return w


def _jacobian_ab(u, v, dx, dt, kp, rp, kind):
    n = u.shape[0]
    juu = _implicit_operator_bands(u, dx, kp.d1, rp.n1, rp, kind)
    jvv = _implicit_operator_bands(v, dx, kp.d2, rp.n2, rp, kind)
    juv = _tri_bands(-kp.chi1, taxis_face_coeff(u, rp.n1, rp, kind), dx)
    jvu = _tri_bands(kp.chi2, taxis_face_coeff(v, rp.n2, rp, kind), dx)
    druu, druv, drvu, drvv = reaction_jacobian(u, v, kp, rp, kind)
    juu[0] = juu[0] + druu
    jvv[0] = jvv[0] + drvv
    juv[0] = juv[0] + druv
    jvu[0] = jvu[0] + drvu

    diags = {}
    for g in range(-2 * _HALFWIDTH, 2 * _HALFWIDTH + 1):
        diags[g] = np.zeros(2 * n)
    for k, arr in juu.items():
        diags[2 * k][0::2] += -dt * arr
    for k, arr in jvv.items():
        diags[2 * k][1::2] += -dt * arr
    for k, arr in juv.items():
        diags[2 * k + 1][0::2] += -dt * arr
    for k, arr in jvu.items():
        diags[2 * k - 1][1::2] += -dt * arr
    diags[0] += 1.0
    diags = {g: d for g, d in diags.items() if -_HALFWIDTH <= g <= _HALFWIDTH}
    return _diags_to_ab(diags, _HALFWIDTH, _HALFWIDTH, 2 * n)


def _newton_advance(u, v, dx, dt, kp, rp, kind, cfg):
    """Backward-Euler solve; returns (u_new, v_new, iters) or None on failure."""

    def residual(uc, vc):
        du, dv = compute_rhs(uc, vc, dx, kp, rp, kind)
        return _interleave(uc - u - dt * du, vc - v - dt * dv)

    uc, vc = u.copy(), v.copy()
    res = residual(uc, vc)
    norm = float(np.abs(res).max())
    for it in range(cfg.newton_max_iter):
        if norm <= cfg.newton_tol:
            return uc, vc, it
        ab = _jacobian_ab(uc, vc, dx, dt, kp, rp, kind)
        try:
            delta = solve_banded((_HALFWIDTH, _HALFWIDTH), ab, res)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(delta)):
            return None
        du_step, dv_step = delta[0::2], delta[1::2]
        lam = 1.0
        for _ in range(10):
            ut, vt = uc - lam * du_step, vc - lam * dv_step
            if ut.min() > 0.0 and vt.min() > 0.0:
                res_t = residual(ut, vt)
                norm_t = float(np.abs(res_t).max())
                if np.isfinite(norm_t) and norm_t < norm:
                    break
            lam *= 0.5
        else:
            return None
        uc, vc, res, norm = ut, vt, res_t, norm_t
    if norm <= cfg.newton_tol:
        return uc, vc, cfg.newton_max_iter
    return None


# ---------------------------------------------------------------------------
# public stepping API
# ---------------------------------------------------------------------------

def step(state: State, dt: float, kp: KineticParams, rp: RegParams,
         kind: ModelKind, cfg: StepperConfig) -> StepOutcome:
    """Attempt one step of size dt; rejection is reported, retrying is the caller's job."""
    if not 0.0 < dt <= cfg.dt_max:
        raise ValueError("dt must lie in (0, dt_max]")
    u, v = state.u.values, state.v.values
    dx = state.grid.dx
    iters = 0
    if cfg.scheme is Scheme.IMEX:
        try:
            un, vn = _imex_advance(u, v, dx, dt, kp, rp, kind)
        except np.linalg.LinAlgError:
            return StepOutcome(state, dt, False, 0, np.nan, np.nan)
    else:
        result = _newton_advance(u, v, dx, dt, kp, rp, kind, cfg)
        if result is None:
            return StepOutcome(state, dt, False, cfg.newton_max_iter, np.nan, np.nan)
        un, vn, iters = result

    if not (np.all(np.isfinite(un)) and np.all(np.isfinite(vn))):
        return StepOutcome(state, dt, False, iters, np.nan, np.nan)
    min_u, min_v = float(un.min()), float(vn.min())
    if min_u <= cfg.positivity_floor or min_v <= cfg.positivity_floor:
        return StepOutcome(state, dt, False, iters, min_u, min_v)
    grid = state.grid
    new_state = State(state.t + dt, Field(grid, un), Field(grid, vn))
    return StepOutcome(new_state, dt, True, iters, min_u, min_v)


def run_until(state: State, t_end: float, kp: KineticParams, rp: RegParams,
              kind: ModelKind, cfg: StepperConfig, sample_every: float,
              on_sample=None):
    """Advance to t_end with adaptive dt; returns (final state, sample log).

    Samples are taken at the start and then at the first step boundary after
    each multiple of sample_every; the final state is always sampled.  A dt
    underflow below dt_min raises StepperFailure carrying the partial log.
    """
    if t_end < state.t:
        raise ValueError("t_end must not precede state.t")

    def emit(s):
        samples.append(s)
        if on_sample is not None:
            on_sample(s)

    samples: list[State] = []
    emit(state)
    tol_t = 1e-9 * max(1.0, abs(t_end))
    if t_end <= state.t + tol_t:
        return state, samples

    next_sample = state.t + sample_every
    dt = min(max(cfg.dt_init, cfg.dt_min), cfg.dt_max)
    while state.t < t_end - tol_t:
        dt_try = min(dt, t_end - state.t)
        out = step(state, dt_try, kp, rp, kind, cfg)
        if out.accepted:
            state = out.state
            if state.t >= next_sample - tol_t:
                emit(state)
                while next_sample <= state.t + tol_t:
                    next_sample += sample_every
            dt = min(dt * cfg.growth, cfg.dt_max)
        else:
            dt = dt * cfg.safety
            if dt < cfg.dt_min:
                raise StepperFailure(
                    f"dt underflow below dt_min={cfg.dt_min} at t={state.t}",
                    last_state=state, samples=samples,
                )
    if samples[-1].t < state.t:
        emit(state)
    return state, samples
