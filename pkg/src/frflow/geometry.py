"""Fisher-Rao metric, gradients, Hessian form, distances and geodesics.

All operations accept plain arrays for densities/tangents; weights default
to ones (simplex).  The spherical picture underlies everything: u = sqrt(rho)
lives on the radius-1 sphere in the weighted L2 norm, the Fisher-Rao
distance is (twice) the arc length there, and geodesics are great circles.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np

from .density import DensityPair
from .divergences import FGenerator
from .errors import BlowUpError

BC_CLAMP_WARN = 1e-12
POSITIVITY_FLOOR = 1e-300


@dataclasses.dataclass(frozen=True)
class TangentField:
    """Potential psi generating the tangent sigma = rho (psi - E_rho[psi])."""

    psi: np.ndarray

    def __post_init__(self):
        arr = np.array(self.psi, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "psi", arr)

    def sigma(self, rho, weights=None) -> np.ndarray:
        rho = np.asarray(rho, float)
        w = _weights(weights, rho.size)
        psibar = float(np.sum(w * rho * self.psi))
        return rho * (self.psi - psibar)


@dataclasses.dataclass(frozen=True)
class GeodesicState:
    """One sample of the geodesic ODE trajectory."""

    t: float
    rho: np.ndarray
    psi: np.ndarray


def _weights(weights, size) -> np.ndarray:
    if weights is None:
        return np.ones(size)
    w = np.asarray(weights, float)
    if w.size != size:
        raise ValueError(f"weights size {w.size} does not match support {size}")
    return w


def _psi_values(psi) -> np.ndarray:
    if isinstance(psi, TangentField):
        return psi.psi
    return np.asarray(psi, float)


def metric(rho, sigma1, sigma2, weights=None) -> float:
    """g_rho(sigma1, sigma2) = sum_i w_i sigma1_i sigma2_i / rho_i."""
    rho = np.asarray(rho, float)
    s1 = np.asarray(sigma1, float)
    s2 = np.asarray(sigma2, float)
    if not (rho.shape == s1.shape == s2.shape):
        raise ValueError("metric arguments must share one support")
    w = _weights(weights, rho.size)
    return float(np.sum(w * s1 * s2 / rho))


def fr_gradient(gen: FGenerator, pair: DensityPair) -> np.ndarray:
    """Fisher-Rao gradient of D_f at rho: grad_i = rho_i (f'(x_i) - E_rho[f'])."""
    fpx = gen.fp(pair.x)
    mean = float(np.sum(pair.weights * pair.rho * fpx))
    return pair.rho * (fpx - mean)


def grad_norm_sq(gen: FGenerator, pair: DensityPair) -> float:
    """Squared Fisher-Rao gradient norm: sum_i w_i rho_i (f'(x_i) - E[f'])^2."""
    fpx = gen.fp(pair.x)
    mean = float(np.sum(pair.weights * pair.rho * fpx))
    return float(np.sum(pair.weights * pair.rho * (fpx - mean) ** 2))


def hessian_quadratic_form(gen: FGenerator, pair: DensityPair, psi) -> float:
    """g(Hess D_f sigma, sigma) for sigma = rho (psi - psibar).

    Discrete form:
        sum_i w_i [ f''(x_i) x_i rho_i d_i^2 + (1/2) rho_i d_i^2 (f'(x_i) - E_rho[f']) ]
    with d = psi - psibar.  Along the unit-speed geodesic through rho this
    equals d^2/dt^2 D_f exactly (factor one, no extra half).
    """
    psi_v = _psi_values(psi)
    w, rho, x = pair.weights, pair.rho, pair.x
    psibar = float(np.sum(w * rho * psi_v))
    d = psi_v - psibar
    fpx = gen.fp(x)
    mean = float(np.sum(w * rho * fpx))
    return float(
        np.sum(w * (gen.fpp(x) * x * rho * d**2 + 0.5 * rho * d**2 * (fpx - mean)))
    )


def bhattacharyya(rho0, rho1, weights=None) -> float:
    """sum_i w_i sqrt(rho0_i rho1_i), clamped into [0, 1].

    Round-off can push the sum past 1; clamping by more than BC_CLAMP_WARN
    indicates inconsistent inputs and emits a warning.
    """
    rho0 = np.asarray(rho0, float)
    rho1 = np.asarray(rho1, float)
    if rho0.shape != rho1.shape:
        raise ValueError("densities must share one support")
    w = _weights(weights, rho0.size)
    bc = float(np.sum(w * np.sqrt(rho0 * rho1)))
    if bc > 1.0 + BC_CLAMP_WARN or bc < -BC_CLAMP_WARN:
        warnings.warn(
            f"Bhattacharyya coefficient {bc!r} clamped beyond {BC_CLAMP_WARN:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return min(max(bc, 0.0), 1.0)


def fr_distance_sq(rho0, rho1, weights=None) -> float:
    """Squared spherical Hellinger distance 4 arccos^2(BC)."""
    bc = bhattacharyya(rho0, rho1, weights)
    return float(4.0 * np.arccos(bc) ** 2)


def hellinger_sq(rho0, rho1, weights=None) -> float:
    """4 sum_i w_i (sqrt(rho0_i) - sqrt(rho1_i))^2; chord below the arc."""
    rho0 = np.asarray(rho0, float)
    rho1 = np.asarray(rho1, float)
    if rho0.shape != rho1.shape:
        raise ValueError("densities must share one support")
    w = _weights(weights, rho0.size)
    return float(4.0 * np.sum(w * (np.sqrt(rho0) - np.sqrt(rho1)) ** 2))


def geodesic_point(rho0, rho1, t: float, weights=None) -> np.ndarray:
    """Constant-speed geodesic from rho0 (t=0) to rho1 (t=1).

    Spherical linear interpolation of the square roots:
        u_t = [sin((1-t)theta) sqrt(rho0) + sin(t theta) sqrt(rho1)] / sin(theta)
    with theta = arccos(BC); rho_t = u_t^2 renormalized.  The sine weights
    (rather than a normalized straight chord) are what make the pullback
    parameter proportional to arc length, so fr_distance_sq between two
    points of the path scales as (t-s)^2.
    """
    rho0 = np.asarray(rho0, float)
    rho1 = np.asarray(rho1, float)
    w = _weights(weights, rho0.size)
    theta = float(np.arccos(bhattacharyya(rho0, rho1, w)))
    u0, u1 = np.sqrt(rho0), np.sqrt(rho1)
    if theta < 1e-12:
        u = (1.0 - t) * u0 + t * u1
    else:
        u = (np.sin((1.0 - t) * theta) * u0 + np.sin(t * theta) * u1) / np.sin(theta)
    out = u * u
    return out / float(np.sum(w * out))


def shooting_potential(rho0, rho1, weights=None) -> np.ndarray:
    """Initial potential psi0 whose geodesic reaches rho1 at unit time.

    From the slerp derivative at t=0: psi0 = 2 theta (sqrt(rho1/rho0) - BC)/sin(theta),
    already zero-mean under rho0.  Degenerates smoothly to
    2 (sqrt(rho1/rho0) - 1) as theta -> 0.
    """
    rho0 = np.asarray(rho0, float)
    rho1 = np.asarray(rho1, float)
    w = _weights(weights, rho0.size)
    bc = bhattacharyya(rho0, rho1, w)
    theta = float(np.arccos(bc))
    ratio = np.sqrt(rho1 / rho0)
    if theta < 1e-8:
        return 2.0 * (ratio - 1.0)
    return 2.0 * theta * (ratio - bc) / np.sin(theta)


def geodesic_speed(state: GeodesicState, weights=None) -> float:
    """metric(rho, drho/dt, drho/dt) with drho/dt = rho (psi - E_rho[psi])."""
    rho = state.rho
    w = _weights(weights, rho.size)
    psibar = float(np.sum(w * rho * state.psi))
    d = state.psi - psibar
    return float(np.sum(w * rho * d * d))


def _geodesic_rhs(rho, psi, w):
    psibar = np.sum(w * rho * psi)
    d = psi - psibar
    return rho * d, -0.5 * d * d


def integrate_geodesic(rho0, psi0, T: float, dt: float = 1e-3, weights=None):
    """RK4 for the coupled system d rho = rho (psi - E[psi]), d psi = -(1/2)(psi - E[psi])^2.

    Mass is renormalized after every step; densities hitting the positivity
    floor abort with BlowUpError.  Returns the list of GeodesicState
    snapshots including both endpoints.
    """
    if T <= 0.0 or dt <= 0.0:
        raise ValueError("T and dt must be positive")
    rho = np.array(rho0, dtype=float)
    psi = np.array(_psi_values(psi0), dtype=float)
    w = _weights(weights, rho.size)
    n_steps = int(round(T / dt))
    states = [GeodesicState(0.0, rho.copy(), psi.copy())]
    for k in range(n_steps):
        kr1, kp1 = _geodesic_rhs(rho, psi, w)
        kr2, kp2 = _geodesic_rhs(rho + 0.5 * dt * kr1, psi + 0.5 * dt * kp1, w)
        kr3, kp3 = _geodesic_rhs(rho + 0.5 * dt * kr2, psi + 0.5 * dt * kp2, w)
        kr4, kp4 = _geodesic_rhs(rho + dt * kr3, psi + dt * kp3, w)
        rho = rho + dt / 6.0 * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4)
        psi = psi + dt / 6.0 * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4)
        if np.any(rho < POSITIVITY_FLOOR):
            raise BlowUpError(
                f"geodesic density hit the positivity floor at t={(k + 1) * dt!r}"
            )
        rho = rho / np.sum(w * rho)
        states.append(GeodesicState((k + 1) * dt, rho.copy(), psi.copy()))
    return states
