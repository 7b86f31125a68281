"""Closed-form counterexample families with quadrature cross-validation.

Two constructions defeat geodesic convexity and gradient dominance of the
KL divergence: a Gaussian pair (rho = N(mu, sigma2) against the standard
normal) whose Hessian quadratic form turns negative for small sigma2, and a
two-value pair whose gradient-dominance ratio decays like M^2 e^-M.  Every
closed form here is written independently of the generic geometry module
and cross-asserted against it, which doubles as a regression suite for the
generic code.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .density import DensityPair, GridSpec, gaussian_grid_pair, make_two_point
from .divergences import divergence, kl
from .errors import FRFlowError
from .geometry import grad_norm_sq

CROSS_TOL = 1e-6


@dataclasses.dataclass(frozen=True)
class CounterexampleResult:
    """Closed-form value, its quadrature cross-check, and the KL budget."""

    construction: str
    parameters: dict
    closed_form_value: float
    quadrature_value: float
    kl_budget: float
    negative: bool

    def __post_init__(self):
        gap = abs(self.closed_form_value - self.quadrature_value)
        if gap > CROSS_TOL * max(1.0, abs(self.closed_form_value)):
            raise FRFlowError(
                f"quadrature value {self.quadrature_value!r} disagrees with "
                f"closed form {self.closed_form_value!r} beyond {CROSS_TOL:g}"
            )

    def to_json_dict(self) -> dict:
        return {
            "construction": self.construction,
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "closed_form_value": self.closed_form_value,
            "quadrature_value": self.quadrature_value,
            "kl_budget": self.kl_budget,
            "negative": self.negative,
        }


# ---------------------------------------------------------------------------
# Gaussian family: rho = N(mu, sigma2), rho_star = N(0, 1).

def gaussian_kl_closed(mu2: float, sigma2: float) -> float:
    """KL[N(mu,s2) || N(0,1)] = (s2 + mu^2 - 1 - log s2)/2."""
    return 0.5 * (sigma2 + mu2 - 1.0 - math.log(sigma2))


def gaussian_log_moment2(mu2: float, sigma2: float) -> float:
    """Var_rho(log(rho/rho*)) = (1/2)(s2-1)^2 + s2 mu^2."""
    return 0.5 * (sigma2 - 1.0) ** 2 + sigma2 * mu2


def gaussian_log_moment3(mu2: float, sigma2: float) -> float:
    """Third centered moment of log(rho/rho*): (s2-1)^3 + 3(s2-1) s2 mu^2."""
    return (sigma2 - 1.0) ** 3 + 3.0 * (sigma2 - 1.0) * sigma2 * mu2


def gaussian_hessian_H(mu2: float, sigma2: float) -> float:
    """Hessian quadratic form along psi = log(rho/rho*), closed form.

    Equals (s2/2)((s2-1)^2 + 3 s2 mu^2 - mu^2); negative exactly when
    s2 < 1/3 and mu^2 > (s2-1)^2 / (1 - 3 s2).
    """
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    if mu2 < 0.0:
        raise ValueError("mu2 must be non-negative")
    return 0.5 * sigma2 * ((sigma2 - 1.0) ** 2 + 3.0 * sigma2 * mu2 - mu2)


def gaussian_negativity_threshold(sigma2: float) -> float:
    """Smallest mu^2 making the Gaussian Hessian negative, inf if none."""
    if sigma2 >= 1.0 / 3.0:
        return math.inf
    return (sigma2 - 1.0) ** 2 / (1.0 - 3.0 * sigma2)


def centered_log_moment(pair: DensityPair, k: int) -> float:
    """sum_i w_i rho_i (l_i - E_rho[l])^k with l = log(rho/rho*)."""
    ell = np.log(pair.x)
    mean = float(np.sum(pair.weights * pair.rho * ell))
    return float(np.sum(pair.weights * pair.rho * (ell - mean) ** k))


def hessian_H_moments(pair: DensityPair) -> float:
    """H = Var(l) + (1/2) E(l - El)^3 evaluated by direct summation."""
    return centered_log_moment(pair, 2) + 0.5 * centered_log_moment(pair, 3)


def gaussian_hessian_H_quadrature(
    mu2: float, sigma2: float, grid: GridSpec | None = None
) -> float:
    """Quadrature evaluation of the Gaussian H on a truncated grid."""
    mu = math.sqrt(mu2)
    if grid is None:
        pair = gaussian_grid_pair(mu, sigma2)
    else:
        pair = gaussian_grid_pair(mu, sigma2, grid.half_width, grid.n)
    return hessian_H_moments(pair)


# ---------------------------------------------------------------------------
# Two-value family: ratios x1 > 1 > x2 with masses fixed by unit mass.

def _two_value_rho_r(x1: float, x2: float) -> float:
    if not (x1 > 1.0 > x2 > 0.0):
        raise ValueError(f"need x1 > 1 > x2 > 0, got x1={x1!r}, x2={x2!r}")
    return (x1 - 1.0) / (x1 - x2)


def twovalue_kl(x1: float, x2: float) -> float:
    """KL of the two-value pair: ((x1-x1x2) log x1 + (x1x2-x2) log x2)/(x1-x2)."""
    _two_value_rho_r(x1, x2)
    return (
        (x1 - x1 * x2) * math.log(x1) + (x1 * x2 - x2) * math.log(x2)
    ) / (x1 - x2)


def twovalue_G(x1: float, x2: float) -> float:
    """Squared KL gradient norm of the two-value pair.

    G = x1 x2 (x1-1)(1-x2)/(x1-x2)^2 * log(x1/x2)^2.
    """
    _two_value_rho_r(x1, x2)
    L = math.log(x1 / x2)
    return x1 * x2 * (x1 - 1.0) * (1.0 - x2) / (x1 - x2) ** 2 * L * L


def twovalue_hessian(x1: float, x2: float) -> float:
    """Closed-form H of the two-value pair along psi = log x.

    H = rho_r (1-rho_r) x1 x2 L^2 (1 - ((x1+x2-2 x1 x2)/(2(x1-x2))) L),
    L = log(x1/x2).  Turns negative once L is large enough, defeating
    geodesic convexity of KL arbitrarily close to rho* (x1 -> 1+).
    """
    rho_r = _two_value_rho_r(x1, x2)
    L = math.log(x1 / x2)
    lead = rho_r * (1.0 - rho_r) * x1 * x2 * L * L
    return lead * (1.0 - (x1 + x2 - 2.0 * x1 * x2) / (2.0 * (x1 - x2)) * L)


# ---------------------------------------------------------------------------
# Gradient-dominance failure ratios for KL.

def gdc_ratio_gaussian(M: float):
    """(G/KL, KL) for the Gaussian pair sigma = 1/M, mu = M.

    The ratio is guaranteed below 3/M^2 for every M > 1, so gradient
    dominance of KL fails with rate M^-2 while KL itself grows like M^2/2.
    """
    if not M > 1.0:
        raise ValueError(f"need M > 1, got {M!r}")
    sigma2 = 1.0 / (M * M)
    mu2 = M * M
    G = gaussian_log_moment2(mu2, sigma2)
    KL = gaussian_kl_closed(mu2, sigma2)
    ratio = G / KL
    bound = 3.0 / (M * M)
    if ratio > bound * (1.0 + 1e-9):
        raise FRFlowError(f"Gaussian ratio {ratio!r} exceeds bound {bound!r}")
    return ratio, KL


def gdc_ratio_twovalue(eps_prime: float, M: float):
    """(G/KL, KL) for the two-value pair x1 = e^eps_prime, x2 = e^-M.

    KL <= eps_prime holds for every admissible (eps_prime, M).  In the
    regime M > max(eps_prime, 20) the ratio is additionally checked against
    (2M)^2/(eps_prime e^M - 2M), which drives it to zero while the KL
    budget stays fixed: gradient dominance fails in any neighborhood of
    rho*.  Outside that regime the values are reported without the bound.
    """
    if eps_prime <= 0.0 or M <= 0.0:
        raise ValueError("eps_prime and M must be positive")
    x1 = math.exp(eps_prime)
    x2 = math.exp(-M)
    KL = twovalue_kl(x1, x2)
    G = twovalue_G(x1, x2)
    ratio = G / KL
    if KL > eps_prime * (1.0 + 1e-12):
        raise FRFlowError(f"two-value KL {KL!r} exceeds budget {eps_prime!r}")
    if M > max(eps_prime, 20.0):
        denom = eps_prime * math.exp(M) - 2.0 * M
        if denom > 0.0:
            bound = (2.0 * M) ** 2 / denom
            if ratio > bound * (1.0 + 1e-9):
                raise FRFlowError(
                    f"two-value ratio {ratio!r} exceeds bound {bound!r}"
                )
    return ratio, KL


# ---------------------------------------------------------------------------
# Result builders (CLI payloads with the cross-route quadrature values).

def gaussian_hessian_result(
    mu2: float, sigma2: float, grid: GridSpec | None = None
) -> CounterexampleResult:
    closed = gaussian_hessian_H(mu2, sigma2)
    quad = gaussian_hessian_H_quadrature(mu2, sigma2, grid)
    return CounterexampleResult(
        construction="gaussian",
        parameters={"mu2": mu2, "sigma2": sigma2},
        closed_form_value=closed,
        quadrature_value=quad,
        kl_budget=gaussian_kl_closed(mu2, sigma2),
        negative=closed < 0.0,
    )


def twovalue_hessian_result(eps: float, M: float) -> CounterexampleResult:
    """H for x1 = e^eps, x2 = e^-M; quadrature route is direct summation."""
    x1, x2 = math.exp(eps), math.exp(-M)
    closed = twovalue_hessian(x1, x2)
    quad = hessian_H_moments(make_two_point(x1, x2))
    return CounterexampleResult(
        construction="two_value",
        parameters={"eps": eps, "M": M, "x1": x1, "x2": x2},
        closed_form_value=closed,
        quadrature_value=quad,
        kl_budget=twovalue_kl(x1, x2),
        negative=closed < 0.0,
    )


def gdc_gaussian_result(M: float, n: int = 8192) -> CounterexampleResult:
    """Closed-form Gaussian ratio vs the grid-quadrature G/KL."""
    ratio, KL = gdc_ratio_gaussian(M)
    gen = kl()
    pair = gaussian_grid_pair(M, 1.0 / (M * M), n=n)
    quad_ratio = grad_norm_sq(gen, pair) / divergence(gen, pair)
    return CounterexampleResult(
        construction="gaussian",
        parameters={"M": M, "mu": M, "sigma2": 1.0 / (M * M)},
        closed_form_value=ratio,
        quadrature_value=quad_ratio,
        kl_budget=KL,
        negative=ratio < 0.0,
    )


def gdc_twovalue_result(eps_prime: float, M: float) -> CounterexampleResult:
    """Closed-form two-value ratio vs the generic-module ratio."""
    ratio, KL = gdc_ratio_twovalue(eps_prime, M)
    gen = kl()
    pair = make_two_point(math.exp(eps_prime), math.exp(-M))
    quad_ratio = grad_norm_sq(gen, pair) / divergence(gen, pair)
    return CounterexampleResult(
        construction="two_value",
        parameters={"eps_prime": eps_prime, "M": M},
        closed_form_value=ratio,
        quadrature_value=quad_ratio,
        kl_budget=KL,
        negative=ratio < 0.0,
    )
