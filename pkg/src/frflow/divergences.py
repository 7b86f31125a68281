"""f-divergence generators with analytic derivatives.

A generator is a convex function f on (0, inf) with f(1) = 0.  The divergence
of a density pair is D_f = sum_i w_i rho*_i f(rho_i / rho*_i).  Analytic first
and second derivatives are carried along with f because the inequality
checkers evaluate f'' near x -> 0 where finite differencing is hopeless.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from .errors import DomainError

# Admissible argument range for every generator.  Values outside are an
# error, never a silent clamp: a ratio below 1e-300 means a flow has
# collapsed and clamping would hide it.
X_MIN = 1e-300
X_MAX = 1e300

# |x - 1| below which f(x)/(1-x) switches to its Taylor branch.
EPS_TAYLOR = 1e-4


def _validate_domain(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError("generator argument is not finite")
    if np.any(x < X_MIN) or np.any(x > X_MAX):
        bad = float(np.min(x)) if np.any(x < X_MIN) else float(np.max(x))
        raise DomainError(
            f"generator argument {bad!r} outside [{X_MIN:g}, {X_MAX:g}]"
        )


@dataclasses.dataclass(frozen=True)
class FGenerator:
    """A convex divergence generator with exact derivative evaluators.

    Fields
    ------
    name : selection key ("kl", "chi2", "power:-1.5", ...)
    eval_f, eval_fp, eval_fpp : vectorized callables for f, f', f''
    p : exponent when f''(x) = x**p holds exactly, else None
    slope_normalized : True iff f'(1) = 0
    """

    name: str
    eval_f: Callable[[np.ndarray], np.ndarray]
    eval_fp: Callable[[np.ndarray], np.ndarray]
    eval_fpp: Callable[[np.ndarray], np.ndarray]
    p: float | None = None
    slope_normalized: bool = False

    def _eval(self, fn, x):
        arr = np.asarray(x, dtype=float)
        _validate_domain(arr)
        out = np.asarray(fn(arr), dtype=float)
        if arr.ndim == 0:
            return float(out)
        return out

    def f(self, x):
        return self._eval(self.eval_f, x)

    def fp(self, x):
        return self._eval(self.eval_fp, x)

    def fpp(self, x):
        return self._eval(self.eval_fpp, x)


def kl() -> FGenerator:
    """f(x) = x log x (forward Kullback-Leibler)."""
    return FGenerator(
        name="kl",
        eval_f=lambda x: x * np.log(x),
        eval_fp=lambda x: np.log(x) + 1.0,
        eval_fpp=lambda x: 1.0 / x,
        p=-1.0,
    )


def reverse_kl() -> FGenerator:
    """f(x) = -log x, so D_f[rho||rho*] = KL[rho*||rho]."""
    return FGenerator(
        name="reverse-kl",
        eval_f=lambda x: -np.log(x),
        eval_fp=lambda x: -1.0 / x,
        eval_fpp=lambda x: x ** -2.0,
        p=-2.0,
    )


def chi2() -> FGenerator:
    """f(x) = (x-1)^2.  Already slope-normalized since f'(1)=0."""
    return FGenerator(
        name="chi2",
        eval_f=lambda x: (x - 1.0) ** 2,
        eval_fp=lambda x: 2.0 * (x - 1.0),
        eval_fpp=lambda x: np.full_like(np.asarray(x, float), 2.0),
        p=None,
        slope_normalized=True,
    )


def reverse_chi2() -> FGenerator:
    """f(x) = (x-1)^2/x, the chi^2 distance with swapped arguments."""
    return FGenerator(
        name="reverse-chi2",
        eval_f=lambda x: (x - 1.0) ** 2 / x,
        eval_fp=lambda x: 1.0 - x ** -2.0,
        eval_fpp=lambda x: 2.0 * x ** -3.0,
        p=None,
        slope_normalized=True,
    )


def power_family(p: float) -> FGenerator:
    """Generator with f''(x) = x**p.

    f(x) = (x^(p+2) - 1) / ((p+2)(p+1)) away from the removable exponents,
    f(x) = x log x at p = -1 and f(x) = -log x at p = -2.
    """
    p = float(p)
    name = f"power:{p:g}"
    if p == -1.0:
        base = kl()
        return dataclasses.replace(base, name=name)
    if p == -2.0:
        base = reverse_kl()
        return dataclasses.replace(base, name=name)
    c = (p + 2.0) * (p + 1.0)
    return FGenerator(
        name=name,
        eval_f=lambda x: (x ** (p + 2.0) - 1.0) / c,
        eval_fp=lambda x: x ** (p + 1.0) / (p + 1.0),
        eval_fpp=lambda x: x ** p,
        p=p,
    )


def normalize_slope(gen: FGenerator) -> FGenerator:
    """Subtract the affine term f'(1)(x-1) so that f'(1) = 0.

    The divergence is unchanged for any unit-mass pair (the mass terms
    cancel), so this is a gauge choice, not a different divergence.
    Idempotent: a slope-normalized generator is returned as-is.
    """
    if gen.slope_normalized:
        return gen
    c = gen.fp(1.0)
    ef, efp = gen.eval_f, gen.eval_fp
    return FGenerator(
        name=gen.name,
        eval_f=lambda x: ef(x) - c * (x - 1.0),
        eval_fp=lambda x: efp(x) - c,
        eval_fpp=gen.eval_fpp,
        p=gen.p,
        slope_normalized=True,
    )


_CONJUGATE_NAMES = {
    "kl": "reverse-kl",
    "reverse-kl": "kl",
    "chi2": "reverse-chi2",
    "reverse-chi2": "chi2",
}


def _conjugate_name(name: str) -> str:
    if name in _CONJUGATE_NAMES:
        return _CONJUGATE_NAMES[name]
    return name[:-1] if name.endswith("*") else name + "*"


def conjugate(gen: FGenerator) -> FGenerator:
    """The *-conjugate fbar(x) = x f(1/x).

    Satisfies D_fbar[rho||rho*] = D_f[rho*||rho]; applying it twice gives
    back the original generator exactly.  For the power family the exponent
    metadata maps p -> -p-3 (the conjugate of the shipped representative
    differs from power_family(-p-3) by an affine slope term only).
    """
    ef, efp, efpp = gen.eval_f, gen.eval_fp, gen.eval_fpp
    pbar = None if gen.p is None else -gen.p - 3.0
    return FGenerator(
        name=_conjugate_name(gen.name),
        eval_f=lambda x: x * ef(1.0 / x),
        eval_fp=lambda x: ef(1.0 / x) - (1.0 / x) * efp(1.0 / x),
        eval_fpp=lambda x: efpp(1.0 / x) / x**3,
        p=pbar,
        # fbar'(1) = f(1) - f'(1) = -f'(1), so the flag carries over.
        slope_normalized=gen.slope_normalized,
    )


def get_generator(key: str) -> FGenerator:
    """Look up a generator by its string key.

    Known keys: "kl", "reverse-kl", "chi2", "reverse-chi2", "power:<p>".
    """
    key = key.strip()
    registry = {
        "kl": kl,
        "reverse-kl": reverse_kl,
        "chi2": chi2,
        "reverse-chi2": reverse_chi2,
    }
    if key in registry:
        return registry[key]()
    if key.startswith("power:"):
        try:
            return power_family(float(key.split(":", 1)[1]))
        except ValueError as exc:
            raise ValueError(f"bad power exponent in generator key {key!r}") from exc
    raise ValueError(
        f"unknown generator {key!r}; expected one of "
        "kl, reverse-kl, chi2, reverse-chi2, power:<p>"
    )


def divergence(gen: FGenerator, pair) -> float:
    """D_f[rho||rho*] = sum_i w_i rho*_i f(x_i) with x = rho/rho*."""
    x = pair.x
    return float(np.sum(pair.weights * pair.rho_star * gen.f(x)))


def f_ratio(gen: FGenerator, x):
    """f(x)/(1-x), continuous across x=1 via its Taylor branch.

    For |x-1| < EPS_TAYLOR returns -f'(1) - (1/2) f''(1) (x-1); truncation
    error is O(eps^2), on the order of round-off at the chosen eps.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    _validate_domain(arr)
    out = np.empty_like(arr)
    near = np.abs(arr - 1.0) < EPS_TAYLOR
    if np.any(near):
        out[near] = -gen.fp(1.0) - 0.5 * gen.fpp(1.0) * (arr[near] - 1.0)
    far = ~near
    if np.any(far):
        xf = arr[far]
        out[far] = np.asarray(gen.eval_f(xf), dtype=float) / (1.0 - xf)
    if np.asarray(x).ndim == 0:
        return float(out[0])
    return out
