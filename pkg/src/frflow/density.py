"""Density pairs on finite simplices and 1D quadrature grids.

A DensityPair holds two strictly positive unit-mass densities (rho, rho_star)
over a shared support together with quadrature weights (all ones for a
simplex).  Constructors cover the two-point counterexample family, random
Dirichlet pairs, truncated-Gaussian grid pairs, and the mollified two-value
profile.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
from scipy.special import erfc, erfinv

from .errors import InvalidDensityError

MASS_TOL = 1e-10
MIN_COMPONENT = 1e-12  # resample threshold for random pairs
PDF_FLOOR = 1e-300     # keeps grid ratios inside the generator domain
TAIL_TOL = 1e-10


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Uniform symmetric 1D grid with composite-trapezoid weights."""

    half_width: float = 10.0
    n: int = 8192

    def nodes(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    def weights(self) -> np.ndarray:
        h = 2.0 * self.half_width / (self.n - 1)
        w = np.full(self.n, h)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


@dataclasses.dataclass(frozen=True)
class DensityPair:
    """A pair (rho, rho_star) of positive unit-mass densities.

    kind is "simplex" (weights all one) or "grid1d" (trapezoid weights with
    node coordinates).  Arrays are frozen after validation.
    """

    kind: str
    weights: np.ndarray
    rho: np.ndarray
    rho_star: np.ndarray
    nodes: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("simplex", "grid1d"):
            raise InvalidDensityError(f"unknown pair kind {self.kind!r}")
        for field in ("weights", "rho", "rho_star"):
            arr = np.array(getattr(self, field), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, field, arr)
        if self.nodes is not None:
            arr = np.array(self.nodes, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, "nodes", arr)
        if not (self.weights.shape == self.rho.shape == self.rho_star.shape):
            raise InvalidDensityError("weights/rho/rho_star shapes differ")
        if self.rho.ndim != 1 or self.rho.size < 2:
            raise InvalidDensityError("densities must be 1D with K >= 2")
        if np.any(self.rho <= 0.0) or np.any(self.rho_star <= 0.0):
            raise InvalidDensityError("densities must be strictly positive")
        for field in ("rho", "rho_star"):
            mass = float(np.sum(self.weights * getattr(self, field)))
            if abs(mass - 1.0) > MASS_TOL:
                raise InvalidDensityError(
                    f"{field} mass {mass!r} deviates from 1 beyond {MASS_TOL:g}"
                )
        if not np.all(np.isfinite(self.x)):
            raise InvalidDensityError("likelihood ratios are not finite")

    @property
    def K(self) -> int:
        return self.rho.size

    @property
    def x(self) -> np.ndarray:
        """Likelihood ratios x_i = rho_i / rho*_i."""
        return self.rho / self.rho_star

    def with_rho(self, rho: np.ndarray) -> "DensityPair":
        """Same support and rho_star, new rho (used by flow integrators)."""
        return DensityPair(self.kind, self.weights, rho, self.rho_star, self.nodes)

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "rho": self.rho.tolist(),
            "rho_star": self.rho_star.tolist(),
        }
        if self.nodes is not None:
            out["nodes"] = self.nodes.tolist()
        return out

    @staticmethod
    def from_json_dict(d: dict) -> "DensityPair":
        return DensityPair(
            kind=d["kind"],
            weights=np.asarray(d["weights"], float),
            rho=np.asarray(d["rho"], float),
            rho_star=np.asarray(d["rho_star"], float),
            nodes=None if d.get("nodes") is None else np.asarray(d["nodes"], float),
        )


def simplex_pair(rho, rho_star) -> DensityPair:
    """Wrap two plain probability vectors as a simplex pair."""
    rho = np.asarray(rho, float)
    return DensityPair("simplex", np.ones(rho.size), rho, np.asarray(rho_star, float))


def make_two_point(x1: float, x2: float) -> DensityPair:
    """Two-point pair with prescribed likelihood ratios x1 > 1 > x2 > 0.

    rho_r = (x1-1)/(x1-x2) is the rho_star mass carried by the x2 state, so
    that x1 (1-rho_r) + x2 rho_r = 1 makes rho a probability vector too.
    """
    if not (x1 > 1.0 > x2 > 0.0):
        raise ValueError(f"need x1 > 1 > x2 > 0, got x1={x1!r}, x2={x2!r}")
    rho_r = (x1 - 1.0) / (x1 - x2)
    rho_star = np.array([1.0 - rho_r, rho_r])
    rho = np.array([x1, x2]) * rho_star
    return DensityPair("simplex", np.ones(2), rho, rho_star)


def sample_random_pair(K: int, seed: int, concentration: float = 1.0) -> DensityPair:
    """Independent Dirichlet(concentration) draws for rho and rho_star.

    Deterministic for a fixed (K, seed, concentration); pairs with any
    component below MIN_COMPONENT are rejected and redrawn.
    """
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    if concentration <= 0.0:
        raise ValueError("concentration must be positive")
    rng = np.random.default_rng(seed)
    alpha = np.full(K, float(concentration))
    while True:
        rho = rng.dirichlet(alpha)
        rho_star = rng.dirichlet(alpha)
        if min(rho.min(), rho_star.min()) >= MIN_COMPONENT:
            break
    return DensityPair("simplex", np.ones(K), rho, rho_star)


def _normal_pdf(t: np.ndarray, mu: float, sigma2: float) -> np.ndarray:
    s = math.sqrt(sigma2)
    return np.exp(-((t - mu) ** 2) / (2.0 * sigma2)) / (s * math.sqrt(2.0 * math.pi))


def _gauss_tail_mass(mu: float, sigma2: float, half_width: float) -> float:
    s = math.sqrt(sigma2)
    upper = 0.5 * erfc((half_width - mu) / (s * math.sqrt(2.0)))
    lower = 0.5 * erfc((half_width + mu) / (s * math.sqrt(2.0)))
    return float(upper + lower)


def gaussian_grid_pair(
    mu: float,
    sigma2: float,
    half_width: float | None = None,
    n: int = 8192,
) -> DensityPair:
    """rho = N(mu, sigma2) vs rho_star = N(0,1) on a truncated uniform grid.

    Both densities are floored at PDF_FLOOR (so likelihood ratios stay in
    the generator domain on wide grids) and renormalized to unit discrete
    mass.  Errors out if the truncated tail mass of either density exceeds
    TAIL_TOL: widen the grid instead of silently losing mass.
    """
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    if n < 64:
        raise ValueError("need n >= 64 grid points")
    if half_width is None:
        half_width = max(10.0, abs(mu) + 8.0 * math.sqrt(sigma2))
    tail = max(_gauss_tail_mass(mu, sigma2, half_width), _gauss_tail_mass(0.0, 1.0, half_width))
    if tail > TAIL_TOL:
        raise InvalidDensityError(
            f"tail mass {tail:.3e} beyond {TAIL_TOL:g}; increase half_width"
        )
    grid = GridSpec(half_width, n)
    nodes, w = grid.nodes(), grid.weights()
    rho = np.maximum(_normal_pdf(nodes, mu, sigma2), PDF_FLOOR)
    rho_star = np.maximum(_normal_pdf(nodes, 0.0, 1.0), PDF_FLOOR)
    rho = rho / np.sum(w * rho)
    rho_star = rho_star / np.sum(w * rho_star)
    return DensityPair("grid1d", w, rho, rho_star, nodes=nodes)


def two_value_radius(x1: float, x2: float) -> float:
    """Interval radius r with P(|Z| <= r) = rho_r under the standard normal.

    Placing ratio x2 on {|t| < r} and x1 outside then reproduces the
    two-point pair masses in the 1D mollified construction.
    """
    if not (x1 > 1.0 > x2 > 0.0):
        raise ValueError(f"need x1 > 1 > x2 > 0, got x1={x1!r}, x2={x2!r}")
    rho_r = (x1 - 1.0) / (x1 - x2)
    return math.sqrt(2.0) * float(erfinv(rho_r))


def mollified_two_value(
    x1: float,
    x2: float,
    r: float,
    delta: float,
    grid: GridSpec | None = None,
) -> DensityPair:
    """Smoothed two-value profile against a standard-normal reference.

    The raw ratio profile is x1 on {|t| > r+delta}, x2 on {|t| < r-delta}
    and a transition value x3 on the band, convolved with the compact bump
    kernel exp(-1/(1-(t/delta)^2)).  Linearity in x3 makes the unit-mass
    condition a one-unknown linear equation; the solved x3 must land inside
    [x2, x1] or the construction errors out.  Because the discrete kernel is
    normalized to total weight one and the grid is edge-padded before the
    convolution, the smoothed ratio is a convex combination of profile
    values, so min/max ratio bounds are exact.
    """
    if not (x1 > 1.0 > x2 > 0.0):
        raise ValueError(f"need x1 > 1 > x2 > 0, got x1={x1!r}, x2={x2!r}")
    if not (0.0 < delta < r):
        raise ValueError(f"need 0 < delta < r, got delta={delta!r}, r={r!r}")
    if grid is None:
        grid = GridSpec()
    nodes, w = grid.nodes(), grid.weights()
    h = nodes[1] - nodes[0]
    m = int(math.ceil(delta / h)) - 1
    if m < 1:
        raise ValueError(
            f"delta={delta!r} unresolved by grid spacing {h!r}; refine the grid"
        )
    offs = np.arange(-m, m + 1) * h
    kernel = np.exp(-1.0 / (1.0 - (offs / delta) ** 2))
    kernel /= kernel.sum()

    rho_star = np.maximum(_normal_pdf(nodes, 0.0, 1.0), PDF_FLOOR)
    rho_star = rho_star / np.sum(w * rho_star)

    a = np.abs(nodes)
    outer = a > r + delta
    inner = a < r - delta
    band = ~(outer | inner)

    def smooth(profile: np.ndarray) -> np.ndarray:
        padded = np.concatenate(
            [np.full(m, profile[0]), profile, np.full(m, profile[-1])]
        )
        return np.convolve(padded, kernel, mode="valid")

    base = np.where(outer, x1, np.where(inner, x2, 0.0))
    g0 = smooth(base)
    g_band = smooth(band.astype(float))
    mass0 = float(np.sum(w * rho_star * g0))
    mass_band = float(np.sum(w * rho_star * g_band))
    if mass_band <= 0.0:
        raise InvalidDensityError("transition band carries no mass; delta too small")
    x3 = (1.0 - mass0) / mass_band
    if not (x2 <= x3 <= x1):
        raise InvalidDensityError(
            f"transition level x3={x3!r} falls outside [{x2!r}, {x1!r}]"
        )
    ratio = g0 + x3 * g_band
    rho = rho_star * ratio
    return DensityPair("grid1d", w, rho, rho_star, nodes=nodes)


def _parse_scalar(token: str) -> float:
    """Numeric token: plain float, "e", or "e^<exponent>"."""
    token = token.strip()
    if token == "e":
        return math.e
    if token.startswith("e^"):
        return math.exp(float(token[2:]))
    return float(token)


def _parse_kwargs(body: str) -> dict:
    out = {}
    for item in body.split(","):
        if not item:
            continue
        key, _, val = item.partition("=")
        if not _:
            raise ValueError(f"expected key=value, got {item!r}")
        out[key.strip()] = _parse_scalar(val)
    return out


def pair_from_spec(spec: str) -> DensityPair:
    """Build a DensityPair from a CLI-style constructor spec.

    Forms: "two-point:<x1>:<x2>", "gaussian:mu=..,s2=..[,hw=..,n=..]",
    "random:K=..,seed=..[,conc=..]",
    "mollified:x1=..,x2=..[,delta_frac=..,hw=..,n=..]", or a path to a JSON
    file produced by DensityPair.to_json_dict.  Scalar tokens accept "e" and
    "e^<t>" shorthands.
    """
    spec = spec.strip()
    head, _, body = spec.partition(":")
    if head == "two-point":
        parts = body.split(":")
        if len(parts) != 2:
            raise ValueError(f"two-point spec needs two values, got {spec!r}")
        return make_two_point(_parse_scalar(parts[0]), _parse_scalar(parts[1]))
    if head == "gaussian":
        kw = _parse_kwargs(body)
        return gaussian_grid_pair(
            mu=kw.get("mu", 0.0),
            sigma2=kw.get("s2", 1.0),
            half_width=kw.get("hw"),
            n=int(kw.get("n", 8192)),
        )
    if head == "random":
        kw = _parse_kwargs(body)
        if "K" not in kw or "seed" not in kw:
            raise ValueError(f"random spec needs K= and seed=, got {spec!r}")
        return sample_random_pair(
            int(kw["K"]), int(kw["seed"]), kw.get("conc", 1.0)
        )
    if head == "mollified":
        kw = _parse_kwargs(body)
        if "x1" not in kw or "x2" not in kw:
            raise ValueError(f"mollified spec needs x1= and x2=, got {spec!r}")
        x1, x2 = kw["x1"], kw["x2"]
        r = two_value_radius(x1, x2)
        delta = r * kw.get("delta_frac", 0.01)
        grid = GridSpec(kw.get("hw", 10.0), int(kw.get("n", 8192)))
        return mollified_two_value(x1, x2, r, delta, grid)
    # Fall through: treat the spec as a JSON file path.
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            return DensityPair.from_json_dict(json.load(fh))
    except OSError as exc:
        raise ValueError(f"unrecognized pair spec {spec!r}") from exc
