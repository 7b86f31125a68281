"""Numerical checkers for gradient-dominance and convexity inequalities.

Each checker samples or scans configurations, evaluates both sides of one
inequality, and returns an InequalityReport.  Wherever a quantity has two
algebraic forms (direct definition vs pairwise double sum, mu-form vs
direct dual form, closed form vs summation) both are evaluated and must
agree to 1e-10 — a disagreement raises FRFlowError rather than producing a
report, because it means the implementation, not the inequality, is wrong.

Checkers normalize the generator slope on entry (the inequalities are
invariant under f -> f + c(x-1), and the normalized representative makes
D_f >= 0 termwise).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .density import MIN_COMPONENT, DensityPair, simplex_pair
from .divergences import FGenerator, divergence, f_ratio, normalize_slope, power_family
from .divergences import conjugate as conjugate_gen
from .errors import FRFlowError
from .geometry import grad_norm_sq, hessian_quadratic_form

RATIO_SKIP = 1e-14      # RHS below this is the 0/0 regime near rho = rho*
CROSS_TOL = 1e-10       # dual-route agreement requirement
MAX_VIOLATIONS = 10     # worst offenders kept in the report; total counted


@dataclasses.dataclass(frozen=True)
class InequalityReport:
    """Outcome of one sampled or scanned inequality check."""

    inequality_id: str
    generator: str
    alpha_tested: float | None
    samples: int
    min_ratio: float
    argmin_witness: dict
    violations: tuple
    passed: bool
    skipped: int = 0
    constants: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.passed != (len(self.violations) == 0):
            raise FRFlowError("passed flag inconsistent with violation list")

    def to_json_dict(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "generator": self.generator,
            "alpha_tested": self.alpha_tested,
            "samples": self.samples,
            "skipped": self.skipped,
            "min_ratio": self.min_ratio,
            "argmin_witness": self.argmin_witness,
            "violations": [
                {"configuration": c, "lhs": l, "rhs": r}
                for c, l, r in self.violations
            ],
            "passed": self.passed,
            "constants": self.constants,
        }


def _worst_violations(entries):
    """Keep the MAX_VIOLATIONS worst (most negative margin) violations."""
    entries = sorted(entries, key=lambda e: e[0])
    return tuple(v for _, v in entries[:MAX_VIOLATIONS])


def _as_list(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


# ---------------------------------------------------------------------------
# Gradient dominance on explicit pairs.

def _pair_config(pair: DensityPair, label=None) -> dict:
    cfg = {"kind": pair.kind, "K": pair.K}
    if label is not None:
        cfg["label"] = label
    if pair.kind == "simplex" and pair.K <= 16:
        cfg["rho"] = _as_list(pair.rho)
        cfg["rho_star"] = _as_list(pair.rho_star)
    return cfg


def gdc_check(gen: FGenerator, pairs, alpha: float) -> InequalityReport:
    """Check grad_norm_sq >= alpha * D_f over a source of density pairs.

    Pairs may be DensityPair objects or (label, DensityPair) tuples.  Pairs
    with D_f below the skip threshold, or with non-finite ratio (generator
    blow-up far in a tail), are skipped and counted.
    """
    gen = normalize_slope(gen)
    n = skipped = 0
    min_ratio, witness = math.inf, {}
    bad = []
    for item in pairs:
        label, pair = item if isinstance(item, tuple) else (None, item)
        with np.errstate(all="ignore"):
            D = divergence(gen, pair)
            G = grad_norm_sq(gen, pair)
        n += 1
        if not (math.isfinite(D) and math.isfinite(G)) or D < RATIO_SKIP:
            skipped += 1
            continue
        ratio = G / D
        if ratio < min_ratio:
            min_ratio = ratio
            witness = _pair_config(pair, label) | {"ratio": ratio}
        if ratio < alpha:
            bad.append((ratio, (_pair_config(pair, label), G, alpha * D)))
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="gdc",
        generator=gen.name,
        alpha_tested=alpha,
        samples=n,
        min_ratio=min_ratio,
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        skipped=skipped,
        constants={"violation_count": len(bad)},
    )


# ---------------------------------------------------------------------------
# Two-point condition.

def two_point_ratio(gen: FGenerator, x: float, y: float) -> float:
    """LHS/RHS of the two-point inequality at 0 < x < 1 < y.

    LHS = (f'(y)-f'(x))^2, RHS = (1/x-1/y)(f(x)/(1-x) - f(y)/(1-y)); RHS is
    positive for any convex normalized f since f(x)/(1-x) is monotone
    decreasing.  Returns +inf if RHS underflows.
    """
    if not 0.0 < x < 1.0 < y:
        raise ValueError(f"need 0 < x < 1 < y, got x={x!r}, y={y!r}")
    gen = normalize_slope(gen)
    lhs = (gen.fp(y) - gen.fp(x)) ** 2
    rhs = (1.0 / x - 1.0 / y) * (f_ratio(gen, x) - f_ratio(gen, y))
    if rhs < 1e-300:
        return math.inf
    return lhs / rhs


def default_two_point_grids(points_per_decade: int = 400):
    """Log grids on (1e-4, 1) and (1, 1e4), open at 1."""
    nx = 4 * points_per_decade + 1
    x_grid = np.geomspace(1e-4, 1.0, nx)[:-1]
    y_grid = np.geomspace(1.0, 1e4, nx)[1:]
    return x_grid, y_grid


def scan_two_point(
    gen: FGenerator,
    x_grid: np.ndarray | None = None,
    y_grid: np.ndarray | None = None,
    alpha: float | None = None,
) -> InequalityReport:
    """Infimum of two_point_ratio over a product grid, with argmin witness."""
    if x_grid is None or y_grid is None:
        dx, dy = default_two_point_grids()
        x_grid = dx if x_grid is None else np.asarray(x_grid, dtype=float)
        y_grid = dy if y_grid is None else np.asarray(y_grid, dtype=float)
    if not (np.all(x_grid > 0.0) and np.all(x_grid < 1.0)):
        raise ValueError("x_grid must lie in (0, 1)")
    if not np.all(y_grid > 1.0):
        raise ValueError("y_grid must lie in (1, inf)")
    gen = normalize_slope(gen)
    fpx, fpy = gen.fp(x_grid), gen.fp(y_grid)
    frx, fry = f_ratio(gen, x_grid), f_ratio(gen, y_grid)
    lhs = (fpy[None, :] - fpx[:, None]) ** 2
    rhs = (1.0 / x_grid[:, None] - 1.0 / y_grid[None, :]) * (
        frx[:, None] - fry[None, :]
    )
    ratio = lhs / rhs
    flat = int(np.argmin(ratio))
    i, j = divmod(flat, ratio.shape[1])
    xw, yw = float(x_grid[i]), float(y_grid[j])
    min_ratio = float(ratio[i, j])
    check = two_point_ratio(gen, xw, yw)
    if abs(check - min_ratio) > 1e-10 * max(1.0, abs(min_ratio)):
        raise FRFlowError("witness re-evaluation does not reproduce min_ratio")
    witness = {"x": xw, "y": yw, "ratio": min_ratio}
    bad = []
    count = 0
    if alpha is not None and min_ratio < alpha:
        mask = ratio < alpha
        count = int(mask.sum())
        order = np.argsort(ratio, axis=None)[:MAX_VIOLATIONS]
        for flat_k in order:
            ii, jj = divmod(int(flat_k), ratio.shape[1])
            if ratio[ii, jj] >= alpha:
                break
            cfg = {"x": float(x_grid[ii]), "y": float(y_grid[jj])}
            bad.append((float(ratio[ii, jj]), (cfg, float(lhs[ii, jj]), alpha * float(rhs[ii, jj]))))
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="two_point_scan",
        generator=gen.name,
        alpha_tested=alpha,
        samples=int(ratio.size),
        min_ratio=min_ratio,
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        constants={"violation_count": count},
    )


# ---------------------------------------------------------------------------
# K-point condition with exact simplex constraints.

def _kpoint_batch(gen: FGenerator, K: int, samples: int, seed: int):
    """Sampled K-point configurations with both mass constraints exact.

    rho* and rho are drawn independently on the simplex and x = rho/rho*,
    so sum rho* = sum rho*x = 1 by construction.  Returns per-sample LHS
    (flow-side variance of f'), RHS (D_f) and the kept-row arrays.
    """
    rng = np.random.default_rng(seed)
    A = rng.dirichlet(np.ones(K), size=samples)
    R = rng.dirichlet(np.ones(K), size=samples)
    keep = (A.min(axis=1) > MIN_COMPONENT) & (R.min(axis=1) > MIN_COMPONENT)
    A, R = A[keep], R[keep]
    x = R / A
    with np.errstate(all="ignore"):
        fp = gen.fp(x)
        mean = np.sum(R * fp, axis=1, keepdims=True)
        lhs = np.sum(R * (fp - mean) ** 2, axis=1)
        rhs = np.sum(A * gen.f(x), axis=1)
    finite = np.isfinite(lhs) & np.isfinite(rhs)
    dropped = int((~keep).sum()) + int((~finite).sum())
    if not finite.any():
        raise FRFlowError("no admissible K-point configurations sampled")
    return A[finite], R[finite], x[finite], lhs[finite], rhs[finite], dropped


def _pairwise_cross_check(gen: FGenerator, R_row, x_row, lhs_val, rhs_val):
    """Direct sums vs pairwise double sums; FRFlowError on disagreement."""
    fp = gen.fp(x_row)
    F = f_ratio(gen, x_row)
    inv = 1.0 / x_row
    G2 = 0.5 * float(
        np.sum(R_row[:, None] * R_row[None, :] * (fp[:, None] - fp[None, :]) ** 2)
    )
    D2 = 0.5 * float(
        np.sum(
            R_row[:, None]
            * R_row[None, :]
            * (inv[None, :] - inv[:, None])
            * (F[None, :] - F[:, None])
        )
    )
    if abs(G2 - lhs_val) > CROSS_TOL * max(1.0, abs(lhs_val)):
        raise FRFlowError(f"pairwise LHS {G2!r} disagrees with direct {lhs_val!r}")
    if abs(D2 - rhs_val) > CROSS_TOL * max(1.0, abs(rhs_val)):
        raise FRFlowError(f"pairwise RHS {D2!r} disagrees with direct {rhs_val!r}")


def kpoint_check(
    gen: FGenerator, K: int, samples: int, alpha: float, seed: int = 0
) -> InequalityReport:
    """Sampled K-point inequality LHS >= alpha*RHS under both constraints.

    LHS and RHS are cross-checked against their pairwise double-sum forms
    on a subsample of configurations.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    gen = normalize_slope(gen)
    A, R, x, lhs, rhs, dropped = _kpoint_batch(gen, K, samples, seed)
    live = rhs >= RATIO_SKIP
    skipped = dropped + int((~live).sum())
    lhs_l, rhs_l = lhs[live], rhs[live]
    idx = np.flatnonzero(live)
    for row in idx[: min(20, idx.size)]:
        _pairwise_cross_check(gen, R[row], x[row], float(lhs[row]), float(rhs[row]))
    ratio = lhs_l / rhs_l
    if ratio.size == 0:
        raise FRFlowError("all sampled configurations were skipped")
    k = int(np.argmin(ratio))
    row = int(idx[k])
    witness = {
        "rho": _as_list(R[row]),
        "rho_star": _as_list(A[row]),
        "x": _as_list(x[row]),
        "ratio": float(ratio[k]),
    }
    bad = []
    for k_bad in np.flatnonzero(ratio < alpha):
        row_b = int(idx[int(k_bad)])
        cfg = {"rho": _as_list(R[row_b]), "rho_star": _as_list(A[row_b])}
        bad.append((float(ratio[int(k_bad)]), (cfg, float(lhs_l[int(k_bad)]), alpha * float(rhs_l[int(k_bad)]))))
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="kpoint",
        generator=gen.name,
        alpha_tested=alpha,
        samples=samples,
        min_ratio=float(ratio[k]),
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        skipped=skipped,
        constants={"K": K, "violation_count": len(bad)},
    )


# ---------------------------------------------------------------------------
# Support-reduction probe: sampled K-point minimum vs optimized 3-point.

def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def _three_point_ratio(gen: FGenerator, z: np.ndarray) -> float:
    """Inequality ratio of the 3-point configuration parametrized by z.

    rho* = softmax(z[0], z[1], 0) and rho = softmax(z[2], z[3], 0); both
    simplex constraints hold for every z, so the search is unconstrained.
    """
    a = _softmax(np.array([z[0], z[1], 0.0]))
    r = _softmax(np.array([z[2], z[3], 0.0]))
    if a.min() <= 1e-300 or r.min() <= 1e-300:
        return math.inf
    x = r / a
    with np.errstate(all="ignore"):
        fp = gen.fp(x)
        mean = float(np.sum(r * fp))
        lhs = float(np.sum(r * (fp - mean) ** 2))
        rhs = float(np.sum(a * gen.f(x)))
    if not (math.isfinite(lhs) and math.isfinite(rhs)) or rhs < RATIO_SKIP:
        return math.inf
    return lhs / rhs


def _coordinate_descent(fun, z0, iters=200, step0=1.0, tol=1e-9):
    z = np.array(z0, dtype=float)
    best = fun(z)
    steps = np.full(z.size, step0)
    for _ in range(iters):
        improved = False
        for c in range(z.size):
            for sign in (+1.0, -1.0):
                trial = z.copy()
                trial[c] += sign * steps[c]
                val = fun(trial)
                if val < best:
                    best, z = val, trial
                    improved = True
        if not improved:
            steps *= 0.5
            if steps.max() < tol:
                break
    return best, z


def support_reduction_probe(
    gen: FGenerator, K: int = 4, samples: int = 100000, seed: int = 0
) -> InequalityReport:
    """Sampled K-point minimum vs locally optimized 3-point minimum.

    The K-point minimum should not undercut the optimized 3-point minimum
    (minimizers concentrate on at most 3 atoms); pass criterion is
    kpoint_min >= three_point_min - 1e-6*max(1, three_point_min).
    """
    if K < 4:
        raise ValueError("K must be at least 4 for the probe")
    gen = normalize_slope(gen)
    _, R, x, lhs, rhs, dropped = _kpoint_batch(gen, K, samples, seed)
    live = rhs >= RATIO_SKIP
    ratios = lhs[live] / rhs[live]
    if ratios.size == 0:
        raise FRFlowError("all sampled configurations were skipped")
    kpoint_min = float(ratios.min())

    rng = np.random.default_rng(seed)
    fun = lambda z: _three_point_ratio(gen, z)
    three_min, z_best = math.inf, None
    for _ in range(10):
        z0 = rng.normal(0.0, 2.0, 4)
        val, z = _coordinate_descent(fun, z0)
        if val < three_min:
            three_min, z_best = val, z
    a = _softmax(np.array([z_best[0], z_best[1], 0.0]))
    r = _softmax(np.array([z_best[2], z_best[3], 0.0]))
    witness = {
        "rho_star": _as_list(a),
        "rho": _as_list(r),
        "x": _as_list(r / a),
        "ratio": three_min,
    }
    tol = 1e-6 * max(1.0, three_min)
    ok = kpoint_min >= three_min - tol
    violations = ()
    if not ok:
        violations = (({"K": K}, kpoint_min, three_min - tol),)
    return InequalityReport(
        inequality_id="support_reduction",
        generator=gen.name,
        alpha_tested=None,
        samples=samples,
        min_ratio=three_min,
        argmin_witness=witness,
        violations=violations,
        passed=ok,
        skipped=dropped + int((~live).sum()),
        constants={
            "K": K,
            "kpoint_min": kpoint_min,
            "three_point_min": three_min,
            "gap": kpoint_min - three_min,
        },
    )


# ---------------------------------------------------------------------------
# Sufficient constants and convexity scans.

def sufficient_alpha_s(gen: FGenerator, grid: np.ndarray | None = None) -> float:
    """inf over the grid of x^2 f''(x) on (0, 1]."""
    if grid is None:
        grid = np.geomspace(1e-4, 1.0, 1601)
    grid = np.asarray(grid, dtype=float)
    if not (np.all(grid > 0.0) and np.all(grid <= 1.0)):
        raise ValueError("grid must lie in (0, 1]")
    return float(np.min(grid * grid * gen.fpp(grid)))


def convexity_h(gen: FGenerator, x):
    """h(x) = 2x f''(x) + f'(x) - f'(1); h >= 0 certifies geodesic convexity."""
    return 2.0 * x * gen.fpp(x) + gen.fp(x) - gen.fp(1.0)


def convexity_check(gen: FGenerator, grid: np.ndarray | None = None) -> InequalityReport:
    """Scan h on a log grid; witness is the most negative point if any."""
    if grid is None:
        grid = np.geomspace(1e-3, 1e3, 2401)
    grid = np.asarray(grid, dtype=float)
    h = np.asarray(convexity_h(gen, grid))
    i = int(np.argmin(h))
    witness = {"x": float(grid[i]), "h": float(h[i])}
    neg = np.flatnonzero(h < 0.0)
    bad = [
        (float(h[j]), ({"x": float(grid[j])}, float(h[j]), 0.0)) for j in neg
    ]
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="convexity_h",
        generator=gen.name,
        alpha_tested=None,
        samples=int(grid.size),
        min_ratio=float(h[i]),
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        constants={"violation_count": int(neg.size)},
    )


def strong_delta_f(gen: FGenerator, tol: float = 1e-6) -> float:
    """Largest delta <= 1 with f'' >= f''(1)/2 on [1, 1+delta] (sampled)."""
    fpp1 = gen.fpp(1.0)

    def ok(delta: float) -> bool:
        xs = np.linspace(1.0, 1.0 + delta, 513)
        return bool(np.all(gen.fpp(xs) >= 0.5 * fpp1 - 1e-12))

    if ok(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def strong_convexity_check(
    gen: FGenerator, samples: int = 10000, seed: int = 0
) -> InequalityReport:
    """Sampled strong geodesic convexity with alpha_f = min{f''(1), delta_f f''(1)/2}.

    Verifies hessian_quadratic_form >= (alpha_f/2) * metric on random
    (pair, psi) configurations, and midpoint concavity of x f'(x) on a
    uniform grid.  Either sub-check failing records a violation.
    """
    gen = normalize_slope(gen)
    fpp1 = gen.fpp(1.0)
    if fpp1 <= 0.0:
        raise ValueError("strong convexity requires f''(1) > 0")
    delta_f = strong_delta_f(gen)
    alpha_f = min(fpp1, delta_f * fpp1 / 2.0)

    rng = np.random.default_rng(seed)
    bad = []
    min_ratio, witness = math.inf, {}
    kept = 0
    for i in range(samples):
        conc, psi_scale = (1.0, 1.0) if i % 2 == 0 else (0.3, 2.0)
        K = int(rng.integers(2, 9))
        alpha_vec = np.full(K, conc)
        while True:
            a = rng.dirichlet(alpha_vec)
            r = rng.dirichlet(alpha_vec)
            if a.min() > MIN_COMPONENT and r.min() > MIN_COMPONENT:
                break
        psi = rng.normal(0.0, psi_scale, K)
        pair = simplex_pair(r, a)
        hess = hessian_quadratic_form(gen, pair, psi)
        d = psi - float(np.sum(r * psi))
        met = float(np.sum(r * d * d))
        if met < RATIO_SKIP:
            continue
        kept += 1
        ratio = hess / met
        if ratio < min_ratio:
            min_ratio = ratio
            witness = {
                "rho": _as_list(r),
                "rho_star": _as_list(a),
                "psi": _as_list(psi),
                "ratio": ratio,
            }
        if hess < 0.5 * alpha_f * met - 1e-12:
            cfg = {"rho": _as_list(r), "rho_star": _as_list(a), "psi": _as_list(psi)}
            bad.append((ratio, (cfg, hess, 0.5 * alpha_f * met)))

    # Midpoint concavity of g(x) = x f'(x): g(x-h) + g(x+h) <= 2 g(x).
    xs = np.linspace(0.01, 10.0, 1000)
    g = xs * gen.fp(xs)
    second = g[:-2] + g[2:] - 2.0 * g[1:-1]
    cc_tol = 1e-9 * np.maximum(1.0, np.abs(g[1:-1]))
    for j in np.flatnonzero(second > cc_tol):
        cfg = {"x": float(xs[j + 1]), "second_difference": float(second[j])}
        bad.append(
            (-float(second[j]), (cfg, float(0.5 * (g[j] + g[j + 2])), float(g[j + 1])))
        )

    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="strong_convexity",
        generator=gen.name,
        alpha_tested=alpha_f,
        samples=samples,
        min_ratio=min_ratio,
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        skipped=samples - kept,
        constants={
            "delta_f": delta_f,
            "alpha_f": alpha_f,
            "fpp_one": fpp1,
            "violation_count": len(bad),
        },
    )


# ---------------------------------------------------------------------------
# Dual inequalities anchored at the reverse chi-square distance.

def dual_delta_f(gen: FGenerator, tol: float = 1e-6) -> float:
    """Largest delta < 1/4 with f'' >= f''(1)/2 on [1/(1+2d), 1/(1-2d)]."""
    gen = normalize_slope(gen)
    fpp1 = gen.fpp(1.0)
    cap = 0.2499

    def ok(delta: float) -> bool:
        xs = np.linspace(1.0 / (1.0 + 2.0 * delta), 1.0 / (1.0 - 2.0 * delta), 513)
        return bool(np.all(gen.fpp(xs) >= 0.5 * fpp1 - 1e-12))

    if ok(cap):
        return cap
    lo, hi = 0.0, cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def dual_alpha_recipe(gen: FGenerator):
    """(delta_f, alpha_f) for the chi-square lower bound.

    alpha_f = (1/2) min{1, alpha', delta^2 f''(1)/(4(1+delta)^2)} with
    alpha' = f''(1) delta/(2(1+2 delta)(1+delta)).
    """
    gen = normalize_slope(gen)
    fpp1 = gen.fpp(1.0)
    d = dual_delta_f(gen)
    alpha_prime = fpp1 * d / (2.0 * (1.0 + 2.0 * d) * (1.0 + d))
    cand = d * d * fpp1 / (4.0 * (1.0 + d) ** 2)
    return d, 0.5 * min(1.0, alpha_prime, cand)


def _random_pair_stream(rng, count):
    for _ in range(count):
        K = int(rng.integers(2, 9))
        while True:
            a = rng.dirichlet(np.ones(K))
            r = rng.dirichlet(np.ones(K))
            if a.min() > MIN_COMPONENT and r.min() > MIN_COMPONENT:
                break
        yield simplex_pair(r, a)


def dual_chi2_lhs(gen: FGenerator, pair: DensityPair):
    """(LHS via mu-form, LHS via direct form, mu2) for one pair."""
    w, rho, rho_star, x = pair.weights, pair.rho, pair.rho_star, pair.x
    mu2 = float(np.sum(w * rho_star * rho_star / rho))
    mu = math.sqrt(mu2)
    fp = gen.fp(x)
    lhs_mu = float(np.sum(w * rho * (gen.fp(1.0 / mu) - fp) * (1.0 / x**2 - mu2)))
    mean = float(np.sum(w * rho * fp))
    lhs_direct = -float(
        np.sum(w * (-rho * fp + rho * mean) * (1.0 - (rho_star / rho) ** 2))
    )
    return lhs_mu, lhs_direct, mu2


def dual_pointwise_check(
    gen: FGenerator, samples: int = 100000, seed: int = 0
) -> InequalityReport:
    """Pointwise inequality behind the dual chi-square bound.

    Samples (x, mu) and verifies
    (f'(1/mu)-f'(1/x))(x^2-mu^2) >= mu(x-mu)f'(1/mu) - mu^2 x (f(1/mu)-f(1/x)).
    min_ratio is the worst normalized margin (lhs-rhs)/max(1,|lhs|,|rhs|).
    """
    gen = normalize_slope(gen)
    rng = np.random.default_rng(seed)
    x = 10.0 ** rng.uniform(-3.0, 3.0, samples)
    mu = 10.0 ** rng.uniform(0.0, 3.0, samples)
    lhs = (gen.fp(1.0 / mu) - gen.fp(1.0 / x)) * (x * x - mu * mu)
    rhs = mu * (x - mu) * gen.fp(1.0 / mu) - mu * mu * x * (
        gen.f(1.0 / mu) - gen.f(1.0 / x)
    )
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    margin = (lhs - rhs) / scale
    i = int(np.argmin(margin))
    witness = {"x": float(x[i]), "mu": float(mu[i]), "lhs": float(lhs[i]), "rhs": float(rhs[i])}
    neg = np.flatnonzero(margin < -1e-12)
    bad = [
        (float(margin[j]), ({"x": float(x[j]), "mu": float(mu[j])}, float(lhs[j]), float(rhs[j])))
        for j in neg
    ]
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="dual_pointwise",
        generator=gen.name,
        alpha_tested=None,
        samples=samples,
        min_ratio=float(margin[i]),
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        constants={"violation_count": int(neg.size)},
    )


def dual_chi2_check(
    gen: FGenerator,
    pairs=None,
    samples: int = 1000,
    seed: int = 0,
    pointwise_samples: int = 100000,
) -> InequalityReport:
    """LHS >= D_f and LHS >= 2 alpha_f (mu^2 - 1) over sampled pairs.

    LHS = sum w rho (f'(1/mu) - f'(x))(1/x^2 - mu^2) with mu^2 the reverse
    chi-square mass; the mu-form is cross-checked against the direct form
    to 1e-10.  Includes the pointwise sub-check as additional violations.
    """
    gen = normalize_slope(gen)
    if gen.fpp(1.0) <= 0.0:
        raise ValueError("dual chi-square bound requires f''(1) > 0")
    delta_f, alpha_f = dual_alpha_recipe(gen)
    if pairs is None:
        pairs = _random_pair_stream(np.random.default_rng(seed), samples)
    n = skipped = 0
    min_ratio, witness = math.inf, {}
    bad = []
    for pair in pairs:
        n += 1
        lhs_mu, lhs_direct, mu2 = dual_chi2_lhs(gen, pair)
        if abs(lhs_mu - lhs_direct) > CROSS_TOL * max(1.0, abs(lhs_mu)):
            raise FRFlowError(
                f"dual LHS mu-form {lhs_mu!r} disagrees with direct {lhs_direct!r}"
            )
        D = divergence(gen, pair)
        chi_rhs = 2.0 * alpha_f * (mu2 - 1.0)
        denom = max(D, chi_rhs)
        if denom < RATIO_SKIP:
            skipped += 1
            continue
        ratio = lhs_mu / denom
        if ratio < min_ratio:
            min_ratio = ratio
            witness = _pair_config(pair) | {"ratio": ratio, "mu2": mu2}
        slack = 1e-12 * max(1.0, abs(lhs_mu))
        if lhs_mu < D - slack:
            bad.append((lhs_mu - D, (_pair_config(pair) | {"side": "divergence"}, lhs_mu, D)))
        if lhs_mu < chi_rhs - slack:
            bad.append(
                (lhs_mu - chi_rhs, (_pair_config(pair) | {"side": "chi2"}, lhs_mu, chi_rhs))
            )
    pw = dual_pointwise_check(gen, pointwise_samples, seed)
    for cfg, l, r in pw.violations:
        bad.append((l - r, (cfg | {"side": "pointwise"}, l, r)))
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="dual_chi2",
        generator=gen.name,
        alpha_tested=alpha_f,
        samples=n,
        min_ratio=min_ratio,
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        skipped=skipped,
        constants={
            "delta_f": delta_f,
            "alpha_f": alpha_f,
            "pointwise_min_margin": pw.min_ratio,
            "violation_count": len(bad),
        },
    )


def dual_conjugate_check(
    p: float, pairs=None, samples: int = 1000, seed: int = 0
) -> InequalityReport:
    """Dual dissipation bound LHS >= c (D_fbar + D_f) for the power family.

    LHS = sum w rho (f'(x) - E_rho f')(f(1/x) - (1/x) f'(1/x)) with c = 1
    for p <= -2 or p >= -1 and c = 1/2 in between.  For p in {-1, -2} the
    bound is an equality (KL + reverse KL) checked to 1e-10; away from
    those, LHS is cross-checked against its closed product form.
    """
    gen = power_family(p)
    genbar = conjugate_gen(gen)
    c = 1.0 if (p <= -2.0 or p >= -1.0) else 0.5
    equality = p in (-1.0, -2.0)
    if pairs is None:
        pairs = _random_pair_stream(np.random.default_rng(seed), samples)
    n = skipped = 0
    min_ratio, witness = math.inf, {}
    max_eq_gap = 0.0
    bad = []
    for pair in pairs:
        n += 1
        w, rho, x = pair.weights, pair.rho, pair.x
        fp = gen.fp(x)
        mean = float(np.sum(w * rho * fp))
        term = gen.f(1.0 / x) - (1.0 / x) * gen.fp(1.0 / x)
        lhs = float(np.sum(w * rho * (fp - mean) * term))
        D = divergence(gen, pair)
        Dbar = divergence(genbar, pair)
        rhs = c * (D + Dbar)
        if equality:
            gap = abs(lhs - (D + Dbar))
            max_eq_gap = max(max_eq_gap, gap)
            if gap > CROSS_TOL * max(1.0, abs(lhs)):
                raise FRFlowError(
                    f"equality case violated: LHS {lhs!r} vs D_f+D_fbar {D + Dbar!r}"
                )
        else:
            A = float(np.sum(w * pair.rho_star * x ** (p + 2.0)))
            B = float(np.sum(w * pair.rho_star * x ** (-p - 1.0)))
            closed = (A * B - 1.0) / ((p + 1.0) * (p + 2.0))
            if abs(lhs - closed) > CROSS_TOL * max(1.0, abs(lhs), abs(closed)):
                raise FRFlowError(
                    f"closed form {closed!r} disagrees with LHS {lhs!r}"
                )
        if rhs < RATIO_SKIP:
            skipped += 1
            continue
        ratio = lhs / rhs
        if ratio < min_ratio:
            min_ratio = ratio
            witness = _pair_config(pair) | {"ratio": ratio}
        if lhs < rhs - 1e-12 * max(1.0, abs(rhs)):
            bad.append((lhs - rhs, (_pair_config(pair), lhs, rhs)))
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="dual_conjugate",
        generator=gen.name,
        alpha_tested=c,
        samples=n,
        min_ratio=min_ratio,
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        skipped=skipped,
        constants={
            "p": p,
            "factor": c,
            "max_equality_gap": max_eq_gap,
            "violation_count": len(bad),
        },
    )


# ---------------------------------------------------------------------------
# Neighborhood extension of the two-point condition.

GATE_THRESHOLD = 1e-8
NEIGHBORHOOD_DELTAS = (0.5, 0.4, 0.3, 0.2, 0.1)


def lemma_gdc_neighborhood_check(
    gen: FGenerator,
    alpha_from_scan: float,
    samples: int = 20000,
    seed: int = 0,
) -> InequalityReport:
    """Largest delta with the two-point ratio positive for x in (1-d, 1+d).

    The generalized ratio allows both arguments on the same side of 1 (RHS
    stays nonnegative since f(x)/(1-x) and 1/x are both decreasing).  Only
    meaningful when the global scan passed: a scan infimum at or below the
    gate threshold reports the check as not applicable.
    """
    gen = normalize_slope(gen)
    if alpha_from_scan <= GATE_THRESHOLD:
        return InequalityReport(
            inequality_id="lemma_gdc_neighborhood",
            generator=gen.name,
            alpha_tested=alpha_from_scan,
            samples=0,
            min_ratio=0.0,
            argmin_witness={},
            violations=(),
            passed=True,
            constants={"gated": True, "delta": 0.0, "alpha_delta": 0.0},
        )
    last = None
    for delta in NEIGHBORHOOD_DELTAS:
        rng = np.random.default_rng(seed)
        xs = rng.uniform(1.0 - delta, 1.0 + delta, samples)
        ys = 10.0 ** rng.uniform(-3.0, 3.0, samples)
        lhs = (gen.fp(ys) - gen.fp(xs)) ** 2
        rhs = (1.0 / xs - 1.0 / ys) * (f_ratio(gen, xs) - f_ratio(gen, ys))
        live = rhs >= RATIO_SKIP
        ratio = lhs[live] / rhs[live]
        if ratio.size == 0:
            continue
        k = int(np.argmin(ratio))
        inf_ratio = float(ratio[k])
        idx = np.flatnonzero(live)[k]
        last = (delta, inf_ratio, float(xs[idx]), float(ys[idx]), int(live.size - ratio.size))
        if inf_ratio > 0.0:
            alpha_delta = min(inf_ratio, alpha_from_scan)
            return InequalityReport(
                inequality_id="lemma_gdc_neighborhood",
                generator=gen.name,
                alpha_tested=alpha_from_scan,
                samples=samples,
                min_ratio=inf_ratio,
                argmin_witness={"x": last[2], "y": last[3], "ratio": inf_ratio},
                violations=(),
                passed=True,
                skipped=last[4],
                constants={
                    "gated": False,
                    "delta": delta,
                    "alpha_delta": alpha_delta,
                },
            )
    delta, inf_ratio, xw, yw, skip = last
    violation = (({"x": xw, "y": yw, "delta": delta}, inf_ratio, 0.0),)
    return InequalityReport(
        inequality_id="lemma_gdc_neighborhood",
        generator=gen.name,
        alpha_tested=alpha_from_scan,
        samples=samples,
        min_ratio=inf_ratio,
        argmin_witness={"x": xw, "y": yw, "ratio": inf_ratio},
        violations=violation,
        passed=False,
        skipped=skip,
        constants={"gated": False, "delta": delta, "alpha_delta": 0.0},
    )


# ---------------------------------------------------------------------------
# Vectorized random-configuration gradient dominance for the CLI.

def gdc_sampled_check(
    gen: FGenerator,
    K: int,
    samples: int,
    alpha: float,
    seed: int = 0,
    extra_pairs=(),
) -> InequalityReport:
    """gdc_check over a vectorized random batch plus labeled extra pairs.

    On simplex configurations the gradient-dominance ratio coincides with
    the K-point inequality ratio, so random sampling reuses that batch;
    the labeled pairs (adversarial families, grid densities) go through
    the scalar path.
    """
    gen = normalize_slope(gen)
    _, R, x, lhs, rhs, dropped = _kpoint_batch(gen, K, samples, seed)
    live = rhs >= RATIO_SKIP
    lhs_l, rhs_l = lhs[live], rhs[live]
    ratio = lhs_l / rhs_l
    idx = np.flatnonzero(live)
    if ratio.size == 0:
        raise FRFlowError("all sampled configurations were skipped")
    k = int(np.argmin(ratio))
    min_ratio = float(ratio[k])
    row = int(idx[k])
    witness = {
        "rho": _as_list(R[row]),
        "rho_star": _as_list(R[row] / x[row]),
        "ratio": min_ratio,
    }
    bad = []
    for k_bad in np.flatnonzero(ratio < alpha):
        row_b = int(idx[int(k_bad)])
        cfg = {"label": f"random:{row_b}", "rho": _as_list(R[row_b]), "rho_star": _as_list(R[row_b] / x[row_b])}
        bad.append((float(ratio[int(k_bad)]), (cfg, float(lhs_l[int(k_bad)]), alpha * float(rhs_l[int(k_bad)]))))
    count = len(bad)
    skipped = dropped + int((~live).sum())

    extra = gdc_check(gen, extra_pairs, alpha)
    count += extra.constants.get("violation_count", len(extra.violations))
    skipped += extra.skipped
    bad.extend((l - r, (c, l, r)) for c, l, r in extra.violations)
    if extra.samples and extra.min_ratio < min_ratio:
        min_ratio, witness = extra.min_ratio, extra.argmin_witness
    violations = _worst_violations(bad)
    return InequalityReport(
        inequality_id="gdc",
        generator=gen.name,
        alpha_tested=alpha,
        samples=samples + extra.samples,
        min_ratio=min_ratio,
        argmin_witness=witness,
        violations=violations,
        passed=not violations,
        skipped=skipped,
        constants={"K": K, "violation_count": count},
    )
