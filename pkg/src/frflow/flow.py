"""Time integration of Fisher-Rao gradient flows of f-divergences.

The flow is d rho/dt = -rho (f'(x) - E_rho[f'(x)]), x = rho/rho*, with rho*
held fixed.  A classical fixed-step RK4 with per-step mass renormalization
integrates it; a positivity floor guards the simplex boundary and a
dissipation watchdog flags step sizes too coarse for the requested
tolerance.  The KL flow has a closed-form solution used as the integrator
oracle.
"""

from __future__ import annotations

import csv
import dataclasses

import numpy as np

from .density import DensityPair
from .divergences import FGenerator, conjugate, get_generator, reverse_chi2
from .errors import BlowUpError, StepSizeError
from .geometry import fr_gradient

HARD_FLOOR = 1e-300
SOFT_FLOOR = 1e-14
DISSIPATION_TOL = 1e-5
WATCHDOG_FACTOR = 100.0

STANDARD_OBSERVABLES = ("D_f", "D_fbar", "chi2_reverse", "grad_norm_sq")


@dataclasses.dataclass(frozen=True)
class FlowTrace:
    """Recorded trajectory: times, states, and per-time observables."""

    times: np.ndarray
    states: np.ndarray
    observables: dict
    weights: np.ndarray
    soft_floor_hits: int = 0

    def __post_init__(self):
        for field in ("times", "states", "weights"):
            arr = np.array(getattr(self, field), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, field, arr)
        obs = {k: np.asarray(v, float) for k, v in self.observables.items()}
        object.__setattr__(self, "observables", obs)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def flow_rhs(gen: FGenerator, pair: DensityPair) -> np.ndarray:
    """Right-hand side of the gradient flow: minus the Fisher-Rao gradient."""
    return -fr_gradient(gen, pair)


def _divergence_arrays(gen, w, rho_star, x) -> float:
    return float(np.sum(w * rho_star * gen.f(x)))


def _grad_norm_sq_arrays(gen, w, rho, x) -> float:
    fpx = gen.fp(x)
    mean = float(np.sum(w * rho * fpx))
    return float(np.sum(w * rho * (fpx - mean) ** 2))


def _build_observers(gen: FGenerator, observe) -> dict:
    """Map observable keys to evaluators on (w, rho, rho_star, x)."""
    gen_bar = conjugate(gen)
    rchi2 = reverse_chi2()
    observers = {}
    for key in observe:
        if key == "D_f":
            observers[key] = (
                lambda w, rho, rs, x, g=gen: _divergence_arrays(g, w, rs, x)
            )
        elif key == "D_fbar":
            observers[key] = (
                lambda w, rho, rs, x, g=gen_bar: _divergence_arrays(g, w, rs, x)
            )
        elif key == "chi2_reverse":
            observers[key] = (
                lambda w, rho, rs, x, g=rchi2: _divergence_arrays(g, w, rs, x)
            )
        elif key == "grad_norm_sq":
            observers[key] = (
                lambda w, rho, rs, x, g=gen: _grad_norm_sq_arrays(g, w, rho, x)
            )
        elif key == "dual_sum":
            observers[key] = (
                lambda w, rho, rs, x, g=gen, gb=gen_bar: _divergence_arrays(g, w, rs, x)
                + _divergence_arrays(gb, w, rs, x)
            )
        elif key.startswith("div:"):
            other = get_generator(key.split(":", 1)[1])
            observers[key] = (
                lambda w, rho, rs, x, g=other: _divergence_arrays(g, w, rs, x)
            )
        else:
            raise ValueError(
                f"unknown observable {key!r}; expected D_f, D_fbar, chi2_reverse, "
                "grad_norm_sq, dual_sum, or div:<generator>"
            )
    return observers


def integrate_flow(
    gen: FGenerator,
    pair0: DensityPair,
    T: float,
    dt: float = 1e-3,
    observe=STANDARD_OBSERVABLES,
    soft_floor: bool = False,
    dissipation_tol: float = DISSIPATION_TOL,
) -> FlowTrace:
    """Integrate the D_f gradient flow from pair0.rho with pair0.rho_star fixed.

    Observables are evaluated on the post-renormalization state at every
    step.  With soft_floor=False (default) any component falling below the
    hard floor aborts with BlowUpError; with soft_floor=True components are
    clamped at SOFT_FLOOR and the clamp count is reported on the trace.

    When both D_f and grad_norm_sq are recorded, the energy identity
    d/dt D_f = -|grad|^2 is checked by central differences at the end; a
    violation beyond WATCHDOG_FACTOR * dissipation_tol (relative to
    max(1, |grad|^2)) raises StepSizeError, signaling that dt is too coarse.
    """
    if T <= 0.0 or dt <= 0.0:
        raise ValueError("T and dt must be positive")
    observers = _build_observers(gen, observe)
    w = pair0.weights
    rho_star = pair0.rho_star
    rho = np.array(pair0.rho, dtype=float)
    n_steps = int(round(T / dt))
    soft_hits = 0

    def rhs(r):
        if np.any(r <= 0.0):
            raise BlowUpError("flow state left the positive orthant mid-step")
        x = r / rho_star
        fpx = gen.fp(x)
        mean = np.sum(w * r * fpx)
        return -r * (fpx - mean)

    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, rho.size))
    recorded = {key: np.empty(n_steps + 1) for key in observers}

    def record(i, t, r):
        times[i] = t
        states[i] = r
        x = r / rho_star
        for key, fn in observers.items():
            recorded[key][i] = fn(w, r, rho_star, x)

    record(0, 0.0, rho)
    for k in range(n_steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if soft_floor:
            low = rho < SOFT_FLOOR
            if np.any(low):
                soft_hits += int(np.sum(low))
                rho = np.maximum(rho, SOFT_FLOOR)
        elif np.any(rho < HARD_FLOOR):
            raise BlowUpError(
                f"flow component below {HARD_FLOOR:g} at t={(k + 1) * dt!r}"
            )
        rho = rho / np.sum(w * rho)
        record(k + 1, (k + 1) * dt, rho)

    trace = FlowTrace(times, states, recorded, w, soft_floor_hits=soft_hits)
    if "D_f" in recorded and "grad_norm_sq" in recorded and n_steps >= 2:
        d = recorded["D_f"]
        g = recorded["grad_norm_sq"]
        resid = np.abs((d[2:] - d[:-2]) / (2.0 * dt) + g[1:-1])
        scale = np.maximum(1.0, g[1:-1])
        worst = float(np.max(resid / scale))
        if worst > WATCHDOG_FACTOR * dissipation_tol:
            raise StepSizeError(
                f"dissipation identity violated: |dD/dt + |grad|^2| reaches "
                f"{worst:.3e} x max(1,|grad|^2), beyond "
                f"{WATCHDOG_FACTOR * dissipation_tol:g}; reduce dt"
            )
    return trace


def kl_explicit_solution(rho0, rho_star, t: float, weights=None) -> np.ndarray:
    """Closed-form KL flow state: rho_t proportional to rho0^(e^-t) rho*^(1-e^-t)."""
    rho0 = np.asarray(rho0, float)
    rho_star = np.asarray(rho_star, float)
    w = np.ones(rho0.size) if weights is None else np.asarray(weights, float)
    lam = np.exp(-float(t))
    loglin = lam * np.log(rho0) + (1.0 - lam) * np.log(rho_star)
    out = np.exp(loglin - np.max(loglin))
    return out / np.sum(w * out)


def measure_decay_rate(trace: FlowTrace, key: str, t_window) -> float:
    """Fitted exponent: least-squares slope of -log(observable) against t."""
    t0, t1 = float(t_window[0]), float(t_window[1])
    if key not in trace.observables:
        raise ValueError(f"observable {key!r} was not recorded")
    mask = (trace.times >= t0) & (trace.times <= t1)
    if int(np.sum(mask)) < 2:
        raise ValueError("window contains fewer than two samples")
    obs = trace.observables[key][mask]
    if np.any(obs <= 0.0):
        raise ValueError(f"observable {key!r} is not positive throughout the window")
    slope = np.polyfit(trace.times[mask], -np.log(obs), 1)[0]
    return float(slope)


def write_flow_csv(trace: FlowTrace, path: str, include_state: bool = False) -> None:
    """CSV columns: t, one per observable, then rho_0..rho_{K-1} if requested."""
    keys = list(trace.observables)
    header = ["t"] + keys
    if include_state:
        header += [f"rho_{i}" for i in range(trace.states.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, t in enumerate(trace.times):
            row = [repr(float(t))] + [repr(float(trace.observables[k][i])) for k in keys]
            if include_state:
                row += [repr(float(v)) for v in trace.states[i]]
            writer.writerow(row)


def flow_summary(trace: FlowTrace, rate_window=None) -> dict:
    """JSON-ready summary: final state plus fitted decay rates per observable.

    Observables that are not strictly positive over the window are skipped
    (a rate of a signed or vanished quantity is meaningless).
    """
    if rate_window is None:
        t_end = float(trace.times[-1])
        rate_window = (0.5 * t_end, t_end)
    rates = {}
    for key in trace.observables:
        try:
            rates[key] = measure_decay_rate(trace, key, rate_window)
        except ValueError:
            continue
    return {
        "final_state": [float(v) for v in trace.final_state],
        "fitted_rates": rates,
        "rate_window": [float(rate_window[0]), float(rate_window[1])],
        "soft_floor_hits": int(trace.soft_floor_hits),
    }
