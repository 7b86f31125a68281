"""Command-line driver.

Subcommands: flow (gradient-flow integration with observables), check (one
of the inequality checkers), geodesic (closed-form vs ODE geodesics), and
counterexample (closed-form constructions with quadrature cross-checks).

Exit codes: 0 on success/pass, 1 on usage errors and failed checks, 2 on
numerical failures (blow-up, cross-check disagreement).  All JSON output
is deterministic: keys sorted, no timestamps, seeds explicit.  Reports go
to stdout and, with --out, are also written atomically to a file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python < 3.11
    import tomli as tomllib

import numpy as np

from . import counterexamples as cx
from . import inequalities as ineq
from .density import (
    _parse_scalar,
    gaussian_grid_pair,
    make_two_point,
    pair_from_spec,
)
from .divergences import get_generator
from .errors import FRFlowError
from .flow import STANDARD_OBSERVABLES, flow_summary, integrate_flow, write_flow_csv
from .geometry import (
    bhattacharyya,
    fr_distance_sq,
    geodesic_point,
    geodesic_speed,
    hellinger_sq,
    integrate_geodesic,
    shooting_potential,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="frflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="write the JSON report here")
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None)

    p_flow = sub.add_parser("flow", help="integrate the gradient flow")
    p_flow.add_argument("--gen", default=None)
    p_flow.add_argument("--pair", default=None)
    p_flow.add_argument("--T", type=float, default=None)
    p_flow.add_argument("--dt", type=float, default=None)
    common(p_flow)

    p_check = sub.add_parser("check", help="run an inequality checker")
    p_check.add_argument(
        "checker",
        choices=[
            "gdc",
            "two-point",
            "kpoint",
            "support-reduction",
            "convexity",
            "strong-convexity",
            "dual-chi2",
            "dual-conjugate",
            "lemma-neighborhood",
        ],
    )
    p_check.add_argument("--gen", default=None)
    p_check.add_argument("--alpha", type=float, default=None)
    p_check.add_argument("--K", type=int, default=None)
    p_check.add_argument("--samples", type=int, default=None)
    p_check.add_argument("--p", type=float, default=None)
    common(p_check)

    p_geo = sub.add_parser("geodesic", help="geodesic between two simplex points")
    p_geo.add_argument("--rho0", default=None)
    p_geo.add_argument("--rho1", default=None)
    p_geo.add_argument("--dt", type=float, default=None)
    common(p_geo)

    p_cx = sub.add_parser("counterexample", help="closed-form counterexamples")
    p_cx.add_argument(
        "kind",
        choices=["gaussian-hessian", "twovalue-hessian", "gdc-gaussian", "gdc-twovalue"],
    )
    p_cx.add_argument("--mu2", type=float, default=None)
    p_cx.add_argument("--sigma2", type=float, default=None)
    p_cx.add_argument("--eps", type=float, default=None)
    p_cx.add_argument("--M", type=float, default=None)
    common(p_cx)

    return parser


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        loaded = tomllib.load(fh)
    if not isinstance(loaded, dict):
        raise UsageError("config file must contain a table")
    return loaded


def _resolve(args, defaults: dict) -> dict:
    """Effective parameters with precedence flags > config file > defaults."""
    cfg = _load_config(args.config)
    resolved = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = cfg.get(key, default)
        resolved[key] = value
    return resolved


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".frflow-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(doc: dict, out_path) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    sys.stdout.write(text)
    if out_path:
        _atomic_write(out_path, text)


# ---------------------------------------------------------------------------
# flow

_FLOW_DEFAULTS = {
    "gen": "kl",
    "pair": "random:K=64,seed=0",
    "T": 5.0,
    "dt": 1e-3,
}

_FLOW_OBSERVE = STANDARD_OBSERVABLES + ("dual_sum",)


def run_flow(args) -> int:
    resolved = _resolve(args, _FLOW_DEFAULTS)
    gen = get_generator(resolved["gen"])
    pair = pair_from_spec(resolved["pair"])
    trace = integrate_flow(
        gen, pair, resolved["T"], dt=resolved["dt"], observe=_FLOW_OBSERVE
    )
    summary = flow_summary(trace)
    summary["final_time"] = float(trace.times[-1])
    summary["steps"] = int(trace.times.size - 1)
    if pair.K > 256:
        summary["final_state"] = []  # grid states belong in the CSV, not the report
    doc = {"command": "flow", "config": resolved, "summary": summary}
    _emit(doc, args.out)
    if args.out:
        base = args.out[:-5] if args.out.endswith(".json") else args.out
        write_flow_csv(trace, base + ".csv", include_state=pair.K <= 16)
    return 0


# ---------------------------------------------------------------------------
# check

_CHECK_DEFAULTS = {
    "gdc": {"gen": "kl", "alpha": 0.1, "K": 6, "samples": 10000, "seed": 0},
    "two-point": {"gen": "kl", "alpha": 0.1, "seed": 0},
    "kpoint": {"gen": "kl", "alpha": 0.1, "K": 6, "samples": 100000, "seed": 0},
    "support-reduction": {"gen": "kl", "K": 4, "samples": 100000, "seed": 0},
    "convexity": {"gen": "kl"},
    "strong-convexity": {"gen": "kl", "samples": 10000, "seed": 0},
    "dual-chi2": {"gen": "kl", "samples": 1000, "seed": 0},
    "dual-conjugate": {"p": None, "samples": 1000, "seed": 0},
    "lemma-neighborhood": {"gen": "kl", "samples": 20000, "seed": 0},
}

_ADVERSARIAL_M_TWOPOINT = (5.0, 10.0, 15.0, 20.0)
_ADVERSARIAL_M_GAUSS = (5.0, 10.0, 20.0)


def _adversarial_pairs():
    """Labeled families that defeat KL gradient dominance.

    Non-KL generators may blow up on these (the checker skips non-finite
    ratios), which is itself informative: the families are KL-targeted.
    """
    out = []
    for M in _ADVERSARIAL_M_TWOPOINT:
        out.append((f"two-point:e:e^-{M:g}", make_two_point(math.e, math.exp(-M))))
    for M in _ADVERSARIAL_M_GAUSS:
        out.append((f"gaussian:mu={M:g},s2={M**-2:g}", gaussian_grid_pair(M, M**-2)))
    return out


def run_check(args) -> int:
    name = args.checker
    resolved = _resolve(args, _CHECK_DEFAULTS[name])
    if name == "gdc":
        gen = get_generator(resolved["gen"])
        report = ineq.gdc_sampled_check(
            gen,
            resolved["K"],
            resolved["samples"],
            resolved["alpha"],
            seed=resolved["seed"],
            extra_pairs=_adversarial_pairs(),
        )
    elif name == "two-point":
        gen = get_generator(resolved["gen"])
        report = ineq.scan_two_point(gen, alpha=resolved["alpha"])
    elif name == "kpoint":
        gen = get_generator(resolved["gen"])
        report = ineq.kpoint_check(
            gen,
            resolved["K"],
            resolved["samples"],
            resolved["alpha"],
            seed=resolved["seed"],
        )
    elif name == "support-reduction":
        gen = get_generator(resolved["gen"])
        report = ineq.support_reduction_probe(
            gen, resolved["K"], resolved["samples"], seed=resolved["seed"]
        )
    elif name == "convexity":
        report = ineq.convexity_check(get_generator(resolved["gen"]))
    elif name == "strong-convexity":
        gen = get_generator(resolved["gen"])
        report = ineq.strong_convexity_check(
            gen, resolved["samples"], seed=resolved["seed"]
        )
    elif name == "dual-chi2":
        gen = get_generator(resolved["gen"])
        report = ineq.dual_chi2_check(
            gen, samples=resolved["samples"], seed=resolved["seed"]
        )
    elif name == "dual-conjugate":
        if resolved["p"] is None:
            raise UsageError("check dual-conjugate requires --p")
        report = ineq.dual_conjugate_check(
            resolved["p"], samples=resolved["samples"], seed=resolved["seed"]
        )
    else:  # lemma-neighborhood
        gen = get_generator(resolved["gen"])
        # Deep prerequisite scan: generators whose two-point ratio decays to
        # zero along x -> 0 (e.g. KL) must gate the neighborhood search.
        deep_x = np.geomspace(1e-13, 1.0, 1601)[:-1]
        scan = ineq.scan_two_point(gen, x_grid=deep_x)
        report = ineq.lemma_gdc_neighborhood_check(
            gen, scan.min_ratio, samples=resolved["samples"], seed=resolved["seed"]
        )
    doc = {
        "command": "check",
        "checker": name,
        "config": resolved,
        "report": report.to_json_dict(),
    }
    _emit(doc, args.out)
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# geodesic

_GEO_DEFAULTS = {"rho0": "0.5,0.5", "rho1": "0.75,0.25", "dt": 1e-3}


def _parse_simplex(text: str) -> np.ndarray:
    vals = np.array([_parse_scalar(tok) for tok in text.split(",")], dtype=float)
    if vals.size < 2 or np.any(vals <= 0.0):
        raise UsageError(f"simplex point needs >= 2 positive entries: {text!r}")
    return vals / vals.sum()


def run_geodesic(args) -> int:
    resolved = _resolve(args, _GEO_DEFAULTS)
    rho0 = _parse_simplex(resolved["rho0"])
    rho1 = _parse_simplex(resolved["rho1"])
    if rho0.size != rho1.size:
        raise UsageError("rho0 and rho1 must have the same length")
    dt = resolved["dt"]
    psi0 = shooting_potential(rho0, rho1)
    states = integrate_geodesic(rho0, psi0, 1.0, dt=dt)
    end_gap = float(np.max(np.abs(states[-1].rho - rho1)))
    interp_gap = max(
        float(np.max(np.abs(s.rho - geodesic_point(rho0, rho1, s.t))))
        for s in states
    )
    speeds = [geodesic_speed(s) for s in states]
    mean_speed = sum(speeds) / len(speeds)
    if mean_speed > 0.0:
        speed_var = (max(speeds) - min(speeds)) / mean_speed
    else:
        speed_var = 0.0
    stride = max(1, (len(states) - 1) // 100)
    indices = list(range(0, len(states), stride))
    if indices[-1] != len(states) - 1:
        indices.append(len(states) - 1)
    sampled = [states[i] for i in indices]
    summary = {
        "distance_sq": fr_distance_sq(rho0, rho1),
        "hellinger_sq": hellinger_sq(rho0, rho1),
        "bhattacharyya": bhattacharyya(rho0, rho1),
        "midpoint": [float(v) for v in geodesic_point(rho0, rho1, 0.5)],
        "endpoint_sup_gap": end_gap,
        "ode_vs_interpolation_sup": interp_gap,
        "speed_rel_variation": speed_var,
        "steps": len(states) - 1,
        "trace": {
            "t": [float(s.t) for s in sampled],
            "rho": [[float(v) for v in s.rho] for s in sampled],
        },
    }
    doc = {"command": "geodesic", "config": resolved, "summary": summary}
    _emit(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# counterexample

_CX_DEFAULTS = {
    "gaussian-hessian": {"mu2": 3.0, "sigma2": 0.25},
    "twovalue-hessian": {"eps": 1.0, "M": 5.0},
    "gdc-gaussian": {"M": 10.0},
    "gdc-twovalue": {"eps": 1.0, "M": 20.0},
}


def run_counterexample(args) -> int:
    kind = args.kind
    resolved = _resolve(args, _CX_DEFAULTS[kind])
    if kind == "gaussian-hessian":
        result = cx.gaussian_hessian_result(resolved["mu2"], resolved["sigma2"])
    elif kind == "twovalue-hessian":
        result = cx.twovalue_hessian_result(resolved["eps"], resolved["M"])
    elif kind == "gdc-gaussian":
        result = cx.gdc_gaussian_result(resolved["M"])
    else:
        result = cx.gdc_twovalue_result(resolved["eps"], resolved["M"])
    doc = {
        "command": "counterexample",
        "kind": kind,
        "config": resolved,
        "result": result.to_json_dict(),
    }
    _emit(doc, args.out)
    return 0


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "flow":
            return run_flow(args)
        if args.command == "check":
            return run_check(args)
        if args.command == "geodesic":
            return run_geodesic(args)
        return run_counterexample(args)
    except UsageError as exc:
        print(f"frflow: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"frflow: error: {exc}", file=sys.stderr)
        return 1
    except FRFlowError as exc:
        print(f"frflow: numerical failure: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:  # pragma: no cover - defensive
        print(f"frflow: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
