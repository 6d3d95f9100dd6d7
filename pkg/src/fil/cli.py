"""Command-line surface: bounds, empirical, gap, decay, perturb, check, report.

Reports are JSON ({tool_version, config_echo, truncation_note, results,
violations}); decay curves are CSV with header t,entropy,tv,hellinger.
Exit codes: 0 all assertions pass, 1 at least one verification failed,
2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .expr import ExprError, compile_expression
from .grids import (
    GridFunction,
    Measure1D,
    MeasureError,
    NuDensity,
    build_measure,
    default_grid,
    integrate,
)
from .hardy import lemma45_closed_form, sobolev_sandwich
from .lemmas import (
    DiscreteInstance,
    HalfLineInstance,
    lemma25_check,
    lemma32_check,
    lemma45_bruteforce,
    prop42_sandwich_bruteforce,
)
from .perturbation import perturbation_check
from .semigroup import build_generator, decay_curve, verify_decay_bounds
from .variational import maximize_constant, spectral_gap, theorem_a_check


def _worker_count() -> int:
    env = os.environ.get("FIL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _pmap(fn, items):
    items = list(items)
    if len(items) <= 1 or _worker_count() == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(_worker_count(), len(items))) as pool:
        return list(pool.map(fn, items))


def _load_measure(args) -> tuple[Measure1D, NuDensity]:
    spec = args.measure
    if spec.startswith("table:"):
        mu = build_measure(spec)
    else:
        mu = build_measure(spec, default_grid(spec, args.grid_n))
    nu_spec = getattr(args, "nu", "same-as-mu")
    if nu_spec == "same-as-mu":
        nu = NuDensity.from_measure(mu)
    else:
        nu_mu = build_measure(nu_spec, mu.grid)
        nu = NuDensity.from_measure(nu_mu)
    return mu, nu


def _report_skeleton(args, mu: Measure1D | None) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    report = {
        "tool_version": __version__,
        "config_echo": config,
        "truncation_note": mu.truncation if mu is not None else None,
        "results": [],
        "violations": [],
    }
    if not args.deterministic:
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    return report


def _emit(report: dict, args) -> int:
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonify)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if not report["violations"] else 1


def _jsonify(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _float_or_inf(value: float) -> float | str:
    return "inf" if math.isinf(value) else value


def _parse_p_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def cmd_bounds(args) -> int:
    mu, nu = _load_measure(args)
    report = _report_skeleton(args, mu)

    def one(p: float) -> dict:
        s = sobolev_sandwich(mu, nu, p)
        return {
            "p": p,
            "c_raw_lower": _float_or_inf(s.c_raw_lower),
            "c_raw_upper": _float_or_inf(s.c_raw_upper),
            "cs_lower": _float_or_inf(s.cs_lower),
            "cs_upper": _float_or_inf(s.cs_upper),
            "argmax_lower": s.argmax_lower,
            "argmax_upper": s.argmax_upper,
            "diverged": s.diverged,
            "tolerance": "sandwich consistency checked exactly",
        }

    for res in _pmap(one, args.p):
        report["results"].append(res)
        if not res["diverged"] and res["c_raw_lower"] > res["c_raw_upper"]:
            report["violations"].append(
                {"check": "sandwich-consistency", "p": res["p"], "record": res}
            )
    return _emit(report, args)


def cmd_empirical(args) -> int:
    mu, nu = _load_measure(args)
    report = _report_skeleton(args, mu)

    def one(p: float) -> dict:
        emp = maximize_constant(
            mu, p, seeds=args.seeds, max_iter=args.max_iter, rng_seed=args.rng_seed, nu=nu
        )
        res = {
            "p": p,
            "value": emp.value,
            "label": "<= C_S(p), not equal",
            "seed_label": emp.seed_label,
            "iterations": emp.iterations,
            "converged": emp.converged,
        }
        if p > 2:
            s = sobolev_sandwich(mu, nu, p)
            res["cs_upper"] = _float_or_inf(s.cs_upper)
            res["hard_cap_tolerance"] = 1e-2
            res["hard_cap_ok"] = s.diverged or emp.value <= s.cs_upper * (1.0 + 1e-2)
        return res

    for res in _pmap(one, args.p):
        report["results"].append(res)
        if not res.get("hard_cap_ok", True):
            report["violations"].append({"check": "hard-cap", "p": res["p"], "record": res})
    return _emit(report, args)


def cmd_gap(args) -> int:
    mu, _ = _load_measure(args)
    report = _report_skeleton(args, mu)
    gap = spectral_gap(mu)
    report["results"].append({"spectral_gap": gap, "c_p": 1.0 / gap, "tolerance": None})
    print(f"spectral gap {gap:.6g}  (C_P = {1.0 / gap:.6g})", file=sys.stderr)
    return _emit(report, args)


def cmd_decay(args) -> int:
    mu, _ = _load_measure(args)
    report = _report_skeleton(args, mu)
    try:
        f0_fn = compile_expression(args.f0)
    except ExprError as exc:
        raise MeasureError(f"bad --f0 expression: {exc}") from exc
    f0 = GridFunction(mu.grid, np.asarray(f0_fn(mu.grid.nodes()), dtype=float))
    gen = build_generator(mu)
    t_grid = np.arange(0.0, args.t_max + 1e-12, args.t_step)

    for p in args.p:
        curve = decay_curve(gen, f0, p, t_grid, dt=args.dt)
        res = {
            "p": p,
            "fitted_rate": None if not curve.rate_defined else curve.fitted_rate,
            "rate_defined": curve.rate_defined,
        }
        if args.cs is not None:
            mu_f_2p = integrate(
                mu, GridFunction(mu.grid, f0.values ** (2.0 / p))
            ) if p > 2 else None
            checks = verify_decay_bounds(curve, args.cs, p, mu_f_2p)
            res["checks"] = [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "worst_ratio": c.worst_ratio,
                    "first_violation_t": c.first_violation_t,
                    "tolerance": 1.01,
                }
                for c in checks
            ]
            for c in checks:
                if not c.passed:
                    report["violations"].append(
                        {"check": f"decay-{c.name}", "p": p, "first_violation_t": c.first_violation_t}
                    )
        report["results"].append(res)
        if args.curve_out:
            path = args.curve_out if len(args.p) == 1 else f"{args.curve_out}.p{p:g}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t", "entropy", "tv", "hellinger"])
                for row in zip(curve.times, curve.entropy, curve.tv, curve.hellinger):
                    writer.writerow([f"{v:.12g}" for v in row])
    return _emit(report, args)


def cmd_perturb(args) -> int:
    mu, _ = _load_measure(args)
    report = _report_skeleton(args, mu)
    try:
        u_fn = compile_expression(args.u)
    except ExprError as exc:
        raise MeasureError(f"bad --u expression: {exc}") from exc
    u = GridFunction(mu.grid, np.asarray(u_fn(mu.grid.nodes()), dtype=float))

    for p in args.p:
        rep = perturbation_check(
            mu, u, p, seeds=args.seeds, max_iter=args.max_iter, rng_seed=args.rng_seed
        )
        res = {
            "p": p,
            "osc": rep.osc,
            "factor": rep.factor,
            "base_upper": rep.base_upper,
            "perturbed_emp": rep.perturbed_emp,
            "passed": rep.passed,
            "inconclusive": rep.inconclusive,
            "tolerance": 1e-2,
        }
        report["results"].append(res)
        if not rep.passed and not rep.inconclusive:
            report["violations"].append({"check": "perturbation", "p": p, "record": res})
    return _emit(report, args)


def cmd_check(args) -> int:
    report = _report_skeleton(args, None)
    rng = np.random.default_rng(args.rng_seed)
    violations = 0

    for _ in range(args.trials):
        size = int(rng.integers(2, 9))
        masses = rng.uniform(0.05, 1.0, size)
        masses /= masses.sum()
        f = rng.uniform(0.0, 3.0, size)
        f /= np.dot(masses, f)
        a = float(rng.uniform(0.05, 0.95))
        slacks = lemma25_check(DiscreteInstance(masses, f), a)
        if slacks["upper_slack"] < -1e-12 or slacks["lower_slack"] < -1e-12:
            violations += 1
    report["results"].append(
        {"suite": "two-sided-tv-comparison", "trials": args.trials, "violations": violations}
    )

    bad32 = 0
    for _ in range(args.trials):
        size = int(rng.integers(2, 9))
        masses = rng.uniform(0.05, 1.0, size)
        masses /= masses.sum()
        f = rng.normal(0.0, 2.0, size)
        shift = float(rng.normal(0.0, 2.0))
        p = float(rng.uniform(2.05, 8.0))
        if lemma32_check(masses, f, shift, p) < -1e-10:
            bad32 += 1
    report["results"].append(
        {"suite": "recentering-inequality", "trials": args.trials, "violations": bad32}
    )

    bad45 = 0
    n45 = max(args.trials // 100, 10)
    for i in range(n45):
        size = int(rng.integers(1, 9))
        masses = rng.uniform(0.05, 1.0, size)
        subset = sorted(rng.choice(size, size=int(rng.integers(1, size + 1)), replace=False))
        a = float(rng.uniform(1.2, 4.0))
        big_k = float(masses.sum() + rng.uniform(0.1, 3.0))
        closed = lemma45_closed_form(masses, subset, a, big_k)
        brute = lemma45_bruteforce(masses, subset, a, big_k, rng_seed=args.rng_seed + i)
        if abs(closed - brute) > 1e-6:
            bad45 += 1
    report["results"].append(
        {"suite": "budgeted-supremum-closed-form", "trials": n45, "violations": bad45}
    )

    bad42 = 0
    n42 = max(args.trials // 100, 10)
    for i in range(n42):
        size = int(rng.integers(1, 6))
        node_masses = rng.uniform(0.05, 0.5, size)
        inst = HalfLineInstance(
            node_masses,
            rng.uniform(0.2, 5.0, size),
            float(rng.uniform(1.2, 4.0)),
            float(node_masses.sum() + rng.uniform(0.2, 2.0)),
        )
        if not prop42_sandwich_bruteforce(inst, rng_seed=args.rng_seed + i).passed:
            bad42 += 1
    report["results"].append(
        {"suite": "half-line-sandwich", "trials": n42, "violations": bad42}
    )

    for res in report["results"]:
        if res["violations"]:
            report["violations"].append({"check": res["suite"], "count": res["violations"]})
    return _emit(report, args)


def cmd_report(args) -> int:
    mu, nu = _load_measure(args)
    report = _report_skeleton(args, mu)
    gap = spectral_gap(mu)
    report["results"].append({"kind": "gap", "spectral_gap": gap, "c_p": 1.0 / gap})
    thm = theorem_a_check(
        mu, args.p, seeds=args.seeds, max_iter=args.max_iter, rng_seed=args.rng_seed
    )
    report["results"].append(
        {
            "kind": "consistency",
            "c_p_exact": thm.c_p_exact,
            "assertions": thm.assertions,
            "p_times_value": thm.p_times_value,
        }
    )
    for rec in thm.assertions:
        if not rec["passed"]:
            report["violations"].append({"check": rec["name"], "record": rec})
    for p in args.p:
        if p > 2:
            s = sobolev_sandwich(mu, nu, p)
            report["results"].append(
                {
                    "kind": "bounds",
                    "p": p,
                    "cs_lower": _float_or_inf(s.cs_lower),
                    "cs_upper": _float_or_inf(s.cs_upper),
                    "diverged": s.diverged,
                }
            )
    return _emit(report, args)


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="fil", description="one-dimensional functional-inequality laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def common(p, with_measure=True):
        p.add_argument("--config", help="optional TOML file with defaults")
        if with_measure:
            p.add_argument("--measure", help="e.g. uniform, jacobi:n=4, table:FILE")
            p.add_argument("--nu", default="same-as-mu")
            p.add_argument("--grid-n", type=int, default=4001, dest="grid_n")
        p.add_argument("--output", default=None, help="JSON report path (default stdout)")
        p.add_argument("--deterministic", action="store_true")
        p.add_argument("--rng-seed", type=int, default=0, dest="rng_seed")

    p_bounds = sub.add_parser("bounds", help="Hardy-type two-sided Sobolev bounds")
    common(p_bounds)
    p_bounds.add_argument("--p", type=_parse_p_list, default=[4.0])
    p_bounds.set_defaults(func=cmd_bounds)

    p_emp = sub.add_parser("empirical", help="empirical lower estimates of C_S(p)")
    common(p_emp)
    p_emp.add_argument("--p", type=_parse_p_list, default=[4.0])
    p_emp.add_argument("--seeds", type=int, default=16)
    p_emp.add_argument("--max-iter", type=int, default=500, dest="max_iter")
    p_emp.set_defaults(func=cmd_empirical)

    p_gap = sub.add_parser("gap", help="exact discrete spectral gap")
    common(p_gap)
    p_gap.set_defaults(func=cmd_gap)

    p_decay = sub.add_parser("decay", help="semigroup decay curves and bound checks")
    common(p_decay)
    p_decay.add_argument("--p", type=_parse_p_list, default=[4.0])
    p_decay.add_argument("--f0", required=True, help="expression in x, e.g. '1+0.5*sin(x)'")
    p_decay.add_argument("--t-max", type=float, default=1.0, dest="t_max")
    p_decay.add_argument("--t-step", type=float, default=0.05, dest="t_step")
    p_decay.add_argument("--dt", type=float, default=1e-3)
    p_decay.add_argument("--cs", type=float, default=None, help="candidate upper bound on C_S(p)")
    p_decay.add_argument("--curve-out", default=None, dest="curve_out")
    p_decay.set_defaults(func=cmd_decay)

    p_pert = sub.add_parser("perturb", help="bounded-perturbation check")
    common(p_pert)
    p_pert.add_argument("--p", type=_parse_p_list, default=[4.0])
    p_pert.add_argument("--u", required=True, help="perturbation expression in x")
    p_pert.add_argument("--seeds", type=int, default=16)
    p_pert.add_argument("--max-iter", type=int, default=500, dest="max_iter")
    p_pert.set_defaults(func=cmd_perturb)

    p_check = sub.add_parser("check", help="randomized lemma suites")
    common(p_check, with_measure=False)
    p_check.add_argument("--trials", type=int, default=10000)
    p_check.set_defaults(func=cmd_check)

    p_rep = sub.add_parser("report", help="combined gap/bounds/consistency report")
    common(p_rep)
    p_rep.add_argument("--p", type=_parse_p_list, default=[0.5, 1.0, 1.5, 4.0])
    p_rep.add_argument("--seeds", type=int, default=16)
    p_rep.add_argument("--max-iter", type=int, default=500, dest="max_iter")
    p_rep.set_defaults(func=cmd_report)
    registry.update(
        bounds=p_bounds, empirical=p_emp, gap=p_gap, decay=p_decay,
        perturb=p_pert, check=p_check, report=p_rep,
    )
    return parser, registry


def _apply_config(parser, registry, argv: list[str]) -> argparse.Namespace:
    # Config-file values act as defaults; explicit command-line flags win.
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, "rb") as fh:
            file_values = tomllib.load(fh)
        subparser = registry[args.command]
        for key, value in file_values.items():
            key = key.replace("-", "_")
            if hasattr(args, key) and getattr(args, key) == subparser.get_default(key):
                setattr(args, key, value)
    if getattr(args, "measure", "") is None:
        parser.error(f"fil {args.command}: --measure is required (flag or config file)")
    return args


def main(argv: list[str] | None = None) -> int:
    parser, registry = _build_parser()
    try:
        args = _apply_config(parser, registry, sys.argv[1:] if argv is None else list(argv))
        return args.func(args)
    except (MeasureError, ExprError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
