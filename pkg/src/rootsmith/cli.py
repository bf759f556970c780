"""Command-line front end: solve instances from files, sample functions to
CSV for plotting, and race methods against each other.

Instance files are JSON documents with top-level "kind" and "payload" keys
and an optional "options" object (method and tolerance overrides).  All
floating-point output uses shortest round-trip formatting, so printed
roots equal the library's doubles bit for bit.

Exit codes: 0 on success, 2 on parse/validation errors, 3 when a solver
fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import knapsack, oracle, pellet, secular
from .core import (
    Breakdown,
    Infeasible,
    IterationTrace,
    MaxItersExceeded,
    NoRootFound,
    NotApplicable,
    ScalarFunction,
    SolverConfig,
    Termination,
)

KINDS = ("secular", "knapsack", "trinomial", "pellet")


class InstanceError(Exception):
    """Anything wrong with the instance file or request (exit code 2)."""


@dataclass
class Instance:
    kind: str
    problem: object
    options: dict


def _load_instance(kind_arg: str, path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceError(f"{path}: top level must be an object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InstanceError(f"{path}: kind must be one of {KINDS}, got {kind!r}")
    if kind != kind_arg:
        raise InstanceError(
            f"{path}: file kind {kind!r} does not match requested {kind_arg!r}"
        )
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise InstanceError(f"{path}: payload must be an object")
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise InstanceError(f"{path}: options must be an object")
    try:
        problem = _build_problem(kind, payload)
    except (ValueError, TypeError, KeyError) as exc:
        raise InstanceError(f"{path}: {exc}") from exc
    return Instance(kind=kind, problem=problem, options=options)


def _build_problem(kind: str, payload: dict) -> object:
    if kind == "secular":
        return secular.SecularProblem(b=payload["b"], d=payload["d"])
    if kind == "knapsack":
        budget = payload.get("budget", payload.get("K"))
        if budget is None:
            raise KeyError("payload needs a 'budget' (or 'K') entry")
        return knapsack.KnapsackDual(
            alpha=payload["alpha"], beta=payload["beta"], budget=budget
        )
    if kind == "trinomial":
        return pellet.Trinomial(
            a=payload["a"], b=payload["b"], c=payload["c"],
            n=payload["n"], k=payload["k"],
        )
    return {"moduli": [float(v) for v in payload["moduli"]], "ell": int(payload["ell"])}


def _make_cfg(options: dict, args: argparse.Namespace) -> SolverConfig:
    f_tol = args.tol if args.tol is not None else options.get("f_tol", 1e-13)
    max_iters = (
        args.max_iters if args.max_iters is not None else options.get("max_iters", 100)
    )
    try:
        return SolverConfig(
            f_tol=float(f_tol),
            step_tol=float(options.get("step_tol", 1e-14)),
            max_iters=int(max_iters),
            inner_tol=float(options.get("inner_tol", 1e-12)),
        )
    except ValueError as exc:
        raise InstanceError(f"bad solver configuration: {exc}") from exc


def _resolve_method(args: argparse.Namespace, options: dict) -> secular.Method:
    name = args.method or options.get("method", "bns")
    try:
        return secular.Method(name)
    except ValueError:
        raise InstanceError(
            f"method must be one of {[m.value for m in secular.Method]}, got {name!r}"
        ) from None


def _write_trace_csv(path: str, trace: IterationTrace) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iter", "x", "f_x"])
        for k, (x, fx) in enumerate(trace.iterates):
            writer.writerow([k, repr(x), repr(fx)])


def _trace_path(base: str, index: int, multiple: bool) -> str:
    if not multiple:
        return base
    p = Path(base)
    return str(p.with_name(f"{p.stem}-root{index}{p.suffix}"))


def _print_root_line(
    index: int,
    trace: IterationTrace,
    report: Optional[oracle.VerificationReport],
) -> None:
    value = trace.root if trace.root is not None else trace.final_x
    line = f"{index} {value!r} {trace.steps} {trace.termination.value}"
    if report is not None:
        line += f" {report.abs_error:.3e} {report.rel_error:.3e}"
    print(line)


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_instance(args.kind, args.path)
    cfg = _make_cfg(inst.options, args)
    if args.method and inst.kind != "secular":
        raise InstanceError("--method applies to secular instances only")
    handler = {
        "secular": _solve_secular,
        "knapsack": _solve_knapsack,
        "trinomial": _solve_trinomial,
        "pellet": _solve_pellet,
    }[inst.kind]
    return handler(inst, cfg, args)


def _solve_secular(inst: Instance, cfg: SolverConfig, args: argparse.Namespace) -> int:
    p: secular.SecularProblem = inst.problem
    method = _resolve_method(args, inst.options)
    root_opt = args.root if args.root is not None else inst.options.get("root")
    if root_opt is not None:
        if not 1 <= int(root_opt) <= p.n - 1:
            raise InstanceError(f"--root must be in 1..{p.n - 1}, got {root_opt}")
        indices = [int(root_opt)]
    else:
        indices = list(range(1, p.n))
    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            traces = list(pool.map(lambda i: secular.solve_root(p, i, method, cfg), indices))
    else:
        traces = [secular.solve_root(p, i, method, cfg) for i in indices]
    print("# root value iterations termination" + (" abs_err rel_err" if args.verify else ""))
    status = 0
    for i, trace in zip(indices, traces):
        report = None
        if args.verify and trace.root is not None:
            gap = p.d[i] - p.d[i - 1]
            interval = (p.d[i - 1] + 1e-9 * gap, p.d[i] - 1e-9 * gap)
            report = oracle.verify_root(secular.interval_function(p, i), trace.root, interval)
        _print_root_line(i, trace, report)
        if args.trace:
            _write_trace_csv(_trace_path(args.trace, i, len(indices) > 1), trace)
        if not trace.converged:
            status = 3
    return status


def _solve_knapsack(inst: Instance, cfg: SolverConfig, args: argparse.Namespace) -> int:
    p: knapsack.KnapsackDual = inst.problem
    try:
        trace = knapsack.solve(p, cfg)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    report = None
    if args.verify and trace.root is not None:
        fn = ScalarFunction(
            f=lambda x: knapsack.eval_f(p, x, cfg), domain=(0.0, p.gamma)
        )
        lo = min(trace.root * 0.5, p.gamma * 1e-6)
        interval = (lo, p.gamma * (1.0 - 1e-9))
        report = oracle.verify_root(fn, trace.root, interval)
    print("# root value iterations termination" + (" abs_err rel_err" if args.verify else ""))
    _print_root_line(1, trace, report)
    if args.trace:
        _write_trace_csv(args.trace, trace)
    return 0 if trace.converged else 3


def _solve_trinomial(inst: Instance, cfg: SolverConfig, args: argparse.Namespace) -> int:
    t: pellet.Trinomial = inst.problem
    try:
        pair = pellet.solve_radii(t, cfg)
    except (NotApplicable, MaxItersExceeded) as exc:
        print(f"not solvable: {exc}", file=sys.stderr)
        return 3
    print("# root value iterations termination" + (" abs_err rel_err" if args.verify else ""))
    fn = pellet.poly_function(t)
    x_min = pellet.power_ratio(pellet.applicability(t).minimizer, 1, t.k)
    for index, (radius, trace) in enumerate(
        [(pair.r1, pair.trace_lower), (pair.r2, pair.trace_upper)], start=1
    ):
        report = None
        if args.verify:
            if index == 1:
                interval = (radius * 0.25, x_min)
            else:
                hi = 2.0 * radius
                while pellet.eval_poly(t, hi) <= 0.0:
                    hi *= 2.0
                interval = (x_min, hi)
            report = oracle.verify_root(fn, radius, interval)
        shown = IterationTrace(
            iterates=trace.iterates, termination=trace.termination, root=radius
        )
        _print_root_line(index, shown, report)
        if args.trace:
            _write_trace_csv(_trace_path(args.trace, index, True), trace)
    return 0


def _solve_pellet(inst: Instance, cfg: SolverConfig, args: argparse.Namespace) -> int:
    payload: dict = inst.problem
    try:
        pair = pellet.pellet_radii_general(payload["moduli"], payload["ell"], cfg)
    except (ValueError, Breakdown) as exc:
        raise InstanceError(str(exc)) from exc
    if pair is None:
        print("# no positive root pair (no modulus gap detected)")
        return 0
    print("# root value iterations termination" + (" abs_err rel_err" if args.verify else ""))
    m = payload["moduli"]
    signed = [(-v if j == payload["ell"] else v) for j, v in enumerate(m)]

    def q(z: float) -> float:
        acc = 0.0
        for coef in reversed(signed):
            acc = acc * z + coef
        return acc

    fn = ScalarFunction(f=q, domain=(0.0, math.inf))
    for index, (radius, trace) in enumerate(
        [(pair.r1, pair.trace_lower), (pair.r2, pair.trace_upper)], start=1
    ):
        report = None
        if args.verify:
            width = max(pair.r2 - pair.r1, radius * 1e-3)
            report = oracle.verify_root(
                fn, radius, (radius - 0.49 * width, radius + 0.49 * width)
            )
        _print_root_line(index, trace, report)
    return 0


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo_s, hi_s = text.split(":", 1)
        lo, hi = float(lo_s), float(hi_s)
    except ValueError as exc:
        raise InstanceError(f"--range must look like lo:hi, got {text!r}") from exc
    if not hi > lo:
        raise InstanceError(f"--range needs hi > lo, got {text!r}")
    return lo, hi


def _cmd_samples(args: argparse.Namespace) -> int:
    inst = _load_instance(args.kind, args.path)
    lo, hi = _parse_range(args.range)
    if args.samples < 2:
        raise InstanceError("--samples must be at least 2")
    rows, header = _sample_rows(inst, lo, hi, args)
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def _sample_xs(lo: float, hi: float, count: int) -> list[float]:
    return [lo + (hi - lo) * j / (count - 1) for j in range(count)]


def _sample_rows(
    inst: Instance, lo: float, hi: float, args: argparse.Namespace
) -> tuple[list[list[str]], list[str]]:
    if inst.kind == "secular":
        return _sample_secular(inst.problem, lo, hi, args)
    if inst.kind == "knapsack":
        return _sample_knapsack(inst.problem, lo, hi, args)
    if inst.kind == "trinomial":
        return _sample_trinomial(inst.problem, lo, hi, args)
    return _sample_pellet(inst.problem, lo, hi)


def _sample_secular(p, lo, hi, args):
    header = ["x", "f_x"]
    fit = None
    if args.fit_point is not None:
        x_fit = args.fit_point
        i = next(
            (j for j in range(1, p.n) if p.d[j - 1] < x_fit < p.d[j]),
            None,
        )
        if i is None:
            raise InstanceError(
                f"--fit-point {x_fit!r} is not inside an interior pole interval"
            )
        task = secular.shift_task(p, i)
        g = secular.fit_bns(p, task, x_fit - p.d[i - 1])
        f_fit = secular.eval_f(p, x_fit)
        fp_fit = secular.deriv_f(p, x_fit)
        fit = (p.d[i - 1], g, x_fit, f_fit, fp_fit)
        header += ["g_x", "n_x"]
    rows = []
    for x in _sample_xs(lo, hi, args.samples):
        if any(abs(x - dj) <= 1e-9 for dj in p.d):
            continue
        row = [repr(x), repr(secular.eval_f(p, x))]
        if fit is not None:
            di, g, x_fit, f_fit, fp_fit = fit
            try:
                row.append(repr(g.value(x - di)))
            except ZeroDivisionError:
                row.append("")
            row.append(repr(f_fit + fp_fit * (x - x_fit)))
        rows.append(row)
    return rows, header


def _sample_knapsack(p, lo, hi, args):
    if args.fit_point is not None:
        raise InstanceError("--fit-point is not supported for knapsack instances")
    cfg = _make_cfg({}, args) if hasattr(args, "tol") else SolverConfig()
    header = ["x", "f_x"]
    rows = []
    for x in _sample_xs(lo, hi, args.samples):
        if x <= 1e-9 or x >= p.gamma - 1e-9:
            continue
        rows.append([repr(x), repr(knapsack.eval_f(p, x, cfg))])
    return rows, header


def _sample_trinomial(t, lo, hi, args):
    header = ["x", "f_x"]
    fit = None
    if args.fit_point is not None:
        z_fit = args.fit_point ** t.k
        Fz = pellet.eval_transformed(t, z_fit)
        if Fz >= 0.0:
            raise InstanceError(
                f"--fit-point {args.fit_point!r} has non-negative transformed value"
            )
        ratio = t.k / t.n
        alpha = ratio * z_fit * pellet.power_ratio(z_fit, t.n, t.k)
        beta = (1.0 + ratio) * z_fit
        fit = (alpha, beta)
        header += ["g_x"]
    rows = []
    for x in _sample_xs(lo, hi, args.samples):
        if x < 0:
            continue
        row = [repr(x), repr(pellet.eval_poly(t, x))]
        if fit is not None:
            alpha, beta = fit
            z = x ** t.k
            if abs(beta - z) <= 1e-9:
                continue
            g = math.fsum([t.a * alpha / (beta - z), -t.b * z, t.c])
            row.append(repr(g))
        rows.append(row)
    return rows, header


def _sample_pellet(payload, lo, hi):
    signed = [
        (-v if j == payload["ell"] else v) for j, v in enumerate(payload["moduli"])
    ]

    def q(z: float) -> float:
        acc = 0.0
        for coef in reversed(signed):
            acc = acc * z + coef
        return acc

    count = 100
    rows = [[repr(x), repr(q(x))] for x in _sample_xs(lo, hi, count)]
    return rows, ["x", "f_x"]


def _cmd_compare(args: argparse.Namespace) -> int:
    inst = _load_instance(args.kind, args.path)
    cfg = _make_cfg(inst.options, args)
    if inst.kind == "secular":
        p: secular.SecularProblem = inst.problem
        indices = [args.root] if args.root else list(range(1, p.n))
        methods = list(secular.Method)
        print("# root " + " ".join(m.value for m in methods))
        for i in indices:
            cells = [str(i)]
            for m in methods:
                trace = secular.solve_root(p, i, m, cfg)
                cells.append(str(trace.steps) if trace.converged else "DNF")
            print(" ".join(cells))
        return 0
    if inst.kind == "knapsack":
        p = inst.problem
        trace = knapsack.solve(p, cfg)
        raw = _race_plain_newton_knapsack(p, cfg)
        print("# root newton-on-Lf newton-on-f")
        print(f"1 {trace.steps if trace.converged else 'DNF'} {raw}")
        return 0
    if inst.kind == "trinomial":
        pair = pellet.solve_radii(inst.problem, cfg)
        print("# branch iterations termination")
        print(f"lower {pair.trace_lower.steps} {pair.trace_lower.termination.value}")
        print(f"upper {pair.trace_upper.steps} {pair.trace_upper.termination.value}")
        return 0
    raise InstanceError("compare supports secular, knapsack, and trinomial kinds")


def _race_plain_newton_knapsack(p, cfg) -> str:
    """Newton directly on f from the same start, for the comparison table."""
    x = knapsack.initial_point(p)
    for k in range(cfg.max_iters):
        f, fp = knapsack._assemble(p, x, cfg)
        if abs(f) <= cfg.f_tol:
            return str(k)
        if fp == 0.0:
            return "DNF"
        nxt = x - f / fp
        if not 0.0 < nxt < p.gamma:
            return f"left-domain@{k + 1}"
        if abs(nxt - x) <= cfg.step_tol * (1.0 + abs(nxt)):
            return str(k + 1)
        x = nxt
    return "DNF"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rootsmith",
        description="Problem-adapted scalar root finders with monotone iterations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve an instance file and print its roots")
    solve.add_argument("kind", choices=KINDS)
    solve.add_argument("path")
    solve.add_argument("--method", choices=[m.value for m in secular.Method])
    solve.add_argument("--root", type=int, help="interior root index (secular)")
    solve.add_argument("--tol", type=float, help="residual tolerance override")
    solve.add_argument("--max-iters", type=int)
    solve.add_argument("--trace", metavar="PATH", help="write iteration CSV(s)")
    solve.add_argument("--verify", action="store_true", help="append oracle errors")
    solve.add_argument("--jobs", type=int, default=1, help="parallel root solves")
    solve.set_defaults(func=_cmd_solve)

    samples = sub.add_parser("samples", help="emit CSV function samples for plotting")
    samples.add_argument("kind", choices=KINDS)
    samples.add_argument("path")
    samples.add_argument("--range", required=True, metavar="LO:HI")
    samples.add_argument("--samples", type=int, default=100)
    samples.add_argument("--fit-point", type=float, help="emit the fitted approximant")
    samples.add_argument("--root", type=int)
    samples.add_argument("--out", metavar="PATH", help="CSV destination (default stdout)")
    samples.set_defaults(func=_cmd_samples, tol=None, max_iters=None)

    compare = sub.add_parser("compare", help="race methods and print an iteration table")
    compare.add_argument("kind", choices=KINDS)
    compare.add_argument("path")
    compare.add_argument("--root", type=int)
    compare.add_argument("--tol", type=float)
    compare.add_argument("--max-iters", type=int)
    compare.set_defaults(func=_cmd_compare)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 2
    try:
        return args.func(args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (Infeasible, NotApplicable, Breakdown, MaxItersExceeded, NoRootFound) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
