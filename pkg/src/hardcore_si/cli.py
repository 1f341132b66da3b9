"""Command-line experiments: ``hardcore-si <subcommand> [options]``.

Every subcommand emits a JSON record with keys command, params, seed,
version, duration_ms and result (or CSV for tabular results). The exit code
is 0 when every checked bound holds, 1 when some check fails, and 2 on usage
errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .exact import SizeLimitError, worst_pinning_si
from .glauber import (
    StateSpaceTooLarge,
    empirical_tv_curve,
    exact_mixing_time,
    parse_seed,
    spectral_quantities,
    transition_matrix,
)
from .graph import Configuration, Graph, enumerate_graphs, load_graph
from .saw import verify_saw_domination
from .trees import enumerate_rooted_trees, root_influence_sum, truncated_influence_series
from .uniqueness import (
    HardcoreParams,
    critical_fugacity,
    fixed_point,
    fixed_point_upper_bound,
    inverse_f_identity_residual,
    mixing_bound,
    mixing_exponent,
    proof_functions,
    si_upper_constant,
    tree_si_constant,
)


class UsageError(Exception):
    pass


def _delta(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in [0, 1], got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _pool_map(threads: int, fn: Callable, items: list) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _resolve_lambda(args, measured_degree: int | None) -> tuple[float, dict]:
    """Fugacity from --lambda, or from --delta via lambda_c of the degree."""
    if args.lam is not None:
        return args.lam, {"lambda": args.lam}
    if args.delta is None:
        raise UsageError("one of --lambda or --delta is required")
    degree = args.degree if args.degree is not None else measured_degree
    if degree is None or degree < 3:
        raise UsageError(f"--delta needs a maximum degree >= 3 (got {degree}); pass --degree")
    lam = (1.0 - args.delta) * critical_fugacity(degree)
    return lam, {"delta": args.delta, "degree": degree, "lambda": lam}


def _read_graph(path: str) -> Graph:
    try:
        return load_graph(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read graph file: {exc}") from exc


# --- subcommands -------------------------------------------------------------

def cmd_fixed_point(args) -> tuple[dict, dict, list[str]]:
    try:
        params = HardcoreParams(args.degree, args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    d = params.d
    fp = fixed_point(d, params.lam)
    result: dict[str, Any] = {
        "lambda_c": params.lambda_c,
        "lambda": params.lam,
        "x_hat": fp.x_hat,
        "residual": fp.residual,
        "bisection_steps": fp.iterations,
    }
    failures = []
    if params.delta > 0:
        exact, closed = si_upper_constant(params)
        result.update(si_exact=exact, si_closed_form=closed, tree_si=1.0 / (1.0 - d * fp.x_hat))
        if exact > closed:
            failures.append(f"exact SI constant {exact} exceeds closed form {closed}")
    else:
        result.update(si_exact=None, si_closed_form=None, tree_si=None)
    if 0.0 < params.delta < 1.0:
        bound = fixed_point_upper_bound(d, params.delta)
        result["fixed_point_bound"] = bound
        if fp.x_hat > bound + 1e-12:
            failures.append(f"fixed point {fp.x_hat} exceeds the linear bound {bound}")
    else:
        result["fixed_point_bound"] = None
    result["mixing_exponent"] = str(mixing_exponent(args.degree))
    params_out = {"degree": args.degree, "delta": args.delta}
    return params_out, result, failures


def cmd_si_verify(args) -> tuple[dict, dict, list[str]]:
    failures: list[str] = []
    if args.graph:
        graph = _read_graph(args.graph)
        lam, lam_params = _resolve_lambda(args, graph.max_degree)
        degree = lam_params.get("degree", max(graph.max_degree, 3))
        try:
            worst = worst_pinning_si(graph, lam)
        except SizeLimitError as exc:
            raise UsageError(str(exc)) from exc
        result: dict[str, Any] = {
            "mode": "graph",
            "n": graph.n,
            "max_degree": graph.max_degree,
            "inf_norm": worst.inf_norm.inf_norm,
            "max_eigenvalue": worst.eigen.max_eigenvalue,
            "witness": {str(k): v for k, v in worst.witness.values.items()},
        }
        lc = critical_fugacity(degree)
        if lam <= lc * (1 + 1e-12):
            bound = si_upper_constant(HardcoreParams.from_fugacity(degree, lam))[0] \
                if lam < lc else math.inf
            result["theoretical_bound"] = bound if math.isfinite(bound) else None
            if worst.inf_norm.inf_norm > bound + 1e-9:
                failures.append(f"inf-norm {worst.inf_norm.inf_norm} exceeds bound {bound}")
        else:
            result["theoretical_bound"] = None
        return {"graph": args.graph, "lam_spec": lam_params}, result, failures

    if args.max_children is None:
        raise UsageError("si-verify needs --graph or --tree-sweep with --max-children d")
    d = args.max_children
    lam, lam_params = _resolve_lambda(args, d + 1)
    if args.max_n > 14:
        raise UsageError("tree sweeps are limited to --max-n 14")
    tree_bound = tree_si_constant(d, lam)
    x = fixed_point(d, lam).x_hat
    full_bound = (1.0 + x) / (1.0 - d * x)
    families = {
        "children_le_d": (list(enumerate_rooted_trees(args.max_n, d)), tree_bound),
        "max_degree_le_d_plus_1": (list(enumerate_rooted_trees(args.max_n, d, d + 1)), full_bound),
    }
    result = {"mode": "tree-sweep", "x_hat": x}
    for name, (trees, bound) in families.items():
        phis = _pool_map(args.threads, lambda t: root_influence_sum(t, lam).phi, trees)
        worst = max(phis)
        result[name] = {"trees": len(trees), "max_phi": worst, "bound": bound,
                        "pass": worst <= bound + 1e-10}
        if worst > bound + 1e-10:
            failures.append(f"{name}: max phi {worst} exceeds {bound}")
    return {"max_n": args.max_n, "max_children": d, "lam_spec": lam_params}, result, failures


def cmd_lb_convergence(args) -> tuple[dict, dict, list[str]]:
    try:
        params = HardcoreParams(args.degree, args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if params.delta <= 0:
        raise UsageError("the limit diverges at delta = 0")
    x = fixed_point(params.d, params.lam).x_hat
    limit = (1.0 + x) / (1.0 - params.d * x)
    rows = []
    for h in range(1, args.h_max + 1):
        phi = truncated_influence_series(args.degree, h, params.lam).phi
        rows.append({"h": h, "phi": phi, "gap": limit - phi, "rel_gap": (limit - phi) / limit})
    failures = [f"h={r['h']}: phi {r['phi']} exceeds the limit {limit}"
                for r in rows if r["phi"] > limit + 1e-10]
    result = {"x_hat": x, "limit": limit, "table": rows}
    return {"degree": args.degree, "delta": args.delta, "h_max": args.h_max}, result, failures


def cmd_saw_verify(args) -> tuple[dict, dict, list[str]]:
    cases = []
    for n in range(1, args.n_max + 1):
        for g in enumerate_graphs(n, args.max_degree, connected=True):
            for lam in args.lambdas:
                for u in range(n):
                    cases.append((g, lam, u))
    reports = _pool_map(args.threads, lambda c: verify_saw_domination(*c), cases)
    failures = []
    worst_ratio = 0.0
    for (g, lam, u), rep in zip(cases, reports):
        worst_ratio = max(worst_ratio, rep.graph_row_sum / rep.tree_sum)
        if not rep.dominated:
            failures.append(f"edges={g.edges()} lambda={lam} u={u}: "
                            f"{rep.graph_row_sum} > {rep.tree_sum}")
    result = {"cases": len(cases), "violations": len(failures),
              "max_graph_to_tree_ratio": worst_ratio}
    params = {"n_max": args.n_max, "max_degree": args.max_degree, "lambdas": args.lambdas}
    return params, result, failures


def cmd_mix(args) -> tuple[dict, dict, list[str]]:
    graph = _read_graph(args.graph)
    lam, lam_params = _resolve_lambda(args, graph.max_degree)
    degree = max(graph.max_degree, 3)
    result: dict[str, Any] = {
        "n": graph.n,
        "max_degree": graph.max_degree,
        "theoretical_exponent": str(mixing_exponent(degree)),
        "context": f"theoretical exponent {mixing_exponent(degree)}",
    }
    try:
        result["log_integral_factor"] = mixing_bound(degree, graph.n).log_integral
    except ValueError:
        result["log_integral_factor"] = None  # n below rho / theta
    failures: list[str] = []
    if args.simulate:
        if args.seed is None:
            raise UsageError("--simulate requires an explicit --seed")
        starts = [Configuration(graph.n, 0)]
        # a greedy maximal independent set as the second start
        bits = 0
        nmask = graph.neighbor_masks()
        for v in range(graph.n):
            if not bits & nmask[v]:
                bits |= 1 << v
        starts.append(Configuration(graph.n, bits))
        curve = empirical_tv_curve(graph, lam, starts, args.reps, args.horizon, args.seed)
        result["mode"] = "simulate"
        result["label"] = curve.label
        result["curve"] = [{"t": t, "proxy": v, "half_width": w}
                           for t, (v, w) in enumerate(zip(curve.values, curve.half_widths))]
    else:
        try:
            tm = transition_matrix(graph, lam)
            mix = exact_mixing_time(tm)
            spec = spectral_quantities(tm)
        except (StateSpaceTooLarge, SizeLimitError) as exc:
            raise UsageError(f"{exc}; use --simulate for large graphs") from exc
        result["mode"] = "exact"
        result["t_mix"] = mix.t_mix
        result["tv_monotone"] = mix.monotone
        result["second_eigenvalue_modulus"] = spec.second_eigenvalue_modulus
        result["relaxation_time"] = spec.relaxation_time
        result["curve"] = [{"t": t, "tv": v} for t, v in enumerate(mix.tv_curve)]
        if not mix.monotone:
            failures.append("TV distance increased along the exact computation")
    params = {"graph": args.graph, "lam_spec": lam_params, "exact": not args.simulate,
              "reps": args.reps, "horizon": args.horizon}
    return params, result, failures


def cmd_proof_check(args) -> tuple[dict, dict, list[str]]:
    d = args.d
    if args.delta <= 0.0:
        raise UsageError("f diverges at delta = 0 (the validity bound reaches 1); need delta > 0")
    lam = (1.0 - args.delta) * critical_fugacity(d + 1)
    x_hat = fixed_point(d, lam).x_hat
    grid = np.linspace(0.0, 1.0, args.grid)
    vals = [proof_functions(d, lam, float(x), phi_star=0.0) for x in grid]
    validity = np.array([v.validity_lhs for v in vals])
    f = np.array([v.f for v in vals])
    g = np.array([v.g for v in vals])
    f_hat = proof_functions(d, lam, x_hat, phi_star=0.0)
    step = 1.0 / (args.grid - 1)
    argmax_f = float(grid[int(np.argmax(f))])
    identity = max(inverse_f_identity_residual(d, lam, float(x)) for x in grid)
    f_closed = 1.0 / (1.0 - d * x_hat)
    result = {
        "x_hat": x_hat,
        "max_validity_lhs": float(validity.max()),
        "argmax_f": argmax_f,
        "max_f_grid": float(f.max()),
        "f_at_x_hat": f_hat.f,
        "f_closed_form": f_closed,
        "min_g_grid": float(g.min()),
        "g_at_x_hat": f_hat.g,
        "identity_residual": identity,
    }
    failures = []
    if not validity.max() < 1.0:
        failures.append(f"validity bound reached {validity.max()}")
    if abs(argmax_f - x_hat) > step:
        failures.append(f"argmax of f at {argmax_f}, expected {x_hat} +- {step}")
    if f.max() > f_hat.f + 1e-9:
        failures.append("f exceeds f(x_hat) on the grid")
    if g.min() < f_hat.g - 1e-9:
        failures.append("g drops below g(x_hat) on the grid")
    if abs(f_hat.f - f_closed) > 1e-9 * f_closed:
        failures.append("f(x_hat) differs from 1/(1 - d x_hat)")
    if identity > 1e-12:
        failures.append(f"1/f = 1 - d lam / g residual {identity}")
    return {"d": d, "delta": args.delta, "grid": args.grid}, result, failures


COMMANDS = {
    "fixed-point": cmd_fixed_point,
    "si-verify": cmd_si_verify,
    "lb-convergence": cmd_lb_convergence,
    "saw-verify": cmd_saw_verify,
    "mix": cmd_mix,
    "proof-check": cmd_proof_check,
}
RANDOMIZED = {"mix"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=parse_seed, default=None,
                        help="64-bit seed, decimal or 0x-hex (required for randomized runs)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="write the record here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="hardcore-si", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def fugacity_flags(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--lambda", dest="lam", type=_positive_float)
        group.add_argument("--delta", type=_delta)
        p.add_argument("--degree", type=int, default=None,
                       help="maximum degree used to resolve --delta (default: measured)")

    p = sub.add_parser("fixed-point", parents=[common])
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("si-verify", parents=[common])
    p.add_argument("--graph")
    p.add_argument("--tree-sweep", action="store_true")
    p.add_argument("--max-n", type=int, default=10)
    p.add_argument("--max-children", type=int, default=None)
    fugacity_flags(p)

    p = sub.add_parser("lb-convergence", parents=[common])
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--h-max", type=int, required=True)

    p = sub.add_parser("saw-verify", parents=[common])
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--lambdas", type=_positive_float, nargs="+", default=[0.5, 1.0, 4.0])

    p = sub.add_parser("mix", parents=[common])
    p.add_argument("--graph", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--simulate", action="store_true")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=100)
    fugacity_flags(p)

    p = sub.add_parser("proof-check", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--grid", type=int, default=10_000)
    return parser


def _table(result: dict) -> list[dict] | None:
    for key in ("table", "curve"):
        if key in result:
            return result[key]
    return None


def render(record: dict, fmt: str) -> str:
    if fmt == "csv":
        rows = _table(record["result"])
        if rows is None:
            raise UsageError(f"{record['command']} has no tabular payload; use --format json")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def run(argv: list[str] | None = None) -> tuple[int, dict | None, str]:
    """Parse ``argv``, run the subcommand, return (exit code, record, rendered output)."""
    args = build_parser().parse_args(argv)
    return _run(args)


def _run(args) -> tuple[int, dict | None, str]:
    started = time.perf_counter()
    try:
        if args.command in RANDOMIZED and getattr(args, "simulate", False) and args.seed is None:
            raise UsageError("randomized subcommands require an explicit --seed")
        params, result, failures = COMMANDS[args.command](args)
        result["failures"] = failures
        result["pass"] = not failures
        record = {
            "command": args.command,
            "params": params,
            "seed": args.seed,
            "version": __version__,
            "duration_ms": round((time.perf_counter() - started) * 1000.0, 3),
            "result": result,
        }
        text = render(record, args.format)
    except (UsageError, ValueError) as exc:
        return 2, None, f"hardcore-si {args.command}: error: {exc}\n"
    return (0 if not failures else 1), record, text


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code, record, text = _run(args)
    if record is None:
        sys.stderr.write(text)
    elif args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
