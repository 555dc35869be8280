"""Command-line entry point: ``ppoisson <command> [options]``.

Every command accepts ``--config FILE`` with ``key = value`` lines
(``#`` starts a comment); flags given on the command line win.  Exit
codes: 0 success, 2 bad parameters or input files, 3 solver did not
converge (partial outputs are still written).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import recipes
from .conjugate import conjugate_function, verify_conjugate
from .exact import PROFILES, profile_by_label, radial_p_poisson_rhs, render, render_rhs
from .fieldio import dumps_report, read_field, write_field, write_report
from .grid import Grid2D, ScalarField, parse_domain
from .quasiregular import dilatation_check, dirichlet_growth, gradient_holder_check, small_gradient_check
from .regularity import ExponentParams, excess_scan, gradient_oscillation_scan, parse_q
from .solver import SolverConfig, SolverDivergence, solve_p_poisson

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 2, 3


class UsageError(ValueError):
    pass


def _pair(text: str, kind=float) -> tuple:
    parts = [s.strip() for s in str(text).split(",")]
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated values, got {text!r}")
    return tuple(kind(s) for s in parts)


def _floats(text: str) -> list[float]:
    return [float(s) for s in str(text).split(",") if s.strip()]


def read_config(path) -> dict[str, str]:
    cfg = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def _report(args, results: dict, started: float) -> dict:
    return {
        "command": args.command,
        "config": _resolved(args),
        **results,
        "metadata": {"wall_time_seconds": time.perf_counter() - started},
    }


def _oracle_or_file(source: str, grid: Grid2D, p: float, q, what: str) -> ScalarField:
    if source == "zero":
        return ScalarField(grid, np.where(grid.active, 0.0, np.nan))
    if source in PROFILES:
        prof = profile_by_label(source, p, q)
        if what == "rhs":
            if prof.rhs is None:
                return ScalarField.from_function(grid, lambda x, y: radial_p_poisson_rhs(prof, p)(np.hypot(x, y)))
            return render_rhs(prof, grid)
        return render(prof, grid)
    if not Path(source).exists():
        raise UsageError(f"{what}: {source!r} is neither a file nor a label; valid labels: zero, {', '.join(sorted(PROFILES))}")
    f = read_field(source)
    if not f.grid.same_as(grid):
        raise UsageError(f"{what}: field in {source} lives on a different grid")
    return f


def _grid(args) -> Grid2D:
    return Grid2D.around(parse_domain(args.domain), float(args.spacing), _pair(args.origin))


def run_solve(args) -> int:
    started = time.perf_counter()
    _require(args, "p", "spacing", "out", "report")
    p, q = float(args.p), (parse_q(args.q) if args.q is not None else None)
    grid = _grid(args)
    rhs = _oracle_or_file(args.rhs, grid, p, q, "rhs")
    bnd = _oracle_or_file(args.boundary, grid, p, q, "boundary")
    cfg = SolverConfig(
        p=p,
        eps_schedule=tuple(_floats(args.eps_schedule)) if args.eps_schedule else SolverConfig.eps_schedule,
        grad_tol=float(args.grad_tol),
        max_outer=int(args.max_outer),
    )
    args.eps_schedule = ",".join(repr(e) for e in cfg.eps_schedule)
    try:
        v, rep = solve_p_poisson(grid, rhs, bnd, cfg)
    except SolverDivergence as exc:
        write_report(args.report, _report(args, {"converged": False, "error": str(exc)}, started))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    write_field(args.out, v)
    results = {
        "iterations": rep.iterations,
        "final_energy": rep.final_energy,
        "final_residual": rep.final_residual,
        "converged": rep.converged,
        "eps_schedule": list(cfg.eps_schedule),
        "linear_iterations": rep.linear_iterations,
    }
    write_report(args.report, _report(args, results, started))
    if not rep.converged:
        print(f"error: solver stopped at residual {rep.final_residual:.3g} > {cfg.grad_tol:g}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def run_oracle(args) -> int:
    started = time.perf_counter()
    _require(args, "profile", "p", "spacing", "out")
    p, q = float(args.p), (parse_q(args.q) if args.q is not None else None)
    prof = profile_by_label(args.profile, p, q)
    if args.domain is None:
        args.domain = "disc:0.5" if args.profile == "lq" else "disc:1"
    grid = _grid(args)
    field = render(prof, grid) if args.field == "value" else _oracle_or_file(args.profile, grid, p, q, "rhs")
    write_field(args.out, field)
    if args.report:
        write_report(args.report, _report(args, {"profile": prof.label}, started))
    return EXIT_OK


def run_exponent(args) -> int:
    started = time.perf_counter()
    _require(args, "field", "center", "out")
    v = read_field(args.field)
    center = _pair(args.center)
    radii = None if args.radii == "auto" else _floats(args.radii)
    scan = excess_scan(v, center, radii)
    gscan = gradient_oscillation_scan(v, center, scan.radii)
    results = {
        "radii": scan.radii,
        "s_osc": scan.s_osc,
        "s_lin": scan.s_lin,
        "fitted_exponent": scan.fitted_exponent,
        "fit_r2": scan.fit_r2,
        "gradient_oscillation": gscan.oscillation,
        "gradient_fitted_exponent": gscan.fitted_exponent,
        "gradient_fit_r2": gscan.fit_r2,
        "theoretical_beta": None,
        "theoretical_beta_minus_1": None,
    }
    if args.beta_from:
        kv = dict(item.split("=", 1) for item in args.beta_from.split(","))
        if set(kv) != {"p", "q"}:
            raise UsageError(f"--beta-from expects p=<real>,q=<real|inf>, got {args.beta_from!r}")
        params = ExponentParams.from_pq(float(kv["p"]), kv["q"], float(args.epsilon_margin))
        results["theoretical_beta"] = params.beta
        results["theoretical_beta_minus_1"] = params.beta - 1
    write_report(args.out, _report(args, results, started))
    if args.data:
        rows = "\n".join(f"{r:.17g} {s:.17g}" for r, s in zip(scan.radii, scan.s_lin))
        Path(args.data).write_text("# r s_lin\n" + rows + "\n")
    return EXIT_OK


def run_qr_check(args) -> int:
    started = time.perf_counter()
    _require(args, "field", "p", "mode", "out")
    u = read_field(args.field)
    grid = u.grid
    p = float(args.p)
    center = _pair(args.center)
    h = grid.spacing
    if args.mode == "dilatation":
        excl = float(args.exclusion_radius) if args.exclusion_radius is not None else 2 * h
        tol = float(args.tol) if args.tol is not None else 10 * h**0.5
        d = dilatation_check(u, p, excl, tol)
        results = {k: getattr(d, k) for k in ("sup_ratio", "violations", "admissible", "skipped_small_fz", "excluded", "bound", "tol_discrete")}
    elif args.mode == "growth":
        outer = grid.domain.params[-1]
        radii = _floats(args.radii) if args.radii else np.geomspace(0.25 * outer, 0.9 * outer, 6)
        g = dirichlet_growth(u, p, radii, center)
        results = {"radii": g.radii, "integrals": g.integrals, "slope": g.slope, "fit_r2": g.r2, "predicted_slope": g.predicted_slope}
    else:
        R = float(args.R) if args.R is not None else 0.45 * grid.distance_to_boundary(center)
        check = gradient_holder_check if args.mode == "lemma21" else small_gradient_check
        results = {"R": R, "ratio": check(u, p, R, center=center)}
    write_report(args.out, _report(args, results, started))
    return EXIT_OK


def run_conjugate(args) -> int:
    started = time.perf_counter()
    _require(args, "field", "p", "base", "out", "report")
    u = read_field(args.field)
    i, j = _pair(args.base, int)
    pair = conjugate_function(u, float(args.p), (j, i), order=args.order)
    rep = verify_conjugate(pair)
    write_field(args.out, pair.v)
    results = {
        "p": pair.p,
        "p_prime": pair.p_prime,
        "curl_residual": pair.curl_residual,
        "norm_identity_error": rep.norm_identity_error,
        "dual_residual": rep.dual_residual,
        "floored_nodes": pair.floored_nodes,
        "unreached_nodes": pair.unreached_nodes,
    }
    write_report(args.report, _report(args, results, started))
    return EXIT_OK


def run_reproduce(args) -> int:
    started = time.perf_counter()
    _require(args, "case")
    if args.case not in recipes.CASES:
        raise UsageError(f"unknown case {args.case!r}; valid cases: {', '.join(recipes.CASES)}")
    fn = recipes.CASES[args.case]
    results = fn() if args.spacing is None else fn(float(args.spacing))
    report = _report(args, results, started)
    if args.out:
        write_report(args.out, report)
    else:
        sys.stdout.write(dumps_report(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppoisson", description="p-Poisson solver and regularity diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.commands = {}

    def command(name, func, help):
        sp = sub.add_parser(name, help=help, description=help)
        parser.commands[name] = sp
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.set_defaults(func=func)
        return sp

    sp = command("solve", run_solve, "minimize the p-Poisson energy on a masked grid")
    sp.add_argument("--p", type=float)
    sp.add_argument("--domain", default="disc:1", help="disc:R, square:a or annulus:r1,r2")
    sp.add_argument("--origin", default="0,0", help="domain centre x,y")
    sp.add_argument("--spacing", type=float)
    sp.add_argument("--rhs", default="zero", help="oracle label, 'zero', or a field CSV")
    sp.add_argument("--boundary", default="zero", help="oracle label, 'zero', or a field CSV")
    sp.add_argument("--q", help="integrability exponent for the lq profile")
    sp.add_argument("--eps-schedule", help="comma-separated regularization levels")
    sp.add_argument("--grad-tol", type=float, default=1e-6)
    sp.add_argument("--max-outer", type=int, default=2000)
    sp.add_argument("--out")
    sp.add_argument("--report")

    sp = command("oracle", run_oracle, "render a closed-form radial profile (or its right-hand side)")
    sp.add_argument("--profile", help="one of: " + ", ".join(sorted(PROFILES)))
    sp.add_argument("--p", type=float)
    sp.add_argument("--q")
    sp.add_argument("--domain", help="default disc:1 (disc:0.5 for lq)")
    sp.add_argument("--origin", default="0,0")
    sp.add_argument("--spacing", type=float)
    sp.add_argument("--field", choices=("value", "rhs"), default="value")
    sp.add_argument("--out")
    sp.add_argument("--report")

    sp = command("exponent", run_exponent, "excess scan and fitted Hölder exponent at a node")
    sp.add_argument("--field")
    sp.add_argument("--center", help="x,y of an interior node")
    sp.add_argument("--radii", default="auto", help="'auto' or comma-separated radii")
    sp.add_argument("--beta-from", help="p=<real>,q=<real|inf>")
    sp.add_argument("--epsilon-margin", type=float, default=0.01)
    sp.add_argument("--data", help="also write two-column (r, s_lin) data here")
    sp.add_argument("--out")

    sp = command("qr-check", run_qr_check, "complex-gradient checks on a p-harmonic field")
    sp.add_argument("--field")
    sp.add_argument("--p", type=float)
    sp.add_argument(
        "--mode",
        choices=("dilatation", "growth", "lemma21", "lemma23"),
        help="lemma21: normalised gradient-Holder ratio (p >= 2); lemma23: gradient decay at a critical point (p <= 2)",
    )
    sp.add_argument("--center", default="0,0")
    sp.add_argument("--exclusion-radius", type=float)
    sp.add_argument("--tol", type=float, help="allowed excess over (p-2)/p; default 10 sqrt(h)")
    sp.add_argument("--radii", help="comma-separated ball radii for the growth mode")
    sp.add_argument("--R", type=float, help="ball radius for lemma21/lemma23")
    sp.add_argument("--out")

    sp = command("conjugate", run_conjugate, "build the conjugate function by path integration")
    sp.add_argument("--field")
    sp.add_argument("--p", type=float)
    sp.add_argument("--base", help="base node as column,row indices i,j")
    sp.add_argument("--order", choices=("xy", "yx"), default="xy")
    sp.add_argument("--out")
    sp.add_argument("--report")

    sp = command("reproduce", run_reproduce, "run a named experiment: " + ", ".join(recipes.CASES))
    sp.add_argument("--case")
    sp.add_argument("--spacing", type=float, help="override the calibrated spacing")
    sp.add_argument("--out", help="report path (stdout if omitted)")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    sub = parser.commands[args.command]
    known = {a.dest: a for a in sub._actions}
    cfg = read_config(args.config)
    defaults = {}
    for key, value in cfg.items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{args.config}: {key} must be one of {', '.join(action.choices)}")
        defaults[key] = action.type(value) if action.type else value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
