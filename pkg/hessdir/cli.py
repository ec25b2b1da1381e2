"""
The ``hessctl`` command line.

    hessctl <command> --config <file> [--out <dir>] [--seed <n>]
            [--workers <n>] [--verbose]
    hessctl --show-versions

Exit status: 0 success, 2 a requested check failed, 3 the solver did not
converge or lost admissibility, 4 bad configuration.
"""
import argparse
import logging
import os
import sys
import time
from itertools import product

import numpy as np
import pandas as pd

from hessdir._config import options
from hessdir.errors import (
    AdmissibilityError,
    ConfigError,
    HessdirError,
    LinearSolveFailure,
    NoConvergence,
)
from hessdir.grid import GridField
from hessdir.io.config import COMMANDS, SAMPLING_COMMANDS, build_problem, load_config
from hessdir.io.fields import emit_field
from hessdir.io.reports import RunReport, write_report, write_table
from hessdir.solver import boundary_bump, solve
from hessdir.structure import (
    SamplingSpec,
    check_Btilde_convex,
    check_monotone,
    check_regular,
)
from hessdir.verify import (
    boundary_barrier_sweep,
    boundary_decomposition_check,
    d2_stats,
    interior_barrier_audit,
    trace_ellipticity_check,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_NO_CONVERGENCE = 3
EXIT_BAD_CONFIG = 4

_SOLVER_FAILURES = (NoConvergence, AdmissibilityError, LinearSolveFailure)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _parser():
    parser = _Parser(
        prog="hessctl",
        description="Solve and audit augmented Hessian Dirichlet problems.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument(
        "--seed", type=int, help="sampling seed (overrides checks.seed)"
    )
    parser.add_argument("--workers", type=int, help="fan-out width")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument(
        "--show-versions", action="store_true", help="print dependency versions"
    )
    return parser


def _configure_logging(verbose):
    root = logging.getLogger("hessdir")
    for old in [h for h in root.handlers if getattr(h, "_hessctl", False)]:
        root.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler._hessctl = True
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _solver_kwargs(cfg):
    s = cfg.solver
    return {
        "rtol": s["rtol"],
        "stage_rtol": s["stage_rtol"],
        "max_newton": s["max_newton"],
        "homotopy_stages": s["homotopy_stages"],
        "max_bisections": s["max_bisections"],
        "init_mode": s["init"]["mode"],
        "mu0": s["init"]["mu0"],
    }


def _solve_dict(report, run):
    out = report.to_dict()
    run.timestamp.setdefault("solve_wall_time", []).append(out.pop("wall_time"))
    return out


def _run_structure(cfg, out, run):
    prob = build_problem(cfg)
    checks = cfg.checks
    s = SamplingSpec.for_problem(
        prob, n_x=checks["samples"], P=checks["P"], seed=checks["seed"]
    )
    reports = [
        check_regular(
            prob.A, s, strict=checks["strict"], c0=checks["c0"], tol=checks["tol"]
        ),
        check_Btilde_convex(prob.B, prob.k, s, tol=checks["tol"]),
    ]
    reports.extend(check_monotone(prob.A, prob.B, prob.k, s, tol=checks["tol"]))
    run.results["certificates"] = [r.to_dict() for r in reports]
    for r in reports:
        logger.info("%s: %s (margin %r)", r.condition, r.verdict, r.margin)
    return EXIT_CHECK_FAILED if any(r.fails for r in reports) else EXIT_OK


def _solve_or_record(prob, cfg, run):
    try:
        u, report = solve(prob, cfg.grid["m"], **_solver_kwargs(cfg))
    except _SOLVER_FAILURES as err:
        if getattr(err, "report", None) is not None:
            run.results["solve"] = _solve_dict(err.report, run)
        run.results["failure"] = f"{type(err).__name__}: {err}"
        raise
    run.results["solve"] = _solve_dict(report, run)
    return u


def _run_solve(cfg, out, run):
    prob = build_problem(cfg)
    u = _solve_or_record(prob, cfg, run)
    emit_field(u, os.path.join(out, "u.csv"))
    write_report(run.results["solve"], os.path.join(out, "solve_report.json"))
    return EXIT_OK


def _run_verify(cfg, out, run):
    prob = build_problem(cfg)
    u = _solve_or_record(prob, cfg, run)
    v = cfg.verify
    bump = boundary_bump(u.grid, prob.center)
    u_sub = GridField(u.grid, u.values + v["subsolution"]["c"] * bump, name="u_sub")

    run.results["d2_stats"] = d2_stats(u, prob).to_dict()
    interior = interior_barrier_audit(
        u, u_sub, prob, K_list=v["K_list"], eps1_list=v["eps1_list"], C_cap=v["C_cap"]
    )
    write_table(interior.table, os.path.join(out, "interior_barrier.csv"))
    run.results["interior_barrier"] = {
        key: value for key, value in interior.to_dict().items() if key != "table"
    }

    b = v["boundary"]
    face = tuple(b["face"])
    params, boundary, table = boundary_barrier_sweep(
        u,
        u_sub,
        prob,
        face=face,
        K_list=b["K_list"],
        N_list=b["N_list"],
        mu_list=b["mu_list"],
        delta_steps=b["delta_steps"],
        M=b["M"],
        eps1=b["eps1"],
    )
    write_table(table, os.path.join(out, "boundary_barrier.csv"))
    certificates = [
        boundary,
        boundary_decomposition_check(u, prob, face),
        trace_ellipticity_check(u, prob),
    ]
    run.results["boundary_params"] = params.to_dict()
    run.results["certificates"] = [r.to_dict() for r in certificates]
    return EXIT_CHECK_FAILED if any(r.fails for r in certificates) else EXIT_OK


def _sweep_row(cfg, combo, m):
    prob = build_problem(cfg, **combo)
    row = {**combo, "m": m}
    try:
        u, report = solve(prob, [m] * prob.n, **_solver_kwargs(cfg))
    except _SOLVER_FAILURES as err:
        report = getattr(err, "report", None)
        row.update(
            converged=False,
            iterations=np.nan if report is None else report.iterations,
            n_stages=np.nan if report is None else report.n_stages,
            residual=np.nan if report is None else report.residual,
            min_cone_margin=np.nan,
            max_dev_from_phi=np.nan,
            failure=type(err).__name__,
        )
        return row
    exact = prob.phi(u.grid.coords)
    row.update(
        converged=True,
        iterations=report.iterations,
        n_stages=report.n_stages,
        residual=report.residual,
        min_cone_margin=report.min_cone_margin,
        max_dev_from_phi=float(np.max(np.abs(u.values - exact))),
        failure="",
    )
    return row


def _run_sweep(cfg, out, run):
    from hessdir.tools._parallel import map_ordered

    grid = cfg.sweep["params"]
    names = sorted(grid)
    combos = [dict(zip(names, values)) for values in product(*(grid[k] for k in names))]
    ms = cfg.sweep["m"] or [cfg.grid["m"][0]]
    jobs = [(combo, m) for combo in combos for m in ms]
    rows = map_ordered(lambda job: _sweep_row(cfg, *job), jobs)
    table = pd.DataFrame(rows)
    write_table(table, os.path.join(out, "sweep.csv"))
    run.results["sweep"] = {
        "runs": len(rows),
        "converged": int(table["converged"].sum()),
    }
    return EXIT_OK if table["converged"].all() else EXIT_NO_CONVERGENCE


def _run_selftest(seed, out, run):
    from hessdir.tools.selftest import run_selftest

    result = run_selftest(seed=seed)
    run.results["selftest"] = result.to_dict()
    summary = result.summary()
    for suite, row in summary.iterrows():
        print(f"{suite}: {int(row['sum'])}/{int(row['count'])} passed")
    print(f"total: {result.n_passed} passed, {result.n_failed} failed")
    return EXIT_OK if result.ok else EXIT_CHECK_FAILED


_DISPATCH = {
    "structure": _run_structure,
    "solve": _run_solve,
    "verify": _run_verify,
    "sweep": _run_sweep,
}


def run_command(cfg, out=None):
    """
    Run a validated configuration.

    Parameters
    ----------
    cfg : RunConfig
    out : str, optional
        Output directory; defaults to ``cfg.output['dir']``.

    Returns
    -------
    RunReport
        ``exit_status`` holds the process exit code. The report is also
        written to ``<out>/report.json``.
    """
    out = out or cfg.output["dir"]
    os.makedirs(out, exist_ok=True)
    run = RunReport(command=cfg.command, config=cfg.to_dict())
    start = time.perf_counter()
    try:
        if cfg.command == "selftest":
            seed = cfg.checks["seed"] if cfg.checks["seed"] is not None else 0
            run.exit_status = _run_selftest(seed, out, run)
        else:
            run.exit_status = _DISPATCH[cfg.command](cfg, out, run)
    except ConfigError:
        raise
    except _SOLVER_FAILURES as err:
        logger.error("%s: %s", type(err).__name__, err)
        run.exit_status = EXIT_NO_CONVERGENCE
    run.timestamp["wall_time"] = time.perf_counter() - start
    write_report(run, os.path.join(out, "report.json"))
    return run


def main(argv=None):
    """Entry point of ``hessctl``; returns the exit status."""
    try:
        args = _parser().parse_args(argv)
    except ConfigError as err:
        print(str(err), file=sys.stderr)
        return EXIT_BAD_CONFIG
    _configure_logging(args.verbose)

    if args.show_versions:
        from hessdir.tools._show_versions import show_versions

        show_versions()
        return EXIT_OK
    if args.command is None:
        print("hessctl: a command is required", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if args.workers is not None and args.workers < 1:
        print("hessctl: --workers must be at least 1", file=sys.stderr)
        return EXIT_BAD_CONFIG

    workers = args.workers if args.workers is not None else options.max_workers
    try:
        with options.context(max_workers=workers):
            if args.config is None:
                if args.command != "selftest":
                    raise ConfigError(f"command {args.command!r} needs --config")
                out = args.out or "."
                os.makedirs(out, exist_ok=True)
                run = RunReport(command="selftest", config={"seed": args.seed or 0})
                run.exit_status = _run_selftest(args.seed or 0, out, run)
                if args.out:
                    write_report(run, os.path.join(out, "report.json"))
                return run.exit_status
            cfg = load_config(args.config, seed=args.seed)
            if cfg.command != args.command:
                logger.info("running %r (config says %r)", args.command, cfg.command)
                cfg.command = args.command
                if cfg.command in SAMPLING_COMMANDS and cfg.checks["seed"] is None:
                    raise ConfigError(
                        f"command {cfg.command!r} needs a sampling seed",
                        pointer="/checks/seed",
                    )
            return run_command(cfg, args.out).exit_status
    except ConfigError as err:
        pointer = f" at {err.pointer}" if err.pointer else ""
        print(f"hessctl: bad config{pointer}: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except HessdirError as err:
        print(f"hessctl: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
