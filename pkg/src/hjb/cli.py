"""Command-line front end: ``hjb solve|radial|verify|legendre-check``.

Exit codes: 0 success, 1 configuration or input error, 2 the run completed
but did not meet its goal (no convergence, capped paths, failed check).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import _jsonio
from .config import load
from .control import Policy, simulate_cost, value_at
from .errors import (ConfigError, DomainError, ExprEvalError, ExprSyntaxError,
                     GridMismatchError, HJBError)
from .grid import multilinear, write_field_csv
from .iterate import build_barriers, iterate
from .model import Ball, hamiltonian_min
from .oracle import legendre_brute_force, sample_legendre_cases
from .poisson import LinearSolveSettings
from .radial import cross_check_1d, solve_radial

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2
LEGENDRE_TOL = 1e-3

logger = logging.getLogger("hjb")


def _prepare(path):
    d = Path(path)
    d.parent.mkdir(parents=True, exist_ok=True)
    return d


def _emit_summary(cfg, summary):
    text = _jsonio.dumps(summary)
    out = cfg.output.path("summary_json")
    if out is not None:
        _prepare(out).write_text(text)
    sys.stdout.write(text)


def _grid_solve(cfg, problem):
    if isinstance(problem.domain, Ball):
        raise ConfigError("solve needs an interval or rectangle; use 'hjb radial' for balls",
                          module="cli")
    nodes = cfg.grid.nodes
    grid = problem.grid(list(nodes) if isinstance(nodes, tuple) else nodes)
    settings = LinearSolveSettings(rel_residual_tol=cfg.solver.linear_tol)
    barriers = build_barriers(problem, grid, settings, B=cfg.solver.B)
    rep = iterate(problem, grid, cfg.solver.eps, cfg.solver.max_iters, settings,
                  barriers=barriers, strict=cfg.solver.strict)
    return rep


def _solve_summary(problem, rep):
    center = float(multilinear(rep.V.grid, rep.V.values, problem.domain.center))
    return {
        "steps": rep.steps,
        "converged": rep.converged,
        "final_sup_diff": rep.final_sup_diff,
        "max_residual": rep.max_residual,
        "B": rep.barriers.B,
        "H": rep.barriers.H,
        "center_value": center,
        "monotone_ok": rep.monotone_ok,
        "monotone_violations": len(rep.monotone_violations()),
        "bracket_ok": rep.bracket_ok,
    }


def cmd_solve(cfg):
    problem = cfg.problem.build()
    rep = _grid_solve(cfg, problem)
    if cfg.output.path("field_csv") is not None:
        write_field_csv(rep.V, _prepare(cfg.output.path("field_csv")))
    if cfg.output.path("convergence_csv") is not None:
        rep.write_convergence_csv(_prepare(cfg.output.path("convergence_csv")))
    _emit_summary(cfg, _solve_summary(problem, rep))
    return EXIT_OK if rep.converged else EXIT_FAIL


def _radial_solve(cfg, problem):
    return solve_radial(problem, cfg.grid.radial_nodes, cfg.solver.eps, cfg.solver.max_iters,
                        strict=cfg.solver.strict, B=cfg.solver.B)


def cmd_radial(cfg):
    problem = cfg.problem.build()
    if not isinstance(problem.domain, Ball):
        raise ConfigError("radial needs a ball domain", module="cli")
    sol = _radial_solve(cfg, problem)
    rep = sol.report
    cross = None
    if problem.dim == 1 and cfg.solver.cross_check:
        cross = cross_check_1d(problem, sol.r_nodes.size, cfg.solver.eps, cfg.solver.max_iters,
                               radial=sol)
    if cfg.output.path("profile_csv") is not None:
        sol.write_profile_csv(_prepare(cfg.output.path("profile_csv")))
    if cfg.output.path("convergence_csv") is not None:
        rep.write_convergence_csv(_prepare(cfg.output.path("convergence_csv")))
    summary = {
        "steps": rep.steps,
        "converged": rep.converged,
        "final_sup_diff": rep.final_sup_diff,
        "max_residual": rep.max_residual,
        "B": sol.B,
        "H": sol.H,
        "center_value": float(sol.u[0]),
        "origin_slope": sol.origin_slope,
        "cross_check_sup_diff": cross,
        "monotone_ok": rep.monotone_ok,
        "monotone_violations": len(rep.monotone_violations()),
        "bracket_ok": rep.bracket_ok,
    }
    _emit_summary(cfg, summary)
    return EXIT_OK if rep.converged else EXIT_FAIL


def _policy_from_config(pc, dim):
    if pc.type == "zero":
        return Policy.zero() if pc.name is None else Policy("zero", pc.name)
    if pc.type == "constant":
        if len(pc.drift) != dim:
            raise ConfigError(f"constant drift has {len(pc.drift)} components, need {dim}",
                              module="config")
        return Policy.constant(pc.drift, name=pc.name)
    try:
        return Policy.custom(list(pc.exprs), n_vars=dim, name=pc.name or "custom")
    except ExprSyntaxError as exc:
        raise ConfigError(f"custom policy: {exc.reason} (at byte {exc.offset})",
                          module="expr") from None


def cmd_verify(cfg):
    if cfg.mc is None:
        raise ConfigError("verify needs an 'mc' block", module="cli")
    problem = cfg.problem.build()
    mc = cfg.mc
    comparisons = [_policy_from_config(pc, problem.dim) for pc in mc.compare]
    x0 = np.asarray(mc.x0 if mc.x0 is not None else problem.domain.center, dtype=float)
    if isinstance(problem.domain, Ball):
        sol = _radial_solve(cfg, problem)
        converged = sol.report.converged
    else:
        sol = _grid_solve(cfg, problem)
        converged = sol.converged
    if not converged:
        logger.error("the PDE solve did not converge; verification skipped")
        return EXIT_FAIL
    V0 = value_at(sol, x0)
    entries = []
    ok = True
    capped = False
    # every policy uses the same seed (common random numbers)
    for i, pol in enumerate([Policy.optimal(sol)] + comparisons):
        rep = simulate_cost(problem, pol, x0, mc.dt, mc.n_paths, mc.seed,
                            max_steps=mc.max_steps)
        gap = rep.mean_cost - V0
        band = 3.0 * rep.std_error + mc.allowance
        passed = abs(gap) <= band if i == 0 else gap >= -band
        capped |= not rep.valid
        ok &= passed
        entries.append({"policy": pol.name, "report": rep.to_dict(), "gap": gap,
                        "tolerance": band, "passed": passed})
    report = {"x0": list(x0), "value_at_x0": V0, "allowance": mc.allowance,
              "policies": entries, "passed": ok and not capped}
    text = _jsonio.dumps(report)
    out = cfg.output.path("report_json")
    if out is not None:
        _prepare(out).write_text(text)
    sys.stdout.write(text)
    if capped:
        logger.error("more than 0.1%% of paths hit the step cap; report flagged invalid")
        return EXIT_FAIL
    return EXIT_OK if ok else EXIT_FAIL


def legendre_check(n_samples, seed):
    """Largest deviation between the closed form and the brute-force minimum."""
    devs = []
    for xi, alpha in sample_legendre_cases(n_samples, seed):
        brute, _ = legendre_brute_force(xi, alpha)
        devs.append(abs(hamiltonian_min(xi, alpha) - brute))
    return (max(devs) if devs else 0.0), devs


def cmd_legendre_check(n_samples, seed):
    if n_samples < 0:
        raise ConfigError("--n-samples must be non-negative", module="cli")
    worst, _ = legendre_check(n_samples, seed)
    passed = worst <= LEGENDRE_TOL
    sys.stdout.write(_jsonio.dumps({"n_samples": n_samples, "seed": seed,
                                    "max_deviation": worst, "tolerance": LEGENDRE_TOL,
                                    "passed": passed}))
    return EXIT_OK if passed else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="hjb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("config", help="run configuration (JSON)")
        else:
            p.add_argument("config", nargs="?", help="optional run configuration (JSON)")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--dump-config", action="store_true",
                       help="print the normalized configuration and exit")

    for name, help_ in (("solve", "solve on an interval or rectangle"),
                        ("radial", "solve the radial reduction on a ball"),
                        ("verify", "Monte Carlo check of the feedback law")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--eps", type=float, help="override solver.eps")
        p.add_argument("--nodes", type=int, help="override grid.nodes and grid.radial_nodes")
        p.add_argument("--out-dir", help="override output.dir")
    p = sub.add_parser("legendre-check", help="compare the Hamiltonian with a brute-force minimum")
    common(p, config_required=False)
    p.add_argument("--n-samples", type=int, default=200)
    return parser


def _run(args):
    if args.command == "legendre-check":
        seed = args.seed
        cfg = load(args.config) if args.config else None
        if seed is None:
            seed = cfg.mc.seed if cfg is not None and cfg.mc is not None else 0
        if args.dump_config and cfg is not None:
            sys.stdout.write(cfg.with_overrides(seed=seed).to_json())
            return EXIT_OK
        return cmd_legendre_check(args.n_samples, seed)
    cfg = load(args.config).with_overrides(eps=args.eps, seed=args.seed, nodes=args.nodes,
                                           out_dir=args.out_dir)
    if args.dump_config:
        sys.stdout.write(cfg.to_json())
        return EXIT_OK
    return {"solve": cmd_solve, "radial": cmd_radial, "verify": cmd_verify}[args.command](cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _run(args)
    except (ConfigError, DomainError, ExprSyntaxError, ExprEvalError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HJBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
