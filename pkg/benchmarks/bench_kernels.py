"""Time the compiled and numpy path kernels on the same workloads.

    python3 benchmarks/bench_kernels.py [--paths 2000] [--repeat 3]

Both backends must return identical reports; the script checks that and
prints paths per second for each.
"""

import argparse
import time

from hjb import kernels
from hjb.control import Policy, simulate_cost
from hjb.iterate import iterate
from hjb.model import Ball, Interval, Problem, Rectangle
from hjb.radial import solve_radial


def workloads():
    ch = Problem(2.0, 1.0, Interval(-1.0, 1.0), h=1.0)
    rep = iterate(ch, ch.grid(401))
    sq = Problem(1.5, 1.0, Rectangle((0.0, 0.0), (1.0, 1.0)), h="sin(pi*x1)*sin(pi*x2)")
    sq_rep = iterate(sq, sq.grid(33))
    ball = Problem(2.0, 1.0, Ball((0.0, 0.0, 0.0), 1.0), h="3 + r^2", g=0.5)
    ball_sol = solve_radial(ball, 201)
    return [
        ("interval/zero", ch, Policy.zero(), [0.0]),
        ("interval/optimal", ch, Policy.optimal(rep), [0.0]),
        ("square/optimal", sq, Policy.optimal(sq_rep), [0.5, 0.5]),
        ("square/custom", sq, Policy.custom(["x1 - 0.5", "x2 - 0.5"]), [0.5, 0.5]),
        ("ball3/radial", ball, Policy.optimal(ball_sol), [0.0, 0.0, 0.0]),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {backends}  paths={args.paths}  dt={args.dt}")
    print(f"{'workload':<20}" + "".join(f"{b + ' [paths/s]':>22}" for b in backends) + "   speedup")
    for name, prob, pol, x0 in workloads():
        rates, reports = {}, {}
        for b in backends:
            best = float("inf")
            for _ in range(args.repeat):
                t = time.perf_counter()
                reports[b] = simulate_cost(prob, pol, x0, args.dt, args.paths, 1, workers=1,
                                           backend=b)
                best = min(best, time.perf_counter() - t)
            rates[b] = args.paths / best
        same = len({r.to_json() for r in reports.values()}) == 1
        speed = (rates["compiled"] / rates["python"]) if len(backends) == 2 else float("nan")
        print(f"{name:<20}" + "".join(f"{rates[b]:>22.0f}" for b in backends)
              + f"   {speed:6.1f}x" + ("" if same else "   REPORTS DIFFER"))


if __name__ == "__main__":
    main()
