#!/usr/bin/env python3
"""Measure solution lifespans against the scheduled horizons.

For each N in the sweep this integrates the bump data with the dense RK4
oracle (relaxed truncation monitor) and reports where the solution blows
up relative to the scheduled evaluation time, together with the series
ledger ratios.  This is the quantitative record behind the one acceptance
clause that fails at desk scale: the scheduled horizon exceeds the
lifespan, so no solution norm exists there to compare against the first
Picard term.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gibq.construction import make_bump, schedule_from_N  # noqa: E402
from gibq.oracle import closure_from_depth, rk4_solve     # noqa: E402
from gibq.series import partial_sum                       # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--s", type=float, default=-0.75)
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--depth", type=int, default=13)
    args = ap.parse_args()

    print("N,T_scheduled,blowup_time,lifespan_ratio,ledger_ratio_1,contraction")
    for N in args.N:
        params = schedule_from_N(N, args.k, args.s, delta_hint=args.delta)
        lattice = params.lattice()
        bump = make_bump(params, lattice)
        acc = partial_sum(bump.phi, params.k, 2, params.T, 16)
        closure = closure_from_depth(bump.phi, params.k, depth=args.depth)
        _, diag = rk4_solve(bump.phi, params.T, params.T / args.steps,
                            closure, k=params.k, tail_tol=float("inf"))
        tstar = diag.blowup_time
        contraction = 0.5 * params.T**2 * bump.phi.fl1() ** (params.k - 1)
        print(f"{N},{params.T!r},"
              f"{'' if tstar is None else repr(tstar)},"
              f"{'' if tstar is None else repr(tstar / params.T)},"
              f"{acc.ratios()[0]!r},{contraction!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
