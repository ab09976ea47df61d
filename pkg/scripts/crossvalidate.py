"""Analytic vs Monte Carlo over a parameter grid, away from the default point.

Prints one line per configuration with the analytic value, the Monte Carlo
estimate, its 99% interval and whether the interval covers the analytic value.

    python3 scripts/crossvalidate.py --trials 20000
"""

import argparse
import itertools

from d2dcache.coverage import MobilityQuery, coverage_file2_total
from d2dcache.distributions import NetworkParams
from d2dcache.simulator import SimulationConfig, estimate_coverage


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    grid = itertools.product((0.3, 0.5), (0.3, 1.0), (3.0, 4.0), (0.0, 1.0, 3.0), (0.5, 2.0))
    covered = total = 0
    for p_a, q, alpha, v, T in grid:
        params = NetworkParams(lam=1.0, p_a=p_a, q=q, alpha=alpha)
        query = MobilityQuery(v=v, T=T)
        an = coverage_file2_total(params, query)
        mc = estimate_coverage(params, query, SimulationConfig(n_trials=args.trials, seed=args.seed,
                                                               workers=args.workers))
        ok = mc.ci_low <= an.value <= mc.ci_high
        covered += ok
        total += 1
        print(f"p_a={p_a} q={q} alpha={alpha} v={v} T={T}: analytic {an.value:.4f}  "
              f"MC {mc.value:.4f} [{mc.ci_low:.4f}, {mc.ci_high:.4f}]  {'ok' if ok else 'MISS'}")
    print(f"{covered}/{total} intervals cover the analytic value "
          f"(about {0.99 * total:.1f} expected at the 99% level)")


if __name__ == "__main__":
    main()
