"""Coverage curves versus threshold and versus displacement.

Left: threshold sweep at several displacements. Right: displacement sweep
at T = 0 dB with the large-mobility reference. Writes two CSV files.

    python3 scripts/coverage_curves.py --outdir results/ [--mc-trials 20000]
"""

import argparse
from pathlib import Path

import numpy as np

from d2dcache.coverage import MobilityQuery, asymptotic_estimate, db_to_linear, sweep
from d2dcache.distributions import NetworkParams
from d2dcache.results import to_csv
from d2dcache.simulator import SimulationConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--left-v", default="0,0.5,1,2", help="displacements for the threshold sweep")
    ap.add_argument("--mc-trials", type=int, default=0, help="add Monte Carlo rows (0 = off)")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    params = NetworkParams(lam=1.0, p_a=0.5, q=0.5, alpha=4.0)
    sim = SimulationConfig(n_trials=max(args.mc_trials, 1), seed=args.seed)
    methods = ["analytic"] + (["montecarlo"] if args.mc_trials else [])
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    t_db = np.arange(-10.0, 10.0 + 1e-9, 2.0)
    left = []
    for v in (float(x) for x in args.left_v.split(",")):
        for m in methods:
            left += sweep(params, "T", [db_to_linear(t) for t in t_db], v, m, sim, workers=args.workers)
    (outdir / "coverage_vs_threshold.csv").write_text(to_csv(left))

    v_grid = np.arange(0.0, 5.0 + 1e-9, 0.25)
    right = []
    for m in methods:
        right += sweep(params, "v", v_grid, 1.0, m, sim, workers=args.workers)
    right += [asymptotic_estimate(params, MobilityQuery(v=float(v), T=1.0)) for v in v_grid]
    (outdir / "coverage_vs_displacement.csv").write_text(to_csv(right))

    for e in right:
        if e.method == "analytic":
            print(f"v={e.query.v:5.2f}  Pc={e.value:.5f}")
    print(f"asymptote {right[-1].value:.5f}; files written to {outdir}/")


if __name__ == "__main__":
    main()
