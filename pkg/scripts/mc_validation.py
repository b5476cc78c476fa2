"""Monte Carlo check of the analytic expected increment and acceptance probability.

Runs a 4 families x {5, 21, 130} matrix with random (but seeded) alpha and
rho, and prints one row per cell with the z-scores of the simulated mean
increment and acceptance rate against their analytic values.
"""

import argparse
import math
import sys
import time

import numpy as np

from vise.environments import FamilySweep, stats
from vise.montecarlo import estimate_expected_increment
from vise.numerics import binomial_upper_tail
from vise.voting import expected_increment

SWEEPS = {
    "uniform": FamilySweep("uniform"),
    "normal": FamilySweep("normal"),
    "pareto": FamilySweep("pareto", k=8.0),
    "laplace": FamilySweep("laplace"),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--sizes", type=int, nargs="*", default=[5, 21, 130])
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"{'family':<8} {'n':>4} {'alpha':>6} {'rho':>7} {'n0':>4} {'analytic':>11} {'estimate':>11} "
          f"{'z_mean':>7} {'z_acc':>7} {'sec':>5}")
    misses = 0
    cells = 0
    for family, sweep in SWEEPS.items():
        for n in args.sizes:
            rho = float(rng.uniform(-1, 1))
            alpha = float(rng.uniform(0.2, 0.8))
            spec = sweep.spec_at_rho(rho)
            st = stats(spec)
            t0 = time.perf_counter()
            r = estimate_expected_increment(spec, n, alpha, args.reps, args.seed + cells, workers=args.workers)
            secs = time.perf_counter() - t0
            analytic = expected_increment(st, n, r.n0)
            g = binomial_upper_tail(n, st.p, r.n0)
            z_mean = (r.mean_increment - analytic) / r.std_error if r.std_error else 0.0
            se_acc = math.sqrt(g * (1 - g) / r.replications)
            z_acc = (r.acceptance_rate - g) / se_acc if se_acc else 0.0
            misses += abs(z_mean) > 4
            cells += 1
            print(f"{family:<8} {n:>4} {alpha:>6.3f} {rho:>7.3f} {r.n0:>4} {analytic:>11.6f} "
                  f"{r.mean_increment:>11.6f} {z_mean:>7.2f} {z_acc:>7.2f} {secs:>5.1f}")
    print(f"{cells - misses}/{cells} cells within 4 standard errors")
    return 0 if misses <= 1 else 1


if __name__ == "__main__":
    sys.exit(main())
