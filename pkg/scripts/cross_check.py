"""Compare every closed-form statistic with its brute-force counterpart and print the worst gaps."""
import argparse
import itertools

import numpy as np

from tfcka import channel_stats as cs
from tfcka import fock_oracle as fo
from tfcka.decoy import DecoyContext, yield_upper_bound
from tfcka.params import ProtocolParams
from tfcka.tables import required_tuples


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=200_000)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    worst = 0.0
    for N, s, eta in itertools.product((2, 3, 4), (2, 3), (0.1, 0.6)):
        p = ProtocolParams(N, s, eta=eta, p_dark=1e-6, theta=0.3)
        for n in required_tuples(N, 4):
            worst = max(worst, abs(cs.exact_yield(p, n) - fo.simulate_yield(p, n)))
    print(f"yields vs Fock simulation:        {worst:.2e}")

    worst = 0.0
    for _ in range(200):
        N = int(rng.integers(2, 6))
        p = ProtocolParams(N, 3, alpha=rng.uniform(0, 1.5), eta=rng.uniform(0, 1), p_dark=rng.uniform(0, 1e-3),
                           theta=rng.uniform(0, 0.5), phi=rng.uniform(0, 0.5))
        x = tuple(int(v) for v in rng.choice([1, -1], size=N))
        j = int(rng.integers(0, p.M))
        worst = max(worst, abs(cs.pr_click_given_signs(p, j, x) - fo.simulate_kg_click(p, x, j)))
    print(f"KG clicks vs coherent simulation: {worst:.2e}")

    worst = 0.0
    for N in (3, 4, 5):
        p = ProtocolParams(N, 3, eta=rng.uniform(0.01, 1), p_dark=1e-8)
        betas = list(rng.choice([0.0, 0.5], size=N))
        mean, err = fo.sample_gain(p, betas, args.samples, seed=args.seed)
        # all-zero intensities give a constant integrand with no sampling error
        worst = max(worst, abs(cs.gain(p, betas) - mean) / max(err, 1e-15))
    print(f"gains vs Monte Carlo (sigma):     {worst:.2f}")

    worst = np.inf
    for N in (3, 4, 5):
        p = ProtocolParams(N, 3, eta=0.05, p_dark=1e-9)
        ctx = DecoyContext.from_gains(cs.gain_table(p))
        worst = min(worst, min(yield_upper_bound(ctx, n) - cs.exact_yield(p, n) for n in required_tuples(N, 4)))
    print(f"decoy bound minus exact yield:    {worst:.2e} (must be >= 0)")


if __name__ == "__main__":
    main()
