"""Key rate versus party-to-party loss for several party counts, dark-count
levels and both yield modes, with the multicast benchmarks alongside.

Writes one CSV per (mode, N, p_d) into the output directory.
"""
import argparse
import logging
from pathlib import Path

from tfcka.keyrate import MODES
from tfcka.sweep import SweepConfig, emit, run_sweep

log = logging.getLogger("rate_vs_loss")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/rate_vs_loss")
    ap.add_argument("--parties", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--dark-counts", type=float, nargs="+", default=[1e-8, 1e-9, 1e-10])
    ap.add_argument("--modes", nargs="+", choices=MODES, default=list(MODES))
    ap.add_argument("--loss-start", type=float, default=0.0)
    ap.add_argument("--loss-stop", type=float, default=100.0)
    ap.add_argument("--loss-step", type=float, default=1.0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for mode in args.modes:
        for N in args.parties:
            for pd in args.dark_counts:
                cfg = SweepConfig(parties=N, mode=mode, loss_start=args.loss_start, loss_stop=args.loss_stop,
                                  loss_step=args.loss_step, dark_counts=(pd,), workers=args.workers)
                result = run_sweep(cfg)
                path = out / f"{mode}_N{N}_pd{pd:g}.csv"
                emit(result, "csv", path)
                beats = [r.loss_db for r in result.rows if r.rate > r.r2]
                log.info("%s N=%d p_d=%g -> %s (first loss above R2: %s)", mode, N, pd, path,
                         beats[0] if beats else "none")


if __name__ == "__main__":
    main()
