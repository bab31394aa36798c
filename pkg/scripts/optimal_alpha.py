"""Optimal signal amplitude versus loss, side by side for bounded and exact yields."""
import argparse
import csv
import sys

from tfcka.keyrate import EXACT_YIELDS, TWO_DECOY
from tfcka.sweep import SweepConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--parties", type=int, default=3)
    ap.add_argument("--dark-count", type=float, default=1e-10)
    ap.add_argument("--loss-start", type=float, default=10.0)
    ap.add_argument("--loss-stop", type=float, default=90.0)
    ap.add_argument("--loss-step", type=float, default=5.0)
    ap.add_argument("--out", help="CSV path (stdout if omitted)")
    args = ap.parse_args()

    rows = {}
    for mode in (TWO_DECOY, EXACT_YIELDS):
        cfg = SweepConfig(parties=args.parties, mode=mode, loss_start=args.loss_start, loss_stop=args.loss_stop,
                          loss_step=args.loss_step, dark_counts=(args.dark_count,))
        rows[mode] = run_sweep(cfg).rows

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["loss_db", "alpha_two_decoy", "rate_two_decoy", "alpha_exact", "rate_exact"])
    for a, b in zip(rows[TWO_DECOY], rows[EXACT_YIELDS]):
        w.writerow(["%.12g" % v for v in (a.loss_db, a.alpha_opt, a.rate, b.alpha_opt, b.rate)])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
