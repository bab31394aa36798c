"""Command-line entry point for key-rate loss sweeps.

Exit status: 0 on success, 1 on configuration errors, 2 when some loss
points failed (their rows carry an ``error`` status).
"""
from __future__ import annotations

import argparse
import logging
import sys

from .keyrate import MODES
from .sweep import FORMATS, ConfigError, emit, load_config, output_path, run_sweep

log = logging.getLogger("tfcka")


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors; exit code 2 is reserved for failed points
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tfcka-sweep", description="Conference key rate versus loss.")
    ap.add_argument("--config", help="flat 'key = value' config file; flags override it")
    ap.add_argument("--parties", type=int)
    ap.add_argument("--modes-exp", type=int, help="network layers s (M = 2^s); default: smallest fitting N")
    ap.add_argument("--loss-start", type=float)
    ap.add_argument("--loss-stop", type=float)
    ap.add_argument("--loss-step", type=float)
    ap.add_argument("--dark-count", type=float, action="append", dest="dark_counts",
                    help="dark-count probability; repeat for several sweeps")
    ap.add_argument("--misalignment", type=float, help="sin^2 of the polarization and phase misalignment")
    ap.add_argument("--mode", choices=MODES)
    ap.add_argument("--cutoff", type=int)
    ap.add_argument("--decoy-high", type=float)
    ap.add_argument("--decoy-low", type=float)
    ap.add_argument("--quad-nodes", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", help="output file; several dark counts get a _pd<value> suffix each")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    if overrides.get("dark_counts"):
        overrides["dark_counts"] = tuple(overrides["dark_counts"])
    try:
        cfg = load_config(args.config, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    several = len(cfg.dark_counts) > 1
    failures = 0
    for p_dark in cfg.dark_counts:
        result = run_sweep(cfg, p_dark)
        failures += result.failures
        if cfg.out is None:
            if several:
                print(f"# p_dark = {p_dark:g}")
            sys.stdout.write(emit(result, cfg.format, None))
        else:
            path = output_path(cfg.out, p_dark, several)
            emit(result, cfg.format, path)
            log.info("wrote %s", path)
    if failures:
        print(f"{failures} loss point(s) failed; see the status column", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
