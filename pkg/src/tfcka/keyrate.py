"""Asymptotic conference key rate, its optimization over the signal amplitude,
and the relay-free multicast capacity benchmarks."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channel_stats, decoy, phase_error
from .params import DomainError, ProtocolParams, QuadratureSpec
from .tables import YieldTable, required_tuples

log = logging.getLogger(__name__)

EXACT_YIELDS = "exact-yields"
TWO_DECOY = "two-decoy"
MODES = (EXACT_YIELDS, TWO_DECOY)

_INV_PHI = (math.sqrt(5) - 1) / 2


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary entropy argument must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def multicast_bound_star(eta: float) -> float:
    """Relay-free capacity of the star network with party-to-party transmittance ``eta**2``."""
    t = eta * eta
    if not 0.0 < t < 1.0:
        raise DomainError(f"need 0 < eta^2 < 1, got eta={eta}")
    return -math.log2(1 - t)


def multicast_bound_full(eta: float, n_parties: int) -> float:
    """Relay-free capacity when every pair of parties shares a channel of transmittance ``eta**2``."""
    return (n_parties - 1) * multicast_bound_star(eta)


def _eta_to_db(eta: float) -> float:
    return -20 * math.log10(eta) if eta > 0 else math.inf


@dataclass
class KeyRatePoint:
    loss_db: float
    eta: float
    alpha_opt: float
    pr_kg: float
    q_x: float
    q_z_bar: float
    rate: float
    r1: float
    r2: float
    clamped: bool = False
    no_key: bool = False


@dataclass(frozen=True)
class SearchSpec:
    """Amplitude search: ``points`` geometrically spaced values in ``[alpha_min, alpha_max]``,
    then golden-section refinement around the best one to absolute tolerance ``tol``.

    Geometric spacing keeps the grid dense where the optimum sits for many
    parties (a few hundredths) while still reaching large amplitudes.
    """

    alpha_min: float = 1e-3
    alpha_max: float = 1.2
    points: int = 40
    tol: float = 1e-3

    def __post_init__(self):
        if not 0 < self.alpha_min < self.alpha_max or self.points < 3 or self.tol <= 0:
            raise DomainError(f"invalid search spec {self}")

    def grid(self) -> np.ndarray:
        return np.geomspace(self.alpha_min, self.alpha_max, self.points)


def prepare_yields(p: ProtocolParams, mode: str, quad: QuadratureSpec | None = None) -> YieldTable:
    """Yield table for the phase-error bound; independent of the signal amplitude."""
    if mode == EXACT_YIELDS:
        return channel_stats.exact_yield_table(p, required_tuples(p.n_parties, p.cutoff))
    if mode == TWO_DECOY:
        ctx = decoy.DecoyContext.from_gains(channel_stats.gain_table(p, quad))
        return decoy.bound_table(ctx, p.cutoff)
    raise DomainError(f"unknown yield mode {mode!r}; expected one of {MODES}")


def _benchmarks(p: ProtocolParams) -> tuple[float, float]:
    try:
        r1 = multicast_bound_star(p.eta)
    except DomainError:
        return math.nan, math.nan
    return r1, (p.n_parties - 1) * r1


def evaluate_rate(p: ProtocolParams, yields: YieldTable, q_x: float | None = None,
                  q_z: float | None = None) -> KeyRatePoint:
    """Key rate at the amplitude ``p.alpha``.

    ``q_x`` and ``q_z`` replace the computed error rates when given, which is
    how synthetic error rates are injected in tests.
    """
    r1, r2 = _benchmarks(p)
    point = KeyRatePoint(_eta_to_db(p.eta), p.eta, p.alpha, 0.0, math.nan, math.nan, 0.0, r1, r2)
    pr_kg = channel_stats.pr_click_kg(p)
    point.pr_kg = pr_kg
    if pr_kg <= 0.0:
        point.no_key = True
        return point
    point.q_x = channel_stats.qber(p) if q_x is None else q_x
    if q_z is None:
        res = phase_error.phase_error_bound(p, yields, pr_kg)
        point.q_z_bar, point.clamped = res.value, res.clamped
    else:
        point.q_z_bar = q_z
    if point.clamped:
        point.rate = 0.0
    else:
        point.rate = max(0.0, p.M * pr_kg * (1 - binary_entropy(point.q_z_bar) - binary_entropy(point.q_x)))
    point.no_key = point.rate == 0.0
    return point


def key_rate_symmetric(p: ProtocolParams, mode: str = EXACT_YIELDS,
                       quad: QuadratureSpec | None = None) -> KeyRatePoint:
    return evaluate_rate(p, prepare_yields(p, mode, quad))


def golden_section_max(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Maximize a unimodal ``fn`` on ``[lo, hi]`` until the bracket is shorter than ``tol``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    x = (a + b) / 2
    return x, fn(x)


def grid_then_golden(fn: Callable[[float], float], grid: np.ndarray, tol: float,
                     floor: float = 0.0) -> tuple[float, float, bool]:
    """Coarse grid search then golden refinement around the best grid point.

    Returns ``(x, fn(x), found)``; ``found`` is False when every grid value is
    ``<= floor``, in which case ``x`` is the first grid point.
    """
    values = [fn(float(x)) for x in grid]
    best = int(np.argmax(values))
    if values[best] <= floor:
        return float(grid[0]), values[0], False
    lo = float(grid[best - 1]) if best > 0 else 0.0
    hi = float(grid[best + 1]) if best + 1 < len(grid) else float(grid[best])
    x, fx = golden_section_max(fn, lo, hi, tol)
    # the refinement can only improve on the grid; keep the grid point otherwise
    if fx < values[best]:
        return float(grid[best]), values[best], True
    return x, fx, True


def optimize_alpha(p: ProtocolParams, mode: str = EXACT_YIELDS, quad: QuadratureSpec | None = None,
                   search: SearchSpec | None = None,
                   yields: YieldTable | None = None) -> tuple[float, KeyRatePoint]:
    """Maximize the key rate over the signal amplitude at fixed loss."""
    search = search or SearchSpec()
    if yields is None:
        yields = prepare_yields(p, mode, quad)

    def rate(alpha: float) -> float:
        if alpha <= 0.0:
            return 0.0
        return evaluate_rate(p.with_(alpha=alpha), yields).rate

    alpha, _, found = grid_then_golden(rate, search.grid(), search.tol)
    point = evaluate_rate(p.with_(alpha=alpha), yields)
    point.alpha_opt = alpha
    if not found:
        log.info("no positive key rate on the amplitude grid at eta=%.3e", p.eta)
        point.rate = 0.0
        point.no_key = True
    return alpha, point
