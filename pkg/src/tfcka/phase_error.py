"""Upper bound on the phase-error rate from a table of (bounds on) yields."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .params import DomainError, ProtocolParams
from .tables import YieldTable, tuples_up_to

log = logging.getLogger(__name__)

SERIES_TAIL = 1e-16


class MissingYieldError(KeyError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"yield table lacks required tuples: {self.missing}")


def cat_coefficient(alpha: float, n: int, l: int) -> float:
    """Fock amplitude of ``(|alpha> + (-1)^l |-alpha>) / 2`` on ``|n>``."""
    if n < 0 or l not in (0, 1) or alpha < 0:
        raise DomainError(f"invalid cat coefficient arguments alpha={alpha}, n={n}, l={l}")
    if (n + l) % 2:
        return 0.0
    # log form avoids overflowing n! for long series
    if alpha == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(-alpha * alpha / 2 + n * math.log(alpha) - 0.5 * math.lgamma(n + 1))


@dataclass(frozen=True)
class CatCoefficients:
    alpha: float

    def c(self, n: int, l: int) -> float:
        return cat_coefficient(self.alpha, n, l)

    def series(self, l: int) -> float:
        """``sum_n c(n, l)``, summed past the peak until terms fall below the tail tolerance."""
        total = 0.0
        n = l
        while True:
            term = self.c(n, l)
            total += term
            if n > self.alpha**2 + 2 and term < SERIES_TAIL:
                return total
            n += 2


def parity_set(n_parties: int) -> Iterator[tuple[int, ...]]:
    """Bit strings of length ``n_parties`` with even Hamming weight (``2**(N-1)`` of them)."""
    for v in itertools.product((0, 1), repeat=n_parties):
        if sum(v) % 2 == 0:
            yield v


def coefficient(cat: CatCoefficients, n, v) -> float:
    out = 1.0
    for ni, vi in zip(n, v):
        if (ni + vi) % 2:
            return 0.0
        out *= cat.c(ni, vi)
    return out


@lru_cache(maxsize=None)
def matching_tuples(v: tuple[int, ...], cutoff: int) -> tuple[tuple[int, ...], ...]:
    """Photon tuples with total at most ``cutoff`` whose parities equal ``v`` (the only nonzero coefficients)."""
    return tuple(n for n in tuples_up_to(len(v), cutoff)
                 if all((ni - vi) % 2 == 0 for ni, vi in zip(n, v)))


@lru_cache(maxsize=None)
def even_tuples(n_parties: int, cutoff: int) -> tuple[tuple[int, ...], ...]:
    return tuple(n for n in tuples_up_to(n_parties, cutoff) if sum(n) % 2 == 0)


def delta_residual(alpha: float, n_parties: int, v, cutoff: int) -> float:
    """Coefficient mass of all tuples above the cutoff, whose yields are bounded by one."""
    if cutoff < 0 or cutoff % 2:
        raise DomainError(f"cutoff must be even and non-negative, got {cutoff}")
    if len(v) != n_parties:
        raise DomainError(f"parity string {v} has wrong length for N={n_parties}")
    cat = CatCoefficients(alpha)
    full = 1.0
    for vi in v:
        full *= cat.series(vi)
    truncated = sum(coefficient(cat, n, v) for n in matching_tuples(tuple(v), cutoff))
    return max(full - truncated, 0.0)


@dataclass(frozen=True)
class PhaseErrorResult:
    value: float
    raw: float
    clamped: bool


def phase_error_bound(p: ProtocolParams, yields: YieldTable, pr_kg: float, j: int | None = None) -> PhaseErrorResult:
    """Upper bound on the phase-error rate, clamped to 1/2.

    ``j`` names the detector in asymmetric settings; symmetric tables ignore it.
    """
    if pr_kg <= 0:
        raise DomainError(f"pr_kg must be positive, got {pr_kg}")
    N, cutoff = p.n_parties, p.cutoff
    cat = CatCoefficients(p.alpha)
    missing = [n for n in even_tuples(N, cutoff) if n not in yields]
    if missing:
        raise MissingYieldError(missing)
    total = 0.0
    for v in parity_set(N):
        s = sum(coefficient(cat, n, v) * math.sqrt(yields[n]) for n in matching_tuples(v, cutoff))
        total += (s + delta_residual(p.alpha, N, v, cutoff)) ** 2
    raw = total / pr_kg
    if raw > 0.5:
        return PhaseErrorResult(0.5, raw, True)
    return PhaseErrorResult(raw, raw, False)
