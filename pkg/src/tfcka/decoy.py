"""Two-intensity decoy bounds on multiparty yields.

Each gain is a Poisson mixture of yields. Rescaling the gains by the
Poisson vacuum factors and taking signed combinations over the ``2**N``
intensity choices isolates the yield of interest up to terms that can be
bounded in closed form.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .params import DomainError
from .tables import UPPER_BOUND, GainTable, YieldTable, canonical, required_tuples

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecoyContext:
    beta0: float
    beta1: float
    n_parties: int
    gains: GainTable

    def __post_init__(self):
        if self.beta0 == self.beta1:
            raise DomainError("decoy intensities coincide; the bound divides by beta0 - beta1")
        if not self.beta0 > self.beta1 >= 0:
            raise DomainError(f"need beta0 > beta1 >= 0, got ({self.beta0}, {self.beta1})")
        if self.gains.n_parties != self.n_parties:
            raise DomainError("gain table party count does not match context")

    @classmethod
    def from_gains(cls, gains: GainTable) -> "DecoyContext":
        b0, b1 = gains.decoys
        return cls(b0, b1, gains.n_parties, gains)

    def beta(self, bit: int) -> float:
        return self.beta1 if bit else self.beta0


def rescaled_gain(ctx: DecoyContext, f: Sequence[int]) -> float:
    """Gain with the Poisson vacuum weights divided out: ``G_f * prod exp(beta_{f_i})``."""
    f = tuple(f)
    if f not in ctx.gains.values:
        raise KeyError(f"gain table has no entry for intensity choice {f}")
    return ctx.gains[f] * math.exp(sum(ctx.beta(b) for b in f))


def b_of_h(ctx: DecoyContext, h: Sequence[int]) -> float:
    """Signed combination of rescaled gains that cancels every photon number
    below one on the parties flagged by ``h``."""
    b0, b1 = ctx.beta0, ctx.beta1
    total = 0.0
    for f in itertools.product((0, 1), repeat=ctx.n_parties):
        # exponents count unflagged parties sending beta0 (f=0 -> weight beta1) and vice versa
        e0 = sum((1 - hi) * fi for hi, fi in zip(h, f))
        e1 = sum((1 - hi) * (1 - fi) for hi, fi in zip(h, f))
        total += (-1) ** sum(f) * b0**e0 * b1**e1 * rescaled_gain(ctx, f)
    return total


def yield_upper_bound(ctx: DecoyContext, n: Sequence[int]) -> float:
    n = tuple(int(v) for v in n)
    if len(n) != ctx.n_parties or any(v < 0 for v in n):
        raise DomainError(f"invalid photon tuple {n} for N={ctx.n_parties}")
    b0, b1 = ctx.beta0, ctx.beta1
    N = ctx.n_parties
    h = tuple(1 if v >= 1 else 0 for v in n)
    m = sum(h)
    free = N - m
    prefactor = 1.0
    for v in n:
        if v:
            prefactor *= math.factorial(v) / (b0**v - b1**v)
    lead = b_of_h(ctx, h) * (-1) ** free / (b0 - b1) ** free
    ratio = (b1 * math.exp(b0) - b0 * math.exp(b1) + b0 - b1) / (b0 - b1)
    corr = sum(math.comb(free, 2 * k + 1) * ratio ** (2 * k + 1) for k in range((free - 1) // 2 + 1))
    corr *= (math.exp(b0) - math.exp(b1)) ** m
    U = prefactor * (lead + corr)
    if U < 0:
        log.warning("decoy bound for %s evaluated to %.3e < 0; flooring at 0", n, U)
        return 0.0
    return min(U, 1.0)


def bound_table(ctx: DecoyContext, cutoff: int, symmetric: bool = True) -> YieldTable:
    """Upper bounds for every tuple entering the phase-error bound below ``cutoff``."""
    if cutoff < 0 or cutoff % 2:
        raise DomainError(f"cutoff must be even and non-negative, got {cutoff}")
    table = YieldTable(ctx.n_parties, kind=UPPER_BOUND, symmetric=symmetric)
    for n in required_tuples(ctx.n_parties, cutoff, symmetric=symmetric):
        key = canonical(n) if symmetric else n
        table[key] = yield_upper_bound(ctx, key)
    return table
