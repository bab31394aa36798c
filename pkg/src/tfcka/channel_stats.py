"""Closed-form detection statistics of the symmetric channel model.

Every party sees the same pure-loss channel ``eta``; ``A_0`` is misaligned in
polarization by ``theta`` and in phase by ``phi`` against all other parties;
each of the ``M`` threshold detectors fires a dark count with probability
``p_dark``. All quantities refer to the event "only detector ``j`` clicks" and
are independent of ``j``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .interferometer import sign
from .params import DomainError, ProtocolParams, QuadratureSpec
from .tables import EXACT, GainTable, PhotonTuple, YieldTable, canonical

log = logging.getLogger(__name__)

MAX_YIELD_PHOTONS = 12
_FACT = [float(math.factorial(n)) for n in range(21)]


class QuadratureError(RuntimeError):
    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


def _dark_terms(p: ProtocolParams) -> tuple[float, float]:
    q = 1.0 - p.p_dark
    return q ** (p.M - 1), q ** p.M


def _single_click(p: ProtocolParams, exponents, weights, b: float) -> float:
    """``q^(M-1) sum_k w_k e^(a_k) - q^M e^b`` for weights summing to one.

    Rewritten as ``q^(M-1) e^b (sum_k w_k expm1(a_k - b) + p_d)``, which is exact
    algebra but keeps full relative precision when the click probability is tiny.
    """
    first, _ = _dark_terms(p)
    excess = sum(w * math.expm1(a - b) for a, w in zip(exponents, weights))
    return first * math.exp(b) * (excess + p.p_dark)


# ---------------------------------------------------------------- KG rounds


def post_processed_sum(j: int, x: Sequence[int]) -> int:
    """``S^j``: signed sum of the outcomes of ``A_1 ... A_{N-1}`` after the flips for detector ``j``."""
    return sum(x[i] * sign(i, j) for i in range(1, len(x)))


def pr_click_given_signs(p: ProtocolParams, j: int, x: Sequence[int]) -> float:
    """Probability that only detector ``j`` clicks when ``A_i`` sends ``|x_i alpha>``."""
    if len(x) != p.n_parties or any(xi not in (1, -1) for xi in x):
        raise DomainError(f"sign vector must have {p.n_parties} entries in {{+1, -1}}, got {x}")
    if not 0 <= j < p.M:
        raise DomainError(f"detector index {j} out of range for M={p.M}")
    N, M = p.n_parties, p.M
    a2 = p.eta * p.alpha**2
    cc = math.cos(p.theta) * math.cos(p.phi)
    S = post_processed_sum(j, x)
    return _single_click(p, [-(M * N - 1) * a2 / M + a2 * (S * S + 2 * S * x[0] * cc) / M], [1.0], -N * a2)


def pr_click_kg(p: ProtocolParams) -> float:
    """``Pr(Omega|KG)``: a fixed detector is the only one clicking, averaged over all signs."""
    N, M = p.n_parties, p.M
    a2 = p.eta * p.alpha**2
    cc = math.cos(p.theta) * math.cos(p.phi)
    base = -(M * N - 1) * a2 / M
    exponents, weights = [], []
    for k in range(N):
        d = 2 * k + 1 - N
        w = math.comb(N - 1, k) / 2**N
        # cosh(y) e^x = (e^(x+y) + e^(x-y)) / 2
        for sgn in (1, -1):
            exponents.append(base + a2 * d * d / M + sgn * 2 * a2 * d * cc / M)
            weights.append(w)
    return _single_click(p, exponents, weights, -N * a2)


def qber(p: ProtocolParams) -> float:
    """QBER between ``A_0`` and any other party, conditioned on a single click."""
    N, M = p.n_parties, p.M
    if N < 2:
        raise DomainError("QBER needs at least two parties")
    pk = pr_click_kg(p)
    if pk <= 0.0:
        raise DomainError("Pr(Omega|KG) = 0: QBER conditioned on a click is undefined")
    a2 = p.eta * p.alpha**2
    cc = math.cos(p.theta) * math.cos(p.phi)
    base = -(M * N - 2 + 2 * cc) * a2 / M
    exponents, weights = [], []
    for k in range(N - 1):
        d = 2 * k + 2 - N
        w = math.comb(N - 2, k) / 2 ** (N - 1)
        for sgn in (1, -1):
            exponents.append(base + a2 * d * d / M + sgn * 2 * a2 * d * (1 - cc) / M)
            weights.append(w)
    q = 0.5 * _single_click(p, exponents, weights, -N * a2) / pk
    return min(max(q, 0.0), 1.0)


def pr_click_pair(p: ProtocolParams, j: int, i: int, x0: int, xi: int) -> float:
    """``Pr(Omega_j | x_0, x_i, KG)`` by averaging over the remaining parties' signs."""
    N = p.n_parties
    others = [k for k in range(1, N) if k != i]
    total = 0.0
    for rest in itertools.product((1, -1), repeat=len(others)):
        x = [0] * N
        x[0], x[i] = x0, xi
        for k, v in zip(others, rest):
            x[k] = v
        total += pr_click_given_signs(p, j, x)
    return total / 2 ** len(others)


def qber_from_signs(p: ProtocolParams, i: int = 1, j: int = 0) -> float:
    """QBER from Bayes' rule on sign-resolved click probabilities (independent route)."""
    pk = sum(pr_click_given_signs(p, j, x) for x in itertools.product((1, -1), repeat=p.n_parties))
    pk /= 2 ** p.n_parties
    if pk <= 0.0:
        raise DomainError("Pr(Omega|KG) = 0: QBER conditioned on a click is undefined")
    fij = sign(i, j)
    err = sum(pr_click_pair(p, j, i, x0, xi) for x0 in (1, -1) for xi in (1, -1) if x0 != fij * xi)
    return err / (4 * pk)


# ---------------------------------------------------------------- PE rounds


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    error: float
    method: str
    evaluations: int


def _couplings(p: ProtocolParams, intensities: Sequence[float]) -> tuple[list[int], np.ndarray]:
    """Active parties (nonzero intensity) and the pairwise cosine weights of the phase integrand."""
    active = [i for i, b in enumerate(intensities) if b > 0]
    n = len(active)
    w = np.zeros((n, n))
    pref = 2 * p.eta / p.M
    ct = math.cos(p.theta)
    for a in range(n):
        for b in range(a + 1, n):
            i, k = active[a], active[b]
            align = ct if (i == 0 or k == 0) else 1.0
            w[a, b] = pref * align * math.sqrt(intensities[i] * intensities[k])
    return active, w


def _trapezoid(w: np.ndarray, K: int) -> float:
    """Mean of ``exp(sum_{a<b} w_ab cos(phi_a - phi_b))`` on a ``K``-point grid per free phase.

    ``phi_0`` is pinned to zero. The first free phase is looped over so that
    memory stays at ``K**(d-1)`` for ``d`` free phases.
    """
    n = w.shape[0]
    d = n - 1
    cos_tab = np.cos(2 * np.pi * np.arange(K) / K)
    grids = list(np.ix_(*([np.arange(K)] * (d - 1)))) if d > 1 else []
    pairs = [(a, b, w[a, b]) for a in range(n) for b in range(a + 1, n) if w[a, b] != 0]
    total = 0.0
    for k1 in range(K):
        idx = [0, k1] + grids
        e = np.zeros((K,) * (d - 1))
        for a, b, wab in pairs:
            e = e + wab * cos_tab[(idx[a] - idx[b]) % K]
        total += float(np.exp(e).sum())
    return total / K**d


def _monte_carlo(w: np.ndarray, spec: QuadratureSpec) -> IntegralEstimate:
    n = w.shape[0]
    rng = np.random.default_rng(spec.seed)
    pairs = [(a, b, w[a, b]) for a in range(n) for b in range(a + 1, n) if w[a, b] != 0]
    s1 = s2 = 0.0
    count = 0
    rel = math.inf
    while count < spec.mc_max_samples:
        phases = rng.uniform(0.0, 2 * np.pi, size=(spec.mc_batch, n))
        phases[:, 0] = 0.0
        e = np.zeros(spec.mc_batch)
        for a, b, wab in pairs:
            e += wab * np.cos(phases[:, a] - phases[:, b])
        v = np.exp(e)
        s1 += v.sum()
        s2 += (v * v).sum()
        count += spec.mc_batch
        mean = s1 / count
        var = max(s2 / count - mean * mean, 0.0)
        err = math.sqrt(var / count)
        rel = err / mean
        if rel <= spec.mc_rel_err:
            return IntegralEstimate(mean, err, "monte-carlo", count)
    raise QuadratureError(f"Monte Carlo phase integral did not reach relative error {spec.mc_rel_err:g}",
                          rel)


def phase_integral(p: ProtocolParams, intensities: Sequence[float],
                   quad: QuadratureSpec | None = None) -> IntegralEstimate:
    """Phase average ``I`` entering the gains; one phase is pinned since only differences matter."""
    quad = quad or QuadratureSpec()
    active, w = _couplings(p, intensities)
    dims = len(active) - 1
    if dims <= 0 or not w.any():
        return IntegralEstimate(1.0, 0.0, "exact", 0)
    if dims > quad.max_grid_dims:
        return _monte_carlo(w, quad)
    K = quad.nodes
    prev = _trapezoid(w, K)
    evals = K**dims
    err = math.inf
    while 2 * K <= quad.max_nodes:
        K *= 2
        cur = _trapezoid(w, K)
        evals += K**dims
        err = abs(cur - prev)
        if err <= quad.rtol * abs(cur):
            return IntegralEstimate(cur, err, "trapezoid", evals)
        prev = cur
    raise QuadratureError("trapezoidal phase integral did not converge", err / abs(prev))


def gain(p: ProtocolParams, intensities: Sequence[float], quad: QuadratureSpec | None = None) -> float:
    """Probability that only a fixed detector clicks when the parties send
    phase-randomized coherent states of the given intensities."""
    if len(intensities) != p.n_parties:
        raise DomainError(f"expected {p.n_parties} intensities, got {len(intensities)}")
    if any(b < 0 for b in intensities):
        raise DomainError(f"intensities must be non-negative, got {intensities}")
    total = float(sum(intensities))
    integral = phase_integral(p, intensities, quad).value
    g = _single_click(p, [-p.eta * (1 - 1 / p.M) * total + math.log(integral)], [1.0], -p.eta * total)
    return min(max(g, 0.0), 1.0)


def gain_table(p: ProtocolParams, quad: QuadratureSpec | None = None) -> GainTable:
    quad = quad or QuadratureSpec()
    values: dict[tuple[int, ...], float] = {}
    cache: dict[tuple, float] = {}
    for f in itertools.product((0, 1), repeat=p.n_parties):
        betas = [p.decoys[fi] for fi in f]
        # parties 1..N-1 are interchangeable in the symmetric model
        key = (betas[0],) + tuple(sorted(betas[1:]))
        if key not in cache:
            cache[key] = gain(p, betas, quad)
        values[f] = cache[key]
    return GainTable(p.n_parties, p.decoys, values)


# ---------------------------------------------------------------- Fock yields


def _binom(n: int, k: int) -> float:
    return _FACT[n] / (_FACT[k] * _FACT[n - k])


def _check_tuple(n: Sequence[int], n_parties: int) -> tuple[int, ...]:
    n = tuple(int(v) for v in n)
    if len(n) != n_parties:
        raise DomainError(f"photon tuple {n} has wrong length for N={n_parties}")
    if any(v < 0 for v in n):
        raise DomainError(f"photon numbers must be non-negative, got {n}")
    if sum(n) > MAX_YIELD_PHOTONS:
        raise DomainError(f"total photon number {sum(n)} exceeds {MAX_YIELD_PHOTONS}")
    return n


def _angles(p: ProtocolParams) -> tuple[float, float]:
    # only theta_0 - theta_1 matters; put the whole rotation on A_0
    return p.theta, 0.0


def yield_click_term(n: Sequence[int], eta: float, M: int, theta0: float, theta1: float) -> float:
    """``Q(n)``: probability that every detector except a fixed one sees vacuum.

    For each surviving-photon pattern ``k`` the constrained sum over
    polarization splittings ``(l, l')`` with ``sum l == sum l'`` factorizes into
    ``sum_L A_L^2 L! (K-L)!``, where ``A_L`` is the ``t^L`` coefficient of
    ``prod_i (cos(theta_i) t + sin(theta_i))^{k_i}``.
    """
    c = [math.cos(theta0)] + [math.cos(theta1)] * (len(n) - 1)
    s = [math.sin(theta0)] + [math.sin(theta1)] * (len(n) - 1)
    total = 0.0
    for k in itertools.product(*(range(ni + 1) for ni in n)):
        K = sum(k)
        w = (eta**K) * (1 - eta) ** (sum(n) - K) / M**K
        for ni, ki in zip(n, k):
            w *= _binom(ni, ki) / _FACT[ki]
        poly = np.array([1.0])
        for ci, si, ki in zip(c, s, k):
            for _ in range(ki):
                poly = np.convolve(poly, [si, ci])
        inner = sum(poly[L] ** 2 * _FACT[L] * _FACT[K - L] for L in range(K + 1))
        total += w * inner
    return total


def yield_click_term_nested(n: Sequence[int], eta: float, M: int, theta0: float, theta1: float) -> float:
    """Literal nested-sum evaluation of ``Q(n)``; slow, kept as a cross-check."""
    N = len(n)
    th = [theta0] + [theta1] * (N - 1)
    total = 0.0
    for k in itertools.product(*(range(ni + 1) for ni in n)):
        K = sum(k)
        base = (eta**K) * (1 - eta) ** (sum(n) - K) / M**K
        for ni, ki in zip(n, k):
            base *= _binom(ni, ki) / _FACT[ki]
        ranges = [range(ki + 1) for ki in k]
        for l in itertools.product(*ranges):
            for lp in itertools.product(*ranges):
                if sum(l) != sum(lp):
                    continue
                term = base * (-1) ** sum(2 * ki - li - lpi for ki, li, lpi in zip(k, l, lp))
                for i in range(N):
                    term *= _binom(k[i], l[i]) * _binom(k[i], lp[i])
                    term *= math.cos(th[i]) ** (l[i] + lp[i]) * math.sin(th[i]) ** (2 * k[i] - l[i] - lp[i])
                total += term * _FACT[sum(l)] * _FACT[K - sum(l)]
    return total


def exact_yield(p: ProtocolParams, n: Sequence[int]) -> float:
    """Probability that only a fixed detector clicks when ``A_i`` sends ``n_i`` photons."""
    n = _check_tuple(n, p.n_parties)
    first, _ = _dark_terms(p)
    q = yield_click_term(n, p.eta, p.M, *_angles(p))
    v = (1 - p.eta) ** sum(n)
    # factored as q^(M-1) (Q - v + p_d v) to avoid cancelling q^(M-1) - q^M at small p_d
    y = first * (q - v + p.p_dark * v)
    return min(max(y, 0.0), 1.0)


def exact_yield_table(p: ProtocolParams, tuples: Iterable[Sequence[int]]) -> YieldTable:
    table = YieldTable(p.n_parties, kind=EXACT, symmetric=True)
    for n in tuples:
        key: PhotonTuple = canonical(n)
        if key not in table.values:
            table[key] = exact_yield(p, key)
    return table
