"""Brute-force optical simulation used to cross-check the closed-form statistics.

Photon-number inputs are propagated through loss, polarization rotation and
the beam-splitter network in an explicit occupation-number basis. Coherent
inputs take a fast path, since coherent states stay coherent under all three.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from functools import lru_cache
from typing import Sequence

import numpy as np

from .interferometer import layered_unitary
from .params import DomainError, ProtocolParams

MAX_ORACLE_PHOTONS = 6
MAX_ORACLE_MODES = 8

Occupation = tuple[int, ...]


def loss_branches(n: Sequence[int], eta: float):
    """Kraus branches of independent pure loss: ``(surviving photons, weight)`` pairs."""
    for k in itertools.product(*(range(ni + 1) for ni in n)):
        w = 1.0
        for ni, ki in zip(n, k):
            w *= math.comb(ni, ki) * eta**ki * (1 - eta) ** (ni - ki)
        yield k, w


def _create(state: dict[Occupation, complex], coeffs: Sequence[tuple[int, complex]]) -> dict[Occupation, complex]:
    """Apply the creation operator ``sum_m c_m a_m^dagger`` to a sparse state."""
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in state.items():
        for mode, c in coeffs:
            nxt = list(occ)
            nxt[mode] += 1
            out[tuple(nxt)] += amp * c * math.sqrt(nxt[mode])
    return {o: a for o, a in out.items() if a != 0}


@lru_cache(maxsize=4096)
def output_state(k: Occupation, s: int, theta0: float, theta1: float) -> tuple[tuple[Occupation, complex], ...]:
    """Network output for ``k_i`` photons entering port ``i``.

    Output modes are ordered ``(detector 0 P, detector 0 P-perp, detector 1 P, ...)``.
    """
    U = layered_unitary(s)
    M = U.shape[0]
    state: dict[Occupation, complex] = {(0,) * (2 * M): 1.0 + 0j}
    norm = 1.0
    for i, ki in enumerate(k):
        th = theta0 if i == 0 else theta1
        coeffs = []
        for out in range(M):
            coeffs.append((2 * out, U[out, i] * math.cos(th)))
            coeffs.append((2 * out + 1, -U[out, i] * math.sin(th)))
        for _ in range(ki):
            state = _create(state, coeffs)
        norm *= math.factorial(ki)
    scale = 1 / math.sqrt(norm)
    return tuple((o, a * scale) for o, a in state.items())


def _check(p: ProtocolParams, n: Sequence[int]) -> tuple[int, ...]:
    n = tuple(int(v) for v in n)
    if len(n) != p.n_parties or any(v < 0 for v in n):
        raise DomainError(f"invalid photon tuple {n}")
    if sum(n) > MAX_ORACLE_PHOTONS or p.M > MAX_ORACLE_MODES:
        raise DomainError(f"oracle truncation too large: {sum(n)} photons over M={p.M} modes "
                          f"(limits {MAX_ORACLE_PHOTONS}, {MAX_ORACLE_MODES})")
    return n


def vacuum_probabilities(p: ProtocolParams, n: Sequence[int], theta1: float = 0.0) -> dict[frozenset, float]:
    """Probability that every detector in ``S`` receives no photon, for every subset ``S``.

    Parties ``1 ... N-1`` are rotated by ``theta1`` and ``A_0`` by ``p.theta + theta1``.
    """
    n = _check(p, n)
    M = p.M
    subsets = [frozenset(c) for r in range(M + 1) for c in itertools.combinations(range(M), r)]
    probs = dict.fromkeys(subsets, 0.0)
    total_weight = 0.0
    for k, w in loss_branches(n, p.eta):
        total_weight += w
        if w == 0.0:
            continue
        for occ, amp in output_state(k, p.s, p.theta + theta1, theta1):
            pr = w * abs(amp) ** 2
            lit = frozenset(d for d in range(M) if occ[2 * d] or occ[2 * d + 1])
            for S in subsets:
                if not (S & lit):
                    probs[S] += pr
    if abs(total_weight - 1.0) > 1e-12:
        raise AssertionError(f"loss branches lost weight: {total_weight}")
    return probs


def click_pattern_probabilities(p: ProtocolParams, n: Sequence[int], theta1: float = 0.0) -> dict[frozenset, float]:
    """Probability of each exact set of clicking detectors, dark counts included."""
    vac = vacuum_probabilities(p, n, theta1)
    q = 1 - p.p_dark
    everything = frozenset(range(p.M))
    silent = {S: q ** len(S) * v for S, v in vac.items()}
    out = {}
    for C in vac:
        rest = everything - C
        total = 0.0
        for r in range(len(C) + 1):
            for T in itertools.combinations(sorted(C), r):
                total += (-1) ** r * silent[rest | frozenset(T)]
        out[C] = total
    return out


def simulate_yield(p: ProtocolParams, n: Sequence[int], j: int = 0, atol: float = 1e-10,
                   theta1: float = 0.0) -> float:
    """Probability that only detector ``j`` clicks given Fock inputs ``n``; checks every detector agrees."""
    vac = vacuum_probabilities(p, n, theta1)
    q = 1 - p.p_dark
    everything = frozenset(range(p.M))
    values = [q ** (p.M - 1) * vac[everything - {d}] - q**p.M * vac[everything] for d in range(p.M)]
    if max(values) - min(values) > atol:
        raise AssertionError(f"single-click probabilities depend on the detector: {values}")
    return values[j]


def _output_amplitudes(p: ProtocolParams, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-detector coherent amplitudes in both polarizations for complex input amplitudes ``amps[..., i]``."""
    U = layered_unitary(p.s)[:, : p.n_parties]
    pol = np.ones(p.n_parties)
    pol[0] = math.cos(p.theta)
    perp = np.zeros(p.n_parties)
    perp[0] = -math.sin(p.theta)
    t = math.sqrt(p.eta)
    return t * (amps * pol) @ U.T, t * (amps * perp) @ U.T


def _single_click(p: ProtocolParams, gp: np.ndarray, gs: np.ndarray, j: int) -> np.ndarray:
    mean = np.abs(gp) ** 2 + np.abs(gs) ** 2
    q = 1 - p.p_dark
    silent_all = q**p.M * np.exp(-mean.sum(axis=-1))
    silent_others = q ** (p.M - 1) * np.exp(-(mean.sum(axis=-1) - mean[..., j]))
    return silent_others - silent_all


def simulate_kg_click(p: ProtocolParams, x: Sequence[int], j: int) -> float:
    """Only-``j``-clicks probability for coherent inputs ``|x_i alpha>`` (phase offset ``phi`` on parties ``i >= 1``)."""
    if len(x) != p.n_parties or any(v not in (1, -1) for v in x):
        raise DomainError(f"invalid sign vector {x}")
    phases = np.array([0.0] + [p.phi] * (p.n_parties - 1))
    amps = p.alpha * np.asarray(x, dtype=float) * np.exp(1j * phases)
    gp, gs = _output_amplitudes(p, amps)
    return float(_single_click(p, gp, gs, j))


def sample_gain(p: ProtocolParams, intensities: Sequence[float], n_samples: int, seed: int,
                j: int = 0) -> tuple[float, float]:
    """Monte Carlo gain over uniformly random input phases; returns ``(mean, standard error)``."""
    if n_samples < 1000:
        raise DomainError("need at least 1000 samples")
    rng = np.random.default_rng(seed)
    b = np.sqrt(np.asarray(intensities, dtype=float))
    chunk = 100_000
    vals = []
    for start in range(0, n_samples, chunk):
        size = min(chunk, n_samples - start)
        phases = rng.uniform(0.0, 2 * np.pi, size=(size, p.n_parties))
        gp, gs = _output_amplitudes(p, b * np.exp(1j * phases))
        vals.append(_single_click(p, gp, gs, j))
    v = np.concatenate(vals)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))
