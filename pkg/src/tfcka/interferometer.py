"""Balanced beam-splitter (BBS) network algebra.

An ``s``-layer network mixes ``M = 2**s`` modes; input ``i`` leaves on output
``k`` with amplitude ``f(k, i) / sqrt(M)`` where ``f(k, i) = (-1)**popcount(k & i)``.
Party ``A_i`` always feeds input ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_LAYERS = 8


def _popcount(x: int) -> int:
    return bin(x).count("1")


def sign(k: int, i: int) -> int:
    """Closed-form network coefficient ``(-1)**(k . i)``."""
    return -1 if _popcount(k & i) & 1 else 1


@dataclass(frozen=True)
class ModeTransform:
    s: int

    @property
    def M(self) -> int:
        return 1 << self.s

    def f(self, k: int, i: int) -> int:
        if not (0 <= k < self.M and 0 <= i < self.M):
            raise IndexError(f"mode index out of range for M={self.M}: ({k}, {i})")
        return sign(k, i)

    def sign_matrix(self) -> np.ndarray:
        """Dense ``M x M`` matrix of signs (test and oracle use only)."""
        idx = np.arange(self.M)
        parity = np.zeros((self.M, self.M), dtype=np.int64)
        anded = idx[:, None] & idx[None, :]
        for bit in range(self.s):
            parity ^= (anded >> bit) & 1
        return 1 - 2 * parity

    def unitary(self) -> np.ndarray:
        return self.sign_matrix() / np.sqrt(self.M)


def _check_layers(s: int) -> None:
    if not isinstance(s, (int, np.integer)) or s < 1 or s > MAX_LAYERS:
        raise ValueError(f"layer count must be an integer in [1, {MAX_LAYERS}], got {s!r}")


def layered_unitary(s: int) -> np.ndarray:
    """Build the network matrix by composing its ``s`` beam-splitter layers.

    Column ``i`` holds the output amplitudes of input mode ``i``. In layer ``r``
    mode ``i`` (bit ``r`` clear) is mixed with mode ``i + 2**r``:
    ``a_i -> (a_i + a_{i+2^r})/sqrt(2)`` and ``a_{i+2^r} -> (a_i - a_{i+2^r})/sqrt(2)``.
    """
    _check_layers(s)
    M = 1 << s
    U = np.eye(M)
    h = 1.0 / np.sqrt(2.0)
    for r in range(s):
        layer = np.zeros((M, M))
        step = 1 << r
        for i in range(M):
            if i & step:
                continue
            j = i + step
            layer[i, i] = h
            layer[j, i] = h
            layer[i, j] = h
            layer[j, j] = -h
        U = layer @ U
    return U


def build_transform(s: int, self_check: bool = False) -> ModeTransform:
    _check_layers(s)
    t = ModeTransform(int(s))
    if self_check:
        lay = layered_unitary(s) * np.sqrt(t.M)
        if not np.allclose(lay, t.sign_matrix(), rtol=0, atol=1e-12):
            raise AssertionError(f"layered and closed-form network disagree for s={s}")
    return t


def row_sum(t: ModeTransform, k: int) -> int:
    """Literal sum over inputs of ``f(k, i)``; equals ``M`` for ``k == 0`` and 0 otherwise."""
    if not 0 <= k < t.M:
        raise IndexError(f"mode index {k} out of range for M={t.M}")
    return sum(t.f(k, i) for i in range(t.M))


def beamsplitter_count(s: int) -> int:
    _check_layers(s)
    return s * (1 << (s - 1))
