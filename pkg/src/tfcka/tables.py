"""Gain and yield containers plus the photon-tuple bookkeeping shared by the engines."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

EXACT = "exact"
UPPER_BOUND = "upper-bound"

PhotonTuple = tuple[int, ...]


def canonical(n: Iterable[int]) -> PhotonTuple:
    """Representative of ``n`` under permutations of parties ``1 ... N-1``."""
    n = tuple(int(x) for x in n)
    return (n[0],) + tuple(sorted(n[1:], reverse=True))


def tuples_up_to(n_parties: int, max_total: int) -> Iterator[PhotonTuple]:
    """All photon tuples of length ``n_parties`` with total at most ``max_total``."""
    for n in itertools.product(range(max_total + 1), repeat=n_parties):
        if sum(n) <= max_total:
            yield n


def required_tuples(n_parties: int, cutoff: int, symmetric: bool = True) -> list[PhotonTuple]:
    """Tuples whose yields enter the phase-error bound below the cutoff.

    A tuple carries a nonzero cat-state coefficient for some even-parity
    string exactly when its total photon number is even.
    """
    out = [n for n in tuples_up_to(n_parties, cutoff) if sum(n) % 2 == 0]
    if symmetric:
        out = sorted({canonical(n) for n in out}, key=lambda n: (sum(n), n))
    return out


@dataclass
class GainTable:
    """Gains keyed by intensity-choice bits ``f`` (``f[i]`` selects ``decoys[f[i]]``)."""

    n_parties: int
    decoys: tuple[float, float]
    values: dict[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        expected = set(itertools.product((0, 1), repeat=self.n_parties))
        missing = expected - set(self.values)
        if missing:
            raise ValueError(f"gain table incomplete, missing {sorted(missing)[:4]}...")
        for f, g in self.values.items():
            if not -1e-15 <= g <= 1 + 1e-15:
                raise ValueError(f"gain {g} for {f} outside [0, 1]")

    def __getitem__(self, f: Iterable[int]) -> float:
        return self.values[tuple(f)]

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class YieldTable:
    """Photon-tuple yields (exact values or upper bounds).

    With ``symmetric`` set, lookups go through :func:`canonical`, so any
    permutation of parties ``1 ... N-1`` finds the same stored entry.
    """

    n_parties: int
    kind: str = EXACT
    symmetric: bool = True
    values: dict[PhotonTuple, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (EXACT, UPPER_BOUND):
            raise ValueError(f"unknown yield table kind {self.kind!r}")
        self.values = {self._key(n): float(v) for n, v in self.values.items()}

    def _key(self, n: Iterable[int]) -> PhotonTuple:
        n = tuple(int(x) for x in n)
        if len(n) != self.n_parties:
            raise ValueError(f"tuple {n} has wrong length for N={self.n_parties}")
        return canonical(n) if self.symmetric else n

    def __setitem__(self, n: Iterable[int], value: float) -> None:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"yield {value} for {tuple(n)} outside [0, 1]")
        self.values[self._key(n)] = float(value)

    def __getitem__(self, n: Iterable[int]) -> float:
        return self.values[self._key(n)]

    def __contains__(self, n: Iterable[int]) -> bool:
        return self._key(n) in self.values

    def __len__(self) -> int:
        return len(self.values)

    def keys(self):
        return self.values.keys()

    def items(self):
        return self.values.items()

    @classmethod
    def from_mapping(cls, n_parties: int, values: Mapping[PhotonTuple, float], **kw) -> "YieldTable":
        table = cls(n_parties, **kw)
        for n, v in values.items():
            table[n] = v
        return table
