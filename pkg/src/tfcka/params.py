"""Protocol parameters and numerical-method settings."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

# sin^2 of the default polarization and phase misalignment
DEFAULT_MISALIGNMENT = 0.02
DEFAULT_ANGLE = math.asin(math.sqrt(DEFAULT_MISALIGNMENT))
DEFAULT_DECOYS = (0.5, 0.0)
DEFAULT_CUTOFF = 4


class DomainError(ValueError):
    """Input outside the domain where a quantity is defined."""


def misalignment_angle(fraction: float) -> float:
    """Angle whose squared sine is ``fraction`` (0.02 -> a 2% misalignment)."""
    if not 0.0 <= fraction <= 1.0:
        raise DomainError(f"misalignment fraction must lie in [0, 1], got {fraction}")
    return math.asin(math.sqrt(fraction))


@dataclass(frozen=True)
class ProtocolParams:
    """Symmetric-channel experiment description.

    ``theta`` is the polarization misalignment between the reference party
    ``A_0`` and every other party, ``phi`` the phase offset of parties
    ``A_1 ... A_{N-1}`` relative to ``A_0``. ``eta`` is the party-to-relay
    transmittance.
    """

    n_parties: int
    s: int
    alpha: float = 0.0
    eta: float = 1.0
    p_dark: float = 0.0
    theta: float = DEFAULT_ANGLE
    phi: float = DEFAULT_ANGLE
    decoys: tuple[float, float] = DEFAULT_DECOYS
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.n_parties < 1:
            raise DomainError(f"need at least one party, got {self.n_parties}")
        if not 1 <= self.s <= 8:
            raise DomainError(f"layer count must be in [1, 8], got {self.s}")
        if (1 << self.s) < self.n_parties:
            raise DomainError(f"M = 2^{self.s} modes cannot host {self.n_parties} parties")
        if self.alpha < 0:
            raise DomainError(f"alpha must be non-negative, got {self.alpha}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.p_dark < 1.0:
            raise DomainError(f"p_dark must lie in [0, 1), got {self.p_dark}")
        b0, b1 = self.decoys
        if not b0 > b1 >= 0:
            raise DomainError(f"decoys must satisfy beta0 > beta1 >= 0, got {self.decoys}")
        if self.cutoff < 0 or self.cutoff % 2:
            raise DomainError(f"cutoff must be even and non-negative, got {self.cutoff}")
        object.__setattr__(self, "decoys", (float(b0), float(b1)))

    @property
    def M(self) -> int:
        return 1 << self.s

    def with_(self, **changes) -> "ProtocolParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the phase-averaging integral of the gains.

    Up to ``max_grid_dims`` integration dimensions a tensor trapezoidal rule
    with ``nodes`` points per axis is doubled until two successive estimates
    agree to ``rtol``. Beyond that, seeded Monte Carlo runs until the relative
    standard error drops below ``mc_rel_err``.
    """

    nodes: int = 32
    rtol: float = 1e-10
    max_nodes: int = 128
    max_grid_dims: int = 4
    mc_rel_err: float = 1e-5
    mc_batch: int = 200_000
    mc_max_samples: int = 20_000_000
    seed: int = 0

    def __post_init__(self):
        if self.nodes < 2 or self.max_nodes < self.nodes:
            raise DomainError(f"invalid node counts: nodes={self.nodes}, max_nodes={self.max_nodes}")
        if self.rtol <= 0 or self.mc_rel_err <= 0:
            raise DomainError("tolerances must be positive")
