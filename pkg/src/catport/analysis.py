"""Entanglement analysis of channels and of the teleportable states.

Distillability of a reduced two-qubit channel is read off its negativity:
for two qubits a state is distillable iff its partial transpose is not
positive, which is assumed here rather than re-derived.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .protocol_math import OverlapFrame, overlap_frame
from .protocols import ChannelSpec, channel_labels
from .qstate import KET0, KET1, negativity, partial_trace, product_state, schmidt, entanglement_entropy, StateVector


@dataclass(frozen=True)
class NegativityReport:
    negativity_AB2: float
    negativity_AB1: float

    @property
    def distillable_AB2(self) -> bool:
        return self.negativity_AB2 > 1e-10

    @property
    def distillable_AB1(self) -> bool:
        return self.negativity_AB1 > 1e-10


def channel_negativity_report(channel: ChannelSpec) -> NegativityReport:
    """Negativities of the Alice-Bob2 and Alice-Bob1 reduced channels (N = 2 only)."""
    if channel.n != 2:
        raise DomainError("negativity report is defined for N = 2 channels only")
    state = channel.state(channel_labels(2))
    n_ab2 = negativity(partial_trace(state, ("A", "B2")))
    n_ab1 = negativity(partial_trace(state, ("A", "B1")))
    return NegativityReport(n_ab2, n_ab1)


def binary_entropy(p: float) -> float:
    terms = [x * np.log2(x) for x in (p, 1 - p) if x > 1e-15]
    return max(0.0, float(-sum(terms)))


def closed_form_emax(r: float) -> float:
    """Largest teleportable entanglement, ``H((1 + r) / 2)``."""
    return binary_entropy((1 + r) / 2)


def teleportable_entropy(frame: OverlapFrame, alpha2: float) -> float:
    """Entropy of ``alpha|phi 0'> + beta|phi' 1'>`` with real ``alpha = sqrt(alpha2)``."""
    alpha, beta = np.sqrt(alpha2), np.sqrt(1 - alpha2)
    zero = product_state([frame.phi, KET0], ("x", "y")).amplitudes
    one = product_state([frame.phi_prime, KET1], ("x", "y")).amplitudes
    state = StateVector(alpha * zero + beta * one, ("x", "y"))
    return entanglement_entropy(schmidt(state, ("x",)))


@dataclass(frozen=True)
class EntanglementRange:
    e_max: float
    argmax_alpha2: float
    alpha2: np.ndarray
    entropy: np.ndarray
    closed_form: float


def teleportable_entanglement_range(frame: OverlapFrame, points: int = 101) -> EntanglementRange:
    """Grid search of the entanglement of the teleportable plane over ``|alpha|^2``."""
    if points < 101:
        raise DomainError("grid needs at least 101 points")
    grid = np.linspace(0.0, 1.0, points)
    curve = np.array([teleportable_entropy(frame, p) for p in grid])
    k = int(np.argmax(curve))
    return EntanglementRange(float(curve[k]), float(grid[k]), grid, curve, closed_form_emax(frame.r))


def frame_for_overlap(r: float, epsilon: float = 0.0) -> OverlapFrame:
    """Frame of ``phi = |0>`` and ``phi' = e^{i eps}(r|0> + sqrt(1-r^2)|1>)``."""
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"overlap r must be in [0, 1], got {r}")
    phi_prime = np.exp(1j * epsilon) * np.array([r, np.sqrt(max(1 - r * r, 0.0))])
    return overlap_frame(KET0, phi_prime)
