"""Bases, overlap frames, gauge/swap/restore unitaries and correction tables.

Outcome numbering
-----------------
* Bell outcomes are indexed 0..3 in the order ``phi+, phi-, psi+, psi-``.
* A Claire outcome is 0 for ``a`` and 1 for ``a_bar``.
* GHZ-basis outcomes are numbered 1..5 in :func:`ghz_correction`, matching
  ``P1..P5``; the measurement itself reports them as indices 0..4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateChannelError, DomainError, ProtocolFailure
from .qstate import (
    I2,
    ISY,
    KET0,
    KET1,
    X,
    Z,
    KrausMeasurement,
    MeasurementBasis,
    NORM_TOL,
    qubit_vector,
)

BELL_NAMES = ("phi+", "phi-", "psi+", "psi-")
CLAIRE_NAMES = ("a", "a_bar")
GHZ_NAMES = ("phi+_GHZ", "phi-_GHZ", "psi+_GHZ", "psi-_GHZ")

_S = 1 / np.sqrt(2)


def bell_basis() -> MeasurementBasis:
    """Bell basis in the order phi+, phi-, psi+, psi-."""
    elems = _S * np.array(
        [[1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0]], dtype=complex
    )
    return MeasurementBasis(elems, BELL_NAMES)


def ghz_basis() -> MeasurementBasis:
    """The four GHZ-type projectors plus the rank-4 complement ``P5``."""
    elems = np.zeros((4, 8), dtype=complex)
    elems[0, [0b000, 0b111]] = [_S, _S]
    elems[1, [0b000, 0b111]] = [_S, -_S]
    elems[2, [0b001, 0b110]] = [_S, _S]
    elems[3, [0b001, 0b110]] = [_S, -_S]
    return MeasurementBasis(elems, GHZ_NAMES, complement=True, complement_name="P5")


def _first_nonzero_real(vec: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(vec) > 1e-12))
    return vec * (abs(vec[j]) / vec[j])


def orthogonal_complement(vec) -> np.ndarray:
    """Unit vector orthogonal to ``vec``, first nonzero component real positive."""
    v = np.asarray(vec, dtype=complex)
    return _first_nonzero_real(np.array([-v[1].conjugate(), v[0].conjugate()]))


@dataclass(frozen=True, eq=False)
class SchmidtFrame:
    """Orthonormal pair ``(|0'>, |1'>)`` on one qubit."""

    zero: np.ndarray
    one: np.ndarray

    def __post_init__(self):
        z, o = qubit_vector(self.zero), qubit_vector(self.one)
        if abs(np.vdot(z, o)) > NORM_TOL:
            raise DomainError("frame vectors are not orthogonal")
        object.__setattr__(self, "zero", z)
        object.__setattr__(self, "one", o)

    @classmethod
    def computational(cls) -> "SchmidtFrame":
        return cls(KET0, KET1)

    @classmethod
    def from_unitary(cls, u) -> "SchmidtFrame":
        u = np.asarray(u, dtype=complex)
        return cls(u[:, 0], u[:, 1])

    def unitary(self) -> np.ndarray:
        """Gate taking |0> to ``zero`` and |1> to ``one``."""
        return np.column_stack([self.zero, self.one])


@dataclass(frozen=True, eq=False)
class OverlapFrame:
    """Derived quantities for a pair of (generally non-orthogonal) qubit vectors.

    ``<phi|phi_prime> = r e^{i epsilon}`` and ``phi_second = e^{-i epsilon} phi_prime``
    so that ``phi = cos(theta/2) a + sin(theta/2) a_bar`` and
    ``phi_second = cos(theta/2) a - sin(theta/2) a_bar``.
    """

    r: float
    epsilon: float
    theta: float
    a: np.ndarray
    a_bar: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray
    phi_second: np.ndarray

    @property
    def cos_half(self) -> float:
        return float(np.cos(self.theta / 2))

    @property
    def sin_half(self) -> float:
        return float(np.sin(self.theta / 2))


def overlap_frame(phi, phi_prime) -> OverlapFrame:
    """Build the :class:`OverlapFrame` of ``(phi, phi_prime)``.

    At ``r == 0`` the phase ``epsilon`` is fixed to 0. At ``r == 1`` the pair
    no longer determines ``a_bar``; the orthogonal complement of ``a`` with its
    first nonzero component real positive is used.
    """
    phi = qubit_vector(phi)
    phi_prime = qubit_vector(phi_prime)
    overlap = np.vdot(phi, phi_prime)
    r = float(min(abs(overlap), 1.0))
    if r <= NORM_TOL:
        # below tolerance the pair counts as orthogonal: r and epsilon are both 0
        r, eps = 0.0, 0.0
    else:
        eps = float(np.angle(overlap))
    if eps <= -np.pi:
        eps += 2 * np.pi
    phi_second = np.exp(-1j * eps) * phi_prime

    plus = phi + phi_second
    a = plus / np.linalg.norm(plus)
    cos_half = float(np.vdot(a, phi).real)
    perp = np.array([-a[1].conjugate(), a[0].conjugate()])
    along = np.vdot(perp, phi)
    sin_half = float(abs(along))
    if sin_half > 1e-14:
        a_bar = perp * (along / sin_half)
    else:
        sin_half = 0.0
        a_bar = _first_nonzero_real(perp)
    theta = float(2 * np.arctan2(sin_half, cos_half))
    return OverlapFrame(
        r=r,
        epsilon=eps,
        theta=theta,
        a=qubit_vector(a, normalize=True),
        a_bar=qubit_vector(a_bar, normalize=True),
        phi=phi,
        phi_prime=phi_prime,
        phi_second=qubit_vector(phi_second, normalize=True),
    )


def claire_basis(frame: OverlapFrame) -> MeasurementBasis:
    """Claire's single-qubit projective measurement ``{|a>, |a_bar>}``."""
    return MeasurementBasis(np.array([frame.a, frame.a_bar]), CLAIRE_NAMES)


def _total_phase(frames) -> float:
    if isinstance(frames, OverlapFrame):
        frames = [frames]
    return float(sum(f.epsilon for f in frames))


def phase_gate(phase: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phase)]).astype(complex)


def gauge_unitaries(frames, target_frame: SchmidtFrame | None = None):
    """Alice's gauge gates ``(U', alice_phase)``.

    ``U'`` takes ``|0'> -> |0>`` and ``|1'> -> e^{-i eps}|1>``; the phase gate on
    qubit A is ``diag(1, e^{-i eps})``. With several frames ``eps`` is their sum.
    """
    eps = _total_phase(frames)
    target_frame = target_frame or SchmidtFrame.computational()
    u_prime = phase_gate(-eps) @ target_frame.unitary().conj().T
    return u_prime, phase_gate(-eps)


def swap_unitary(frame: OverlapFrame) -> np.ndarray:
    """Reflection ``|a><a| - |a_bar><a_bar|``; exchanges ``phi`` and ``phi_second``."""
    return np.outer(frame.a, frame.a.conj()) - np.outer(frame.a_bar, frame.a_bar.conj())


def restore_unitaries(frames: Sequence[SchmidtFrame], overlaps: Sequence[OverlapFrame] | None = None):
    """Per-Bob gates that undo the initial transformation of the input.

    Without ``overlaps`` (GHZ protocol) each Bob applies the frame unitary
    ``U_j`` with ``U_j|0> = frame.zero``, ``U_j|1> = frame.one``. With
    ``overlaps`` (GHZ-class and cat protocols) ``frames`` holds the single
    frame of the last input qubit; Bobs 1..N-1 do nothing and Bob N applies
    ``(U')^{-1}``.
    """
    if overlaps is None:
        return [f.unitary() for f in frames]
    if len(frames) != 1:
        raise DomainError("expected the single frame of the last input qubit")
    u_prime, _ = gauge_unitaries(list(overlaps), frames[0])
    return [I2.copy() for _ in overlaps] + [np.linalg.inv(u_prime)]


@dataclass(frozen=True, eq=False)
class CorrectionAction:
    """One single-qubit gate per Bob, applied after the classical messages arrive."""

    gates: tuple
    names: tuple

    def __post_init__(self):
        if len(self.gates) != len(self.names):
            raise DomainError("one name per gate is required")
        for g in self.gates:
            if np.asarray(g).shape != (2, 2):
                raise DomainError("corrections are single-qubit gates only")

    def operator(self) -> np.ndarray:
        """Tensor product of the gates (Bob 1 most significant)."""
        out = np.eye(1, dtype=complex)
        for g in self.gates:
            out = np.kron(out, g)
        return out

    def __iter__(self):
        return iter(self.gates)

    def __len__(self):
        return len(self.gates)


_GHZ_TABLE = {
    1: ((I2, I2), ("I", "I")),
    2: ((Z, I2), ("Z", "I")),
    3: ((X, X), ("X", "X")),
    4: ((X, ISY), ("X", "iY")),
}


def ghz_correction(outcome: int) -> CorrectionAction:
    """Bob1/Bob2 gates after GHZ-basis outcome ``P_outcome`` (1..4)."""
    if outcome == 5:
        raise ProtocolFailure("P5 clicked; this outcome has zero probability for the protocol")
    if outcome not in _GHZ_TABLE:
        raise DomainError(f"GHZ outcome must be in 1..5, got {outcome!r}")
    gates, names = _GHZ_TABLE[outcome]
    return CorrectionAction(tuple(g.copy() for g in gates), names)


def cat_correction(bell_outcome: int, claire_outcomes: Sequence[int], frames: Sequence[OverlapFrame]) -> CorrectionAction:
    """Product correction for the N Bobs of the cat protocol.

    For a psi outcome every Bob i < N applies the reflection of frame i and
    Bob N flips with sigma_x. Bob N then applies sigma_z when the Bell sign bit
    XOR the number of ``a_bar`` results is odd.
    """
    claire_outcomes = list(claire_outcomes)
    if len(claire_outcomes) != len(frames):
        raise DomainError(
            f"{len(claire_outcomes)} Claire outcomes for {len(frames)} frames"
        )
    if bell_outcome not in range(4):
        raise DomainError(f"Bell outcome must be 0..3, got {bell_outcome!r}")
    if any(c not in (0, 1) for c in claire_outcomes):
        raise DomainError(f"Claire outcomes must be 0 or 1, got {claire_outcomes}")
    is_psi = bell_outcome >= 2
    sign = bell_outcome % 2
    flip_phase = (sign + sum(claire_outcomes)) % 2 == 1

    gates, names = [], []
    for f in frames:
        gates.append(swap_unitary(f) if is_psi else I2.copy())
        names.append("U''" if is_psi else "I")
    last = X.copy() if is_psi else I2.copy()
    last_name = "X" if is_psi else "I"
    if flip_phase:
        last = Z @ last
        last_name = "Z" if last_name == "I" else "Z.X"
    gates.append(last)
    names.append(last_name)
    return CorrectionAction(tuple(gates), tuple(names))


def ghz_class_correction(bell_outcome: int, claire_outcome: int, frame: OverlapFrame) -> CorrectionAction:
    """Bob1/Bob2 gates after Alice's Bell outcome and Claire's ``{a, a_bar}`` result."""
    return cat_correction(bell_outcome, [claire_outcome], [frame])


def filter_measurement(a: complex, b: complex) -> KrausMeasurement:
    """Two-outcome filter on qubit A balancing ``a|0..> + b|1..>``.

    The success operator is ``diag(m e^{-i arg a}/|a|, m e^{-i arg b}/|b|)`` with
    ``m = min(|a|, |b|)``; on success the channel becomes
    ``(|0..> + |1..>)/sqrt(2)``. Success probability is ``2 m**2``.
    """
    a, b = complex(a), complex(b)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > NORM_TOL:
        raise DomainError("channel weights must satisfy |a|^2 + |b|^2 = 1")
    if abs(a) < NORM_TOL or abs(b) < NORM_TOL:
        raise DegenerateChannelError("a*b == 0: the channel carries no entanglement")
    m = min(abs(a), abs(b))
    ka = m / abs(a)
    kb = m / abs(b)
    success = np.diag([ka * abs(a) / a, kb * abs(b) / b]).astype(complex)
    fail = np.diag([np.sqrt(max(1 - ka**2, 0.0)), np.sqrt(max(1 - kb**2, 0.0))]).astype(complex)
    return KrausMeasurement((success, fail), ("success", "failure"))
