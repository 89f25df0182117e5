"""Dense state-vector and density-matrix core.

Conventions
-----------
* Every state carries an ordered tuple of qubit labels. The first label is the
  most significant bit of the amplitude index, so for labels ``("x", "y")`` the
  amplitude of ``|x=1, y=0>`` sits at index ``0b10 == 2``.
* All arithmetic is double-precision complex.
* Negativity is ``(||rho^{T_B}||_1 - 1) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import AddressingError, BasisError, CompositionError, DomainError

NORM_TOL = 1e-12
ZERO_PROB = 1e-14
PSD_TOL = 1e-10

Label = Hashable

# Pauli and related single-qubit gates.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
ISY = 1j * Y  # i*sigma_y = [[0, 1], [-1, 0]]

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def qubit_vector(amplitudes, *, normalize: bool = False) -> np.ndarray:
    """Return a validated two-component complex unit vector."""
    vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if vec.shape != (2,):
        raise DomainError(f"a qubit vector needs 2 amplitudes, got {vec.shape[0]}")
    norm = np.linalg.norm(vec)
    if normalize:
        if norm == 0:
            raise DomainError("cannot normalize the zero vector")
        vec = vec / norm
    elif abs(norm - 1.0) > NORM_TOL:
        raise DomainError(f"qubit vector not normalized (norm={norm!r})")
    return _frozen(vec)


def single_qubit_gate(matrix) -> np.ndarray:
    """Return a validated 2x2 unitary."""
    mat = np.asarray(matrix, dtype=complex)
    if mat.shape != (2, 2):
        raise DomainError(f"single-qubit gate must be 2x2, got {mat.shape}")
    if not is_unitary(mat):
        raise DomainError("gate is not unitary")
    return _frozen(mat)


def is_unitary(mat: np.ndarray, tol: float = NORM_TOL) -> bool:
    mat = np.asarray(mat)
    return bool(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))) <= tol)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over labeled qubits.

    Parameters
    ----------
    amplitudes : array_like
        ``2**n`` complex amplitudes, first label most significant.
    labels : sequence of hashable
        Distinct qubit labels fixing the tensor layout.
    """

    amplitudes: np.ndarray
    labels: tuple

    def __init__(self, amplitudes, labels: Sequence[Label], *, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise CompositionError(f"duplicate qubit labels in {labels}")
        if amps.shape[0] != 2 ** len(labels):
            raise DomainError(
                f"{amps.shape[0]} amplitudes do not match {len(labels)} qubits"
            )
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise DomainError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state not normalized (norm={norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "labels", labels)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def index(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise AddressingError(f"unknown qubit label {label!r}") from None

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def reorder(self, labels: Sequence[Label]) -> "StateVector":
        """Same state with the tensor layout permuted to ``labels``."""
        labels = tuple(labels)
        if labels == self.labels:
            return self
        if sorted(map(repr, labels)) != sorted(map(repr, self.labels)):
            raise DomainError(f"label sets differ: {labels} vs {self.labels}")
        perm = [self.index(lab) for lab in labels]
        amps = np.transpose(self.tensor(), perm).reshape(-1)
        return StateVector(amps, labels)

    def relabel(self, mapping: dict) -> "StateVector":
        return StateVector(self.amplitudes, [mapping.get(l, l) for l in self.labels])

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.labels)

    def __repr__(self) -> str:
        return f"StateVector(labels={self.labels}, amplitudes={np.round(self.amplitudes, 6)})"


def basis_state(bits: str, labels: Sequence[Label]) -> StateVector:
    """Computational basis state, e.g. ``basis_state("01", ("a", "b"))``."""
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps, labels)


def product_state(vectors: Sequence, labels: Sequence[Label]) -> StateVector:
    """Product of single-qubit vectors, one per label."""
    amps = np.array([1.0 + 0j])
    for v in vectors:
        amps = np.kron(amps, qubit_vector(v))
    return StateVector(amps, labels)


def tensor(*factors: StateVector) -> StateVector:
    """Kronecker product of states; labels are concatenated in order."""
    if len(factors) == 1 and not isinstance(factors[0], StateVector):
        factors = tuple(factors[0])
    if not factors:
        raise DomainError("tensor() needs at least one factor")
    labels: list = []
    amps = np.array([1.0 + 0j])
    for f in factors:
        labels.extend(f.labels)
        amps = np.kron(amps, f.amplitudes)
    if len(set(labels)) != len(labels):
        raise CompositionError(f"duplicate qubit labels in {tuple(labels)}")
    return StateVector(amps, labels)


def apply_unitary(state: StateVector, targets: Sequence[Label], unitary) -> StateVector:
    """Apply a ``2**k x 2**k`` matrix to the ordered target qubits."""
    targets = tuple(targets)
    axes = [state.index(t) for t in targets]
    k = len(axes)
    mat = np.asarray(unitary, dtype=complex)
    if mat.shape != (2**k, 2**k):
        raise DomainError(f"operator shape {mat.shape} does not fit {k} qubits")
    psi = np.moveaxis(state.tensor(), axes, range(k))
    rest = psi.shape[k:]
    psi = (mat @ psi.reshape(2**k, -1)).reshape((2,) * k + rest)
    psi = np.moveaxis(psi, range(k), axes)
    return StateVector(psi.reshape(-1), state.labels)


def apply_gate(state: StateVector, target: Label, gate) -> StateVector:
    """Apply a single-qubit gate to ``target``."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise DomainError(f"single-qubit gate must be 2x2, got {gate.shape}")
    return apply_unitary(state, (target,), gate)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density operator on labeled qubits (Hermitian, unit trace, PSD)."""

    matrix: np.ndarray
    labels: tuple

    def __init__(self, matrix, labels: Sequence[Label]):
        mat = np.asarray(matrix, dtype=complex)
        labels = tuple(labels)
        dim = 2 ** len(labels)
        if mat.shape != (dim, dim):
            raise DomainError(f"density matrix shape {mat.shape} does not fit {len(labels)} qubits")
        if np.max(np.abs(mat - mat.conj().T)) > NORM_TOL:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > NORM_TOL:
            raise DomainError(f"density matrix trace {np.trace(mat).real!r} != 1")
        if np.linalg.eigvalsh(mat).min() < -PSD_TOL:
            raise DomainError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _frozen(mat))
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise AddressingError(f"unknown qubit label {label!r}") from None

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal rank-one projectors on ``num_qubits`` qubits.

    When ``complement`` is set an extra outcome ``I - sum_i |e_i><e_i|`` is
    appended after the listed elements.
    """

    elements: np.ndarray
    names: tuple
    complement: bool = False
    complement_name: str = "complement"

    def __post_init__(self):
        elems = np.atleast_2d(np.asarray(self.elements, dtype=complex))
        count, dim = elems.shape
        nq = int(round(np.log2(dim)))
        if 2**nq != dim:
            raise BasisError(f"basis element length {dim} is not a power of two")
        if len(self.names) != count:
            raise BasisError("one name per basis element is required")
        gram = elems.conj() @ elems.T
        if np.max(np.abs(gram - np.eye(count))) > NORM_TOL:
            raise BasisError("basis elements are not orthonormal")
        if count > dim or (count < dim and not self.complement):
            raise BasisError(f"{count} elements do not span {dim} dimensions")
        object.__setattr__(self, "elements", _frozen(elems))
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def num_qubits(self) -> int:
        return int(round(np.log2(self.elements.shape[1])))

    @property
    def outcome_names(self) -> tuple:
        if self.complement:
            return self.names + (self.complement_name,)
        return self.names

    def projectors(self) -> list:
        projs = [np.outer(e, e.conj()) for e in self.elements]
        if self.complement:
            projs.append(np.eye(self.elements.shape[1]) - sum(projs))
        return projs


@dataclass(frozen=True)
class KrausMeasurement:
    """Generalized measurement given by Kraus operators with sum K^dag K = I."""

    operators: tuple
    names: tuple

    def __post_init__(self):
        ops = tuple(_frozen(op) for op in self.operators)
        dim = ops[0].shape[0]
        if any(op.shape != (dim, dim) for op in ops):
            raise BasisError("Kraus operators must share one square shape")
        total = sum(op.conj().T @ op for op in ops)
        if np.max(np.abs(total - np.eye(dim))) > NORM_TOL:
            raise BasisError("Kraus operators are not complete")
        if len(self.names) != len(ops):
            raise BasisError("one name per Kraus operator is required")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def num_qubits(self) -> int:
        return int(round(np.log2(self.operators[0].shape[0])))

    @property
    def outcome_names(self) -> tuple:
        return self.names


@dataclass(frozen=True)
class Outcome:
    """One measurement outcome; ``state`` is None when ``probability < 1e-14``."""

    index: int
    name: str
    probability: float
    state: StateVector | None = field(default=None, repr=False)


def _split(state: StateVector, targets: Sequence[Label]):
    axes = [state.index(t) for t in targets]
    if len(set(axes)) != len(axes):
        raise DomainError(f"measurement targets repeat: {tuple(targets)}")
    k = len(axes)
    psi = np.moveaxis(state.tensor(), axes, range(k))
    return axes, psi.reshape(2**k, -1), psi.shape[k:]


def _rebuild(state, axes, block, rest_shape, prob, index, name):
    if prob < ZERO_PROB:
        return Outcome(index, name, prob, None)
    k = len(axes)
    psi = np.moveaxis(block.reshape((2,) * k + rest_shape), range(k), axes)
    post = StateVector(psi.reshape(-1) / np.sqrt(prob), state.labels)
    return Outcome(index, name, prob, post)


def measure(state: StateVector, targets: Sequence[Label], basis) -> list[Outcome]:
    """Measure ``targets`` and return every outcome with its post-state.

    Parameters
    ----------
    state : StateVector
    targets : sequence of labels
        Ordered qubits the basis acts on (first = most significant).
    basis : MeasurementBasis or KrausMeasurement

    Returns
    -------
    list of Outcome
        All outcomes in basis order, zero-probability ones included with a
        null post-state.
    """
    targets = tuple(targets)
    if basis.num_qubits != len(targets):
        raise BasisError(f"basis acts on {basis.num_qubits} qubits, got {len(targets)} targets")
    axes, mat, rest = _split(state, targets)
    outcomes = []
    if isinstance(basis, KrausMeasurement):
        for i, (op, name) in enumerate(zip(basis.operators, basis.names)):
            block = op @ mat
            prob = float(np.vdot(block, block).real)
            outcomes.append(_rebuild(state, axes, block, rest, prob, i, name))
        return outcomes
    remaining = mat.copy() if basis.complement else None
    for i, (elem, name) in enumerate(zip(basis.elements, basis.names)):
        coeff = elem.conj() @ mat
        block = np.outer(elem, coeff)
        prob = float(np.vdot(coeff, coeff).real)
        outcomes.append(_rebuild(state, axes, block, rest, prob, i, name))
        if remaining is not None:
            remaining -= block
    if basis.complement:
        prob = float(np.vdot(remaining, remaining).real)
        outcomes.append(
            _rebuild(state, axes, remaining, rest, prob, len(outcomes), basis.complement_name)
        )
    return outcomes


def partial_trace(state, keep: Sequence[Label]) -> DensityMatrix:
    """Reduced density matrix on ``keep`` (in the given order)."""
    keep = tuple(keep)
    if not keep:
        raise DomainError("partial_trace needs at least one qubit to keep")
    axes = [state.index(k) for k in keep]
    if len(set(axes)) != len(axes):
        raise DomainError(f"repeated labels in keep set {keep}")
    n, k = len(state.labels), len(keep)
    if isinstance(state, StateVector):
        psi = np.moveaxis(state.tensor(), axes, range(k)).reshape(2**k, -1)
        rho = psi @ psi.conj().T
    else:
        t = state.matrix.reshape((2,) * (2 * n))
        others = [i for i in range(n) if i not in axes]
        order = axes + others + [n + i for i in axes] + [n + i for i in others]
        t = np.transpose(t, order).reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
        rho = np.einsum("ijkj->ik", t)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real, keep)


def fidelity(state, target: StateVector) -> float:
    """``|<target|state>|^2``; a DensityMatrix ``state`` gives ``<target|rho|target>``.

    Labels may be listed in different orders; ``state`` is permuted to match.
    """
    if set(state.labels) != set(target.labels) or len(state.labels) != len(target.labels):
        raise DomainError(f"fidelity between different systems {state.labels} / {target.labels}")
    if isinstance(state, DensityMatrix):
        if state.labels != target.labels:
            state = partial_trace(state, target.labels)
        t = target.amplitudes
        val = float(np.real(t.conj() @ state.matrix @ t))
    else:
        val = float(abs(np.vdot(target.amplitudes, state.reorder(target.labels).amplitudes)) ** 2)
    return min(max(val, 0.0), 1.0)


def schmidt(state: StateVector, bipartition: Sequence[Label]) -> np.ndarray:
    """Schmidt coefficients (descending) for the cut ``bipartition : rest``."""
    side = tuple(bipartition)
    axes = [state.index(l) for l in side]
    k = len(axes)
    if k == 0 or k == state.num_qubits:
        return np.array([1.0])
    psi = np.moveaxis(state.tensor(), axes, range(k)).reshape(2**k, -1)
    return np.linalg.svd(psi, compute_uv=False)


def entanglement_entropy(coefficients: Iterable[float]) -> float:
    """Entropy in ebits of a Schmidt coefficient list."""
    lam2 = np.asarray(list(coefficients), dtype=float) ** 2
    lam2 = lam2[lam2 >= 1e-15]
    return max(0.0, float(-np.sum(lam2 * np.log2(lam2))))


def partial_transpose(rho: DensityMatrix, label: Label) -> np.ndarray:
    """Partial transpose of ``rho`` on one qubit (raw matrix, not validated)."""
    n = len(rho.labels)
    i = rho.index(label)
    t = rho.matrix.reshape((2,) * (2 * n))
    t = np.swapaxes(t, i, n + i)
    return t.reshape(rho.dim, rho.dim)


def negativity(rho: DensityMatrix, split: Sequence[Label] | None = None) -> float:
    """Negativity of a two-qubit state, ``(||rho^{T_B}||_1 - 1) / 2``.

    ``split`` names the (A, B) qubits; the transpose is taken on B. Defaults
    to ``rho.labels``.
    """
    if rho.dim != 4:
        raise DomainError(f"negativity needs a two-qubit state, got dim {rho.dim}")
    _, b = tuple(split) if split is not None else rho.labels
    evals = np.linalg.eigvalsh(partial_transpose(rho, b))
    return max(float((np.sum(np.abs(evals)) - 1.0) / 2.0), 0.0)


def canonical_phase(state: StateVector) -> StateVector:
    """Remove the global phase: the largest-magnitude amplitude becomes real positive."""
    amps = state.amplitudes
    mags = np.abs(amps)
    j = int(np.argmax(mags > mags.max() - 1e-9))
    phase = amps[j] / mags[j]
    return StateVector(amps / phase, state.labels)


def reduced_pure_state(state: StateVector, keep: Sequence[Label], tol: float = PSD_TOL) -> StateVector | None:
    """State of ``keep`` if it is unentangled with the rest within ``tol``, else None.

    Reads the rank-one factor off the amplitude matrix directly, avoiding an
    eigendecomposition of the reduced density matrix.
    """
    keep = tuple(keep)
    axes = [state.index(k) for k in keep]
    k = len(axes)
    psi = np.moveaxis(state.tensor(), axes, range(k)).reshape(2**k, -1)
    col = psi[:, int(np.argmax(np.einsum("ij,ij->j", psi.conj(), psi).real))]
    u = col / np.linalg.norm(col)
    overlap = u.conj() @ psi
    if 1.0 - float(np.vdot(overlap, overlap).real) > tol:
        return None
    return canonical_phase(StateVector(u, keep, normalize=True))


def pure_state_of(rho: DensityMatrix, tol: float = PSD_TOL) -> StateVector | None:
    """Leading eigenvector of ``rho`` if it is pure within ``tol``, else None."""
    evals, evecs = np.linalg.eigh(rho.matrix)
    if evals[-1] < 1.0 - tol:
        return None
    return canonical_phase(StateVector(evecs[:, -1], rho.labels, normalize=True))
