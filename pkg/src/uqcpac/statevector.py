"""Dense pure-state simulation.

Qubit 0 is the most significant bit of a basis index, so for ``n = 3`` the
state ``|100>`` lives at index 4. All public functions are value-to-value:
inputs are never mutated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ResourceError

TWO_PI = 2.0 * np.pi
DENSE_CAP = 10

GATE_KINDS = ("H", "RX", "RY", "RZ", "CNOT", "U1")
ROTATIONS = ("RX", "RY", "RZ")

H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
X_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def reduce_angle(theta: float) -> float:
    """Map an angle into [0, 2pi)."""
    r = float(theta) % TWO_PI
    # float modulo can land exactly on 2pi for tiny negative inputs
    if r >= TWO_PI:
        r = 0.0
    return r


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]], dtype=complex
    )


def is_unitary(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - eye)) <= tol)


@dataclass(frozen=True, eq=False)
class StateVector:
    """An ``n``-qubit pure state with ``2**n`` complex amplitudes."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.n < 1 or amps.shape[0] != 2**self.n:
            raise DomainError(
                f"expected {2 ** max(self.n, 0)} amplitudes for n={self.n}, got {amps.shape[0]}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def __len__(self):
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def from_array(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.shape[0]))) if amps.shape[0] > 0 else 0
        return cls(n, amps)


@dataclass(frozen=True, eq=False)
class Gate:
    """A tagged gate descriptor.

    Rotation angles are stored reduced into [0, 2pi). Note that this is a
    sign change of the matrix for angles outside that range, i.e. only a
    global phase.
    """

    kind: str
    qubits: tuple
    theta: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind not in GATE_KINDS:
            raise DomainError(f"unknown gate kind {self.kind!r}")
        arity = 2 if kind == "CNOT" else 1
        if len(self.qubits) != arity:
            raise DomainError(f"{kind} acts on {arity} qubit(s), got {len(self.qubits)}")
        if any(q < 0 for q in self.qubits):
            raise DomainError(f"negative qubit index in {kind}")
        if kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise DomainError("CNOT control equals target")
        if kind in ROTATIONS:
            if self.theta is None or not np.isfinite(self.theta):
                raise DomainError(f"{kind} needs a finite angle")
            object.__setattr__(self, "theta", reduce_angle(self.theta))
        elif self.theta is not None:
            raise DomainError(f"{kind} takes no angle")
        if kind == "U1":
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (2, 2) or not is_unitary(m):
                raise DomainError("U1 matrix must be a 2x2 unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise DomainError(f"{kind} takes no matrix")

    @property
    def is_single_qubit(self) -> bool:
        return self.kind != "CNOT"

    def unitary2(self) -> np.ndarray:
        """The 2x2 matrix of a single-qubit gate."""
        if self.kind == "H":
            return H_MATRIX
        if self.kind == "RX":
            return rx(self.theta)
        if self.kind == "RY":
            return ry(self.theta)
        if self.kind == "RZ":
            return rz(self.theta)
        if self.kind == "U1":
            return self.matrix
        raise DomainError("CNOT has no 2x2 matrix")

    def __repr__(self):
        if self.kind == "CNOT":
            return f"CNOT({self.qubits[0]}->{self.qubits[1]})"
        if self.kind in ROTATIONS:
            return f"{self.kind}({self.qubits[0]}, {self.theta:.6g})"
        return f"{self.kind}({self.qubits[0]})"


def H(q: int) -> Gate:
    return Gate("H", (q,))


def RX(q: int, theta: float) -> Gate:
    return Gate("RX", (q,), theta)


def RY(q: int, theta: float) -> Gate:
    return Gate("RY", (q,), theta)


def RZ(q: int, theta: float) -> Gate:
    return Gate("RZ", (q,), theta)


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def U1(q: int, matrix) -> Gate:
    return Gate("U1", (q,), matrix=matrix)


@dataclass(eq=False)
class Circuit:
    """An ordered gate list over ``n`` qubits, applied in list order."""

    n: int
    gates: list = field(default_factory=list)

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("a circuit needs at least one qubit")
        self.gates = list(self.gates)
        for g in self.gates:
            check_gate(g, self.n)

    def append(self, gate: Gate) -> "Circuit":
        check_gate(gate, self.n)
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise DomainError("cannot concatenate circuits of different width")
        return Circuit(self.n, self.gates + other.gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)


def check_gate(gate: Gate, n: int) -> None:
    if any(q >= n for q in gate.qubits):
        raise DomainError(f"{gate!r} uses a qubit index >= n={n}")


def basis_state(n: int, index: int) -> StateVector:
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0 <= index < 2**n:
        raise DomainError(f"basis index {index} out of range for n={n}")
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def haar_amplitudes(n: int, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Haar-random amplitudes: normalized complex Gaussian vectors."""
    dim = 2**n
    shape = (dim,) if count is None else (count, dim)
    z = rng.standard_normal(shape + (2,)).view(complex)[..., 0]
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def sample_haar_state(n: int, seed) -> StateVector:
    if n < 1:
        raise DomainError("n must be >= 1")
    return StateVector(n, haar_amplitudes(n, np.random.default_rng(seed)))


# -- batched kernels ---------------------------------------------------------
# A batch is an array of shape (B, 2**n); every row is a state.


def apply_single_batch(states: np.ndarray, n: int, q: int, matrix: np.ndarray) -> np.ndarray:
    b = states.shape[0]
    t = states.reshape(b, 2**q, 2, 2 ** (n - q - 1))
    out = np.einsum("ij,bajr->bair", matrix, t)
    return out.reshape(b, 2**n)


_CNOT_PERMS: dict = {}


def _cnot_perm(n: int, control: int, target: int) -> np.ndarray:
    key = (n, control, target)
    perm = _CNOT_PERMS.get(key)
    if perm is None:
        idx = np.arange(2**n)
        cbit = 1 << (n - 1 - control)
        tbit = 1 << (n - 1 - target)
        perm = np.where(idx & cbit, idx ^ tbit, idx)
        _CNOT_PERMS[key] = perm
    return perm


def apply_gate_batch(states: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    if gate.kind == "CNOT":
        return states[:, _cnot_perm(n, *gate.qubits)]
    return apply_single_batch(states, n, gate.qubits[0], gate.unitary2())


def apply_gates_batch(states: np.ndarray, n: int, gates: Sequence[Gate]) -> np.ndarray:
    out = np.array(states, dtype=complex)
    for g in gates:
        out = apply_gate_batch(out, n, g)
    return out


# -- public single-state API -------------------------------------------------


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    check_gate(gate, state.n)
    out = apply_gate_batch(state.amplitudes[None, :], state.n, gate)
    return StateVector(state.n, out[0])


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.n != state.n:
        raise DomainError(f"circuit width {circuit.n} != state width {state.n}")
    out = apply_gates_batch(state.amplitudes[None, :], state.n, circuit.gates)
    return StateVector(state.n, out[0])


def check_dense(n: int, cap: int = DENSE_CAP) -> None:
    if n > cap:
        raise ResourceError(f"dense {2 ** n}x{2 ** n} matrix exceeds the cap n <= {cap}")


def circuit_unitary(circuit: Circuit, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix ``U_l ... U_1`` of the circuit."""
    check_dense(circuit.n, cap)
    dim = 2**circuit.n
    # row k of the batch evolves e_k, so the result holds U's columns as rows
    cols = apply_gates_batch(np.eye(dim, dtype=complex), circuit.n, circuit.gates)
    return cols.T.copy()


def embed_single(n: int, q: int, matrix: np.ndarray) -> np.ndarray:
    """Kronecker embedding of a 2x2 operator on qubit ``q``."""
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, matrix if k == q else I2)
    return out
