"""Exact compilation of single-qubit + CNOT circuits into the universal ansatz.

Every single-qubit gate costs one layer and every CNOT whose control is qubit
0 costs two. Other CNOTs are first rewritten with Hadamards and control-0
CNOTs. The compiler keeps an exact phase ledger, so that

    source_unitary == exp(1j * global_phase) * ansatz_unitary(shape, theta)

holds as a matrix identity, not only up to phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzShape, as_params, ansatz_unitary, param_index
from .errors import CapacityError, DomainError
from .metrics import equal_up_to_phase
from .statevector import (
    CNOT,
    DENSE_CAP,
    U1,
    H_MATRIX,
    Circuit,
    check_dense,
    circuit_unitary,
    is_unitary,
    reduce_angle,
    rx,
    ry,
    rz,
)

# Pinning delta = 0 costs up to 2 sin(gamma/2) of reconstruction error, so
# only inputs this close to a pole are pinned.
POLE_TOL = 1e-13

# CNOT(0 -> t) == exp(-i pi/4) (W4 (x) W3) CNOT (I (x) W2) CNOT (I (x) W1)
W1 = rz(np.pi / 2)
W2 = ry(np.pi / 2)
W3 = rz(-np.pi / 2) @ ry(-np.pi / 2)
W4 = rz(-np.pi / 2)
CNOT_PHASE = -np.pi / 4


def wrap_phase(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    r = -((-phi + np.pi) % (2 * np.pi)) + np.pi
    return float(r)


@dataclass(frozen=True)
class EulerZX:
    """``exp(i alpha) Rz(beta) Rx(gamma) Rz(delta)``."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def matrix(self) -> np.ndarray:
        return np.exp(1j * self.alpha) * (rz(self.beta) @ rx(self.gamma) @ rz(self.delta))


def euler_zx(v) -> EulerZX:
    """Z-X-Z Euler angles of a 2x2 unitary.

    ``beta`` and ``delta`` land in [0, 2pi), ``gamma`` in [0, pi] and the
    phase ``alpha`` in (-pi, pi]. At the poles (diagonal or antidiagonal
    input) ``delta`` is pinned to 0.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (2, 2) or not is_unitary(v):
        raise DomainError("euler_zx needs a 2x2 unitary")
    gamma = 2.0 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    w = v * np.exp(-0.5j * np.angle(np.linalg.det(v)))
    # w = [[c e^{-i(b+d)/2}, .], [-i s e^{i(b-d)/2}, .]] up to an overall sign
    if np.sin(gamma / 2) <= POLE_TOL:
        beta, delta = -2.0 * np.angle(w[0, 0]), 0.0
    elif np.cos(gamma / 2) <= POLE_TOL:
        beta, delta = 2.0 * np.angle(1j * w[1, 0]), 0.0
    else:
        total = -2.0 * np.angle(w[0, 0])
        diff = 2.0 * np.angle(1j * w[1, 0])
        beta, delta = 0.5 * (total + diff), 0.5 * (total - diff)
    beta, delta = reduce_angle(beta), reduce_angle(delta)
    m = rz(beta) @ rx(gamma) @ rz(delta)
    alpha = wrap_phase(np.angle(np.trace(m.conj().T @ v)))
    return EulerZX(alpha, beta, float(gamma), delta)


@dataclass(frozen=True, eq=False)
class SingleQubit:
    qubit: int
    matrix: np.ndarray

    def __repr__(self):
        return f"SingleQubit({self.qubit})"


@dataclass(frozen=True)
class CnotFromFirst:
    target: int


def _cnot_to_first(control: int) -> list:
    """CNOT(control -> 0) as Hadamards around CNOT(0 -> control)."""
    return [
        SingleQubit(0, H_MATRIX), SingleQubit(control, H_MATRIX),
        CnotFromFirst(control),
        SingleQubit(0, H_MATRIX), SingleQubit(control, H_MATRIX),
    ]


def normalize_circuit(circuit: Circuit) -> list:
    """Rewrite a circuit into single-qubit gates and CNOTs controlled by qubit 0.

    The product of the output equals the input unitary exactly.
    """
    out = []
    for g in circuit.gates:
        if g.is_single_qubit:
            out.append(SingleQubit(g.qubits[0], g.unitary2()))
            continue
        if g.kind != "CNOT":
            raise DomainError(f"unsupported gate {g!r}")
        c, t = g.qubits
        if c == 0:
            out.append(CnotFromFirst(t))
        elif t == 0:
            out += _cnot_to_first(c)
        else:
            # CNOT(c -> t) = (CNOT(0 -> t) CNOT(c -> 0))^2, and the reversed
            # time order gives the same permutation
            for _ in range(2):
                out.append(CnotFromFirst(t))
                out += _cnot_to_first(c)
    return out


def normalized_unitary(gates: list, n: int) -> np.ndarray:
    """Dense product of a normalized gate list (for checks)."""
    circ = Circuit(n)
    for g in gates:
        if isinstance(g, SingleQubit):
            circ.append(U1(g.qubit, g.matrix))
        else:
            circ.append(CNOT(0, g.target))
    return circuit_unitary(circ)


@dataclass
class LayerAssignment:
    layers: list
    phase: float


def _place(layer: np.ndarray, shape: AnsatzShape, target: int, sub_block: int, e: EulerZX):
    base = param_index(shape, 0, target, sub_block, 0)
    layer[base:base + 3] = (e.delta, e.gamma, e.beta)


def layers_for_gate(gate, n: int) -> LayerAssignment:
    """Ansatz layers realizing one normalized gate, plus the phase they owe."""
    shape = AnsatzShape(n, 1)
    if isinstance(gate, SingleQubit):
        if not 0 <= gate.qubit < n:
            raise DomainError(f"qubit {gate.qubit} out of range")
        e = euler_zx(gate.matrix)
        layer = np.zeros(shape.num_params)
        if gate.qubit == 0:
            _place(layer, shape, 1, 0, e)
        else:
            _place(layer, shape, gate.qubit, 1, e)
        return LayerAssignment([layer], e.alpha)
    if isinstance(gate, CnotFromFirst):
        t = gate.target
        if not 1 <= t < n:
            raise DomainError(f"CNOT target {t} out of range")
        ws = [euler_zx(w) for w in (W1, W2, W3, W4)]
        first, second = np.zeros(shape.num_params), np.zeros(shape.num_params)
        _place(first, shape, t, 1, ws[0])
        _place(first, shape, t, 3, ws[1])
        _place(second, shape, t, 1, ws[2])
        _place(second, shape, t, 0, ws[3])
        return LayerAssignment([first, second], CNOT_PHASE + sum(e.alpha for e in ws))
    raise DomainError(f"not a normalized gate: {gate!r}")


@dataclass
class CompiledAnsatz:
    shape: AnsatzShape
    theta: np.ndarray
    layers_used: int
    global_phase: float | None
    normalized_length: int = field(default=0)

    def unitary(self, cap: int = DENSE_CAP) -> np.ndarray:
        return ansatz_unitary(self.shape, self.theta, cap)


def fixed_depth(n: int, c: int, M: int = 2) -> int:
    """The depth ``M * n**c`` of the full hypothesis circuit."""
    if n < 2 or c < 1 or M < 1:
        raise DomainError("need n >= 2, c >= 1, M >= 1")
    return M * n**c


def compile_to_ansatz(circuit: Circuit, depth_budget: int | None = None) -> CompiledAnsatz:
    """Compile ``circuit`` exactly into ``F(theta)``.

    Without a budget the depth is the number of layers actually used (at
    least one). Unused budget layers are left at zero, i.e. identity.
    """
    n = circuit.n
    if n < 2:
        raise DomainError("compilation targets the ansatz, which needs n >= 2")
    normalized = normalize_circuit(circuit)
    layers, phase = [], 0.0
    for g in normalized:
        assigned = layers_for_gate(g, n)
        layers += assigned.layers
        phase += assigned.phase
    used = len(layers)
    if depth_budget is None:
        depth = max(used, 1)
    else:
        depth = int(depth_budget)
        if depth < 1:
            raise DomainError("depth budget must be >= 1")
        if used > depth:
            raise CapacityError(
                f"circuit needs {used} layers but the budget is {depth}", required_layers=used
            )
    shape = AnsatzShape(n, depth)
    theta = np.zeros(shape.num_params)
    if layers:
        theta[: used * shape.params_per_layer] = np.concatenate(layers)
    return CompiledAnsatz(shape, as_params(theta, shape), used, wrap_phase(phase), len(normalized))


@dataclass(frozen=True)
class Verification:
    ok: bool
    residual: float
    phase: float
    phase_error: float


PHASE_TOL = 1e-8


def verify_compilation(compiled: CompiledAnsatz, source: Circuit, tol: float = 1e-9) -> Verification:
    """Check ``source == exp(i phase) F(theta)`` and that ``phase`` matches the ledger."""
    if compiled.shape.n != source.n:
        raise DomainError("compiled ansatz and source circuit differ in width")
    check_dense(source.n)
    eq = equal_up_to_phase(compiled.unitary(), circuit_unitary(source), tol)
    if compiled.global_phase is None:
        # trained parameters carry no phase ledger
        return Verification(eq.equivalent, eq.residual, eq.phase, 0.0)
    phase_error = abs(wrap_phase(eq.phase - compiled.global_phase))
    return Verification(
        eq.equivalent and phase_error <= PHASE_TOL, eq.residual, eq.phase, phase_error
    )
