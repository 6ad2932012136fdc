"""The fixed-pattern universal ansatz ``F = (B_n ... B_2)^D``.

Layout of the flat parameter vector (0-based qubits, qubit 0 is the shared
control of every level-2 block)::

    flat = (((layer * (n - 1) + (target - 1)) * 4 + sub_block) * 3 + slot)

``target`` runs over 1..n-1. Sub-blocks are in time order: 0 = first level-1
block on qubit 0, 1 = first on ``target``, 2 = second on qubit 0, 3 = second
on ``target``. Slots follow application order inside a level-1 block:
0 = delta, 1 = gamma, 2 = beta.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .statevector import CNOT, DENSE_CAP, TWO_PI, Circuit, H, RX, circuit_unitary

PARAMS_PER_BLOCK = 12
GATES_PER_LEVEL1 = 7
SLOT = {"delta": 0, "gamma": 1, "beta": 2}


@dataclass(frozen=True)
class AnsatzShape:
    n: int
    depth: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("the ansatz needs n >= 2")
        if self.depth < 1:
            raise DomainError("the ansatz needs depth >= 1")

    @property
    def params_per_layer(self) -> int:
        return PARAMS_PER_BLOCK * (self.n - 1)

    @property
    def num_params(self) -> int:
        return self.params_per_layer * self.depth


def param_index(shape: AnsatzShape, layer: int, target: int, sub_block: int, angle) -> int:
    """Flat position of one angle; ``angle`` is a slot number or a name."""
    slot = SLOT[angle] if isinstance(angle, str) else int(angle)
    if not 0 <= layer < shape.depth:
        raise DomainError(f"layer {layer} out of range")
    if not 1 <= target < shape.n:
        raise DomainError(f"block target {target} out of range 1..{shape.n - 1}")
    if not 0 <= sub_block < 4 or not 0 <= slot < 3:
        raise DomainError("sub_block must be 0..3 and slot 0..2")
    return (((layer * (shape.n - 1) + (target - 1)) * 4 + sub_block) * 3) + slot


def as_params(values, shape: AnsatzShape | None = None) -> np.ndarray:
    """Validate a parameter vector and reduce it into [0, 2pi)."""
    theta = np.asarray(values, dtype=float).reshape(-1)
    if shape is not None and theta.shape[0] != shape.num_params:
        raise DomainError(
            f"shape (n={shape.n}, depth={shape.depth}) needs {shape.num_params} "
            f"parameters, got {theta.shape[0]}"
        )
    if not np.all(np.isfinite(theta)):
        raise DomainError("parameters must be finite")
    theta = np.mod(theta, TWO_PI)
    theta[theta >= TWO_PI] = 0.0
    return theta


def expand_level1(qubit: int, beta: float, gamma: float, delta: float) -> list:
    """``H Rx(beta) H Rx(gamma) H Rx(delta) H`` as a time-ordered gate list.

    Its unitary is ``Rz(beta) Rx(gamma) Rz(delta)``.
    """
    return [
        H(qubit), RX(qubit, delta),
        H(qubit), RX(qubit, gamma),
        H(qubit), RX(qubit, beta),
        H(qubit),
    ]


def _level1_from_slice(qubit, angles):
    delta, gamma, beta = angles
    return expand_level1(qubit, beta, gamma, delta)


def expand_layer(n: int, layer_params) -> list:
    """One layer ``B_n ... B_2``; ``B_2`` (target qubit 1) comes first in time."""
    p = np.asarray(layer_params, dtype=float).reshape(-1)
    if p.shape[0] != PARAMS_PER_BLOCK * (n - 1):
        raise DomainError(f"a layer on n={n} qubits needs {12 * (n - 1)} parameters, got {p.shape[0]}")
    gates = []
    for target in range(1, n):
        blk = p[(target - 1) * 12:target * 12].reshape(4, 3)
        gates += _level1_from_slice(0, blk[0])
        gates += _level1_from_slice(target, blk[1])
        gates.append(CNOT(0, target))
        gates += _level1_from_slice(0, blk[2])
        gates += _level1_from_slice(target, blk[3])
        gates.append(CNOT(0, target))
    return gates


def build_ansatz(shape: AnsatzShape, theta) -> Circuit:
    theta = as_params(theta, shape)
    k = shape.params_per_layer
    gates = []
    for layer in range(shape.depth):
        gates += expand_layer(shape.n, theta[layer * k:(layer + 1) * k])
    return Circuit(shape.n, gates)


def ansatz_unitary(shape: AnsatzShape, theta, cap: int = DENSE_CAP) -> np.ndarray:
    return circuit_unitary(build_ansatz(shape, theta), cap)


def zero_params(shape: AnsatzShape) -> np.ndarray:
    return np.zeros(shape.num_params)


def random_params(shape: AnsatzShape, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, TWO_PI, shape.num_params)
