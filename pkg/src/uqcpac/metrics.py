"""Distances between pure states and between unitaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .statevector import DENSE_CAP, check_dense


def _amps(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex).reshape(-1)


def _pair(s1, s2):
    a, b = _amps(s1), _amps(s2)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def fidelity(s1, s2) -> float:
    """``|<psi1|psi2>|``, clipped into [0, 1]."""
    a, b = _pair(s1, s2)
    return float(min(1.0, abs(np.vdot(a, b))))


def loss(s1, s2) -> float:
    """Trace distance of two pure states, ``sqrt(1 - F^2)``.

    Evaluated as the norm of the part of ``s2`` orthogonal to ``s1``, which
    equals ``sqrt(1 - F^2)`` for unit vectors but keeps full precision when
    the states nearly coincide.
    """
    a, b = _pair(s1, s2)
    return float(batch_loss(a[None, :], b[None, :])[0])


def batch_loss(ys: np.ndarray, outs: np.ndarray) -> np.ndarray:
    """Row-wise ``loss`` for two arrays of shape (m, 2**n)."""
    overlaps = np.einsum("ij,ij->i", ys.conj(), outs)
    perp = outs - overlaps[:, None] * ys
    return np.clip(np.linalg.norm(perp, axis=1), 0.0, 1.0)


def trace_distance_oracle(s1, s2, cap: int = DENSE_CAP) -> float:
    """Half the trace norm of the difference of the two projectors.

    Built from the density matrices and their singular values, independently
    of the fidelity formula used by :func:`loss`.
    """
    a, b = _pair(s1, s2)
    check_dense(int(round(np.log2(a.shape[0]))), cap)
    diff = np.outer(a, a.conj()) - np.outer(b, b.conj())
    return float(0.5 * np.linalg.svd(diff, compute_uv=False).sum())


def _square_pair(u1, u2):
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    if u1.ndim != 2 or u1.shape[0] != u1.shape[1] or u1.shape != u2.shape:
        raise DomainError(f"dimension mismatch: {u1.shape} vs {u2.shape}")
    return u1, u2


def op_norm_distance(u1, u2) -> float:
    """Spectral norm of ``U1 - U2``."""
    u1, u2 = _square_pair(u1, u2)
    return float(np.linalg.norm(u1 - u2, ord=2))


@dataclass(frozen=True)
class PhaseEquivalence:
    equivalent: bool
    phase: float
    residual: float

    def __bool__(self):
        return self.equivalent


def equal_up_to_phase(u1, u2, tol: float = 1e-9) -> PhaseEquivalence:
    """Test ``U2 == exp(i phase) U1``.

    The phase is read off the largest-magnitude diagonal entry of
    ``U1^dagger U2`` (lowest index on ties).
    """
    u1, u2 = _square_pair(u1, u2)
    w = u1.conj().T @ u2
    diag = np.diag(w)
    k = int(np.argmax(np.abs(diag)))
    phase = float(np.angle(diag[k]))
    residual = float(np.linalg.norm(w - np.exp(1j * phase) * np.eye(w.shape[0]), ord=2))
    return PhaseEquivalence(residual <= tol, phase, residual)
