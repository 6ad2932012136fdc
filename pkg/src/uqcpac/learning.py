"""PAC-learning testbench for the universal ansatz.

Inputs are drawn Haar-randomly and labelled by a target circuit. The loss is
the pure-state trace distance. Besides empirical and Monte-Carlo risks this
module holds a derivative-free ERM trainer, the parameter-grid rounding used
to build a finite hypothesis cover, and the sample-complexity calculator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzShape, as_params, build_ansatz, random_params
from .errors import DomainError
from .metrics import batch_loss
from .statevector import (
    TWO_PI,
    X_MATRIX,
    Circuit,
    StateVector,
    apply_gate_batch,
    apply_gates_batch,
    apply_single_batch,
    circuit_unitary,
    rx,
    sample_haar_state,
)

INT64_MAX = 2**63 - 1


# -- data --------------------------------------------------------------------


@dataclass(eq=False)
class Dataset:
    """Training pairs, stored as two (m, 2**n) amplitude arrays."""

    n: int
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        dim = 2**self.n
        self.xs = np.asarray(self.xs, dtype=complex).reshape(-1, dim)
        self.ys = np.asarray(self.ys, dtype=complex).reshape(-1, dim)
        if self.xs.shape != self.ys.shape:
            raise DomainError("inputs and labels differ in count")

    @property
    def m(self) -> int:
        return self.xs.shape[0]

    def __len__(self):
        return self.m

    @property
    def pairs(self) -> list:
        return [
            (StateVector(self.n, x), StateVector(self.n, y)) for x, y in zip(self.xs, self.ys)
        ]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.n, self.xs[idx], self.ys[idx])


def haar_inputs(n: int, count: int, seed) -> np.ndarray:
    """``count`` Haar states; state ``i`` is seeded by ``(seed, i)``."""
    dim = 2**n
    out = np.empty((count, dim), dtype=complex)
    for i in range(count):
        out[i] = sample_haar_state(n, [seed, i]).amplitudes
    return out


def generate_dataset(target: Circuit, m: int, seed) -> Dataset:
    if m < 0:
        raise DomainError("sample count must be >= 0")
    xs = haar_inputs(target.n, m, seed)
    ys = apply_gates_batch(xs, target.n, target.gates) if target.gates else xs.copy()
    return Dataset(target.n, xs, ys)


class FinitePool:
    """Uniform distribution over a fixed pool of labelled states.

    Risks under this distribution are exact averages over the pool.
    """

    def __init__(self, target: Circuit, size: int, seed):
        if size < 1:
            raise DomainError("pool size must be >= 1")
        self.data = generate_dataset(target, size, seed)

    @property
    def n(self) -> int:
        return self.data.n

    def __len__(self):
        return self.data.m

    def sample(self, m: int, rng: np.random.Generator) -> Dataset:
        return self.data.subset(rng.integers(0, self.data.m, size=m))

    def risk_of_unitary(self, unitary: np.ndarray) -> float:
        return unitary_risk(unitary, self.data)

    def risk(self, shape: AnsatzShape, theta) -> float:
        return empirical_risk(shape, theta, self.data)


# -- risks -------------------------------------------------------------------


def hypothesis_unitary(shape: AnsatzShape, theta) -> np.ndarray:
    return circuit_unitary(build_ansatz(shape, theta))


def per_sample_losses(unitary: np.ndarray, data: Dataset) -> np.ndarray:
    return batch_loss(data.ys, data.xs @ unitary.T)


def unitary_risk(unitary: np.ndarray, data: Dataset) -> float:
    if data.m == 0:
        raise DomainError("empty dataset")
    return float(np.mean(per_sample_losses(unitary, data)))


def _check_shape(shape: AnsatzShape, data: Dataset):
    if shape.n != data.n:
        raise DomainError(f"ansatz width {shape.n} != dataset width {data.n}")


def empirical_risk(shape: AnsatzShape, theta, data: Dataset) -> float:
    """Mean trace-distance loss of ``F(theta)`` over the dataset."""
    _check_shape(shape, data)
    if data.m == 0:
        raise DomainError("empirical risk of an empty dataset")
    return unitary_risk(hypothesis_unitary(shape, theta), data)


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    std_error: float
    samples_used: int


def estimate_risk(shape: AnsatzShape, theta, target: Circuit, n_eval: int, seed) -> RiskEstimate:
    """Monte-Carlo risk over fresh Haar inputs labelled by ``target``.

    Uses the same per-index input streams as :func:`generate_dataset`, so
    with equal seeds it averages exactly the summands of the empirical risk.
    """
    if n_eval < 2:
        raise DomainError("n_eval must be >= 2")
    data = generate_dataset(target, n_eval, seed)
    _check_shape(shape, data)
    losses = per_sample_losses(hypothesis_unitary(shape, theta), data)
    return RiskEstimate(
        float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(n_eval)), n_eval
    )


# -- ERM training --------------------------------------------------------------


@dataclass
class ERMConfig:
    """Coordinate descent with a golden-section line search per angle."""

    sweeps: int = 60
    restarts: int = 0
    seed: int = 0
    init: np.ndarray | None = None
    scan_points: int = 16
    golden_iters: int = 40
    tol: float = 1e-10
    min_gain: float = 1e-12

    def validate(self):
        if self.sweeps < 1:
            raise DomainError("sweeps must be positive")
        if self.restarts < 0 or self.scan_points < 3 or self.golden_iters < 1:
            raise DomainError("invalid optimizer settings")


@dataclass
class TrainResult:
    theta: np.ndarray
    risk: float
    history: list = field(default_factory=list)
    improving_steps: int = 0
    restart: int = 0


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _line_objective(coef):
    """Mean loss along one angle.

    Per sample, loss^2 = p + q cos(t) + r sin(t); see ``_coordinate_coeffs``.
    """
    p, q, r = coef

    def f(t):
        t = np.atleast_1d(t)
        sq = p[None, :] + q[None, :] * np.cos(t)[:, None] + r[None, :] * np.sin(t)[:, None]
        return np.sqrt(np.clip(sq, 0.0, None)).mean(axis=1)

    return f


def _coordinate_coeffs(u, v, n, q):
    """Loss^2 of ``<v| Rx_q(t) |u>`` as a sinusoid in t, per sample.

    With u_perp = u - <v|u> v and x_perp = X u - <v|X u> v the orthogonal
    remainder is cos(t/2) u_perp - i sin(t/2) x_perp.
    """
    xu = apply_single_batch(u, n, q, X_MATRIX)
    a = np.einsum("ij,ij->i", v.conj(), u)
    b = np.einsum("ij,ij->i", v.conj(), xu)
    up = u - a[:, None] * v
    xp = xu - b[:, None] * v
    A = np.einsum("ij,ij->i", up.conj(), up).real
    B = np.einsum("ij,ij->i", xp.conj(), xp).real
    C = np.einsum("ij,ij->i", up.conj(), xp).imag
    return (A + B) / 2.0, (A - B) / 2.0, C


def _line_search(f, current, cfg: ERMConfig):
    grid = np.linspace(0.0, TWO_PI, cfg.scan_points, endpoint=False)
    vals = f(grid)
    k = int(np.argmin(vals))
    h = TWO_PI / cfg.scan_points
    lo, hi = grid[k] - h, grid[k] + h
    x1, x2 = hi - _GOLD * (hi - lo), lo + _GOLD * (hi - lo)
    f1, f2 = f(x1)[0], f(x2)[0]
    for _ in range(cfg.golden_iters):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLD * (hi - lo)
            f1 = f(x1)[0]
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLD * (hi - lo)
            f2 = f(x2)[0]
    best, fbest = (x1, f1) if f1 <= f2 else (x2, f2)
    if vals[k] < fbest:
        best, fbest = grid[k], vals[k]
    return best % TWO_PI, float(fbest)


def _sweep(shape, theta, data, cfg):
    """One forward pass over all angles; returns the number of accepted moves."""
    n = shape.n
    gates = build_ansatz(shape, theta).gates
    rot_pos = [j for j, g in enumerate(gates) if g.kind == "RX"]
    # v_k = (gates after rotation k)^dagger y, filled by a backward pass
    v_after = [None] * len(rot_pos)
    v = data.ys.copy()
    k = len(rot_pos) - 1
    for j in range(len(gates) - 1, -1, -1):
        if k >= 0 and rot_pos[k] == j:
            v_after[k] = v
            k -= 1
        g = gates[j]
        if g.kind == "CNOT":
            v = apply_gate_batch(v, n, g)
        else:
            v = apply_single_batch(v, n, g.qubits[0], g.unitary2().conj().T)
    u = data.xs.copy()
    moves = 0
    k = 0
    for j, g in enumerate(gates):
        if g.kind == "RX":
            f = _line_objective(_coordinate_coeffs(u, v_after[k], n, g.qubits[0]))
            cur = float(f(theta[k])[0])
            cand, fc = _line_search(f, theta[k], cfg)
            if fc < cur - cfg.min_gain:
                theta[k] = cand
                moves += 1
            u = apply_single_batch(u, n, g.qubits[0], rx(theta[k]))
            k += 1
        else:
            u = apply_gate_batch(u, n, g)
    return moves


def _descend(shape, theta, data, cfg):
    theta = as_params(theta, shape)
    risk = empirical_risk(shape, theta, data)
    history = [risk]
    steps = 0
    for _ in range(cfg.sweeps):
        if risk <= cfg.tol:
            break
        moves = _sweep(shape, theta, data, cfg)
        steps += moves
        new = empirical_risk(shape, theta, data)
        risk = min(risk, new)
        history.append(risk)
        if moves == 0:
            break
    return TrainResult(theta, risk, history, steps)


def train_erm(shape: AnsatzShape, data: Dataset, config: ERMConfig | None = None) -> TrainResult:
    """Best-effort empirical risk minimizer over ``F``.

    Restart 0 starts from ``config.init`` (zeros if unset); further restarts
    start from uniform random angles seeded by ``(config.seed, restart)``.
    """
    cfg = config or ERMConfig()
    cfg.validate()
    _check_shape(shape, data)
    if data.m == 0:
        raise DomainError("cannot train on an empty dataset")
    best = None
    for r in range(cfg.restarts + 1):
        if r == 0:
            init = np.zeros(shape.num_params) if cfg.init is None else cfg.init
        else:
            init = random_params(shape, np.random.default_rng([cfg.seed, r]))
        res = _descend(shape, np.array(init, dtype=float), data, cfg)
        res.restart = r
        if best is None or res.risk < best.risk:
            best = res
        if best.risk <= cfg.tol:
            break
    return best


# -- discretization and sample complexity ----------------------------------------


def grid_spacing(eps: float, K: float, n: int, c: int) -> float:
    """Grid step ``eps / (6 K n^(c+1))`` of the finite hypothesis cover."""
    if eps <= 0 or K <= 0:
        raise DomainError("eps and K must be positive")
    return eps / (6.0 * K * float(n) ** (c + 1))


def round_to_grid(theta, e: float) -> np.ndarray:
    """Round every angle to the nearest point of {0, e, ..., N e}.

    ``N = floor(2 pi / e)``; ties go down. Angles in the last gap above
    ``N e`` go to 0 when 2 pi is nearer, which is exact up to the sign of
    that rotation.
    """
    if not e > 0:
        raise DomainError("grid spacing must be positive")
    theta = as_params(theta)
    N = math.floor(TWO_PI / e)
    k = np.ceil(theta / e - 0.5)
    k = np.clip(k, 0, N)
    out = k * e
    top = theta > N * e
    wrap = top & ((TWO_PI - theta) < (theta - N * e))
    out[wrap] = 0.0
    return out


@dataclass(frozen=True)
class ConceptClassParams:
    n: int
    c: int
    K: float = 12.0
    M: int = 2

    def __post_init__(self):
        if self.n < 2 or self.c < 1 or self.K < 1 or self.M < 1:
            raise DomainError("need n >= 2, c >= 1, K >= 1, M >= 1")

    @property
    def param_count(self) -> int:
        return 12 * (self.n - 1) * self.M * self.n**self.c

    @property
    def min_K(self) -> float:
        return self.param_count / self.n ** (self.c + 1)


@dataclass(frozen=True)
class ComplexityReport:
    eps: float
    delta: float
    e: float
    N: int
    param_count: int
    ln_hypothesis_count: float
    ln_nu: float
    nu: int
    saturated: bool


def sample_complexity(eps: float, delta: float, params: ConceptClassParams) -> ComplexityReport:
    """Sample bound ``ceil(18/eps^2 (ln|F'| + ln(2/delta)))`` for the grid cover.

    ``nu`` saturates at 2**63 - 1; ``ln_nu`` is always finite.
    """
    if not (0 < eps < 1 and 0 < delta < 1):
        raise DomainError("eps and delta must lie in (0, 1)")
    if params.K < params.min_K:
        raise DomainError(
            f"K={params.K} too small: the cover needs K >= l / n^(c+1) = {params.min_K:g}"
        )
    e = grid_spacing(eps, params.K, params.n, params.c)
    N = math.floor(TWO_PI / e)
    l = params.param_count
    ln_f = l * math.log(N + 1)
    inner = ln_f + math.log(2.0 / delta)
    ln_nu = math.log(18.0) - 2.0 * math.log(eps) + math.log(inner)
    if ln_nu < math.log(INT64_MAX):
        nu, saturated = min(math.ceil(18.0 / eps**2 * inner), INT64_MAX), False
    else:
        nu, saturated = INT64_MAX, True
    return ComplexityReport(eps, delta, e, N, l, ln_f, ln_nu, nu, saturated)


# -- ERM gap ---------------------------------------------------------------------


@dataclass(frozen=True)
class ErmGap:
    gap: float
    bound: float
    holds: bool
    erm_index: int
    risk_index: int


def erm_gap_check(risk_by_hypothesis) -> ErmGap:
    """Check ``R(h_erm) - R(h_best) <= 2 max |R_emp - R|`` over a finite class.

    Each entry is ``(empirical_risk, risk)``; ties pick the first index.
    """
    pairs = np.asarray(list(risk_by_hypothesis), dtype=float).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise DomainError("need at least one hypothesis")
    emp, true = pairs[:, 0], pairs[:, 1]
    i_hat = int(np.argmin(emp))
    i_best = int(np.argmin(true))
    gap = float(true[i_hat] - true[i_best])
    bound = float(2.0 * np.max(np.abs(emp - true)))
    return ErmGap(gap, bound, gap <= bound + 1e-12, i_hat, i_best)
