"""Random concept circuits and the two experiment drivers.

Every trial draws its randomness from ``SeedSequence([seed, *keys])`` so the
rows do not depend on worker count or scheduling; rows are sorted before
they are written.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.stats import unitary_group

from .ansatz import AnsatzShape, random_params
from .compiler import compile_to_ansatz, fixed_depth, verify_compilation
from .errors import DomainError, ParseError
from .learning import (
    ERMConfig,
    FinitePool,
    erm_gap_check,
    generate_dataset,
    hypothesis_unitary,
    per_sample_losses,
    train_erm,
    unitary_risk,
)
from .statevector import CNOT, DENSE_CAP, TWO_PI, Circuit, H, RX, U1

CONCEPT_KINDS = ("H", "RX", "U1", "CNOT")
TARGET_KEY = 0x7A56


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def random_concept_circuit(n: int, c: int, seed, max_gates: int | None = None) -> Circuit:
    """A random member of the concept class: between 1 and ``n**c`` gates.

    ``max_gates`` overrides the ``n**c`` cap.
    """
    if n < 2 or c < 1:
        raise DomainError("need n >= 2 and c >= 1")
    cap = n**c if max_gates is None else int(max_gates)
    if cap < 1:
        raise DomainError("gate cap must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    circ = Circuit(n)
    for _ in range(int(rng.integers(1, cap + 1))):
        kind = CONCEPT_KINDS[int(rng.integers(len(CONCEPT_KINDS)))]
        if kind == "CNOT":
            a, b = rng.choice(n, size=2, replace=False)
            circ.append(CNOT(int(a), int(b)))
            continue
        q = int(rng.integers(n))
        if kind == "H":
            circ.append(H(q))
        elif kind == "RX":
            circ.append(RX(q, rng.uniform(0.0, TWO_PI)))
        else:
            circ.append(U1(q, unitary_group.rvs(2, random_state=rng)))
    return circ


# -- configuration --------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    kind: str = "compile-sweep"
    n_values: list = field(default_factory=lambda: [2, 3, 4, 5])
    n: int = 2
    c: int = 1
    K: float = 12.0
    M: int = 2
    eps: float = 0.1
    delta: float = 0.05
    depth: int | None = None
    max_gates: int | None = 12
    m_schedule: list = field(default_factory=lambda: [8, 32, 128, 512])
    trials: int = 200
    seed: int = 0
    tol: float = 1e-9
    distribution: str = "haar"
    pool_size: int = 50
    n_eval: int = 4096
    random_hypotheses: int = 4
    train: bool = False
    train_sweeps: int = 10
    out: str | None = None
    workers: int = 1

    def validate(self):
        if self.kind not in ("compile-sweep", "gen-gap"):
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1 or self.workers < 1:
            raise DomainError("trials and workers must be >= 1")
        if self.c < 1 or self.K < 1 or self.M < 1:
            raise DomainError("need c >= 1, K >= 1, M >= 1")
        if self.kind == "compile-sweep":
            if not self.n_values or any(not 2 <= n <= DENSE_CAP for n in self.n_values):
                raise DomainError(f"n_values must lie in 2..{DENSE_CAP}")
        else:
            if not 2 <= self.n <= DENSE_CAP:
                raise DomainError(f"n must lie in 2..{DENSE_CAP}")
            ms = list(self.m_schedule)
            if not ms or ms[0] < 1 or any(b <= a for a, b in zip(ms, ms[1:])):
                raise DomainError("m_schedule must be positive and strictly increasing")
            if self.distribution not in ("haar", "finite"):
                raise DomainError("distribution must be 'haar' or 'finite'")
            if self.pool_size < 1 or self.n_eval < 2 or self.random_hypotheses < 0:
                raise DomainError("invalid pool_size, n_eval or random_hypotheses")
        return self

    @property
    def hypothesis_depth(self) -> int:
        return self.depth if self.depth is not None else fixed_depth(self.n, self.c, self.M)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ParseError(f"unknown config keys {sorted(unknown)}")
        return cls(**doc).validate()

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ParseError("config must be a JSON object")
        return cls.from_dict(doc)


# -- records -------------------------------------------------------------------------

COMPILE_COLUMNS = [
    "seed", "n", "trial", "gate_count", "normalized_length", "layers_used",
    "layer_bound_ok", "residual", "phase_error", "ok",
]
GAP_COLUMNS = [
    "seed", "m", "trial", "hypothesis", "empirical_risk", "risk", "risk_std_error",
    "abs_gap", "layers_used",
]
ERM_COLUMNS = ["seed", "m", "trial", "hypotheses", "erm_gap", "bound", "holds"]


@dataclass
class ExperimentRecord:
    kind: str
    columns: list
    rows: list = field(default_factory=list)
    erm_rows: list = field(default_factory=list)
    failed: bool = False
    notes: list = field(default_factory=list)


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(columns, rows, timestamp: bool = True) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
        columns = list(columns) + ["wall_time"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def write_record(record: ExperimentRecord, path, timestamp: bool = True) -> list:
    """Write the main CSV (and a sibling ``*_erm.csv`` if present)."""
    path = Path(path)
    path.write_text(to_csv(record.columns, record.rows, timestamp))
    written = [path]
    if record.erm_rows:
        erm_path = path.with_name(path.stem + "_erm.csv")
        erm_path.write_text(to_csv(ERM_COLUMNS, record.erm_rows, timestamp))
        written.append(erm_path)
    return written


def _map(fn, jobs, workers):
    workers = int(os.environ.get("UQCPAC_WORKERS", workers))
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# -- compile sweep -----------------------------------------------------------------------


def _compile_trial(job):
    cfg, n, trial = job
    t0 = time.perf_counter()
    rng = trial_rng(cfg.seed, n, trial)
    circ = random_concept_circuit(n, cfg.c, rng, cfg.max_gates)
    compiled = compile_to_ansatz(circ)
    check = verify_compilation(compiled, circ, cfg.tol)
    bound_ok = compiled.layers_used <= 2 * compiled.normalized_length
    return {
        "seed": cfg.seed,
        "n": n,
        "trial": trial,
        "gate_count": len(circ),
        "normalized_length": compiled.normalized_length,
        "layers_used": compiled.layers_used,
        "layer_bound_ok": bound_ok,
        "residual": check.residual,
        "phase_error": check.phase_error,
        "ok": check.ok and bound_ok,
        "wall_time": time.perf_counter() - t0,
    }


def experiment_compile_sweep(cfg: ExperimentConfig) -> ExperimentRecord:
    """Compile and verify random concept circuits for every ``n``."""
    cfg.validate()
    jobs = [(cfg, n, t) for n in cfg.n_values for t in range(cfg.trials)]
    rows = sorted(_map(_compile_trial, jobs, cfg.workers), key=lambda r: (r["n"], r["trial"]))
    rec = ExperimentRecord("compile-sweep", COMPILE_COLUMNS, rows)
    bad = [r for r in rows if not r["ok"]]
    if bad:
        rec.failed = True
        rec.notes.append(f"{len(bad)} of {len(rows)} trials failed verification")
    return rec


# -- generalization gap ----------------------------------------------------------------------


def experiment_target(cfg: ExperimentConfig) -> Circuit:
    """The fixed target circuit of a gen-gap run, drawn from the master seed."""
    return random_concept_circuit(cfg.n, cfg.c, trial_rng(cfg.seed, TARGET_KEY), None)


def _gap_trial(job):
    cfg, m, trial = job
    t0 = time.perf_counter()
    ss = np.random.SeedSequence([int(cfg.seed), int(m), int(trial)])
    s_data, s_eval, s_hyp = (int(s.generate_state(1)[0]) for s in ss.spawn(4)[1:])
    target = experiment_target(cfg)
    shape = AnsatzShape(cfg.n, cfg.hypothesis_depth)

    if cfg.distribution == "finite":
        # one fixed pool; only the draws from it vary with (m, trial)
        pool = FinitePool(target, cfg.pool_size, [cfg.seed, TARGET_KEY])
        data = pool.sample(m, np.random.default_rng(s_data))

        def risk_of(u):
            return pool.risk_of_unitary(u), 0.0
    else:
        data = generate_dataset(target, m, s_data)
        evals = generate_dataset(target, cfg.n_eval, s_eval)

        def risk_of(u):
            losses = per_sample_losses(u, evals)
            return float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(losses.shape[0]))

    hyps = []
    compiled = compile_to_ansatz(target)
    hyps.append(("compiled", compiled.unitary(), compiled.layers_used))
    hrng = np.random.default_rng(s_hyp)
    for k in range(cfg.random_hypotheses):
        hyps.append((f"random_{k}", hypothesis_unitary(shape, random_params(shape, hrng)), shape.depth))
    if cfg.train:
        res = train_erm(shape, data, ERMConfig(sweeps=cfg.train_sweeps, seed=s_hyp))
        hyps.append(("trained", hypothesis_unitary(shape, res.theta), shape.depth))

    rows, pairs = [], []
    for name, u, layers in hyps:
        emp = unitary_risk(u, data)
        risk, se = risk_of(u)
        pairs.append((emp, risk))
        rows.append({
            "seed": cfg.seed, "m": m, "trial": trial, "hypothesis": name, "empirical_risk": emp,
            "risk": risk, "risk_std_error": se, "abs_gap": abs(emp - risk),
            "layers_used": layers,
        })
    erm = None
    if cfg.distribution == "finite":
        chk = erm_gap_check(pairs)
        erm = {"seed": cfg.seed, "m": m, "trial": trial, "hypotheses": len(pairs), "erm_gap": chk.gap,
               "bound": chk.bound, "holds": chk.holds}
    wall = time.perf_counter() - t0
    for r in rows:
        r["wall_time"] = wall
    if erm is not None:
        erm["wall_time"] = wall
    return rows, erm


@dataclass(frozen=True)
class TrendPoint:
    m: int
    mean_gap: float
    std_error: float


def gap_trend(rows, prefix: str = "random_") -> list:
    """Per-m mean of ``abs_gap`` over hypotheses named ``prefix*``.

    The standard error is taken over trials (gaps averaged within a trial).
    """
    by_m: dict = {}
    for r in rows:
        if r["hypothesis"].startswith(prefix):
            by_m.setdefault(r["m"], {}).setdefault(r["trial"], []).append(r["abs_gap"])
    out = []
    for m in sorted(by_m):
        per_trial = np.array([np.mean(v) for v in by_m[m].values()])
        se = float(per_trial.std(ddof=1) / math.sqrt(len(per_trial))) if len(per_trial) > 1 else 0.0
        out.append(TrendPoint(m, float(per_trial.mean()), se))
    return out


def trend_is_nonincreasing(points, sigmas: float = 3.0) -> bool:
    return all(
        b.mean_gap <= a.mean_gap + sigmas * math.hypot(a.std_error, b.std_error)
        for a, b in zip(points, points[1:])
    )


def experiment_generalization_gap(cfg: ExperimentConfig) -> ExperimentRecord:
    """Measure ``|R_emp - R|`` for compiled, random and optionally trained hypotheses."""
    cfg.validate()
    jobs = [(cfg, m, t) for m in cfg.m_schedule for t in range(cfg.trials)]
    results = _map(_gap_trial, jobs, cfg.workers)
    rows = [r for rs, _ in results for r in rs]
    rows.sort(key=lambda r: (r["m"], r["trial"]))
    erm_rows = sorted((e for _, e in results if e is not None), key=lambda r: (r["m"], r["trial"]))
    rec = ExperimentRecord("gen-gap", GAP_COLUMNS, rows, erm_rows)
    if any(not e["holds"] for e in erm_rows):
        rec.failed = True
        rec.notes.append("ERM gap inequality violated")
    if cfg.random_hypotheses > 0 and cfg.trials > 1:
        trend = gap_trend(rows)
        rec.notes.append(
            "mean |R_emp - R| by m: "
            + ", ".join(f"{p.m}: {p.mean_gap:.5f} +/- {p.std_error:.5f}" for p in trend)
        )
        if not trend_is_nonincreasing(trend):
            rec.failed = True
            rec.notes.append("gap trend is not non-increasing within 3 sigma")
    return rec


def run_experiment(cfg: ExperimentConfig) -> ExperimentRecord:
    if cfg.kind == "compile-sweep":
        return experiment_compile_sweep(cfg)
    return experiment_generalization_gap(cfg)
