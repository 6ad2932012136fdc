"""File formats: circuit JSON, ansatz-parameter JSON and the dataset text file.

Qubit labels in files are 0-based; file qubit 0 is the shared control qubit
of the ansatz. Complex numbers are ``[re, im]`` pairs and matrices are
row-major.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ansatz import AnsatzShape, as_params
from .compiler import CompiledAnsatz
from .errors import DomainError, ParseError
from .learning import Dataset
from .statevector import ROTATIONS, Circuit, Gate

# -- circuits ----------------------------------------------------------------------


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _int(obj, key, where):
    if key not in obj:
        raise ParseError("missing field", f"{where}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"expected an integer, got {v!r}", f"{where}.{key}")
    return v


def _float(obj, key, where):
    if key not in obj:
        raise ParseError("missing field", f"{where}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"expected a number, got {v!r}", f"{where}.{key}")
    return float(v)


def _complex(v, where):
    if (
        not isinstance(v, list)
        or len(v) != 2
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v)
    ):
        raise ParseError(f"expected [re, im], got {v!r}", where)
    return complex(float(v[0]), float(v[1]))


def _matrix(v, where):
    if not isinstance(v, list) or len(v) != 2 or any(not isinstance(r, list) or len(r) != 2 for r in v):
        raise ParseError("expected a 2x2 matrix of [re, im] pairs", where)
    return np.array(
        [[_complex(v[i][j], f"{where}[{i}][{j}]") for j in range(2)] for i in range(2)]
    )


def _parse_gate(obj, where, n) -> Gate:
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    kind = obj.get("type")
    if not isinstance(kind, str):
        raise ParseError("missing or non-string gate type", f"{where}.type")
    kind = kind.upper()
    try:
        if kind == "CNOT":
            c, t = _int(obj, "control", where), _int(obj, "target", where)
            for name, q in (("control", c), ("target", t)):
                if not 0 <= q < n:
                    raise ParseError(f"qubit {q} out of range for n={n}", f"{where}.{name}")
            return Gate("CNOT", (c, t))
        q = _int(obj, "q", where)
        if not 0 <= q < n:
            raise ParseError(f"qubit {q} out of range for n={n}", f"{where}.q")
        if kind == "H":
            return Gate("H", (q,))
        if kind in ROTATIONS:
            return Gate(kind, (q,), _float(obj, "theta", where))
        if kind == "U1":
            if "matrix" not in obj:
                raise ParseError("missing field", f"{where}.matrix")
            return Gate("U1", (q,), matrix=_matrix(obj["matrix"], f"{where}.matrix"))
    except DomainError as exc:
        raise ParseError(str(exc), where) from exc
    raise ParseError(f"unsupported gate type {obj.get('type')!r}", f"{where}.type")


def circuit_from_dict(doc) -> Circuit:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    n = _int(doc, "n", "$")
    if n < 1:
        raise ParseError("n must be >= 1", "$.n")
    gates = doc.get("gates")
    if not isinstance(gates, list):
        raise ParseError("expected a list", "$.gates")
    return Circuit(n, [_parse_gate(g, f"$.gates[{i}]", n) for i, g in enumerate(gates)])


def parse_circuit(text: str) -> Circuit:
    return circuit_from_dict(_loads(text))


def circuit_to_dict(circuit: Circuit) -> dict:
    gates = []
    for g in circuit.gates:
        if g.kind == "CNOT":
            gates.append({"type": "CNOT", "control": g.qubits[0], "target": g.qubits[1]})
        elif g.kind in ROTATIONS:
            gates.append({"type": g.kind, "q": g.qubits[0], "theta": g.theta})
        elif g.kind == "U1":
            m = g.matrix
            gates.append({
                "type": "U1",
                "q": g.qubits[0],
                "matrix": [[[float(m[i, j].real), float(m[i, j].imag)] for j in range(2)] for i in range(2)],
            })
        else:
            gates.append({"type": g.kind, "q": g.qubits[0]})
    return {"n": circuit.n, "gates": gates}


def serialize_circuit(circuit: Circuit) -> str:
    return json.dumps(circuit_to_dict(circuit))


def read_circuit(path) -> Circuit:
    return parse_circuit(Path(path).read_text())


def write_circuit(circuit: Circuit, path) -> None:
    Path(path).write_text(serialize_circuit(circuit) + "\n")


# -- ansatz parameters ---------------------------------------------------------------


def params_to_dict(compiled: CompiledAnsatz, **extra) -> dict:
    doc = {
        "n": compiled.shape.n,
        "depth": compiled.shape.depth,
        "theta": [float(t) for t in compiled.theta],
        "layers_used": compiled.layers_used,
        "global_phase": compiled.global_phase,
        "normalized_length": compiled.normalized_length,
    }
    doc.update(extra)
    return doc


def params_from_dict(doc) -> CompiledAnsatz:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    n, depth = _int(doc, "n", "$"), _int(doc, "depth", "$")
    theta = doc.get("theta")
    if not isinstance(theta, list):
        raise ParseError("expected a list of angles", "$.theta")
    try:
        shape = AnsatzShape(n, depth)
        values = as_params(theta, shape)
    except (DomainError, TypeError, ValueError) as exc:
        raise ParseError(str(exc), "$.theta") from exc
    phase = doc.get("global_phase")
    if phase is not None:
        phase = _float(doc, "global_phase", "$")
    layers = doc.get("layers_used")
    layers = depth if layers is None else _int(doc, "layers_used", "$")
    return CompiledAnsatz(shape, values, layers, phase, int(doc.get("normalized_length") or 0))


def read_params(path) -> CompiledAnsatz:
    return params_from_dict(_loads(Path(path).read_text()))


def write_params(compiled: CompiledAnsatz, path, **extra) -> None:
    Path(path).write_text(json.dumps(params_to_dict(compiled, **extra), indent=1) + "\n")


# -- datasets --------------------------------------------------------------------------


def _interleave(amps: np.ndarray) -> list:
    return [repr(float(v)) for v in np.column_stack([amps.real, amps.imag]).reshape(-1)]


def dumps_dataset(data: Dataset) -> str:
    lines = [f"{data.n},{data.m}"]
    for x, y in zip(data.xs, data.ys):
        lines.append(",".join(_interleave(x) + _interleave(y)))
    return "\n".join(lines) + "\n"


def loads_dataset(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty dataset file", "line 1")
    try:
        n, m = (int(v) for v in lines[0].split(","))
    except ValueError as exc:
        raise ParseError("header must be 'n,m'", "line 1") from exc
    if n < 1 or m < 0:
        raise ParseError("header values out of range", "line 1")
    if len(lines) - 1 != m:
        raise ParseError(f"header announces {m} pairs, found {len(lines) - 1}", "line 1")
    width = 2 * 2**n
    xs = np.empty((m, 2**n), dtype=complex)
    ys = np.empty((m, 2**n), dtype=complex)
    for i, ln in enumerate(lines[1:]):
        try:
            vals = np.array([float(v) for v in ln.split(",")])
        except ValueError as exc:
            raise ParseError("non-numeric value", f"line {i + 2}") from exc
        if vals.shape[0] != 2 * width:
            raise ParseError(f"expected {2 * width} values, got {vals.shape[0]}", f"line {i + 2}")
        xs[i] = vals[:width:2] + 1j * vals[1:width:2]
        ys[i] = vals[width::2] + 1j * vals[width + 1::2]
    return Dataset(n, xs, ys)


def write_dataset(data: Dataset, path) -> None:
    Path(path).write_text(dumps_dataset(data))


def read_dataset(path) -> Dataset:
    return loads_dataset(Path(path).read_text())
