import json

import numpy as np
import pytest

from uqcpac.compiler import compile_to_ansatz
from uqcpac.errors import ParseError
from uqcpac.experiments import random_concept_circuit
from uqcpac.io import (
    circuit_to_dict, dumps_dataset, loads_dataset, params_from_dict, params_to_dict,
    parse_circuit, read_circuit, read_dataset, serialize_circuit, write_circuit, write_dataset,
)
from uqcpac.learning import generate_dataset
from uqcpac.statevector import CNOT, RY, RZ, Circuit, H, circuit_unitary


def test_parse_examples():
    c = parse_circuit('{"n":1,"gates":[{"type":"H","q":0}]}')
    assert c.n == 1 and len(c) == 1 and c.gates[0].kind == "H"
    with pytest.raises(ParseError):
        parse_circuit('{"n":2,"gates":[{"type":"CNOT","control":0,"target":0}]}')


@pytest.mark.parametrize("doc,field", [
    ('{"n":2,"gates":[{"type":"H","q":2}]}', "$.gates[0].q"),
    ('{"n":2,"gates":[{"type":"RX","q":0}]}', "$.gates[0].theta"),
    ('{"n":2,"gates":[{"type":"XX","q":0}]}', "$.gates[0].type"),
    ('{"gates":[]}', "$.n"),
    ('{"n":2,"gates":[{"type":"U1","q":0,"matrix":[[[1,0],[1,0]],[[0,0],[1,0]]]}]}', "$.gates[0]"),
    ('{"n":2,"gates":[{"type":"U1","q":0,"matrix":[[1,0],[0,1]]}]}', "$.gates[0].matrix[0][0]"),
])
def test_parse_errors_name_field(doc, field):
    with pytest.raises(ParseError) as info:
        parse_circuit(doc)
    assert field in str(info.value)


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as info:
        parse_circuit('{"n": 2,\n "gates": [}')
    assert "line 2" in str(info.value)


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        parse_circuit("[]")


def test_roundtrip_random_circuits():
    for seed in range(100):
        c = random_concept_circuit(3, 2, seed)
        c.gates.append(RY(1, 0.25 * seed))
        c.gates.append(RZ(2, 0.1 + seed))
        text = serialize_circuit(c)
        back = parse_circuit(text)
        assert serialize_circuit(back) == text
        assert np.array_equal(circuit_unitary(back), circuit_unitary(c))


def test_circuit_file_roundtrip(tmp_path):
    c = Circuit(2, [H(0), CNOT(1, 0)])
    write_circuit(c, tmp_path / "c.json")
    assert circuit_to_dict(read_circuit(tmp_path / "c.json")) == circuit_to_dict(c)


def test_dataset_roundtrip_bit_exact(tmp_path):
    data = generate_dataset(random_concept_circuit(2, 1, 4), 25, 8)
    write_dataset(data, tmp_path / "d.txt")
    back = read_dataset(tmp_path / "d.txt")
    assert back.n == 2 and back.m == 25
    assert np.array_equal(back.xs, data.xs) and np.array_equal(back.ys, data.ys)
    assert dumps_dataset(back) == dumps_dataset(data)


@pytest.mark.parametrize("text", ["", "2\n", "1,2\n1,0,0,0,1,0,0,0\n", "1,1\n1,0,0\n", "1,1\n1,0,a,0,1,0,0,0\n"])
def test_dataset_parse_errors(text):
    with pytest.raises(ParseError):
        loads_dataset(text)


def test_params_roundtrip():
    comp = compile_to_ansatz(Circuit(3, [H(2), CNOT(2, 1)]))
    doc = json.loads(json.dumps(params_to_dict(comp)))
    back = params_from_dict(doc)
    assert back.shape == comp.shape and back.layers_used == comp.layers_used
    assert np.array_equal(back.theta, comp.theta)
    assert back.global_phase == comp.global_phase

    doc.pop("global_phase")
    assert params_from_dict(doc).global_phase is None
    doc["theta"] = doc["theta"][:-1]
    with pytest.raises(ParseError):
        params_from_dict(doc)
