import pytest

from qsched import parse_circuit
from qsched.generate import parse_mix, random_circuit


def test_deterministic(s17):
    a = random_circuit(10, s17, qubits=5, seed=1).to_text()
    assert a == random_circuit(10, s17, qubits=5, seed=1).to_text()
    assert a != random_circuit(10, s17, qubits=5, seed=2).to_text()


def test_mix_classes_present(s17):
    c = random_circuit(100, s17, mix=parse_mix("x:0.5,measure:0.5"), seed=3)
    assert {g.opcode for g in c.gates} == {"x", "measure"}


def test_zero_gates_round_trip(s17):
    c = random_circuit(0, s17, seed=0)
    assert parse_circuit(c.to_text()).gates == ()


def test_qubits_respected(s17):
    c = random_circuit(200, s17, qubits=4, seed=0)
    assert {q for g in c.gates for q in g.operands} <= set(s17.qubits[:4])


def test_too_many_qubits(s17):
    with pytest.raises(ValueError):
        random_circuit(5, s17, qubits=18)


def test_bad_mix():
    with pytest.raises(ValueError):
        parse_mix("x=1")
