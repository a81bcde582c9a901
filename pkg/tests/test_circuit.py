import pytest

from qsched.circuit import Circuit, CircuitError, Gate, build_depgraph, parse_circuit


def test_parse_running_example(running_example):
    c = running_example
    assert c.qubit_count == 5
    assert [(g.opcode, g.operands) for g in c.gates] == [
        ("x", (2,)), ("y", (3,)), ("x", (4,)), ("z", (2,))
    ]
    assert [g.id for g in c.gates] == [0, 1, 2, 3]


def test_parse_header_only():
    c = parse_circuit("qubits 3\n")
    assert c.qubit_count == 3 and c.gates == ()


def test_duplicate_operand_rejected():
    with pytest.raises(CircuitError):
        parse_circuit("cnot q0 q0")


@pytest.mark.parametrize("text", ["x", "x qq", "qubits 2\nx q5", "x q1\nqubits 3", "9x q0", ""])
def test_malformed(text):
    with pytest.raises(CircuitError):
        parse_circuit(text)


def test_error_names_line():
    with pytest.raises(CircuitError, match="line 2"):
        parse_circuit("x q0\ny q0 q0\n")


def test_comments_and_commas():
    c = parse_circuit("# header\ncnot q0, q1  # trailing\n\nmeasure q1\n")
    assert [(g.opcode, g.operands) for g in c.gates] == [("cnot", (0, 1)), ("measure", (1,))]


def test_json_format():
    c = parse_circuit('{"qubits": 4, "gates": [{"op": "x", "qubits": [3]}]}')
    assert c.qubit_count == 4 and c.gates[0].operands == (3,)


def test_text_round_trip(running_example):
    again = parse_circuit(running_example.to_text())
    assert again == running_example


def test_gate_ids_must_match_positions():
    with pytest.raises(CircuitError):
        Circuit(3, (Gate(1, "x", (0,)),))


def test_depgraph_running_example(running_example):
    dg = build_depgraph(running_example)
    assert dg.edges == ((0, 3, 1),)
    assert dg.preds[1] == () and dg.preds[2] == ()


def test_depgraph_single_gate():
    assert build_depgraph(parse_circuit("x q0")).edges == ()


def test_depgraph_chain():
    dg = build_depgraph(parse_circuit("x q0\ny q0\nz q0"))
    assert dg.edges == ((0, 1, 1), (1, 2, 1))
    assert dg.asap() == [0, 1, 2]
    assert dg.makespan() == 3


def test_two_qubit_gate_depends_on_both(s17):
    dg = build_depgraph(parse_circuit("x q1\nmeasure q2\ncnot q1 q2\nx q2"), s17)
    assert set(dg.edges) == {(0, 2, 1), (1, 2, 15), (2, 3, 2)}
    assert [g.duration_cycles for g in dg.gates] == [1, 15, 2, 1]


def test_depgraph_rejects_qubit_outside_platform(s17):
    with pytest.raises(CircuitError):
        build_depgraph(parse_circuit("x q18"), s17)


def test_same_qubit_program_order_preserved(s17):
    from qsched.generate import random_circuit

    c = random_circuit(80, s17, seed=5)
    dg = build_depgraph(c, s17)
    asap = dg.asap()
    by_qubit = {}
    for g in c.gates:
        for q in g.operands:
            by_qubit.setdefault(q, []).append(g.id)
    for gids in by_qubit.values():
        for a, b in zip(gids, gids[1:]):
            assert asap[b] >= asap[a] + dg.duration(a)
