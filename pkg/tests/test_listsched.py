from qsched import parse_circuit, schedule_list, validate
from qsched.circuit import build_depgraph
from qsched.generate import random_circuit
from qsched.platform import from_dict
from qsched.qsdc import SchedulerOptions


def test_running_example(running_example, s17):
    on = schedule_list(running_example, s17)
    assert on.starts == (0, 1, 0, 2) and on.latency_cycles == 3
    assert schedule_list(running_example, s17, stacking=False).latency_cycles == 4
    off = SchedulerOptions(qsdc_enabled=False)
    assert schedule_list(running_example, s17, off).latency_cycles == 4


def test_empty(s17):
    assert schedule_list(parse_circuit("qubits 2"), s17).latency_cycles == 0


def test_valid_and_above_asap(s17):
    for seed in range(20):
        c = random_circuit(100, s17, seed=seed)
        dg = build_depgraph(c, s17)
        for stacking in (True, False):
            s = schedule_list(c, s17, stacking=stacking)
            caps = None if stacking else {k: 1 for k in s17.instances()}
            assert validate(s, dg, s17, caps) == []
            assert s.latency_cycles >= dg.makespan()


def test_no_conflicts_gives_asap():
    p = from_dict({"resources": {"qubits": {"count": 3},
                                 "qwgs": {"count": 3,
                                          "connection_map": {"0": [0], "1": [1], "2": [2]}}},
                   "instructions": {"x": {"duration_ns": 20, "class": "mw"}}})
    c = parse_circuit("x q0\nx q1\nx q2\nx q0\nx q1")
    assert schedule_list(c, p, stacking=False).latency_cycles == build_depgraph(c, p).makespan()
