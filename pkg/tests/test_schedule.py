import math

import pytest

from qsched import parse_circuit, schedule_qsdc
from qsched.circuit import build_depgraph
from qsched.schedule import (CompareReport, Schedule, ScheduleError, compute_metrics, geomean,
                             make_schedule, render_gantt, speedup, validate)


def sched(circuit, platform, starts):
    return make_schedule(build_depgraph(circuit, platform), circuit, starts, platform, "test")


def test_figure_3c_valid(running_example, s17):
    s = sched(running_example, s17, [0, 1, 0, 2])
    assert validate(s, build_depgraph(running_example, s17), s17) == []


def test_different_gates_same_cycle(s17):
    c = parse_circuit("x q2\ny q3")
    v = validate(sched(c, s17, [0, 0]), build_depgraph(c, s17), s17)
    assert len(v) == 1 and v[0].kind == "resource" and v[0].instrument == ("qwgs", 0)


def test_stack_with_different_starts(s17):
    c = parse_circuit("measure q2\nmeasure q5")
    v = validate(sched(c, s17, [0, 1]), build_depgraph(c, s17), s17)
    assert len(v) == 1 and v[0].cycle == 1


def test_dependency_violation(running_example, s17):
    v = validate(sched(running_example, s17, [0, 1, 0, 0]), build_depgraph(running_example, s17), s17)
    kinds = sorted(x.kind for x in v)
    assert "dependency" in kinds


def test_violations_collected_exhaustively(s17):
    c = parse_circuit("x q2\ny q3\nz q4\nx q8\ny q9")
    v = validate(sched(c, s17, [0, 0, 0, 0, 0]), build_depgraph(c, s17), s17)
    assert {x.instrument for x in v} == {("qwgs", 0), ("qwgs", 1)}


def test_capacity(s17):
    c = parse_circuit("x q2\nx q3\nx q4")
    dg = build_depgraph(c, s17)
    s = sched(c, s17, [0, 0, 0])
    assert validate(s, dg, s17) == []
    assert [x.kind for x in validate(s, dg, s17, {("qwgs", 0): 2})] == ["capacity"]


def test_wrong_platform_hash(running_example, s17):
    s = schedule_qsdc(running_example, s17)
    forged = Schedule.from_dict({**s.to_dict(), "platform_hash": "0" * 16})
    v = validate(forged, build_depgraph(running_example, s17), s17)
    assert [x.kind for x in v] == ["platform"]


def test_latency_ns(running_example, s17):
    s = schedule_qsdc(running_example, s17)
    assert s.latency_ns == s.latency_cycles * 20 == 60


def test_json_round_trip(s17):
    from qsched.generate import random_circuit

    s = schedule_qsdc(random_circuit(40, s17, seed=2), s17)
    again = Schedule.from_json(s.to_json())
    assert again == s
    d = s.to_dict()
    assert set(d) >= {"circuit", "platform_hash", "starts", "latency_cycles"}


def test_json_latency_mismatch_rejected(running_example, s17):
    d = schedule_qsdc(running_example, s17).to_dict()
    d["latency_cycles"] = 99
    with pytest.raises(ScheduleError):
        Schedule.from_dict(d)


def test_speedup_examples():
    assert round(speedup(809, 873), 2) == 1.08
    assert speedup(5, 5) == 1.0
    table2 = [1.08, 1.09, 1.04, 1.12, 1.04, 1.09, 0.96, 1.01, 1.03, 1.06]
    assert round(geomean(table2), 2) == 1.05
    assert round(sum(table2) / len(table2), 2) == 1.05


def test_compare_report(running_example, s17):
    from qsched import schedule_list

    results = {"re": {"qsdc": schedule_qsdc(running_example, s17),
                      "list": schedule_list(running_example, s17, stacking=False)}}
    rep = compute_metrics(results)
    assert rep.speedups("qsdc", "list") == {"re": 4 / 3}
    assert math.isclose(rep.geomean_speedup("qsdc", "list"), 4 / 3)
    text = rep.to_text("list")
    assert text.splitlines()[0].split()[:3] == ["Benchmark", "Algo", "Latency"]
    assert "1.33" in text
    assert rep.to_dict()["speedups"]["qsdc/list"] == {"re": 4 / 3}


def test_mixed_platforms_rejected(running_example, s17):
    a = schedule_qsdc(running_example, s17)
    b = Schedule.from_dict({**a.to_dict(), "platform_hash": "f" * 16})
    with pytest.raises(ScheduleError):
        compute_metrics({"a": {"qsdc": a}, "b": {"qsdc": b}})


def test_gantt_running_example(running_example, s17):
    text = render_gantt(schedule_qsdc(running_example, s17), s17)
    row = next(line for line in text.splitlines() if line.startswith("qwgs0"))
    assert row.split("|")[1].split() == ["[x:q2,q4]", "[y:q3]", "[z:q2]"]


def test_gantt_empty(s17):
    text = render_gantt(sched(parse_circuit("qubits 2"), s17, []), s17)
    assert text.splitlines()[0].startswith("cycle")
    assert all("[" not in line for line in text.splitlines())


def test_gantt_multicycle(s17):
    text = render_gantt(sched(parse_circuit("cnot q1 q2"), s17, [0]), s17)
    row = next(line for line in text.splitlines() if line.startswith("q1 "))
    assert row.split("|")[1].split() == ["cnot", "~"]
