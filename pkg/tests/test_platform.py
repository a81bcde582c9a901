import json

import pytest

from qsched.circuit import Gate
from qsched.platform import (PlatformError, StackingRule, default_platform, from_dict,
                             instruments_for, parse_platform, to_dict)


def test_resources_excerpt(data_dir):
    p = parse_platform((data_dir / "s17_resources_excerpt.txt").read_text())
    qwgs = p.instrument_type("qwgs")
    assert qwgs.count == 3
    assert qwgs.connection_map == {
        0: frozenset({2, 3, 4, 14, 15, 16}),
        1: frozenset({8, 9, 10}),
        2: frozenset({1, 5, 6, 7, 11, 12, 13, 17}),
    }
    assert p.instrument_type("meas_units").count == 3
    assert p.qubit_base == 1 and p.qubits == list(range(1, 18))


def test_count_mismatch():
    cfg = {"resources": {"qubits": {"count": 4},
                         "qwgs": {"count": 3, "connection_map": {"0": [0], "1": [1]}}}}
    with pytest.raises(PlatformError):
        from_dict(cfg)


def test_minimal_config():
    p = from_dict({"resources": {"qubits": {"count": 1},
                                 "qwgs": {"count": 1, "connection_map": {"0": [0]}}}})
    assert p.qubit_count == 1 and p.instances() == [("qwgs", 0)]


@pytest.mark.parametrize("maps", [{"0": [0, 1], "1": [1]}, {"0": [0], "1": [9]}])
def test_bad_maps(maps):
    with pytest.raises(PlatformError):
        from_dict({"resources": {"qubits": {"count": 3},
                                 "qwgs": {"count": 2, "connection_map": maps}}})


def test_instruments_for(s17):
    assert instruments_for(Gate(0, "x", (2,)), s17) == {("qwgs", 0)}
    assert instruments_for(Gate(0, "measure", (14,)), s17) == {("meas_units", 0)}
    assert instruments_for(Gate(0, "cnot", (1, 2)), s17) == frozenset()


def test_stacking_rules_and_capacity(s17):
    assert s17.stacking_rule(("qwgs", 0)) is StackingRule.SAME_GATE_SAME_START
    assert s17.stacking_rule(("meas_units", 0)) is StackingRule.SAME_START_ANY_GATE
    assert s17.capacity(("qwgs", 1)) == 3
    assert s17.capacity(("meas_units", 0)) == 2


def test_unknown_type_is_exclusive():
    p = from_dict({"resources": {"qubits": {"count": 2},
                                 "flux_dacs": {"count": 1, "connection_map": {"0": [0, 1]},
                                               "class": "flux"}}})
    assert p.stacking_rule(("flux_dacs", 0)) is StackingRule.EXCLUSIVE
    assert p.capacity(("flux_dacs", 0)) == 1


@pytest.mark.parametrize("ns,cycles", [(20, 1), (40, 2), (45, 3), (300, 15)])
def test_duration_rounding(ns, cycles):
    p = from_dict({"cycle_time_ns": 20, "resources": {"qubits": {"count": 1}},
                   "instructions": {"g": {"duration_ns": ns}}})
    assert p.duration_cycles("g") == cycles


def test_dict_round_trip(s17):
    again = from_dict(json.loads(json.dumps(to_dict(s17))))
    assert again.digest() == s17.digest()
    assert default_platform().digest() == s17.digest()


def test_invalid_json():
    with pytest.raises(PlatformError):
        parse_platform("{not json")
