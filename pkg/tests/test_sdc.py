import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsched.circuit import build_depgraph
from qsched.sdc import ConstraintSystem, HorizonTooSmall, InfeasibleSystem


def running_system(running_example):
    dg = build_depgraph(running_example)
    sys = ConstraintSystem(len(dg), [1] * len(dg))
    for a, b, w in dg.edges:
        sys.add_dependency(a, b, w)
    return sys


def test_dependency_gap():
    sys = ConstraintSystem(2)
    sys.add_dependency(0, 1, 1)
    assert sys.solve_asap().start_cycle == (0, 1)


def test_multicycle_dependency():
    sys = ConstraintSystem(2, [3, 1])
    sys.add_dependency(0, 1, 3)
    s = sys.solve_asap()
    assert s[1] - s[0] >= 3


def test_mutual_dependency_infeasible():
    sys = ConstraintSystem(2)
    sys.add(0, 1, -1)
    sys.add(1, 0, -1)
    with pytest.raises(InfeasibleSystem) as info:
        sys.solve_asap()
    assert sum(c.bound for c in info.value.cycle) == -2


@pytest.mark.parametrize("lat", [0, 2, -3])
def test_pin(lat):
    sys = ConstraintSystem(2)
    sys.pin_relative(0, 1, lat)
    s = sys.solve_asap()
    assert s[1] - s[0] == lat and min(s.start_cycle) == 0


def test_pin_conflicting_with_dependency():
    sys = ConstraintSystem(2, [2, 1])
    sys.add_dependency(0, 1, 2)
    sys.pin_relative(0, 1, 1)
    with pytest.raises(InfeasibleSystem):
        sys.solve_asap()


def test_asap_running_example(running_example):
    assert running_system(running_example).solve_asap().start_cycle == (0, 0, 0, 1)


def test_alap_running_example(running_example):
    assert running_system(running_example).solve_alap(2).start_cycle == (0, 1, 1, 1)


def test_trivial_solves():
    assert ConstraintSystem(1).solve_asap().start_cycle == (0,)
    chain = ConstraintSystem(3)
    chain.add_dependency(0, 1, 1)
    chain.add_dependency(1, 2, 1)
    assert chain.solve_asap().start_cycle == (0, 1, 2)
    assert chain.solve_alap(3).start_cycle == (0, 1, 2)
    assert ConstraintSystem(1).solve_alap(5).start_cycle == (4,)


def test_horizon_too_small():
    chain = ConstraintSystem(2)
    chain.add_dependency(0, 1, 1)
    with pytest.raises(HorizonTooSmall):
        chain.solve_alap(1)


def test_release_times():
    sys = ConstraintSystem(2, release=[3, 0])
    sys.add_dependency(0, 1, 1)
    assert sys.solve_asap().start_cycle == (3, 4)


def test_incremental_redundant_keeps_solution():
    sys = ConstraintSystem(3)
    sys.add_dependency(0, 1, 2)
    before = sys.solve_asap()
    assert sys.check_feasible_incremental(0, 1, -1) is not None
    assert sys.solve_asap() == before


def test_incremental_rejects_cycle_and_rolls_back():
    sys = ConstraintSystem(2)
    sys.add_dependency(0, 1, 1)
    before = (sys.solve_asap(), sys.dump())
    assert sys.try_pin(0, 1, 0) is None
    assert (sys.solve_asap(), sys.dump()) == before


def test_try_pin_horizon_veto():
    sys = ConstraintSystem(3)
    sys.add_dependency(0, 1, 1)
    assert sys.try_pin(1, 2, 1, horizon=2) is None
    assert sys.try_pin(1, 2, 0, horizon=2) is not None
    assert sys.solve_asap().start_cycle == (0, 1, 1)


def random_feasible_triples(rng, n, m):
    """Constraints consistent with a hidden assignment, so the system is feasible."""
    hidden = [rng.randint(0, 20) for _ in range(n)]
    out = []
    for _ in range(m):
        u, v = rng.sample(range(n), 2)
        out.append((u, v, hidden[u] - hidden[v] + rng.randint(0, 3)))
    return out


def test_incremental_matches_full_solve():
    rng = random.Random(11)
    inc = ConstraintSystem(30)
    full = ConstraintSystem(30)
    for u, v, c in random_feasible_triples(rng, 30, 100):
        assert inc.check_feasible_incremental(u, v, c) is not None
        full.add(u, v, c)
    assert inc.solve_asap() == full.solve_asap()


def test_incremental_random_mixed():
    # random constraints, some infeasible: incremental answers match a fresh solve
    rng = random.Random(3)
    sys = ConstraintSystem(12)
    for _ in range(200):
        u, v = rng.sample(range(12), 2)
        c = rng.randint(-4, 3)
        probe = sys.copy()
        probe.add(u, v, c)
        ok = probe.is_feasible()
        assert (sys.check_feasible_incremental(u, v, c) is not None) == ok
        assert sys.solve_asap() == sys.copy().solve_asap()


@st.composite
def feasible_systems(draw):
    n = draw(st.integers(1, 12))
    hidden = draw(st.lists(st.integers(0, 15), min_size=n, max_size=n))
    m = draw(st.integers(0, 30))
    triples = []
    for _ in range(m if n > 1 else 0):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 1).filter(lambda x: x != u))
        triples.append((u, v, hidden[u] - hidden[v] + draw(st.integers(0, 3))))
    return n, triples


@settings(max_examples=200, deadline=None)
@given(feasible_systems())
def test_asap_is_least_integral_solution(case):
    n, triples = case
    sys = ConstraintSystem(n)
    for t in triples:
        sys.add(*t)
    s = sys.solve_asap()
    assert s.satisfies(sys.constraints)
    assert all(isinstance(x, int) and x >= 0 for x in s.start_cycle)
    for x in range(n):
        lowered = list(s.start_cycle)
        lowered[x] -= 1
        assert lowered[x] < 0 or not all(
            lowered[c.u] - lowered[c.v] <= c.bound for c in sys.constraints
        )


@settings(max_examples=100, deadline=None)
@given(feasible_systems(), st.integers(0, 5))
def test_asap_below_alap(case, slack):
    n, triples = case
    sys = ConstraintSystem(n)
    for t in triples:
        sys.add(*t)
    asap = sys.solve_asap()
    horizon = max(a + 1 for a in asap.start_cycle) + slack
    alap = sys.solve_alap(horizon)
    assert alap.satisfies(sys.constraints)
    assert all(a <= b for a, b in zip(asap.start_cycle, alap.start_cycle))
    assert max(b + 1 for b in alap.start_cycle) <= horizon
