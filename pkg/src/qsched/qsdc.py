"""Resource-constrained SDC scheduling with instrument stacking (QSDC).

Pipeline: dependency constraints, ASAP/ALAP keys, a linear order over the
gates, per-instrument resource constraints along that order, then a
legalization loop that turns stacked groups into exact same-start pins and
serializes any remaining illegal overlap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .circuit import Circuit, DepGraph, build_depgraph
from .compact import compact_left
from .platform import PlatformConfig
from .schedule import Schedule, instrument_usage, make_schedule, resource_conflicts
from .sdc import ConstraintSystem, DiffConstraint, InfeasibleSystem

logger = logging.getLogger(__name__)


@dataclass
class SchedulerOptions:
    qsdc_enabled: bool = True
    max_stacking: dict[tuple[str, int], int] = field(default_factory=dict)
    horizon_slack: int = 0
    pins: list[tuple[int, int, int]] = field(default_factory=list)
    compact: bool = True
    window: int | None = 1000  # gates per independently legalized window; None = whole circuit

    def stacking_for(self, key: tuple[str, int], platform: PlatformConfig) -> int:
        """Stacking width used when adding constraints for one instrument instance."""
        if not self.qsdc_enabled:
            return 1
        limit = platform.capacity(key)
        override = self.max_stacking.get(key)
        if override is None:
            return limit
        if override < 1 or override > limit:
            raise ValueError(f"max stacking {override} for {key} outside 1..{limit}")
        return override


@dataclass
class RunningInstr:
    """Group of same-opcode gates currently stacked on one instrument instance."""

    opcode: str
    first: int
    last: int
    stack_count: int = 1
    instrument: tuple[str, int] | None = None
    members: list[int] = field(default_factory=list)
    anchors: dict[int, int] = field(default_factory=dict)  # member -> anchor constraint id


def dependency_system(depgraph: DepGraph, pins=()) -> ConstraintSystem:
    sys = ConstraintSystem(len(depgraph), [g.duration_cycles for g in depgraph.gates])
    for a, b, w in depgraph.edges:
        sys.add_dependency(a, b, w)
    for a, b, lat in pins:
        sys.pin_relative(a, b, lat)
    return sys


def linear_order(depgraph: DepGraph, sys: ConstraintSystem, horizon_slack: int = 0) -> list[int]:
    """Gates sorted by ALAP start, then ASAP start, then program order."""
    n = len(depgraph)
    if n == 0:
        return []
    asap = sys.solve_asap()
    makespan = max(asap[g] + depgraph.duration(g) for g in range(n))
    alap = sys.solve_alap(makespan + horizon_slack)
    return sorted(range(n), key=lambda g: (alap[g], asap[g], g))


def add_resource_constraints_instrument(gates_in_order, max_stacking: int, sys: ConstraintSystem,
                                        opcodes, durations, instrument=None,
                                        add=None) -> list[RunningInstr]:
    """Constraints between the gates sharing one instrument instance.

    A gate whose opcode already runs on the instrument is anchored to that
    group's first gate (it may start with it) while the group has room;
    otherwise it is serialized after the group, or after the last gate seen
    when its opcode is new.  Returns every group formed.

    ``add(u, v, bound)`` replaces ``sys.add``; returning None means the
    constraint was not added (an anchor is then dropped).
    """
    if max_stacking < 1:
        raise ValueError("max_stacking must be >= 1")
    add = add or sys.add
    running: dict[str, RunningInstr] = {}
    groups: list[RunningInstr] = []
    last_seen = None
    for g in gates_in_order:
        op = opcodes[g]
        run = running.get(op)
        if run is not None:
            if run.stack_count < max_stacking:
                cid = add(run.first, g, 0)
                if cid is None:
                    last_seen = g
                    continue
                run.anchors[g] = cid
                run.members.append(g)
                run.last = g
                run.stack_count += 1
                assert run.stack_count <= max_stacking
            else:
                add(run.last, g, -durations[run.last])
                run = running[op] = RunningInstr(op, g, g, 1, instrument, [g])
                groups.append(run)
        else:
            if running:
                add(last_seen, g, -durations[last_seen])
            run = running[op] = RunningInstr(op, g, g, 1, instrument, [g])
            groups.append(run)
        last_seen = g
    return groups


def add_resource_constraints(depgraph: DepGraph, sys: ConstraintSystem, platform: PlatformConfig,
                             options: SchedulerOptions, order: list[int]) -> list[RunningInstr]:
    """Run the per-instrument pass for every instance of every instrument type."""
    position = {g: i for i, g in enumerate(order)}
    usage = instrument_usage(depgraph.gates, platform)
    opcodes = [g.opcode for g in depgraph.gates]
    durations = [g.duration_cycles for g in depgraph.gates]
    add = None
    if options.pins:
        def add(u, v, bound):
            # user pins can contradict the heuristic order; try the other order
            # for a serialization, give up on an anchor, and leave any overlap
            # to legalization
            cid = sys.check_feasible_incremental(u, v, bound)
            if cid is None and bound < 0:
                cid = sys.check_feasible_incremental(v, u, -durations[v])
            return cid
    groups = []
    for key in platform.instances():
        gids = usage.get(key)
        if not gids or len(gids) < 2:
            continue
        gids = sorted(gids, key=position.__getitem__)
        groups += add_resource_constraints_instrument(
            gids, options.stacking_for(key, platform), sys, opcodes, durations, key, add
        )
    return groups


class _Legalizer:
    """Aligns stacked groups and serializes leftover overlaps until the schedule is legal."""

    def __init__(self, depgraph, sys, platform, groups, order, capacities):
        self.dg = depgraph
        self.sys = sys
        self.platform = platform
        self.groups = [gr for gr in groups if len(gr.members) > 1]
        self.position = {g: i for i, g in enumerate(order)}
        self.capacities = capacities
        self.durations = [g.duration_cycles for g in depgraph.gates]
        self.usage = instrument_usage(depgraph.gates, platform)
        self.pin_owner: dict[DiffConstraint, tuple[RunningInstr, int]] = {}
        self.pins: dict[tuple[int, int], tuple[int, int]] = {}  # (group id, member) -> cids
        self.serialized: set[tuple[int, int]] = set()
        self.evictions = 0
        self.repairs = 0

    def values(self):
        self.solve()
        return self.sys._asap

    def solve(self):
        """Full solve; a positive cycle through an alignment pin evicts that member."""
        while True:
            try:
                return self.sys.solve_asap()
            except InfeasibleSystem as exc:
                owner = next((self.pin_owner[c] for c in exc.cycle if c in self.pin_owner), None)
                if owner is None:
                    raise
                self.evict(*owner)

    def evict(self, group: RunningInstr, member: int) -> None:
        logger.debug("evicting gate %d from group of %d", member, group.first)
        self.evictions += 1
        for cid in self.pins.pop((id(group), member), ()):
            self.pin_owner.pop(self.sys.constraint(cid), None)
            self.sys.remove(cid)
        # the anchor (member no earlier than first) is implied by the
        # serialization below, so it stays; removing it would force a re-solve
        group.anchors.pop(member, None)
        group.members.remove(member)
        group.stack_count -= 1
        self.serialize(group.first, member)

    def serialize(self, a: int, b: int, either_way: bool = False) -> None:
        """Make ``b`` start after ``a`` finishes (or the reverse, if allowed and needed)."""
        if (a, b) in self.serialized:
            return
        self.serialized.add((a, b))
        bound = -self.durations[a]
        if self.sys.check_feasible_incremental(a, b, bound) is not None:
            return
        if either_way and (b, a) not in self.serialized:
            self.serialized.add((b, a))
            if self.sys.check_feasible_incremental(b, a, -self.durations[b]) is not None:
                return
        self.sys.add(a, b, bound)
        self.solve()

    def makespan(self) -> int:
        s = self.values()
        return max((s[g] + d for g, d in enumerate(self.durations)), default=0)

    def align(self) -> bool:
        changed = False
        self._bound = self.makespan()
        for group in self.groups:
            first = group.first
            for m in list(group.members[1:]):
                s = self.values()
                if s[m] == s[first] or (id(group), m) in self.pins:
                    continue
                changed = True
                pin = self.sys.try_pin(first, m, 0, self._bound)
                if pin is None:
                    # growing the makespan may still beat serializing m after the group
                    evicted = self.sys.probe_finish([(first, m, -self.durations[first])])
                    if evicted is not None and evicted - 1 > self._bound:
                        pin = self.sys.try_pin(first, m, 0, evicted - 1)
                    if pin is None:
                        self.evict(group, m)
                        continue
                    self._bound = self.makespan()
                self.pins[(id(group), m)] = pin
                for cid in pin:
                    self.pin_owner[self.sys.constraint(cid)] = (group, m)
        return changed

    def conflicts(self):
        s = self.values()
        found = []
        for key, t, kind, gids in resource_conflicts(self.dg.gates, s, self.durations,
                                                     self.platform, self.usage, self.capacities):
            if kind == "overlap":
                # the gate that started first keeps its slot
                pairs = [(gids[0], g) for g in gids[1:]]
            else:
                # illegal same-start stack: keep a legal prefix in linear order
                rule_ok = kind != "exclusive"
                cap = self.capacities.get(key) or self.platform.capacity(key)
                kept, pairs = [], []
                for g in sorted(gids, key=self.position.__getitem__):
                    op = self.dg.gates[g].opcode
                    same_op = not kept or kind != "opcode" or op == self.dg.gates[kept[0]].opcode
                    if (not kept or rule_ok) and same_op and len(kept) < cap:
                        kept.append(g)
                    else:
                        pairs.append((kept[0], g))
            found += pairs
        return found

    def run(self) -> None:
        while True:
            if self.align():
                continue
            pairs = self.conflicts()
            if not pairs:
                return
            s = self.values()
            pairs.sort(key=lambda p: (s[p[1]], self.position[p[1]], self.position[p[0]]))
            for x, y in pairs:
                s = self.values()
                # earlier repairs in this round may already have separated the pair
                if s[y] >= s[x] + self.durations[x] or s[x] >= s[y] + self.durations[y]:
                    continue
                self.repairs += 1
                self.serialize(x, y, either_way=True)


def _legal_starts(dg: DepGraph, platform: PlatformConfig, options: SchedulerOptions,
                  capacities, release=None, trace: dict | None = None,
                  offset: int = 0) -> list[int]:
    """Constraint generation plus legalization for one dependency graph."""
    sys = dependency_system(dg, options.pins)
    if release is not None:
        sys.release = list(release)
    order = linear_order(dg, sys, options.horizon_slack)
    groups = add_resource_constraints(dg, sys, platform, options, order)
    if trace is not None:
        trace.setdefault("order", []).extend(g + offset for g in order)
        trace.setdefault("resource_constraints", []).append(sys.dump(offset))
    legalizer = _Legalizer(dg, sys, platform, groups, order, capacities)
    legalizer.run()
    if trace is not None:
        trace.setdefault("constraints", []).append(sys.dump(offset))
        trace["evictions"] = trace.get("evictions", 0) + legalizer.evictions
        trace["repairs"] = trace.get("repairs", 0) + legalizer.repairs
    if legalizer.evictions or legalizer.repairs:
        logger.debug("legalization: %d evictions, %d serializations",
                     legalizer.evictions, legalizer.repairs)
    return list(legalizer.values())


def _windowed_starts(dg: DepGraph, circuit: Circuit, platform: PlatformConfig,
                     options: SchedulerOptions, capacities, trace) -> list[int]:
    """Schedule consecutive program-order windows, each after the previous ones.

    A window's gates are released once their outside predecessors finish and
    every instrument they use has finished all earlier windows' work, so the
    concatenation is legal.  Legalization cost grows with the window, not
    the circuit.
    """
    n = len(dg)
    starts = [0] * n
    busy: dict[tuple[str, int], int] = {}
    for lo in range(0, n, options.window):
        ids = range(lo, min(n, lo + options.window))
        sub = Circuit.from_ops([(circuit.gates[g].opcode, circuit.gates[g].operands) for g in ids],
                               circuit.qubit_count)
        sub_dg = build_depgraph(sub, platform)
        needs = [platform.instruments_for_op(dg.gates[g].opcode, dg.gates[g].operands) for g in ids]
        release = []
        for g, keys in zip(ids, needs):
            r = max((starts[p] + w for p, w in dg.preds[g] if p < lo), default=0)
            release.append(max([r] + [busy.get(k, 0) for k in keys]))
        local = _legal_starts(sub_dg, platform, options, capacities, release, trace, lo)
        for g, keys, t in zip(ids, needs, local):
            starts[g] = t
            end = t + dg.gates[g].duration_cycles
            for k in keys:
                busy[k] = max(busy.get(k, 0), end)
    return starts


def schedule_qsdc(circuit: Circuit, platform: PlatformConfig,
                  options: SchedulerOptions | None = None, *, trace: dict | None = None) -> Schedule:
    """Schedule ``circuit`` with QSDC; the result always passes :func:`validate`.

    ``trace``, when given, receives the linear order, the constraint dumps
    (one per window) and legalization counts.
    """
    options = options or SchedulerOptions()
    dg = build_depgraph(circuit, platform)
    capacities = {key: options.stacking_for(key, platform) for key in platform.instances()}
    if options.window and len(dg) > options.window and not options.pins:
        starts = _windowed_starts(dg, circuit, platform, options, capacities, trace)
    else:
        starts = _legal_starts(dg, platform, options, capacities, trace=trace)
    if options.compact:
        frozen = {g for a, b, _ in options.pins for g in (a, b)}
        starts = compact_left(dg, starts, platform, capacities, frozen)
    return make_schedule(dg, circuit, starts, platform, "qsdc")


def schedule_asap(circuit: Circuit, platform: PlatformConfig,
                  options: SchedulerOptions | None = None) -> Schedule:
    """Dependency-only SDC solution; ignores instruments, so it is a lower bound, not a legal schedule."""
    options = options or SchedulerOptions()
    dg = build_depgraph(circuit, platform)
    starts = dependency_system(dg, options.pins).solve_asap().start_cycle
    return make_schedule(dg, circuit, starts, platform, "asap")
