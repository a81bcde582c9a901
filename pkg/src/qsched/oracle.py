"""Exact minimum-latency scheduling for small circuits by branch and bound.

The search walks time forward one cycle at a time and, at every cycle,
branches over which eligible gates start there (including none, to wait
for a stacking partner).  States are keyed by the set of started gates and
their remaining run times; the rest of the problem only depends on that
key, so a state reached no earlier than before is pruned.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .circuit import Circuit, build_depgraph
from .platform import PlatformConfig, StackingRule
from .schedule import Schedule, make_schedule


class LimitExceeded(RuntimeError):
    """The instance is too large or the time budget ran out."""


@dataclass(frozen=True)
class OracleLimits:
    max_gates: int = 12
    max_makespan: int = 32
    timeout_s: float = 10.0


@dataclass(frozen=True)
class OracleResult:
    schedule: Schedule
    optimal: bool


def schedule_optimal(circuit: Circuit, platform: PlatformConfig,
                     limits: OracleLimits | None = None, stacking: bool = True,
                     upper_bound: Schedule | None = None) -> OracleResult:
    limits = limits or OracleLimits()
    n = len(circuit.gates)
    if n > limits.max_gates:
        raise LimitExceeded(f"{n} gates exceeds the oracle limit of {limits.max_gates}")
    dg = build_depgraph(circuit, platform)
    if n == 0:
        return OracleResult(make_schedule(dg, circuit, (), platform, "oracle"), True)
    critical = dg.makespan()
    if critical > limits.max_makespan:
        raise LimitExceeded(
            f"critical path {critical} exceeds the makespan bound {limits.max_makespan}"
        )

    dur = [g.duration_cycles for g in dg.gates]
    ops = [g.opcode for g in dg.gates]
    tails = dg.tails()
    keys = platform.instances()
    key_index = {k: i for i, k in enumerate(keys)}
    rules = [platform.stacking_rule(k) for k in keys]
    caps = [platform.capacity(k) if stacking else 1 for k in keys]
    needs = [tuple(sorted(key_index[k] for k in platform.instruments_for_op(g.opcode, g.operands)))
             for g in dg.gates]
    preds = dg.preds

    best_latency = limits.max_makespan + 1
    best_starts: list[int] | None = None
    if upper_bound is not None and upper_bound.latency_cycles <= limits.max_makespan:
        best_latency = upper_bound.latency_cycles
        best_starts = list(upper_bound.starts)

    deadline = time.monotonic() + limits.timeout_s
    seen: dict[tuple, int] = {}
    start = [-1] * n
    full = (1 << n) - 1
    steps = 0

    def lower_bound(t: int, mask: int) -> int:
        lb = 0
        for g in range(n):
            if mask >> g & 1:
                lb = max(lb, start[g] + dur[g])
            else:
                ready = t
                for p, w in preds[g]:
                    if mask >> p & 1:
                        ready = max(ready, start[p] + w)
                lb = max(lb, ready + tails[g])
        return lb

    def search(t: int, mask: int) -> None:
        nonlocal best_latency, best_starts, steps
        steps += 1
        if steps & 1023 == 0 and time.monotonic() > deadline:
            raise LimitExceeded(f"oracle exceeded {limits.timeout_s:g} s budget")
        if mask == full:
            lat = max(start[g] + dur[g] for g in range(n))
            if lat < best_latency:
                best_latency, best_starts = lat, list(start)
            return
        if lower_bound(t, mask) >= best_latency:
            return
        remaining = tuple(max(0, start[g] + dur[g] - t) for g in range(n) if mask >> g & 1)
        key = (mask, remaining)
        if seen.get(key, best_latency + 1) <= t:
            return
        seen[key] = t

        busy = [False] * len(keys)
        running = False
        for g in range(n):
            if mask >> g & 1 and start[g] + dur[g] > t:
                running = True
                for k in needs[g]:
                    busy[k] = True
        eligible = []
        for g in range(n):
            if mask >> g & 1:
                continue
            if all(mask >> p & 1 and start[p] + w <= t for p, w in preds[g]) and \
                    not any(busy[k] for k in needs[g]):
                eligible.append(g)
        # gates most urgent first so good schedules are found early
        eligible.sort(key=lambda g: -tails[g])

        groups: list[list[int]] = [[] for _ in keys]

        def choose(i: int, chosen_mask: int, count: int) -> None:
            if i == len(eligible):
                if count == 0 and not running:
                    return  # idling with nothing in flight changes nothing
                search(t + 1, mask | chosen_mask)
                return
            g = eligible[i]
            if all(_joins(groups[k], g, rules[k], caps[k], ops) for k in needs[g]):
                for k in needs[g]:
                    groups[k].append(g)
                start[g] = t
                choose(i + 1, chosen_mask | (1 << g), count + 1)
                start[g] = -1
                for k in needs[g]:
                    groups[k].pop()
            choose(i + 1, chosen_mask, count)

        choose(0, 0, 0)

    search(0, 0)
    if best_starts is None:
        raise LimitExceeded(f"no schedule within {limits.max_makespan} cycles")
    return OracleResult(make_schedule(dg, circuit, best_starts, platform, "oracle"), True)


def _joins(group: list[int], g: int, rule: StackingRule, cap: int, ops) -> bool:
    if not group:
        return True
    if len(group) >= cap or rule is StackingRule.EXCLUSIVE:
        return False
    if rule is StackingRule.SAME_GATE_SAME_START:
        return ops[group[0]] == ops[g]
    return True
