"""Baseline resource-constrained list scheduler.

Cycle-driven: at each cycle the ready gates are tried in priority order
(ALAP start, then program order).  A gate issues when each of its
instrument instances is idle or hosts a group that started this very cycle
and accepts it under the instance's stacking rule.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .circuit import Circuit, build_depgraph
from .platform import PlatformConfig, StackingRule
from .schedule import Schedule, make_schedule


@dataclass
class _Instance:
    rule: StackingRule
    capacity: int
    busy_until: int = 0
    group_start: int = -1
    group_opcode: str = ""
    group_size: int = 0

    def accepts(self, opcode: str, t: int) -> bool:
        if self.busy_until <= t:
            return True
        if self.group_start != t or self.group_size >= self.capacity:
            return False
        if self.rule is StackingRule.SAME_GATE_SAME_START:
            return opcode == self.group_opcode
        return self.rule is StackingRule.SAME_START_ANY_GATE

    def issue(self, opcode: str, t: int, end: int) -> None:
        if self.busy_until <= t:
            self.group_start, self.group_opcode, self.group_size = t, opcode, 1
            self.busy_until = end
        else:
            self.group_size += 1
            self.busy_until = max(self.busy_until, end)


def schedule_list(circuit: Circuit, platform: PlatformConfig, options=None,
                  stacking: bool = True) -> Schedule:
    """List-schedule ``circuit``; ``stacking=False`` forbids sharing an instrument."""
    if options is not None and not options.qsdc_enabled:
        stacking = False
    dg = build_depgraph(circuit, platform)
    n = len(dg)
    if n == 0:
        return make_schedule(dg, circuit, (), platform, "list")

    tails = dg.tails()
    horizon = max(tails)
    alap = [horizon - t for t in tails]
    instances = {}
    for key in platform.instances():
        cap = platform.capacity(key)
        if options is not None:
            cap = options.stacking_for(key, platform)
        instances[key] = _Instance(platform.stacking_rule(key), cap if stacking else 1)
    needs = [[instances[k] for k in sorted(platform.instruments_for_op(g.opcode, g.operands))]
             for g in dg.gates]

    remaining = [len(p) for p in dg.preds]
    est = [0] * n
    start = [-1] * n
    ready: list[tuple[int, int]] = [(alap[g], g) for g in range(n) if remaining[g] == 0]
    heapq.heapify(ready)
    t = 0
    done = 0
    while done < n:
        waiting = []
        issued_any = False
        while ready:
            key = heapq.heappop(ready)
            g = key[1]
            gate = dg.gates[g]
            if est[g] <= t and all(inst.accepts(gate.opcode, t) for inst in needs[g]):
                end = t + gate.duration_cycles
                for inst in needs[g]:
                    inst.issue(gate.opcode, t, end)
                start[g] = t
                done += 1
                issued_any = True
                for s, w in dg.succs[g]:
                    est[s] = max(est[s], t + w)
                    remaining[s] -= 1
                    if remaining[s] == 0:
                        # successors need w >= 1 cycles, so they are never ready at t
                        waiting.append((alap[s], s))
            else:
                waiting.append(key)
        ready = waiting
        heapq.heapify(ready)
        if done == n:
            break
        # jump to the next cycle where something can change
        candidates = [est[g] for _, g in ready if est[g] > t]
        candidates += [inst.busy_until for inst in instances.values() if inst.busy_until > t]
        t = min(candidates) if candidates else t + 1
        if not issued_any and not candidates:
            raise RuntimeError("list scheduler made no progress")  # pragma: no cover
    return make_schedule(dg, circuit, start, platform, "list")
