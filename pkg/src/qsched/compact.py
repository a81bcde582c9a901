"""Left-shift compaction of a legal schedule.

Gates are visited in start order and moved to the earliest earlier cycle
where their dependencies are met and every instrument they use is either
idle for the whole run or hosts a compatible group starting that cycle.
Nothing else moves, so legality is preserved and latency never grows.
"""

from __future__ import annotations

from bisect import bisect_left, insort

from .circuit import DepGraph
from .platform import PlatformConfig, StackingRule


def compact_left(depgraph: DepGraph, starts, platform: PlatformConfig,
                 capacities: dict | None = None, frozen=(), max_passes: int = 4) -> list[int]:
    starts = list(starts)
    gates = depgraph.gates
    dur = [g.duration_cycles for g in gates]
    needs = [sorted(platform.instruments_for_op(g.opcode, g.operands)) for g in gates]
    frozen = set(frozen)

    on: dict[tuple[str, int], list[tuple[int, int]]] = {}
    for g, keys in enumerate(needs):
        for k in keys:
            on.setdefault(k, []).append((starts[g], g))
    for lst in on.values():
        lst.sort()
    longest = {k: max(dur[g] for _, g in lst) for k, lst in on.items()}
    rules = {k: platform.stacking_rule(k) for k in on}
    caps = {k: (capacities or {}).get(k) or platform.capacity(k) for k in on}

    def fits(g: int, k, t: int) -> bool:
        lst = on[k]
        end = t + dur[g]
        lo = bisect_left(lst, (t - longest[k] + 1, -1))
        hi = bisect_left(lst, (end, -1))
        group = []
        for s, h in lst[lo:hi]:
            if h == g or s + dur[h] <= t:
                continue
            if s != t:
                return False
            group.append(h)
        if not group:
            return True
        rule = rules[k]
        if rule is StackingRule.EXCLUSIVE or len(group) + 1 > caps[k]:
            return False
        if rule is StackingRule.SAME_GATE_SAME_START:
            return all(gates[h].opcode == gates[g].opcode for h in group)
        return True

    for _ in range(max_passes):
        moved = False
        for g in sorted(range(len(gates)), key=lambda x: (starts[x], x)):
            if g in frozen:
                continue
            s = starts[g]
            earliest = max((starts[p] + w for p, w in depgraph.preds[g]), default=0)
            if earliest >= s:
                continue
            candidates = {earliest}
            for k in needs[g]:
                lst = on[k]
                lo = bisect_left(lst, (earliest - longest[k], -1))
                hi = bisect_left(lst, (s, -1))
                for t0, h in lst[lo:hi]:
                    for t in (t0, t0 + dur[h]):
                        if earliest <= t < s:
                            candidates.add(t)
            for t in sorted(candidates):
                if all(fits(g, k, t) for k in needs[g]):
                    for k in needs[g]:
                        lst = on[k]
                        del lst[bisect_left(lst, (s, g))]
                        insort(lst, (t, g))
                    starts[g] = t
                    moved = True
                    break
        if not moved:
            break
    return starts
