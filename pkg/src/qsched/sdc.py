"""Systems of difference constraints over gate start cycles.

Every constraint reads ``s[u] - s[v] <= c``.  A least (ASAP) solution is the
longest-path labelling of the graph with an edge ``u -> v`` of weight ``-c``
per constraint, every variable starting at 0 (the implicit virtual source).
The system is infeasible exactly when that graph has a positive cycle.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class DiffConstraint:
    u: int
    v: int
    bound: int

    def __str__(self) -> str:
        return f"s{self.u} - s{self.v} <= {self.bound}"


class InfeasibleSystem(Exception):
    """The constraints admit no solution; ``cycle`` lists one offending cycle."""

    def __init__(self, cycle: Sequence[DiffConstraint]):
        self.cycle = list(cycle)
        slack = sum(c.bound for c in self.cycle)
        text = "; ".join(map(str, self.cycle))
        super().__init__(f"infeasible constraint cycle (total bound {slack}): {text}")


class HorizonTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class Solution:
    start_cycle: tuple[int, ...]

    def __getitem__(self, var: int) -> int:
        return self.start_cycle[var]

    def __len__(self) -> int:
        return len(self.start_cycle)

    def satisfies(self, constraints: Iterable[DiffConstraint]) -> bool:
        s = self.start_cycle
        return all(s[c.u] - s[c.v] <= c.bound for c in constraints)


def _topo_rank(n: int, fwd: list[dict]) -> list[int]:
    """Kahn order of the constraint graph; nodes on cycles go last in index order."""
    indeg = [0] * n
    for edges in fwd:
        for v, _ in edges.values():
            indeg[v] += 1
    stack = [x for x in range(n - 1, -1, -1) if indeg[x] == 0]
    rank = [-1] * n
    pos = 0
    while stack:
        x = stack.pop()
        rank[x] = pos
        pos += 1
        for y, _ in fwd[x].values():
            indeg[y] -= 1
            if indeg[y] == 0:
                stack.append(y)
    for x in range(n):
        if rank[x] < 0:
            rank[x] = pos
            pos += 1
    return rank


class ConstraintSystem:
    """Mutable set of difference constraints over ``n`` start-cycle variables.

    ``durations`` are only needed by :meth:`solve_alap`.  ``release`` gives
    per-variable lower bounds (default 0), i.e. constraints against the
    virtual source.
    """

    def __init__(self, n: int, durations: Sequence[int] | None = None,
                 release: Sequence[int] | None = None):
        self.n = n
        self.durations = list(durations) if durations is not None else [1] * n
        self.release = list(release) if release is not None else [0] * n
        if len(self.durations) != n or len(self.release) != n:
            raise ValueError("durations and release need one entry per variable")
        self._constraints: dict[int, DiffConstraint] = {}
        self._fwd: list[dict[int, tuple[int, int]]] = [{} for _ in range(n)]
        self._bwd: list[dict[int, tuple[int, int]]] = [{} for _ in range(n)]
        self._next_id = 0
        self._asap: list[int] | None = None
        self._pred: list[int | None] | None = None
        self._rank: list[int] | None = None

    # -- construction -------------------------------------------------------

    def add(self, u: int, v: int, bound: int) -> int:
        """Record ``s[u] - s[v] <= bound`` and return its handle."""
        if u == v:
            raise ValueError("a difference constraint needs two distinct variables")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"variable out of range: {u}, {v}")
        cid = self._next_id
        self._next_id += 1
        self._constraints[cid] = DiffConstraint(u, v, bound)
        self._fwd[u][cid] = (v, -bound)
        self._bwd[v][cid] = (u, -bound)
        self._invalidate()
        return cid

    def add_dependency(self, a: int, b: int, latency: int) -> int:
        """``b`` starts at least ``latency`` cycles after ``a``."""
        return self.add(a, b, -latency)

    def pin_relative(self, a: int, b: int, latency: int) -> tuple[int, int]:
        """``b`` starts exactly ``latency`` cycles after ``a``."""
        return self.add(a, b, -latency), self.add(b, a, latency)

    def remove(self, cid: int) -> None:
        c = self._constraints.pop(cid)
        del self._fwd[c.u][cid]
        del self._bwd[c.v][cid]
        self._invalidate()

    def _invalidate(self) -> None:
        self._asap = None
        self._pred = None
        self._rank = None

    def constraint(self, cid: int) -> DiffConstraint:
        return self._constraints[cid]

    @property
    def constraints(self) -> list[DiffConstraint]:
        return list(self._constraints.values())

    def __len__(self) -> int:
        return len(self._constraints)

    def copy(self) -> ConstraintSystem:
        other = ConstraintSystem(self.n, self.durations, self.release)
        other._constraints = dict(self._constraints)
        other._fwd = [dict(d) for d in self._fwd]
        other._bwd = [dict(d) for d in self._bwd]
        other._next_id = self._next_id
        return other

    def dump(self, offset: int = 0) -> str:
        """One constraint per line; ``offset`` is added to every variable index."""
        return "".join(f"s{c.u + offset} - s{c.v + offset} <= {c.bound}\n"
                       for c in self._constraints.values())

    # -- solving --------------------------------------------------------------

    def _propagate(self, adj, values, pred, rank, queued, guard=None, log=None, horizon=None):
        """Raise ``values`` along ``adj`` until no constraint is violated.

        ``queued`` is a heap of ``(rank, node)`` pairs to (re)examine.  When
        ``guard`` is given, reaching it with a higher value means the newest
        constraint closes a positive cycle; this returns False without
        finishing.  Otherwise positive cycles raise :class:`InfeasibleSystem`.
        With ``horizon``, pushing any gate's finish past it also returns False.
        """
        durations = self.durations
        n = self.n
        counts: dict[int, int] = {}
        in_heap = set(x for _, x in queued)
        heapq.heapify(queued)
        while queued:
            _, x = heapq.heappop(queued)
            in_heap.discard(x)
            base = values[x]
            for cid, (y, w) in adj[x].items():
                cand = base + w
                if cand > values[y]:
                    if y == guard or horizon is not None and cand + durations[y] > horizon:
                        return False
                    if log is not None and y not in log:
                        log[y] = (values[y], pred[y])
                    values[y] = cand
                    pred[y] = cid
                    if y in in_heap:
                        continue
                    in_heap.add(y)
                    heapq.heappush(queued, (rank[y], y))
                    c = counts[y] = counts.get(y, 0) + 1
                    if c > 2 and (c & (c - 1)) == 0 or c > n + 1:
                        cycle = self._pred_cycle(y, pred, adj is self._fwd)
                        if guard is not None and (cycle is not None or c > n + 1):
                            # feasible before the newest constraint, so it closes the cycle
                            return False
                        if cycle is not None:
                            raise InfeasibleSystem(cycle)
                        if c > n + 1:
                            raise InfeasibleSystem(self._bellman_ford_cycle(adj))
        return True

    def _pred_cycle(self, start, pred, forward) -> list[DiffConstraint] | None:
        seen = {}
        x = start
        step = 0
        while x is not None and x not in seen:
            seen[x] = step
            step += 1
            cid = pred[x]
            if cid is None:
                return None
            c = self._constraints[cid]
            x = c.u if forward else c.v
        if x is None:
            return None
        cycle = []
        y = x
        while True:
            c = self._constraints[pred[y]]
            cycle.append(c)
            y = c.u if forward else c.v
            if y == x:
                break
        cycle.reverse()
        return cycle

    def _bellman_ford_cycle(self, adj) -> list[DiffConstraint]:
        # textbook fallback: n rounds, then walk predecessors into the cycle
        n = self.n
        dist = [0] * n
        pred: list[int | None] = [None] * n
        last = None
        for _ in range(n + 1):
            last = None
            for x in range(n):
                for cid, (y, w) in adj[x].items():
                    if dist[x] + w > dist[y]:
                        dist[y] = dist[x] + w
                        pred[y] = cid
                        last = y
            if last is None:
                return []
        forward = adj is self._fwd
        x = last
        for _ in range(n):
            c = self._constraints[pred[x]]
            x = c.u if forward else c.v
        return self._pred_cycle(x, pred, forward) or []

    def solve_asap(self) -> Solution:
        """Component-wise least solution no smaller than the release times."""
        if self._asap is None:
            n = self.n
            rank = _topo_rank(n, self._fwd)
            values = list(self.release)
            pred: list[int | None] = [None] * n
            self._propagate(self._fwd, values, pred, rank, [(rank[x], x) for x in range(n)])
            self._asap, self._pred, self._rank = values, pred, rank
        return Solution(tuple(self._asap))

    def solve_alap(self, horizon: int) -> Solution:
        """Component-wise greatest solution with every gate done by ``horizon``."""
        asap = self.solve_asap()
        makespan = max((s + d for s, d in zip(asap.start_cycle, self.durations)), default=0)
        if horizon < makespan:
            raise HorizonTooSmall(f"horizon {horizon} < ASAP makespan {makespan}")
        n = self.n
        rank = [n - r for r in self._rank]
        # negated starts: r[x] = -s[x] >= duration - horizon
        values = [d - horizon for d in self.durations]
        pred: list[int | None] = [None] * n
        self._propagate(self._bwd, values, pred, rank, [(rank[x], x) for x in range(n)])
        return Solution(tuple(-r for r in values))

    def check_feasible_incremental(self, u: int, v: int, bound: int) -> int | None:
        """Add ``s[u] - s[v] <= bound`` if the system stays feasible.

        Returns the new constraint's handle, or None (system untouched) when
        the constraint would close a positive cycle.  The cached ASAP solution
        is repaired in place rather than recomputed.
        """
        added = self.add_all_or_nothing([(u, v, bound)])
        return None if added is None else added[0]

    def try_pin(self, a: int, b: int, latency: int,
                horizon: int | None = None) -> tuple[int, int] | None:
        """Incremental :meth:`pin_relative`; None leaves the system unchanged.

        With ``horizon``, a pin that would finish any gate later than it is
        refused as well.
        """
        added = self.add_all_or_nothing([(a, b, -latency), (b, a, latency)], horizon)
        return None if added is None else (added[0], added[1])

    def add_all_or_nothing(self, triples, horizon: int | None = None) -> list[int] | None:
        """Add every constraint incrementally, or none of them."""
        added, log, ok = self._insert(triples, horizon)
        if ok:
            return added
        self._rollback(added, log)
        return None

    def probe_finish(self, triples) -> int | None:
        """Latest finish among the variables the constraints would move.

        The system is left unchanged; None means the constraints are infeasible.
        Variables that would not move keep their current finish, so the
        resulting makespan is ``max(current makespan, probe_finish(...))``.
        """
        added, log, ok = self._insert(triples, None)
        values = self._asap
        finish = max((values[x] + self.durations[x] for x in log), default=0) if ok else None
        self._rollback(added, log)
        return finish

    def _insert(self, triples, horizon):
        self.solve_asap()
        values, pred, rank = self._asap, self._pred, self._rank
        log: dict[int, tuple[int, int | None]] = {}
        added = []
        for u, v, bound in triples:
            if u == v:
                raise ValueError("a difference constraint needs two distinct variables")
            cid = self._raw_add(u, v, bound)
            added.append(cid)
            if values[u] - values[v] <= bound:
                continue
            if v not in log:
                log[v] = (values[v], pred[v])
            values[v] = values[u] - bound
            pred[v] = cid
            if horizon is not None and values[v] + self.durations[v] > horizon:
                break
            if not self._propagate(self._fwd, values, pred, rank, [(rank[v], v)],
                                   guard=u, log=log, horizon=horizon):
                break
        else:
            return added, log, True
        return added, log, False

    def _rollback(self, added, log) -> None:
        values, pred = self._asap, self._pred
        for x, (old, old_pred) in log.items():
            values[x] = old
            pred[x] = old_pred
        for cid in added:
            c = self._constraints.pop(cid)
            del self._fwd[c.u][cid]
            del self._bwd[c.v][cid]

    def _raw_add(self, u: int, v: int, bound: int) -> int:
        # add without dropping the cached solution; caller keeps it consistent
        cid = self._next_id
        self._next_id += 1
        self._constraints[cid] = DiffConstraint(u, v, bound)
        self._fwd[u][cid] = (v, -bound)
        self._bwd[v][cid] = (u, -bound)
        return cid

    def value(self, var: int) -> int:
        """ASAP start of ``var`` from the cached (or freshly computed) solution."""
        if self._asap is None:
            self.solve_asap()
        return self._asap[var]

    def is_feasible(self) -> bool:
        try:
            self.solve_asap()
        except InfeasibleSystem:
            return False
        return True
