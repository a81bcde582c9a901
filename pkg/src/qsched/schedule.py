"""Timed schedules: legality checks, metrics, JSON and text rendering."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .circuit import Circuit, DepGraph, Gate
from .platform import PlatformConfig, StackingRule


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    circuit: Circuit
    starts: tuple[int, ...]
    durations: tuple[int, ...]
    cycle_time_ns: int
    platform_hash: str = ""
    algo: str = ""

    @property
    def latency_cycles(self) -> int:
        return max((s + d for s, d in zip(self.starts, self.durations)), default=0)

    @property
    def latency_ns(self) -> int:
        return self.latency_cycles * self.cycle_time_ns

    def start(self, gid: int) -> int:
        return self.starts[gid]

    def occupancy(self, platform: PlatformConfig) -> dict[tuple[str, int], list[tuple[int, int, int]]]:
        """Per instrument instance, the ``(start, end, gate id)`` intervals it is busy."""
        usage = instrument_usage(self.circuit.gates, platform)
        return {
            key: sorted((self.starts[g], self.starts[g] + self.durations[g], g) for g in gids)
            for key, gids in usage.items()
        }

    def to_dict(self) -> dict:
        return {
            "circuit": self.circuit.to_dict(),
            "platform_hash": self.platform_hash,
            "algo": self.algo,
            "cycle_time_ns": self.cycle_time_ns,
            "starts": {str(g): s for g, s in enumerate(self.starts)},
            "durations": {str(g): d for g, d in enumerate(self.durations)},
            "latency_cycles": self.latency_cycles,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> Schedule:
        try:
            cdata = data["circuit"]
            circuit = Circuit.from_ops(
                ((g["op"], g["qubits"]) for g in cdata["gates"]), cdata["qubits"]
            )
            n = len(circuit.gates)
            starts = tuple(int(data["starts"][str(g)]) for g in range(n))
            durs = data.get("durations")
            durations = tuple(int(durs[str(g)]) for g in range(n)) if durs else (1,) * n
            sched = cls(
                circuit,
                starts,
                durations,
                int(data.get("cycle_time_ns", 20)),
                data.get("platform_hash", ""),
                data.get("algo", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScheduleError(f"malformed schedule: {exc!r}") from exc
        if "latency_cycles" in data and data["latency_cycles"] != sched.latency_cycles:
            raise ScheduleError(
                f"latency_cycles {data['latency_cycles']} disagrees with starts "
                f"({sched.latency_cycles})"
            )
        return sched

    @classmethod
    def from_json(cls, text: str) -> Schedule:
        return cls.from_dict(json.loads(text))


def make_schedule(depgraph: DepGraph, circuit: Circuit, starts, platform: PlatformConfig,
                  algo: str = "") -> Schedule:
    return Schedule(
        circuit,
        tuple(int(s) for s in starts),
        tuple(g.duration_cycles for g in depgraph.gates),
        platform.cycle_time_ns,
        platform.digest(),
        algo,
    )


def instrument_usage(gates, platform: PlatformConfig) -> dict[tuple[str, int], list[int]]:
    """Gate ids (program order) occupying each instrument instance."""
    usage: dict[tuple[str, int], list[int]] = defaultdict(list)
    for g in gates:
        for key in platform.instruments_for_op(g.opcode, g.operands):
            usage[key].append(g.id)
    return dict(usage)


@dataclass(frozen=True)
class Violation:
    kind: str  # "dependency", "resource", "capacity", "coverage" or "platform"
    message: str
    gates: tuple[int, ...] = ()
    instrument: tuple[str, int] | None = None
    cycle: int | None = None

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def resource_conflicts(gates: tuple[Gate, ...] | list[Gate], starts, durations,
                       platform: PlatformConfig, usage=None, capacities=None):
    """Yield ``(instrument, cycle, kind, gate ids)`` for every illegal sharing.

    Gates overlapping in time on one instance must form a single group that
    started together; ``SameGateSameStart`` groups also share the opcode and no
    group may exceed the instance capacity.
    """
    if usage is None:
        usage = instrument_usage(gates, platform)
    for key, gids in usage.items():
        rule = platform.stacking_rule(key)
        cap = capacities.get(key) if capacities else None
        if cap is None:
            cap = platform.capacity(key)
        by_start: dict[int, list[int]] = defaultdict(list)
        for g in gids:
            by_start[starts[g]].append(g)
        active: list[int] = []  # gates from earlier clusters, still running
        for t in sorted(by_start):
            cluster = by_start[t]
            active = [g for g in active if starts[g] + durations[g] > t]
            for g in active:
                yield key, t, "overlap", (g, *cluster)
            if len(cluster) > 1:
                if rule is StackingRule.EXCLUSIVE:
                    yield key, t, "exclusive", tuple(cluster)
                elif rule is StackingRule.SAME_GATE_SAME_START:
                    ops = {gates[g].opcode for g in cluster}
                    if len(ops) > 1:
                        yield key, t, "opcode", tuple(cluster)
                if len(cluster) > cap:
                    yield key, t, "capacity", tuple(cluster)
            active.extend(cluster)


def validate(schedule: Schedule, depgraph: DepGraph, platform: PlatformConfig,
             capacities=None) -> list[Violation]:
    """Every dependency and instrument-sharing violation; empty means legal."""
    out: list[Violation] = []
    n = len(depgraph.gates)
    if len(schedule.starts) != n:
        return [Violation("coverage", f"schedule has {len(schedule.starts)} starts for {n} gates")]
    if schedule.platform_hash and schedule.platform_hash != platform.digest():
        out.append(Violation("platform", "schedule was produced for a different platform"))
    starts = schedule.starts
    durations = [g.duration_cycles for g in depgraph.gates]
    for g, s in enumerate(starts):
        if s < 0:
            out.append(Violation("coverage", f"gate {g} starts at negative cycle {s}", (g,)))
    for a, b, w in depgraph.edges:
        if starts[b] < starts[a] + w:
            out.append(Violation(
                "dependency",
                f"gate {b} starts at {starts[b]}, before gate {a} finishes at {starts[a] + w}",
                (a, b),
            ))
    for key, t, kind, gids in resource_conflicts(depgraph.gates, starts, durations, platform,
                                                 capacities=capacities):
        name = f"{key[0]}[{key[1]}]"
        if kind == "overlap":
            msg = f"{name}: gate {gids[0]} still running at cycle {t} when {list(gids[1:])} start"
            kind_out = "resource"
        elif kind == "opcode":
            msg = f"{name}: different gates stacked at cycle {t}: {list(gids)}"
            kind_out = "resource"
        elif kind == "exclusive":
            msg = f"{name}: instrument cannot stack, {list(gids)} start at cycle {t}"
            kind_out = "resource"
        else:
            msg = f"{name}: {len(gids)} gates stacked at cycle {t} exceed capacity"
            kind_out = "capacity"
        out.append(Violation(kind_out, msg, tuple(gids), key, t))
    return out


# -- metrics -------------------------------------------------------------------


def speedup(latency: float, baseline: float) -> float:
    """How many times faster ``latency`` is than ``baseline``."""
    if latency <= 0:
        return 1.0 if baseline <= 0 else math.inf
    return baseline / latency


def geomean(values) -> float:
    values = list(values)
    if not values:
        return math.nan
    return math.exp(sum(math.log(v) for v in values) / len(values))


@dataclass
class ReportRow:
    circuit: str
    algo: str
    latency_cycles: int
    latency_ns: int
    wall_time_s: float = 0.0
    gap: float | None = None  # latency / optimal latency, when known


@dataclass
class CompareReport:
    rows: list[ReportRow] = field(default_factory=list)
    platform_hash: str = ""

    @property
    def algos(self) -> list[str]:
        return list(dict.fromkeys(r.algo for r in self.rows))

    @property
    def circuits(self) -> list[str]:
        return list(dict.fromkeys(r.circuit for r in self.rows))

    def latency(self, circuit: str, algo: str) -> int:
        for r in self.rows:
            if r.circuit == circuit and r.algo == algo:
                return r.latency_cycles
        raise KeyError((circuit, algo))

    def speedups(self, algo: str, baseline: str) -> dict[str, float]:
        return {
            c: speedup(self.latency(c, algo), self.latency(c, baseline))
            for c in self.circuits
        }

    def geomean_speedup(self, algo: str, baseline: str) -> float:
        return geomean(v for v in self.speedups(algo, baseline).values() if v > 0 and v != math.inf)

    def to_dict(self) -> dict:
        algos = self.algos
        pairs = [(a, b) for a in algos for b in algos if a != b]
        return {
            "platform_hash": self.platform_hash,
            "rows": [r.__dict__ for r in self.rows],
            "speedups": {f"{a}/{b}": self.speedups(a, b) for a, b in pairs},
            "geomean_speedup": {f"{a}/{b}": self.geomean_speedup(a, b) for a, b in pairs},
        }

    def to_text(self, baseline: str | None = None) -> str:
        algos = self.algos
        if baseline is None and algos:
            baseline = algos[-1]
        gaps = any(r.gap is not None for r in self.rows)
        header = ("Benchmark", "Algo", "Latency", "ns", "Speedup", "Time[s]") + (("Gap",) if gaps else ())
        lines = [header]
        for r in self.rows:
            sp = speedup(r.latency_cycles, self.latency(r.circuit, baseline)) if baseline else 1.0
            row = (r.circuit, r.algo, str(r.latency_cycles), str(r.latency_ns),
                   f"{sp:.2f}", f"{r.wall_time_s:.3f}")
            if gaps:
                row += ("-" if r.gap is None else f"{r.gap:.2f}",)
            lines.append(row)
        widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
        text = "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in lines
        )
        if baseline and len(self.circuits) > 0:
            for a in algos:
                if a != baseline:
                    text += f"\ngeomean speedup {a} over {baseline}: " \
                            f"{self.geomean_speedup(a, baseline):.2f}"
        return text + "\n"


def compute_metrics(results: dict[str, dict[str, Schedule]],
                    wall_times: dict[tuple[str, str], float] | None = None) -> CompareReport:
    """Build a report from ``{circuit name: {algo: schedule}}``."""
    hashes = {s.platform_hash for per in results.values() for s in per.values()}
    if len(hashes) > 1:
        raise ScheduleError("schedules were produced for different platforms")
    report = CompareReport(platform_hash=next(iter(hashes), ""))
    for name in sorted(results):
        for algo, sched in results[name].items():
            wt = (wall_times or {}).get((name, algo), 0.0)
            report.rows.append(ReportRow(name, algo, sched.latency_cycles, sched.latency_ns, wt))
    return report


# -- gantt -----------------------------------------------------------------------


def render_gantt(schedule: Schedule, platform: PlatformConfig) -> str:
    """Fixed-width timeline: one row per instrument instance, then one per qubit."""
    n_cycles = schedule.latency_cycles
    gates = schedule.circuit.gates
    starts, durs = schedule.starts, schedule.durations

    rows: list[tuple[str, list[str]]] = []
    occupancy = schedule.occupancy(platform)
    for key in platform.instances():
        cells = ["."] * n_cycles
        by_start: dict[int, list[int]] = defaultdict(list)
        for s, _, g in occupancy.get(key, ()):
            by_start[s].append(g)
        for s, gids in by_start.items():
            label = _group_label(gates, gids)
            end = max(starts[g] + durs[g] for g in gids)
            cells[s] = label
            for t in range(s + 1, end):
                cells[t] = "~"
        rows.append((f"{key[0]}{key[1]}", cells))
    for q in range(schedule.circuit.qubit_count):
        on_q = [g for g in gates if q in g.operands]
        if not on_q:
            continue
        cells = ["."] * n_cycles
        for g in on_q:
            cells[starts[g.id]] = g.opcode
            for t in range(starts[g.id] + 1, starts[g.id] + durs[g.id]):
                cells[t] = "~"
        rows.append((f"q{q}", cells))

    label_w = max([len("cycle")] + [len(name) for name, _ in rows])
    col_w = max([len(str(max(n_cycles - 1, 0)))] + [len(c) for _, cells in rows for c in cells])
    header = "cycle".ljust(label_w) + " |" + "".join(
        f" {str(t).ljust(col_w)}" for t in range(n_cycles)
    )
    lines = [header.rstrip()]
    for name, cells in rows:
        lines.append((name.ljust(label_w) + " |" + "".join(f" {c.ljust(col_w)}" for c in cells)).rstrip())
    return "\n".join(lines) + "\n"


def _group_label(gates, gids) -> str:
    ops = list(dict.fromkeys(gates[g].opcode for g in sorted(gids)))
    qubits = sorted(q for g in gids for q in gates[g].operands)
    return "[" + "/".join(ops) + ":" + ",".join(f"q{q}" for q in qubits) + "]"
