"""Untimed circuits, their text/JSON formats, and the gate dependency graph."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .platform import PlatformConfig


class CircuitError(ValueError):
    """Malformed circuit source or an invalid gate."""


@dataclass(frozen=True)
class Gate:
    id: int
    opcode: str
    operands: tuple[int, ...]
    duration_cycles: int = 1

    def __str__(self) -> str:
        return f"{self.opcode.upper()}{','.join(map(str, self.operands))}"


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.qubit_count <= 0:
            raise CircuitError("qubit_count must be positive")
        for pos, g in enumerate(self.gates):
            if g.id != pos:
                raise CircuitError(f"gate at position {pos} has id {g.id}")
            _check_gate(g.opcode, g.operands, self.qubit_count, f"gate {pos}")
            if g.duration_cycles < 1:
                raise CircuitError(f"gate {pos}: duration must be >= 1")

    def __len__(self) -> int:
        return len(self.gates)

    @classmethod
    def from_ops(cls, ops, qubit_count: int | None = None) -> Circuit:
        """Build from ``(opcode, operands)`` pairs."""
        ops = [(op, tuple(qs)) for op, qs in ops]
        if qubit_count is None:
            qubit_count = max((q for _, qs in ops for q in qs), default=0) + 1
        return cls(qubit_count, tuple(Gate(i, op, qs) for i, (op, qs) in enumerate(ops)))

    def to_text(self) -> str:
        lines = [f"qubits {self.qubit_count}"]
        lines += [f"{g.opcode} " + " ".join(f"q{q}" for q in g.operands) for g in self.gates]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "qubits": self.qubit_count,
            "gates": [{"op": g.opcode, "qubits": list(g.operands)} for g in self.gates],
        }


def _check_gate(opcode: str, operands, qubit_count: int | None, where: str) -> None:
    if not opcode:
        raise CircuitError(f"{where}: empty opcode")
    if not operands:
        raise CircuitError(f"{where}: gate {opcode!r} has no operands")
    if len(set(operands)) != len(operands):
        raise CircuitError(f"{where}: duplicate operand in {opcode} {list(operands)}")
    for q in operands:
        if q < 0 or (qubit_count is not None and q >= qubit_count):
            raise CircuitError(f"{where}: qubit {q} out of range 0..{qubit_count - 1}")


_QUBIT = re.compile(r"q\[?(\d+)\]?$", re.IGNORECASE)


def _parse_text(text: str) -> Circuit:
    declared = None
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head.lower() == "qubits":
            if declared is not None or ops:
                raise CircuitError(f"line {lineno}: 'qubits' header must come first")
            try:
                declared = int(rest)
            except ValueError:
                raise CircuitError(f"line {lineno}: bad qubit count {rest!r}") from None
            if declared <= 0:
                raise CircuitError(f"line {lineno}: qubit count must be positive")
            continue
        operands = []
        for tok in re.split(r"[,\s]+", rest.strip()):
            if not tok:
                continue
            m = _QUBIT.match(tok)
            if m is None:
                raise CircuitError(f"line {lineno}: bad operand {tok!r} in {raw.strip()!r}")
            operands.append(int(m.group(1)))
        if not re.fullmatch(r"[A-Za-z_][\w.]*", head):
            raise CircuitError(f"line {lineno}: bad opcode {head!r}")
        _check_gate(head, operands, declared, f"line {lineno}")
        ops.append((head.lower(), tuple(operands)))
    if declared is None and not ops:
        raise CircuitError("empty circuit needs a 'qubits N' header")
    return Circuit.from_ops(ops, declared)


def _parse_json(text: str) -> Circuit:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"invalid JSON circuit: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("gates", []), list):
        raise CircuitError("JSON circuit must be an object with a 'gates' list")
    declared = data.get("qubits")
    if declared is not None and (not isinstance(declared, int) or declared <= 0):
        raise CircuitError(f"bad qubit count {declared!r}")
    ops = []
    for i, entry in enumerate(data.get("gates", [])):
        if not isinstance(entry, dict) or not isinstance(entry.get("op"), str):
            raise CircuitError(f"gate {i}: expected {{'op': str, 'qubits': [...]}}")
        qubits = entry.get("qubits")
        if not isinstance(qubits, list) or not all(
            isinstance(q, int) and not isinstance(q, bool) for q in qubits
        ):
            raise CircuitError(f"gate {i}: 'qubits' must be a list of integers")
        _check_gate(entry["op"], qubits, declared, f"gate {i}")
        ops.append((entry["op"].lower(), tuple(qubits)))
    if declared is None and not ops:
        raise CircuitError("empty circuit needs a 'qubits' count")
    return Circuit.from_ops(ops, declared)


def parse_circuit(text: str) -> Circuit:
    """Parse the line format (``x q2``) or the equivalent JSON document."""
    if text.lstrip().startswith("{"):
        return _parse_json(text)
    return _parse_text(text)


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read())


@dataclass(frozen=True)
class DepGraph:
    """Dependency DAG; gates carry platform durations."""

    gates: tuple[Gate, ...]
    edges: tuple[tuple[int, int, int], ...]
    preds: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)
    succs: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.gates)

    def duration(self, gid: int) -> int:
        return self.gates[gid].duration_cycles

    def asap(self) -> list[int]:
        """Longest-path start cycles; gate ids are already a topological order."""
        start = [0] * len(self.gates)
        for v in range(len(self.gates)):
            for u, w in self.preds[v]:
                if start[u] + w > start[v]:
                    start[v] = start[u] + w
        return start

    def tails(self) -> list[int]:
        """Length of the longest path from each gate's start to the end of the circuit."""
        tail = [0] * len(self.gates)
        for v in reversed(range(len(self.gates))):
            best = self.gates[v].duration_cycles
            for s, w in self.succs[v]:
                best = max(best, w + tail[s])
            tail[v] = best
        return tail

    def makespan(self) -> int:
        start = self.asap()
        return max((s + g.duration_cycles for s, g in zip(start, self.gates)), default=0)


def build_depgraph(circuit: Circuit, platform: PlatformConfig | None = None) -> DepGraph:
    """Each gate depends on the most recent earlier gate on each of its qubits."""
    if platform is not None:
        for g in circuit.gates:
            for q in g.operands:
                if q >= platform.qubit_count:
                    raise CircuitError(
                        f"gate {g.id} uses qubit {q}; platform has {platform.qubit_count}"
                    )
        gates = tuple(
            Gate(g.id, g.opcode, g.operands, platform.duration_cycles(g.opcode))
            for g in circuit.gates
        )
    else:
        gates = circuit.gates
    last: dict[int, int] = {}
    edges = []
    preds: list[list[tuple[int, int]]] = [[] for _ in gates]
    succs: list[list[tuple[int, int]]] = [[] for _ in gates]
    for g in gates:
        srcs = sorted({last[q] for q in g.operands if q in last})
        for src in srcs:
            w = gates[src].duration_cycles
            edges.append((src, g.id, w))
            preds[g.id].append((src, w))
            succs[src].append((g.id, w))
        for q in g.operands:
            last[q] = g.id
    return DepGraph(
        gates,
        tuple(edges),
        tuple(map(tuple, preds)),
        tuple(map(tuple, succs)),
    )
