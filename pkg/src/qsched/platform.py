"""Platform configuration: instruments, qubit connections and instruction timing.

The ``resources`` block follows the OpenQL layout, e.g.::

    "qwgs": {"count": 3, "connection_map": {"0": [2, 3, 4], ...}}

Each instrument type may also carry ``class`` (the instruction class it
executes), ``stacking`` (one of :class:`StackingRule`) and ``max_stacking``
(per-instance capacity overrides).  ``qwgs`` and ``meas_units`` get sensible
defaults for those keys so an unmodified OpenQL excerpt parses.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

logger = logging.getLogger(__name__)

DEFAULT_CYCLE_TIME_NS = 20
NO_CLASS = "none"


class PlatformError(ValueError):
    """Raised for an invalid platform configuration."""


class StackingRule(enum.Enum):
    SAME_GATE_SAME_START = "SameGateSameStart"
    SAME_START_ANY_GATE = "SameStartAnyGate"
    EXCLUSIVE = "Exclusive"


# name -> (instruction class, stacking rule) for the instrument types OpenQL knows
KNOWN_TYPES = {
    "qwgs": ("mw", StackingRule.SAME_GATE_SAME_START),
    "meas_units": ("readout", StackingRule.SAME_START_ANY_GATE),
}


@dataclass(frozen=True)
class InstrumentType:
    name: str
    count: int
    connection_map: dict[int, frozenset[int]]
    stacking_rule: StackingRule
    opcode_class: str
    max_stacking: dict[int, int] = field(default_factory=dict)

    def capacity(self, instance: int) -> int:
        """Maximum number of gates the instance may run as one stacked group."""
        if instance in self.max_stacking:
            return self.max_stacking[instance]
        if self.stacking_rule is StackingRule.EXCLUSIVE:
            return 1
        return max(1, len(self.connection_map[instance]))


@dataclass(frozen=True)
class InstructionDef:
    opcode: str
    duration_ns: int
    opcode_class: str = NO_CLASS


@dataclass(frozen=True)
class PlatformConfig:
    qubit_count: int
    cycle_time_ns: int
    instrument_types: tuple[InstrumentType, ...]
    instructions: dict[str, InstructionDef]
    qubit_base: int = 0
    source: dict | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        # qubit -> [(type index, instance)] for fast lookup
        lookup: dict[int, list[tuple[int, int]]] = {}
        for ti, itype in enumerate(self.instrument_types):
            for inst, qubits in itype.connection_map.items():
                for q in qubits:
                    lookup.setdefault(q, []).append((ti, inst))
        object.__setattr__(self, "_by_qubit", lookup)
        object.__setattr__(
            self, "_types_by_class", {t.opcode_class for t in self.instrument_types}
        )

    @property
    def qubits(self) -> list[int]:
        """Usable qubit labels, in ascending order."""
        return list(range(self.qubit_base, self.qubit_count))

    def instruction(self, opcode: str) -> InstructionDef | None:
        return self.instructions.get(opcode.lower())

    def duration_cycles(self, opcode: str) -> int:
        """Duration of ``opcode`` in whole cycles; unknown opcodes take one cycle."""
        idef = self.instruction(opcode)
        if idef is None:
            return 1
        return max(1, math.ceil(idef.duration_ns / self.cycle_time_ns))

    def opcode_class(self, opcode: str) -> str:
        idef = self.instruction(opcode)
        return NO_CLASS if idef is None else idef.opcode_class

    def instrument_type(self, name: str) -> InstrumentType:
        for itype in self.instrument_types:
            if itype.name == name:
                return itype
        raise KeyError(name)

    def instances(self) -> list[tuple[str, int]]:
        return [(t.name, i) for t in self.instrument_types for i in range(t.count)]

    def capacity(self, key: tuple[str, int]) -> int:
        return self.instrument_type(key[0]).capacity(key[1])

    def stacking_rule(self, key: tuple[str, int]) -> StackingRule:
        return self.instrument_type(key[0]).stacking_rule

    def connected_qubits(self, key: tuple[str, int]) -> frozenset[int]:
        return self.instrument_type(key[0]).connection_map[key[1]]

    def instruments_for_op(self, opcode: str, operands) -> frozenset[tuple[str, int]]:
        cls = self.opcode_class(opcode)
        if cls == NO_CLASS or cls not in self._types_by_class:
            return frozenset()
        found = set()
        for q in operands:
            for ti, inst in self._by_qubit.get(q, ()):
                itype = self.instrument_types[ti]
                if itype.opcode_class == cls:
                    found.add((itype.name, inst))
        return frozenset(found)

    def digest(self) -> str:
        """Stable hash of the configuration, used to tag serialized schedules."""
        payload = json.dumps(to_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def instruments_for(gate, platform: PlatformConfig) -> frozenset[tuple[str, int]]:
    """Instrument instances a gate occupies: same class and a connected operand."""
    return platform.instruments_for_op(gate.opcode, gate.operands)


def _positive_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise PlatformError(f"{what} must be a positive integer, got {value!r}")
    return value


def _parse_type(name: str, block: dict) -> InstrumentType:
    if not isinstance(block, dict):
        raise PlatformError(f"resource {name!r} must be an object")
    count = _positive_int(block.get("count"), f"{name}.count")
    raw_map = block.get("connection_map")
    if not isinstance(raw_map, dict):
        raise PlatformError(f"{name}: missing connection_map")
    try:
        cmap = {int(k): v for k, v in raw_map.items()}
    except ValueError as exc:
        raise PlatformError(f"{name}: connection_map keys must be integers") from exc
    if sorted(cmap) != list(range(count)):
        raise PlatformError(
            f"{name}: count is {count} but connection_map has keys {sorted(cmap)}"
        )
    conn: dict[int, frozenset[int]] = {}
    seen: dict[int, int] = {}
    for inst in range(count):
        qubits = cmap[inst]
        if not isinstance(qubits, list) or not all(
            isinstance(q, int) and not isinstance(q, bool) for q in qubits
        ):
            raise PlatformError(f"{name}[{inst}]: qubits must be a list of integers")
        for q in qubits:
            if q < 0:
                raise PlatformError(f"{name}[{inst}]: negative qubit index {q}")
            if q in seen and seen[q] != inst:
                raise PlatformError(
                    f"{name}: qubit {q} is connected to instances {seen[q]} and {inst}"
                )
            seen[q] = inst
        conn[inst] = frozenset(qubits)

    default_class, default_rule = KNOWN_TYPES.get(name, (None, StackingRule.EXCLUSIVE))
    opcode_class = block.get("class", default_class)
    if not opcode_class:
        raise PlatformError(f"{name}: unknown instrument type needs a 'class' key")
    try:
        rule = StackingRule(block.get("stacking", default_rule.value))
    except ValueError as exc:
        raise PlatformError(f"{name}: unknown stacking rule {block['stacking']!r}") from exc

    overrides = {}
    for k, v in block.get("max_stacking", {}).items():
        inst = int(k)
        if inst not in conn:
            raise PlatformError(f"{name}: max_stacking names unknown instance {k}")
        overrides[inst] = _positive_int(v, f"{name}.max_stacking[{k}]")
    return InstrumentType(name, count, conn, rule, str(opcode_class), overrides)


def from_dict(data: dict) -> PlatformConfig:
    if not isinstance(data, dict):
        raise PlatformError("platform configuration must be a JSON object")
    res = data.get("resources")
    if not isinstance(res, dict):
        raise PlatformError("missing 'resources' object")
    qubits_block = res.get("qubits")
    if not isinstance(qubits_block, dict):
        raise PlatformError("missing resources.qubits")
    declared = _positive_int(qubits_block.get("count"), "qubits.count")
    cycle = _positive_int(data.get("cycle_time_ns", DEFAULT_CYCLE_TIME_NS), "cycle_time_ns")

    types = tuple(_parse_type(name, block) for name, block in res.items() if name != "qubits")

    used = {q for t in types for qs in t.connection_map.values() for q in qs}
    base = qubits_block.get("base")
    if base is None:
        # OpenQL excerpts sometimes label qubits 1..count; detect that layout
        base = 1 if used and 0 not in used and max(used) == declared else 0
    if base not in (0, 1):
        raise PlatformError(f"qubits.base must be 0 or 1, got {base!r}")
    if base == 1:
        logger.info("platform labels qubits 1..%d", declared)
    qubit_count = declared + base
    for q in sorted(used):
        if q < base or q >= qubit_count:
            raise PlatformError(
                f"qubit {q} in a connection_map is outside {base}..{qubit_count - 1}"
            )

    instructions = {}
    for opcode, spec in data.get("instructions", {}).items():
        if not isinstance(spec, dict):
            raise PlatformError(f"instruction {opcode!r} must be an object")
        dur = spec.get("duration_ns", spec.get("duration"))
        dur = _positive_int(dur, f"instruction {opcode!r} duration_ns")
        instructions[opcode.lower()] = InstructionDef(
            opcode.lower(), dur, str(spec.get("class", NO_CLASS))
        )
    return PlatformConfig(qubit_count, cycle, types, instructions, base, source=data)


def parse_platform(text: str) -> PlatformConfig:
    """Parse a platform JSON document.

    A bare OpenQL fragment starting with ``"resources":`` (as printed in
    documentation) is accepted by wrapping it in braces, and ``, ...``
    elision markers are dropped.
    """
    stripped = re.sub(r",\s*\.\.\.(?=\s*[}\]])", "", text.strip())
    if stripped.startswith('"'):
        stripped = "{" + stripped + "}"
    try:
        data = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise PlatformError(f"invalid JSON: {exc}") from exc
    return from_dict(data)


def load_platform(path: str | Path) -> PlatformConfig:
    return parse_platform(Path(path).read_text())


def default_platform() -> PlatformConfig:
    """The bundled Surface-17 configuration."""
    return parse_platform(resources.files("qsched.data").joinpath("s17.json").read_text())


def to_dict(platform: PlatformConfig) -> dict:
    res: dict = {"qubits": {"count": platform.qubit_count - platform.qubit_base,
                            "base": platform.qubit_base}}
    for t in platform.instrument_types:
        block = {
            "count": t.count,
            "connection_map": {str(i): sorted(t.connection_map[i]) for i in range(t.count)},
            "class": t.opcode_class,
            "stacking": t.stacking_rule.value,
        }
        if t.max_stacking:
            block["max_stacking"] = {str(k): v for k, v in sorted(t.max_stacking.items())}
        res[t.name] = block
    return {
        "cycle_time_ns": platform.cycle_time_ns,
        "resources": res,
        "instructions": {
            op: {"duration_ns": d.duration_ns, "class": d.opcode_class}
            for op, d in sorted(platform.instructions.items())
        },
    }
