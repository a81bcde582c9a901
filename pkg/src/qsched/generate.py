"""Seeded random circuits on a platform's qubits."""

from __future__ import annotations

import random

from .circuit import Circuit
from .platform import PlatformConfig

TWO_QUBIT_OPS = frozenset({"cnot", "cz", "cx", "swap"})

DEFAULT_MIX = {"x": 0.2, "y": 0.15, "z": 0.1, "h": 0.15, "cnot": 0.25, "measure": 0.15}


def random_circuit(n_gates: int, platform: PlatformConfig, qubits: int | None = None,
                   mix: dict[str, float] | None = None, seed: int = 0) -> Circuit:
    """Draw ``n_gates`` gates over the first ``qubits`` usable platform qubits."""
    labels = platform.qubits
    if qubits is None:
        qubits = len(labels)
    if qubits > len(labels):
        raise ValueError(f"{qubits} qubits requested, platform has {len(labels)}")
    if qubits < 1:
        raise ValueError("need at least one qubit")
    labels = labels[:qubits]
    mix = dict(mix or DEFAULT_MIX)
    if qubits < 2:
        mix = {op: w for op, w in mix.items() if op not in TWO_QUBIT_OPS}
    if not mix or sum(mix.values()) <= 0:
        raise ValueError("opcode mix is empty")
    rng = random.Random(seed)
    ops, weights = zip(*sorted(mix.items()))
    gates = []
    for _ in range(n_gates):
        op = rng.choices(ops, weights)[0]
        arity = 2 if op in TWO_QUBIT_OPS else 1
        gates.append((op, tuple(rng.sample(labels, arity))))
    return Circuit.from_ops(gates, platform.qubit_count)


def parse_mix(text: str) -> dict[str, float]:
    """``"x:0.5,measure:0.5"`` -> ``{"x": 0.5, "measure": 0.5}``."""
    mix = {}
    for part in text.split(","):
        op, sep, weight = part.partition(":")
        if not sep:
            raise ValueError(f"bad opcode mix entry {part!r}")
        mix[op.strip().lower()] = float(weight)
    return mix
