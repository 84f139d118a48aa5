"""Seeded random circuits for fuzz-style checks and self-tests."""
from __future__ import annotations

import random

from .enumeration import TWO_PI
from .lang import GATES, Circuit, GateApply


def random_circuit(
    rng: random.Random,
    max_qubits: int = 6,
    max_gates: int = 60,
    min_qubits: int = 1,
    gates: tuple[str, ...] | None = None,
) -> Circuit:
    n = rng.randint(min_qubits, max_qubits)
    palette = [g for g in (gates or tuple(GATES)) if GATES[g].arity <= n]
    length = rng.randint(0, max_gates)
    ops = []
    for _ in range(length):
        name = rng.choice(palette)
        info = GATES[name]
        qubits = tuple(rng.sample(range(n), info.arity))
        angle = rng.random() * TWO_PI if info.parameterized else None
        ops.append(GateApply(name, angle, qubits))
    return Circuit(n, tuple(ops))
