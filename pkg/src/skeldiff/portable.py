"""Portable JSON encodings of circuits and statevectors.

This is the interchange surface: `export` writes it, artifacts use it, and the
external adapter consumes it over stdio.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError
from .lang import Circuit, GateApply, validate_circuit
from .simulator import Statevector


def circuit_to_dict(c: Circuit) -> dict:
    ops = []
    for op in c.ops:
        entry: dict = {"gate": op.gate, "qubits": list(op.qubits)}
        if op.angle is not None:
            entry["angle"] = op.angle
        ops.append(entry)
    return {"n": c.qubit_count, "ops": ops}


def circuit_from_dict(d: dict) -> Circuit:
    try:
        ops = tuple(
            GateApply(entry["gate"], entry.get("angle"),
                      tuple(int(q) for q in entry["qubits"]))
            for entry in d["ops"])
        c = Circuit(int(d["n"]), ops)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed circuit dict: {exc}", 0)
    validate_circuit(c)
    return c


def write_json(path: Path | str, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: Path | str) -> dict:
    return json.loads(Path(path).read_text())


def write_circuit(path: Path | str, c: Circuit) -> None:
    write_json(path, circuit_to_dict(c))


def read_circuit(path: Path | str) -> Circuit:
    return circuit_from_dict(read_json(path))


def write_statevector(path: Path | str, sv: Statevector) -> None:
    write_json(path, sv.to_json_dict())


def read_statevector(path: Path | str) -> Statevector:
    return Statevector.from_json_dict(read_json(path))
