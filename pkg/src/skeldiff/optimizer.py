"""Semantics-preserving circuit rewrite passes and optimization levels 0-3.

All passes preserve the statevector up to global phase.  Angle arithmetic:
uncontrolled rotations and cp are reduced modulo 2*pi (rx/ry/rz pick up only a
global sign there; cp is exactly 2*pi-periodic), but controlled rotations are
reduced modulo 4*pi -- crx(theta + 2*pi) differs from crx(theta) by a Z on the
control, which is observable, so folding at 2*pi would miscompile.

A registry of deliberately buggy pass twins (faults) supports harness
self-validation: injecting one must be caught by the differential rules.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import NotUnitary, UnknownFault
from .lang import GATES, Circuit, GateApply
from .simulator import gate_matrix

_ZERO_TOL = 1e-12
TWO_PI = 2 * math.pi
FOUR_PI = 4 * math.pi

SELF_INVERSE = frozenset({"h", "x", "z", "cx", "cz", "swap", "ccx", "cswap"})
CONTROLLED_ROTATIONS = frozenset({"crx", "cry", "crz"})
# diagonal in the computational basis; all of these commute pairwise
Z_DIAGONAL = frozenset({"z", "s", "t", "rz", "cz", "cp", "crz"})
Z_DIAGONAL_1Q = frozenset({"z", "s", "t", "rz"})


def _angle_period(gate: str) -> float:
    return FOUR_PI if gate in CONTROLLED_ROTATIONS else TWO_PI


def _fold_angle(gate: str, angle: float) -> float:
    period = _angle_period(gate)
    folded = angle % period
    if folded > period - _ZERO_TOL:
        folded = 0.0
    return folded


def _is_identity_angle(gate: str, angle: float) -> bool:
    return _fold_angle(gate, angle) < _ZERO_TOL


def _operands_match(a: GateApply, b: GateApply) -> bool:
    """Equal operand lists, treating the gate's symmetric groups as sets."""
    if a.gate != b.gate or len(a.qubits) != len(b.qubits):
        return False
    info = GATES[a.gate]
    grouped = set()
    for group in info.symmetric_groups:
        if sorted(a.qubits[i] for i in group) != sorted(b.qubits[i] for i in group):
            return False
        grouped.update(group)
    return all(a.qubits[i] == b.qubits[i]
               for i in range(info.arity) if i not in grouped)


# ---------------------------------------------------------------------------
# Individual passes


def drop_identity_rotations(c: Circuit) -> Circuit:
    """Remove parameterized gates whose folded angle is zero."""
    ops = tuple(op for op in c.ops
                if op.angle is None or not _is_identity_angle(op.gate, op.angle))
    return replace(c, ops=ops)


def _cancels(a: GateApply, b: GateApply) -> bool:
    if not _operands_match(a, b):
        return False
    if a.gate in SELF_INVERSE:
        return True
    if a.angle is not None:
        return _is_identity_angle(a.gate, a.angle + b.angle)
    return False


def cancel_inverses(c: Circuit) -> Circuit:
    """Cancel adjacent self-inverse pairs and zero-sum rotation pairs."""
    out: list[GateApply] = []
    for op in c.ops:
        if out and _cancels(out[-1], op):
            out.pop()
        else:
            out.append(op)
    return replace(c, ops=tuple(out))


def merge_rotations(c: Circuit) -> Circuit:
    """Fuse adjacent same-kind, same-operand rotations by angle addition."""
    out: list[GateApply] = []
    for op in c.ops:
        if (out and op.angle is not None and out[-1].gate == op.gate
                and out[-1].qubits == op.qubits):
            merged = _fold_angle(op.gate, out[-1].angle + op.angle)
            out.pop()
            if merged >= _ZERO_TOL:
                out.append(replace(op, angle=merged))
        else:
            out.append(op)
    return replace(c, ops=tuple(out))


def _commutes(a: GateApply, b: GateApply) -> bool:
    """Fixed sound fact table; False means 'unknown', not 'anti-commutes'."""
    if not set(a.qubits) & set(b.qubits):
        return True
    if a.gate in Z_DIAGONAL and b.gate in Z_DIAGONAL:
        return True
    for one, two in ((a, b), (b, a)):
        if one.gate in Z_DIAGONAL_1Q and two.gate in ("cx", "ccx"):
            controls = two.qubits[:-1]
            if one.qubits[0] in controls and one.qubits[0] not in two.qubits[-1:]:
                return True
    return False


def _slide_cancel(c: Circuit, commutes: Callable[[GateApply, GateApply], bool]) -> Circuit:
    """Cancel/merge partner pairs separated only by commuting gates."""
    ops = list(c.ops)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(ops):
            a = ops[i]
            j = i + 1
            while j < len(ops):
                b = ops[j]
                mergeable = (a.angle is not None and b.gate == a.gate
                             and b.qubits == a.qubits)
                cancellable = a.gate in SELF_INVERSE and _operands_match(a, b)
                if mergeable or cancellable:
                    if cancellable:
                        del ops[j]
                        del ops[i]
                    else:
                        merged = _fold_angle(a.gate, a.angle + b.angle)
                        if merged < _ZERO_TOL:
                            del ops[j]
                            del ops[i]
                        else:
                            ops[j] = replace(b, angle=merged)
                            del ops[i]
                    changed = True
                    break
                if not commutes(a, b):
                    break
                j += 1
            else:
                i += 1
                continue
            if changed:
                break
            i += 1
    return replace(c, ops=tuple(ops))


def commutative_cancellation(c: Circuit) -> Circuit:
    """Slide gates together across commuting neighbours, then cancel/merge."""
    out = _slide_cancel(c, _commutes)
    out = merge_rotations(out)
    return cancel_inverses(out)


def zyz_decompose(u: np.ndarray) -> tuple[float, float, float, float]:
    """Factor a 2x2 unitary as e^{i a} Rz(b) Ry(g) Rz(d), g in [0, pi]."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise NotUnitary(f"expected a 2x2 matrix, got {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(2)))
    if err > 1e-10:
        raise NotUnitary(f"matrix is not unitary within 1e-10 (error {err:.2e})")

    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    alpha = cmath.phase(det) / 2
    v = u * cmath.exp(-1j * alpha)
    gamma = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[1, 0]) < 1e-12:  # diagonal: only beta+delta is determined
        beta = 2 * cmath.phase(v[1, 1])
        delta = 0.0
    elif abs(v[0, 0]) < 1e-12:  # anti-diagonal: only beta-delta is determined
        beta = 2 * cmath.phase(v[1, 0])
        delta = 0.0
    else:
        beta = cmath.phase(v[1, 0]) - cmath.phase(v[0, 0])
        delta = -cmath.phase(v[1, 0]) - cmath.phase(v[0, 0])
    return alpha, beta, gamma, delta


def resynthesize_1q(c: Circuit) -> Circuit:
    """Collapse every run of >= 3 single-qubit gates on one qubit into the
    Rz-Ry-Rz form of its product (global phase discarded)."""
    runs: list[list[int]] = []
    open_runs: dict[int, list[int]] = {}

    def close(q):
        run = open_runs.pop(q, None)
        if run and len(run) >= 3:
            runs.append(run)

    for idx, op in enumerate(c.ops):
        if len(op.qubits) == 1:
            open_runs.setdefault(op.qubits[0], []).append(idx)
        else:
            for q in op.qubits:
                close(q)
    for q in list(open_runs):
        close(q)
    if not runs:
        return c

    replacement: dict[int, list[GateApply]] = {}
    dropped: set[int] = set()
    for run in runs:
        u = np.eye(2, dtype=complex)
        for idx in run:
            op = c.ops[idx]
            u = gate_matrix(op.gate, op.angle) @ u
        _, beta, gamma, delta = zyz_decompose(u)
        q = c.ops[run[0]].qubits
        replacement[run[0]] = [
            GateApply("rz", _fold_angle("rz", delta), q),
            GateApply("ry", _fold_angle("ry", gamma), q),
            GateApply("rz", _fold_angle("rz", beta), q),
        ]
        dropped.update(run[1:])

    out: list[GateApply] = []
    for idx, op in enumerate(c.ops):
        if idx in replacement:
            out.extend(replacement[idx])
        elif idx not in dropped:
            out.append(op)
    return replace(c, ops=tuple(out))


# ---------------------------------------------------------------------------
# Pipelines


@dataclass(frozen=True)
class Pass:
    name: str
    rewrite: Callable[[Circuit], Circuit]


@dataclass(frozen=True)
class Pipeline:
    level: int
    passes: tuple[Pass, ...]

    def run(self, c: Circuit, max_rounds: int = 100) -> Circuit:
        # cumulative: settle each level's pass prefix before enabling the next,
        # so gate counts can only go down as the level rises
        x = c
        for k in range(1, self.level + 1):
            stage = self.passes[:_LEVEL_PREFIX[k]]
            for _ in range(max_rounds):
                before = x
                for p in stage:
                    x = p.rewrite(x)
                if x == before:
                    break
        return x

    def run_traced(self, c: Circuit) -> tuple[Circuit, list[dict]]:
        trace = []
        x = c
        for k in range(1, self.level + 1):
            stage = self.passes[:_LEVEL_PREFIX[k]]
            for _ in range(100):
                before = x
                for p in stage:
                    n_before = len(x)
                    x = p.rewrite(x)
                    trace.append({"level": k, "pass": p.name,
                                  "before": n_before, "after": len(x)})
                if x == before:
                    break
        return x, trace


_PASS_ORDER = ("drop_identity_rotations", "cancel_inverses",
               "merge_rotations", "commutative_cancellation", "resynthesize_1q")
_LEVEL_PREFIX = {1: 2, 2: 4, 3: 5}
_PASS_FUNCS: dict[str, Callable[[Circuit], Circuit]] = {
    "drop_identity_rotations": drop_identity_rotations,
    "cancel_inverses": cancel_inverses,
    "merge_rotations": merge_rotations,
    "commutative_cancellation": commutative_cancellation,
    "resynthesize_1q": resynthesize_1q,
}


def pipeline(level: int) -> Pipeline:
    if level not in (0, 1, 2, 3):
        raise ValueError(f"optimization level must be 0..3, got {level}")
    if level == 0:
        return Pipeline(0, ())
    names = _PASS_ORDER[:_LEVEL_PREFIX[level]]
    return Pipeline(level, tuple(Pass(n, _PASS_FUNCS[n]) for n in names))


def optimize(c: Circuit, level: int) -> Circuit:
    return pipeline(level).run(c)


# ---------------------------------------------------------------------------
# Fault registry


def _buggy_merge_crz_sign(c: Circuit) -> Circuit:
    """merge_rotations twin that negates the merged angle for crz pairs."""
    out: list[GateApply] = []
    for op in c.ops:
        if (out and op.angle is not None and out[-1].gate == op.gate
                and out[-1].qubits == op.qubits):
            total = out[-1].angle + op.angle
            if op.gate == "crz":
                total = -total
            merged = _fold_angle(op.gate, total)
            out.pop()
            if merged >= _ZERO_TOL:
                out.append(replace(op, angle=merged))
        else:
            out.append(op)
    return replace(c, ops=tuple(out))


def _buggy_cancel_drop_t(c: Circuit) -> Circuit:
    """cancel_inverses twin whose cancellation table wrongly lists t as a
    no-op, so every t gate is deleted outright."""
    stripped = replace(c, ops=tuple(op for op in c.ops if op.gate != "t"))
    return cancel_inverses(stripped)


def _buggy_commute_x_through_control(a: GateApply, b: GateApply) -> bool:
    if _commutes(a, b):
        return True
    for one, two in ((a, b), (b, a)):
        if one.gate == "x" and two.gate == "cx" and one.qubits[0] == two.qubits[0]:
            return True
    return False


def _buggy_commutative_cancellation(c: Circuit) -> Circuit:
    out = _slide_cancel(c, _buggy_commute_x_through_control)
    out = merge_rotations(out)
    return cancel_inverses(out)


@dataclass(frozen=True)
class FaultSpec:
    fault_id: str
    pass_name: str
    buggy: Callable[[Circuit], Circuit]
    witness: Circuit  # a circuit whose semantics the fault changes


FAULTS: dict[str, FaultSpec] = {
    "FAULT_CRZ_SIGN": FaultSpec(
        "FAULT_CRZ_SIGN", "merge_rotations", _buggy_merge_crz_sign,
        Circuit(2, (
            GateApply("h", None, (0,)),
            GateApply("h", None, (1,)),
            GateApply("crz", 0.4, (0, 1)),
            GateApply("crz", 0.4, (0, 1)),
        ))),
    "FAULT_DROP_T": FaultSpec(
        "FAULT_DROP_T", "cancel_inverses", _buggy_cancel_drop_t,
        Circuit(1, (
            GateApply("h", None, (0,)),
            GateApply("t", None, (0,)),
        ))),
    "FAULT_BAD_COMMUTE": FaultSpec(
        "FAULT_BAD_COMMUTE", "commutative_cancellation",
        _buggy_commutative_cancellation,
        Circuit(2, (
            GateApply("x", None, (0,)),
            GateApply("cx", None, (0, 1)),
            GateApply("x", None, (0,)),
        ))),
}


def inject_fault(pipe: Pipeline, fault: str) -> Pipeline:
    """Replace the targeted pass by its buggy twin (no-op if the pass is not
    part of this pipeline's level)."""
    spec = FAULTS.get(fault)
    if spec is None:
        raise UnknownFault(f"unknown fault {fault!r}")
    passes = tuple(
        Pass(p.name, spec.buggy) if p.name == spec.pass_name else p
        for p in pipe.passes)
    return replace(pipe, passes=passes)
