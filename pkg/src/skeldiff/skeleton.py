"""Hole-annotated program skeletons.

Three hole kinds, each numbered 1-based in program order within its kind:
classical-variable occurrences (both definition and use sites), rotation-angle
literals, and qubit operand literals.  The seed's own literals are retained as
the reference assignment, so refilling with it reproduces the seed exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from . import lang
from .errors import IncompleteAssignment
from .lang import Assign, BinOp, Expr, GateApply, If, Neg, Program, Var, While


@dataclass(frozen=True)
class ClassicalHole:
    id: int
    scope_id: int
    path: tuple[int, ...]  # statement path into nested bodies
    site: tuple  # ("target",) | ("expr", k) | ("cond", k) for k-th var occurrence
    role: str  # "def" | "use"
    original: str


@dataclass(frozen=True)
class AngleHole:
    id: int
    path: tuple[int, ...]
    original: float


@dataclass(frozen=True)
class QubitHole:
    id: int
    path: tuple[int, ...]
    slot: int
    slot_role: str  # "control" | "target"
    original: int


@dataclass(frozen=True)
class Skeleton:
    program: Program
    scopes: lang.ScopeTree
    classical_holes: tuple[ClassicalHole, ...]
    angle_holes: tuple[AngleHole, ...]
    qubit_holes: tuple[QubitHole, ...]

    def reference_classical(self) -> dict[int, str]:
        return {h.id: h.original for h in self.classical_holes}

    def reference_quantum(self) -> "QuantumAssignment":
        from .enumeration import QuantumAssignment

        return QuantumAssignment(
            angles={h.id: h.original for h in self.angle_holes},
            qubits={h.id: h.original for h in self.qubit_holes},
        )


def _expr_vars(e: Expr) -> list[str]:
    """Variable names in in-order (left-to-right) traversal."""
    if isinstance(e, Var):
        return [e.name]
    if isinstance(e, Neg):
        return _expr_vars(e.operand)
    if isinstance(e, BinOp):
        return _expr_vars(e.lhs) + _expr_vars(e.rhs)
    return []


def extract(p: Program) -> Skeleton:
    """Extract every hole of a valid program, in program order."""
    scopes = lang.analyze_scopes(p)
    classical: list[ClassicalHole] = []
    angles: list[AngleHole] = []
    qubits: list[QubitHole] = []

    def add_classical(scope_id, path, site, role, name):
        classical.append(
            ClassicalHole(len(classical) + 1, scope_id, path, site, role, name))

    def walk(stmts, scope_id, path):
        for idx, s in enumerate(stmts):
            spath = path + (idx,)
            if isinstance(s, Assign):
                add_classical(scope_id, spath, ("target",), "def", s.var)
                for k, name in enumerate(_expr_vars(s.expr)):
                    add_classical(scope_id, spath, ("expr", k), "use", name)
            elif isinstance(s, GateApply):
                if s.angle is not None:
                    angles.append(AngleHole(len(angles) + 1, spath, s.angle))
                roles = lang.GATES[s.gate].roles
                for slot, q in enumerate(s.qubits):
                    qubits.append(
                        QubitHole(len(qubits) + 1, spath, slot, roles[slot], q))
            else:  # If / While: condition belongs to the enclosing scope
                for k, name in enumerate(_expr_vars(s.cond)):
                    add_classical(scope_id, spath, ("cond", k), "use", name)
                walk(s.body, scopes.block_scopes[spath], spath)

    walk(p.body, 0, ())
    return Skeleton(p, scopes, tuple(classical), tuple(angles), tuple(qubits))


def _sub_vars(e: Expr, names: list[str], pos: list[int]) -> Expr:
    if isinstance(e, Var):
        name = names[pos[0]]
        pos[0] += 1
        return Var(name)
    if isinstance(e, Neg):
        return Neg(_sub_vars(e.operand, names, pos))
    if isinstance(e, BinOp):
        lhs = _sub_vars(e.lhs, names, pos)
        return BinOp(e.op, lhs, _sub_vars(e.rhs, names, pos))
    return e


def fill_holes(sk: Skeleton, classical: dict[int, str], quantum) -> Program:
    """Rebuild a Program from the skeleton plus complete hole assignments."""
    by_stmt_classical: dict[tuple[int, ...], list[ClassicalHole]] = {}
    for h in sk.classical_holes:
        if h.id not in classical:
            raise IncompleteAssignment(f"classical hole {h.id} not assigned")
        by_stmt_classical.setdefault(h.path, []).append(h)
    angle_by_stmt = {}
    for h in sk.angle_holes:
        if h.id not in quantum.angles:
            raise IncompleteAssignment(f"angle hole {h.id} not assigned")
        angle_by_stmt[h.path] = quantum.angles[h.id]
    qubits_by_stmt: dict[tuple[int, ...], dict[int, int]] = {}
    for h in sk.qubit_holes:
        if h.id not in quantum.qubits:
            raise IncompleteAssignment(f"qubit hole {h.id} not assigned")
        qubits_by_stmt.setdefault(h.path, {})[h.slot] = quantum.qubits[h.id]

    def rebuild(stmts, path):
        out = []
        for idx, s in enumerate(stmts):
            spath = path + (idx,)
            holes = by_stmt_classical.get(spath, [])
            if isinstance(s, Assign):
                target = next(h for h in holes if h.site == ("target",))
                uses = [classical[h.id] for h in holes if h.site[0] == "expr"]
                out.append(Assign(classical[target.id], _sub_vars(s.expr, uses, [0])))
            elif isinstance(s, GateApply):
                angle = angle_by_stmt.get(spath, s.angle)
                slot_map = qubits_by_stmt.get(spath, {})
                new_qubits = tuple(
                    slot_map.get(i, q) for i, q in enumerate(s.qubits))
                out.append(GateApply(s.gate, angle, new_qubits))
            else:
                uses = [classical[h.id] for h in holes if h.site[0] == "cond"]
                cond = _sub_vars(s.cond, uses, [0])
                body = tuple(rebuild(s.body, spath))
                out.append(If(cond, body) if isinstance(s, If) else While(cond, body))
        return out

    filled = replace(sk.program, body=tuple(rebuild(sk.program.body, ())))
    lang.validate(filled)
    return filled


def count_holes(sk: Skeleton) -> dict:
    """Per-scope (variables, classical holes) table plus per-kind totals."""
    per_scope = []
    for scope in sk.scopes.scopes:
        holes = [h.id for h in sk.classical_holes if h.scope_id == scope.id]
        per_scope.append({
            "scope": scope.id,
            "variables": len(scope.variables),
            "holes": len(holes),
            "hole_ids": holes,
        })
    return {
        "per_scope": per_scope,
        "classical": len(sk.classical_holes),
        "angle": len(sk.angle_holes),
        "qubit": len(sk.qubit_holes),
    }


_MARKS = {"c": "_c", "a": "_a", "q": "_q"}


class _Marker:
    """Stands in for an int or float literal when rendering hole markers."""

    def __init__(self, text: str):
        self.text = text

    def __repr__(self):
        return self.text

    def __str__(self):
        return self.text


def render_skeleton(sk: Skeleton) -> str:
    """Debug dump with `_c<N>`, `_a<N>`, `_q<N>` hole markers."""
    classical = {h.id: f"{_MARKS['c']}{h.id}" for h in sk.classical_holes}
    angles = {h.id: _Marker(f"{_MARKS['a']}{h.id}") for h in sk.angle_holes}
    qubit_marks = {h.id: _Marker(f"{_MARKS['q']}{h.id}") for h in sk.qubit_holes}

    by_stmt: dict[tuple[int, ...], list[ClassicalHole]] = {}
    for h in sk.classical_holes:
        by_stmt.setdefault(h.path, []).append(h)
    angle_by_stmt = {h.path: angles[h.id] for h in sk.angle_holes}
    qubits_by_stmt: dict[tuple[int, ...], dict[int, object]] = {}
    for h in sk.qubit_holes:
        qubits_by_stmt.setdefault(h.path, {})[h.slot] = qubit_marks[h.id]

    def rebuild(stmts, path):
        out = []
        for idx, s in enumerate(stmts):
            spath = path + (idx,)
            holes = by_stmt.get(spath, [])
            if isinstance(s, Assign):
                target = next(h for h in holes if h.site == ("target",))
                uses = [classical[h.id] for h in holes if h.site[0] == "expr"]
                out.append(Assign(classical[target.id], _sub_vars(s.expr, uses, [0])))
            elif isinstance(s, GateApply):
                angle = angle_by_stmt.get(spath, s.angle)
                slot_map = qubits_by_stmt.get(spath, {})
                out.append(GateApply(
                    s.gate, angle,
                    tuple(slot_map.get(i, q) for i, q in enumerate(s.qubits))))
            else:
                uses = [classical[h.id] for h in holes if h.site[0] == "cond"]
                cond = _sub_vars(s.cond, uses, [0])
                body = tuple(rebuild(s.body, spath))
                out.append(If(cond, body) if isinstance(s, If) else While(cond, body))
        return out

    shadow = replace(sk.program, body=tuple(rebuild(sk.program.body, ())))
    return lang.render(shadow)
