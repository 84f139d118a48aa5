"""Closure-compiled execution of skeleton variants.

`enumerate_variants` has to lower thousands of hole fillings of one skeleton,
and most of the cost is classical interpretation (dead variants burn their
whole fuel budget).  Compiling the skeleton once into closures, with hole
fillings supplied as per-variant arrays, skips re-building and re-walking a
Program AST per variant.  Semantics (fuel accounting, zero-on-scope-entry,
dead-loop snapshots) mirror `lang.lower` exactly; a property test holds the
two implementations together.
"""
from __future__ import annotations

from typing import Callable

from .errors import FuelExhausted
from .lang import (
    Assign,
    BinOp,
    Circuit,
    GateApply,
    If,
    IntLit,
    Neg,
    Var,
    While,
    wrap64,
)
from .skeleton import Skeleton


class _Ctx:
    __slots__ = ("v", "slot_of_hole", "ops", "site_ops", "zero", "snap", "fuel")


def _out_of_fuel(ctx) -> bool:
    ctx.fuel -= 1
    return ctx.fuel < 0


def _compile_expr(e, hole_ids: list[int], pos: list[int]) -> Callable:
    if isinstance(e, IntLit):
        val = wrap64(e.value)
        return lambda v, s: val
    if isinstance(e, Var):
        h = hole_ids[pos[0]]
        pos[0] += 1
        return lambda v, s, h=h: v[s[h]]
    if isinstance(e, Neg):
        f = _compile_expr(e.operand, hole_ids, pos)
        return lambda v, s: wrap64(-f(v, s))
    assert isinstance(e, BinOp)
    lf = _compile_expr(e.lhs, hole_ids, pos)
    rf = _compile_expr(e.rhs, hole_ids, pos)
    op = e.op
    if op == "+":
        return lambda v, s: wrap64(lf(v, s) + rf(v, s))
    if op == "-":
        return lambda v, s: wrap64(lf(v, s) - rf(v, s))
    if op == "*":
        return lambda v, s: wrap64(lf(v, s) * rf(v, s))
    if op == "<":
        return lambda v, s: int(lf(v, s) < rf(v, s))
    if op == "<=":
        return lambda v, s: int(lf(v, s) <= rf(v, s))
    if op == "==":
        return lambda v, s: int(lf(v, s) == rf(v, s))
    return lambda v, s: int(lf(v, s) != rf(v, s))


class CompiledSkeleton:
    """One-time compilation of a skeleton; `execute` runs one hole filling."""

    def __init__(self, sk: Skeleton):
        self.sk = sk
        scopes = sk.scopes
        self.var_slot = {}
        for scope in scopes.scopes:
            for name in scope.variables:
                self.var_slot[name] = len(self.var_slot)
        self.hole_count = len(sk.classical_holes)
        self.def_holes = [(h.id, h.scope_id) for h in sk.classical_holes
                          if h.role == "def"]

        self._holes_by_stmt: dict[tuple, dict] = {}
        for h in sk.classical_holes:
            entry = self._holes_by_stmt.setdefault(
                h.path, {"target": None, "expr": [], "cond": []})
            if h.site == ("target",):
                entry["target"] = h.id
            else:
                entry[h.site[0]].append((h.site[1], h.id))

        self._scope_to_block: dict[int, int] = {}
        self._block_paths: list[tuple] = []
        for path, sid in scopes.block_scopes.items():
            if path == ():
                continue
            self._scope_to_block[sid] = len(self._block_paths)
            self._block_paths.append(path)

        self._sites: list[dict] = []
        angle_by_path = {h.path: h for h in sk.angle_holes}
        qubits_by_path: dict[tuple, list] = {}
        for h in sk.qubit_holes:
            qubits_by_path.setdefault(h.path, []).append(h)

        def stmt_holes(path, kind):
            entry = self._holes_by_stmt.get(path)
            if entry is None:
                return []
            return [hid for _, hid in sorted(entry[kind])]

        def compile_block(stmts, path) -> tuple:
            compiled = []
            for idx, stmt in enumerate(stmts):
                spath = path + (idx,)
                if isinstance(stmt, Assign):
                    target = self._holes_by_stmt[spath]["target"]
                    ef = _compile_expr(stmt.expr, stmt_holes(spath, "expr"), [0])

                    def fn(ctx, t=target, ef=ef):
                        if _out_of_fuel(ctx):
                            raise FuelExhausted("out of fuel")
                        s = ctx.slot_of_hole
                        ctx.v[s[t]] = ef(ctx.v, s)

                elif isinstance(stmt, GateApply):
                    site = len(self._sites)
                    qholes = sorted(qubits_by_path.get(spath, []),
                                    key=lambda h: h.slot)
                    self._sites.append({
                        "gate": stmt.gate,
                        "angle_hole": (angle_by_path[spath].id
                                       if spath in angle_by_path else None),
                        "qubit_holes": [h.id for h in qholes],
                    })

                    def fn(ctx, i=site):
                        if _out_of_fuel(ctx):
                            raise FuelExhausted("out of fuel")
                        ctx.ops.append(ctx.site_ops[i])

                elif isinstance(stmt, If):
                    ef = _compile_expr(stmt.cond, stmt_holes(spath, "cond"), [0])
                    body = compile_block(stmt.body, spath)
                    block = self._scope_to_block[scopes.block_scopes[spath]]

                    def fn(ctx, ef=ef, body=body, block=block):
                        if _out_of_fuel(ctx):
                            raise FuelExhausted("out of fuel")
                        if ef(ctx.v, ctx.slot_of_hole):
                            for z in ctx.zero[block]:
                                ctx.v[z] = 0
                            for f in body:
                                f(ctx)

                else:  # While
                    ef = _compile_expr(stmt.cond, stmt_holes(spath, "cond"), [0])
                    body = compile_block(stmt.body, spath)
                    block = self._scope_to_block[scopes.block_scopes[spath]]

                    def fn(ctx, ef=ef, body=body, block=block):
                        if _out_of_fuel(ctx):
                            raise FuelExhausted("out of fuel")
                        s = ctx.slot_of_hole
                        if not ef(ctx.v, s):
                            return
                        seen = set()
                        while True:
                            snapshot = tuple(ctx.v[i] for i in ctx.snap)
                            if snapshot in seen:
                                raise FuelExhausted(
                                    "dead loop: classical state recurred")
                            seen.add(snapshot)
                            for z in ctx.zero[block]:
                                ctx.v[z] = 0
                            for f in body:
                                f(ctx)
                            ctx.fuel -= 1
                            if ctx.fuel < 0:
                                raise FuelExhausted("out of fuel")
                            if not ef(ctx.v, s):
                                return

                compiled.append(fn)
            return tuple(compiled)

        self._top = compile_block(sk.program.body, ())

    def execute_trace(self, classical: dict[int, str], fuel: int) -> list[int]:
        """Interpret the classical half of one classical filling and return
        the executed gate-site index sequence.  The control flow does not
        depend on angle or qubit fills, so one trace serves every quantum
        instantiation of this classical assignment."""
        ctx = _Ctx()
        slot_of_hole = [0] * (self.hole_count + 1)
        for hid, name in classical.items():
            slot_of_hole[hid] = self.var_slot[name]
        ctx.slot_of_hole = slot_of_hole
        ctx.v = [0] * len(self.var_slot)
        ctx.ops = []
        ctx.fuel = fuel
        ctx.site_ops = range(len(self._sites))  # trace records site indices
        # ownership in this variant: scope of each variable's first def fill
        owner: dict[str, int] = {}
        for hid, scope_id in self.def_holes:
            name = classical[hid]
            if name not in owner:
                owner[name] = scope_id
        zero: list[list[int]] = [[] for _ in self._block_paths]
        for name, scope_id in owner.items():
            block = self._scope_to_block.get(scope_id)
            if block is not None:
                zero[block].append(self.var_slot[name])
        ctx.zero = [sorted(z) for z in zero]
        ctx.snap = [self.var_slot[name] for name in sorted(owner)]
        for f in self._top:
            f(ctx)
        return ctx.ops

    def trace_ops(self, trace: list[int], angles: dict[int, float],
                  qubits: dict[int, int]) -> Circuit:
        """Instantiate a recorded trace with concrete angle and qubit fills."""
        site_ops = [
            GateApply(site["gate"],
                      angles[site["angle_hole"]]
                      if site["angle_hole"] is not None else None,
                      tuple(qubits[h] for h in site["qubit_holes"]))
            for site in self._sites
        ]
        return Circuit(self.sk.program.qubit_count,
                       tuple(site_ops[i] for i in trace))

    def execute(self, classical: dict[int, str], angles: dict[int, float],
                qubits: dict[int, int], fuel: int) -> Circuit:
        """Run one hole filling; equivalent to fill_holes + lang.lower."""
        return self.trace_ops(self.execute_trace(classical, fuel), angles, qubits)
