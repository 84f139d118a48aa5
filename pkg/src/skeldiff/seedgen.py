"""Structured random seed programs.

Replaces hand-prompted program collection with a deterministic generator:
every seed parses, validates, and lowers within fuel; contains at least one
conditional or loop; sticks to the supported gate palette; and keeps the
classical and quantum statement counts within 30% of each other.  While loops
always use a syntactically decrementing counter guard so the seed itself
terminates (enumerated variants may still diverge and burn their fuel).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources

from . import lang
from .enumeration import TWO_PI
from .errors import GenerationRetryExhausted, SkeldiffError
from .lang import GATES, Program

_VAR_NAMES = ("a", "b", "c", "d")


@dataclass(frozen=True)
class SeedParams:
    qubit_count: int = 5
    min_lines: int = 35
    max_lines: int = 56
    min_variables: int = 2
    max_variables: int = 4
    max_depth: int = 2
    gates: tuple[str, ...] = tuple(GATES)
    control_probability: float = 0.22
    rng_seed: int = 0

    def __post_init__(self):
        if not 10 <= self.min_lines <= self.max_lines <= 120:
            raise ValueError("line range must sit within [10, 120]")
        if not 1 <= self.qubit_count <= lang.MAX_QUBITS:
            raise ValueError(f"qubit_count must be within [1, {lang.MAX_QUBITS}]")
        if not 1 <= self.min_variables <= self.max_variables <= len(_VAR_NAMES):
            raise ValueError("variable count range must sit within [1, 4]")
        for g in self.gates:
            if g not in GATES:
                raise ValueError(f"unknown gate {g!r} in palette")


class _Generator:
    def __init__(self, params: SeedParams, rng: random.Random):
        self.p = params
        self.rng = rng
        self.nvars = rng.randint(params.min_variables, params.max_variables)
        self.vars = _VAR_NAMES[: self.nvars]
        self.palette = [g for g in params.gates
                        if GATES[g].arity <= params.qubit_count]
        self.assign_count = 0
        self.gate_count = 0
        self.control_count = 0

    def _expr(self):
        rng = self.rng
        v = lang.Var(rng.choice(self.vars))
        roll = rng.random()
        if roll < 0.3:
            return lang.IntLit(rng.randint(0, 7))
        if roll < 0.55:
            return v
        op = rng.choice(("+", "-", "*"))
        rhs = (lang.IntLit(rng.randint(1, 5)) if rng.random() < 0.6
               else lang.Var(rng.choice(self.vars)))
        return lang.BinOp(op, v, rhs)

    def _cond(self):
        rng = self.rng
        v = lang.Var(rng.choice(self.vars))
        roll = rng.random()
        if roll < 0.4:
            return v
        op = rng.choice(("<", "<=", "==", "!="))
        return lang.BinOp(op, v, lang.IntLit(rng.randint(0, 5)))

    def _assign(self, forbidden: frozenset[str]):
        candidates = [v for v in self.vars if v not in forbidden]
        if not candidates:
            return self._gate()
        self.assign_count += 1
        return lang.Assign(self.rng.choice(candidates), self._expr())

    def _gate(self):
        rng = self.rng
        name = rng.choice(self.palette)
        info = GATES[name]
        qubits = tuple(rng.sample(range(self.p.qubit_count), info.arity))
        angle = round(rng.random() * TWO_PI, 6) if info.parameterized else None
        self.gate_count += 1
        return lang.GateApply(name, angle, qubits)

    def _leaf(self, forbidden: frozenset[str]):
        # steer the classical/quantum statement balance toward 1:1
        if self.assign_count > self.gate_count + 1:
            return self._gate()
        if self.gate_count > self.assign_count + 1:
            return self._assign(forbidden)
        return self._gate() if self.rng.random() < 0.5 else self._assign(forbidden)

    def _while(self, line_budget: int, depth: int,
               forbidden: frozenset[str]) -> tuple[list, int]:
        # counter pattern: v = K; while 0 < v { ... v = v - 1 }
        rng = self.rng
        candidates = [v for v in self.vars if v not in forbidden]
        if not candidates:
            return self._if(line_budget, depth, forbidden)
        counter = rng.choice(candidates)
        body_budget = min(line_budget - 4, rng.randint(1, 6))
        body = self._block(body_budget, depth + 1, forbidden | {counter})
        body.append(lang.Assign(counter, lang.BinOp("-", lang.Var(counter),
                                                    lang.IntLit(1))))
        self.assign_count += 2
        self.control_count += 1
        init = lang.Assign(counter, lang.IntLit(rng.randint(2, 6)))
        loop = lang.While(lang.BinOp("<", lang.IntLit(0), lang.Var(counter)),
                          tuple(body))
        lines = 4 + sum(_stmt_lines(s) for s in body)
        return [init, loop], lines

    def _if(self, line_budget: int, depth: int,
            forbidden: frozenset[str]) -> tuple[list, int]:
        body_budget = min(line_budget - 2, self.rng.randint(1, 7))
        body = self._block(body_budget, depth + 1, forbidden)
        self.control_count += 1
        stmt = lang.If(self._cond(), tuple(body))
        return [stmt], 2 + sum(_stmt_lines(s) for s in body)

    def _block(self, line_budget: int, depth: int,
               forbidden: frozenset[str] = frozenset()) -> list:
        stmts = []
        remaining = line_budget
        while remaining > 0:
            rng = self.rng
            if (remaining >= 5 and depth < self.p.max_depth
                    and rng.random() < self.p.control_probability):
                if rng.random() < 0.5:
                    new, used = self._while(remaining, depth, forbidden)
                else:
                    new, used = self._if(remaining, depth, forbidden)
                stmts.extend(new)
                remaining -= used
            else:
                stmts.append(self._leaf(forbidden))
                remaining -= 1
        return stmts

    def build(self, name: str) -> Program:
        target = self.rng.randint(self.p.min_lines, self.p.max_lines)
        body = [lang.Assign(v, lang.IntLit(self.rng.randint(0, 3)))
                for v in self.vars]
        self.assign_count = len(body)
        body.extend(self._block(target - 1 - len(body), 0))
        if self.control_count == 0:
            extra, _ = self._if(7, 0, frozenset())
            body.extend(extra)
        return Program(name, self.p.qubit_count, tuple(body))


def _stmt_lines(s) -> int:
    if isinstance(s, (lang.If, lang.While)):
        return 2 + sum(_stmt_lines(x) for x in s.body)
    return 1


def generate_seed(params: SeedParams, name: str | None = None,
                  retries: int = 64) -> Program:
    """Deterministic in (params, name); retries internally until every
    post-condition holds."""
    base = random.Random(params.rng_seed if name is None
                         else f"{params.rng_seed}:{name}")
    for attempt in range(retries):
        rng = random.Random(base.getrandbits(64))
        gen = _Generator(params, rng)
        program = gen.build(name or f"seed_{params.rng_seed:02d}")
        text = lang.render(program)
        lines = text.count("\n")
        if not params.min_lines <= lines <= params.max_lines:
            continue
        if gen.control_count == 0 or gen.gate_count == 0:
            continue
        ratio = gen.assign_count / gen.gate_count
        if not 0.7 <= ratio <= 1.3:
            continue
        try:
            parsed = lang.parse(text, program.name)
            lang.lower(parsed, lang.DEFAULT_FUEL)
        except SkeldiffError:
            continue
        return parsed
    raise GenerationRetryExhausted(
        f"no valid seed after {retries} attempts (params {params})")


def load_builtin_seeds() -> list[tuple[str, str]]:
    """The five hand-written seed programs shipped with the package."""
    out = []
    root = resources.files("skeldiff").joinpath("seeds")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".qh"):
            out.append((entry.name[:-3], entry.read_text()))
    return out


def default_corpus(generated: int = 15, params: SeedParams | None = None
                   ) -> list[tuple[str, str]]:
    """5 hand-written + `generated` synthesized seeds, as (name, source)."""
    corpus = load_builtin_seeds()
    base = params or SeedParams()
    for i in range(1, generated + 1):
        p = SeedParams(**{**vars(base), "rng_seed": i})
        name = f"gen_{i:02d}"
        corpus.append((name, lang.render(generate_seed(p, name))))
    return corpus
