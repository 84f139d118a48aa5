"""Hybrid quantum-classical seed language: AST, parser, renderer, scopes, lowering.

The language is line-oriented.  A program is a `qubits N` header followed by
statements: integer assignments, gate applications, and `if`/`while` blocks
delimited by braces.  Classical variables are signed 64-bit wrapping integers;
any nonzero value is truthy.  Gate angles and qubit operands are literals only,
so the classical half influences quantum behavior solely through control flow.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    FuelExhausted,
    ParseError,
    QubitOperandConflict,
    QubitOutOfRange,
    UnknownGate,
)

MAX_QUBITS = 12  # full-unitary backend needs 2^n x 2^n storage
DEFAULT_FUEL = 100_000

_INT64_MASK = (1 << 64) - 1
_INT64_SIGN = 1 << 63


def wrap64(v: int) -> int:
    """Reduce to signed 64-bit two's complement."""
    return ((v + _INT64_SIGN) & _INT64_MASK) - _INT64_SIGN


# ---------------------------------------------------------------------------
# Gate table


@dataclass(frozen=True)
class GateInfo:
    name: str
    arity: int
    parameterized: bool
    # operand roles, index-aligned with the operand list
    roles: tuple[str, ...]
    # operand index groups whose order is physically irrelevant
    symmetric_groups: tuple[tuple[int, ...], ...] = ()


GATES: dict[str, GateInfo] = {
    g.name: g
    for g in [
        GateInfo("x", 1, False, ("target",)),
        GateInfo("z", 1, False, ("target",)),
        GateInfo("h", 1, False, ("target",)),
        GateInfo("s", 1, False, ("target",)),
        GateInfo("t", 1, False, ("target",)),
        GateInfo("rx", 1, True, ("target",)),
        GateInfo("ry", 1, True, ("target",)),
        GateInfo("rz", 1, True, ("target",)),
        GateInfo("cx", 2, False, ("control", "target")),
        GateInfo("cz", 2, False, ("control", "target"), ((0, 1),)),
        GateInfo("swap", 2, False, ("target", "target"), ((0, 1),)),
        GateInfo("cp", 2, True, ("control", "target")),
        GateInfo("crx", 2, True, ("control", "target")),
        GateInfo("cry", 2, True, ("control", "target")),
        GateInfo("crz", 2, True, ("control", "target")),
        GateInfo("ccx", 3, False, ("control", "control", "target"), ((0, 1),)),
        GateInfo("cswap", 3, False, ("control", "target", "target"), ((1, 2),)),
    ]
}

PARAMETERIZED_GATES = frozenset(n for n, g in GATES.items() if g.parameterized)

_KEYWORDS = frozenset({"qubits", "if", "while", "q"})


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * < <= == !=
    lhs: "Expr"
    rhs: "Expr"


Expr = IntLit | Var | Neg | BinOp


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class GateApply:
    gate: str
    angle: float | None
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class If:
    cond: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]


Stmt = Assign | GateApply | If | While


@dataclass(frozen=True)
class Program:
    name: str
    qubit_count: int
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class Circuit:
    """Flat gate list produced by interpreting a program's classical half."""

    qubit_count: int
    ops: tuple[GateApply, ...]

    def __len__(self) -> int:
        return len(self.ops)


# ---------------------------------------------------------------------------
# Validation


def _check_gate(gate: str, angle: float | None, qubits: tuple[int, ...],
                qubit_count: int, line: int = 0) -> None:
    info = GATES.get(gate)
    if info is None:
        raise UnknownGate(f"unknown gate '{gate}'", line)
    if len(qubits) != info.arity:
        raise ArityMismatch(
            f"gate '{gate}' takes {info.arity} qubit(s), got {len(qubits)}", line)
    if info.parameterized != (angle is not None):
        raise ArityMismatch(
            f"gate '{gate}' {'requires' if info.parameterized else 'does not take'} an angle",
            line)
    for q in qubits:
        if not 0 <= q < qubit_count:
            raise QubitOutOfRange(
                f"qubit {q} out of range for {qubit_count} qubit(s)", line)
    if len(set(qubits)) != len(qubits):
        raise QubitOperandConflict(
            f"gate '{gate}' operands must be pairwise distinct: {qubits}", line)


def validate(p: Program) -> None:
    """Check all Program invariants, raising on the first violation."""
    if not 1 <= p.qubit_count <= MAX_QUBITS:
        raise QubitOutOfRange(
            f"qubit count {p.qubit_count} outside [1, {MAX_QUBITS}]", 1)

    def walk(stmts):
        for s in stmts:
            if isinstance(s, GateApply):
                _check_gate(s.gate, s.angle, s.qubits, p.qubit_count)
            elif isinstance(s, (If, While)):
                walk(s.body)

    walk(p.body)


def validate_circuit(c: Circuit) -> None:
    if not 1 <= c.qubit_count <= MAX_QUBITS:
        raise QubitOutOfRange(
            f"qubit count {c.qubit_count} outside [1, {MAX_QUBITS}]", 0)
    for op in c.ops:
        _check_gate(op.gate, op.angle, op.qubits, c.qubit_count)


# ---------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|==|!=|[-+*<=(){}\[\],]))"
)


def _tokenize(text: str, line_no: int) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}",
                             line_no, pos + 1)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num") + 1))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident") + 1))
        else:
            tokens.append(("op", m.group("op"), m.start("op") + 1))
        pos = m.end()
    return tokens


class _ExprParser:
    """Recursive-descent parser over one line's token list."""

    def __init__(self, tokens, line_no):
        self.tokens = tokens
        self.line = line_no
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self.line,
                             self.tokens[-1][2] if self.tokens else 1)
        self.i += 1
        return tok

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            raise ParseError(f"expected {op!r}, got {tok[1]!r}", self.line, tok[2])
        return tok

    def parse_expr(self) -> Expr:
        return self._cmp()

    def _cmp(self) -> Expr:
        node = self._add()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in ("<", "<=", "==", "!="):
            self.take()
            node = BinOp(tok[1], node, self._add())
        return node

    def _add(self) -> Expr:
        node = self._mul()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            node = BinOp(tok[1], node, self._mul())
        return node

    def _mul(self) -> Expr:
        node = self._unary()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] == "*":
            self.take()
            node = BinOp("*", node, self._unary())
        return node

    def _unary(self) -> Expr:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self._unary())
        return self._atom()

    def _atom(self) -> Expr:
        tok = self.take()
        if tok[0] == "num":
            if "." in tok[1] or "e" in tok[1] or "E" in tok[1]:
                raise ParseError("float literal not allowed in classical expression",
                                 self.line, tok[2])
            return IntLit(int(tok[1]))
        if tok[0] == "ident":
            if tok[1] in _KEYWORDS:
                raise ParseError(f"keyword {tok[1]!r} cannot be a variable",
                                 self.line, tok[2])
            return Var(tok[1])
        if tok[0] == "op" and tok[1] == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {tok[1]!r}", self.line, tok[2])


def _parse_qubit_operand(p: _ExprParser) -> int:
    tok = p.take()
    if tok[0] != "ident" or tok[1] != "q":
        raise ParseError(f"expected qubit operand q[...], got {tok[1]!r}",
                         p.line, tok[2])
    p.expect_op("[")
    num = p.take()
    if num[0] != "num" or not num[1].isdigit():
        raise ParseError("qubit index must be an integer literal", p.line, num[2])
    p.expect_op("]")
    return int(num[1])


def parse(text: str, name: str = "program") -> Program:
    """Parse seed-language source into a validated Program."""
    lines = text.split("\n")
    qubit_count = None
    stack: list[list[Stmt]] = [[]]
    kind_stack: list[str] = []  # "if" | "while" per open block

    for line_no, raw in enumerate(lines, start=1):
        code = raw.split("#", 1)[0].strip()
        if not code:
            continue
        tokens = _tokenize(code, line_no)
        if not tokens:
            continue

        if qubit_count is None:
            if tokens[0][:2] != ("ident", "qubits"):
                raise ParseError("program must start with a 'qubits N' header", line_no, 1)
            if len(tokens) != 2 or tokens[1][0] != "num" or not tokens[1][1].isdigit():
                raise ParseError("malformed 'qubits N' header", line_no, 1)
            qubit_count = int(tokens[1][1])
            continue

        kind, value, col = tokens[0]

        if kind == "op" and value == "}":
            if len(tokens) != 1:
                raise ParseError("'}' must stand alone", line_no, tokens[1][2])
            if not kind_stack:
                raise ParseError("unmatched '}'", line_no, col)
            body = tuple(stack.pop())
            opener = kind_stack.pop()
            blk = stack[-1].pop()
            stack[-1].append(
                If(blk.cond, body) if opener == "if" else While(blk.cond, body))
            continue

        if kind == "ident" and value in ("if", "while"):
            p = _ExprParser(tokens[1:], line_no)
            cond = p.parse_expr()
            tok = p.take()
            if tok[0] != "op" or tok[1] != "{":
                raise ParseError(f"expected '{{' after {value} condition", line_no, tok[2])
            if p.peek() is not None:
                raise ParseError("block must open at end of line", line_no, p.peek()[2])
            # placeholder; body attached when '}' closes the block
            stack[-1].append(If(cond, ()) if value == "if" else While(cond, ()))
            stack.append([])
            kind_stack.append(value)
            continue

        if kind == "ident" and value in GATES:
            info = GATES[value]
            p = _ExprParser(tokens[1:], line_no)
            angle = None
            tok = p.peek()
            if tok and tok[0] == "op" and tok[1] == "(":
                if not info.parameterized:
                    raise ArityMismatch(
                        f"gate '{value}' does not take an angle", line_no, tok[2])
                p.take()
                neg = False
                tok = p.peek()
                if tok and tok[0] == "op" and tok[1] == "-":
                    p.take()
                    neg = True
                num = p.take()
                if num[0] != "num":
                    raise ParseError("expected angle literal", line_no, num[2])
                angle = -float(num[1]) if neg else float(num[1])
                p.expect_op(")")
            elif info.parameterized:
                raise ArityMismatch(f"gate '{value}' requires an angle", line_no, col)
            qubits = [_parse_qubit_operand(p)]
            while (tok := p.peek()) and tok[0] == "op" and tok[1] == ",":
                p.take()
                qubits.append(_parse_qubit_operand(p))
            if p.peek() is not None:
                raise ParseError(f"trailing tokens after gate statement", line_no,
                                 p.peek()[2])
            _check_gate(value, angle, tuple(qubits), qubit_count, line_no)
            stack[-1].append(GateApply(value, angle, tuple(qubits)))
            continue

        if kind == "ident":
            if value in _KEYWORDS:
                raise ParseError(f"unexpected keyword {value!r}", line_no, col)
            if len(tokens) < 2 or tokens[1][:2] != ("op", "="):
                raise UnknownGate(f"unknown gate or malformed statement {value!r}",
                                  line_no, col)
            p = _ExprParser(tokens[2:], line_no)
            expr = p.parse_expr()
            if p.peek() is not None:
                raise ParseError("trailing tokens after assignment", line_no,
                                 p.peek()[2])
            stack[-1].append(Assign(value, expr))
            continue

        raise ParseError(f"unexpected token {value!r}", line_no, col)

    if qubit_count is None:
        raise ParseError("empty program: missing 'qubits N' header", max(len(lines), 1), 1)
    if kind_stack:
        raise ParseError("unclosed block at end of input", len(lines), 1)

    program = Program(name, qubit_count, tuple(stack[0]))
    validate(program)
    return program


# ---------------------------------------------------------------------------
# Renderer

_PRECEDENCE = {"<": 1, "<=": 1, "==": 1, "!=": 1, "+": 2, "-": 2, "*": 3}


def render_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = render_expr(e.operand)
        if isinstance(e.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    prec = _PRECEDENCE[e.op]
    lhs = render_expr(e.lhs)
    if isinstance(e.lhs, BinOp) and _PRECEDENCE[e.lhs.op] < prec:
        lhs = f"({lhs})"
    rhs = render_expr(e.rhs)
    if isinstance(e.rhs, (BinOp, Neg)):
        if isinstance(e.rhs, Neg) or _PRECEDENCE[e.rhs.op] <= prec:
            rhs = f"({rhs})"
    return f"{lhs} {e.op} {rhs}"


def render_stmt(s: Stmt, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Assign):
        return [f"{pad}{s.var} = {render_expr(s.expr)}"]
    if isinstance(s, GateApply):
        operands = ", ".join(f"q[{q}]" for q in s.qubits)
        if s.angle is not None:
            return [f"{pad}{s.gate}({s.angle!r}) {operands}"]
        return [f"{pad}{s.gate} {operands}"]
    keyword = "if" if isinstance(s, If) else "while"
    lines = [f"{pad}{keyword} {render_expr(s.cond)} {{"]
    for child in s.body:
        lines.extend(render_stmt(child, indent + 1))
    lines.append(f"{pad}}}")
    return lines


def render(p: Program) -> str:
    """Canonical, deterministic source form; parse(render(p)) == p."""
    lines = [f"qubits {p.qubit_count}"]
    for s in p.body:
        lines.extend(render_stmt(s))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Scope analysis


@dataclass(frozen=True)
class Scope:
    id: int
    parent: int | None
    variables: tuple[str, ...]  # first-assignment order


@dataclass(frozen=True)
class ScopeTree:
    scopes: tuple[Scope, ...]
    block_scopes: dict[tuple[int, ...], int] = field(compare=False, default_factory=dict)
    var_owner: dict[str, int] = field(compare=False, default_factory=dict)

    def ancestors_or_self(self, scope_id: int) -> tuple[int, ...]:
        chain = []
        cur: int | None = scope_id
        while cur is not None:
            chain.append(cur)
            cur = self.scopes[cur].parent
        return tuple(chain)

    def is_ancestor_or_self(self, outer: int, inner: int) -> bool:
        return outer in self.ancestors_or_self(inner)


def analyze_scopes(p: Program) -> ScopeTree:
    """Build the scope tree; each If/While block is a scope, variables are
    owned by the scope containing their first (textual) assignment."""
    scopes: list[dict] = [{"parent": None, "vars": []}]
    block_scopes: dict[tuple[int, ...], int] = {(): 0}
    var_owner: dict[str, int] = {}

    def walk(stmts, scope_id, path):
        for idx, s in enumerate(stmts):
            if isinstance(s, Assign):
                if s.var not in var_owner:
                    var_owner[s.var] = scope_id
                    scopes[scope_id]["vars"].append(s.var)
            elif isinstance(s, (If, While)):
                child = len(scopes)
                scopes.append({"parent": scope_id, "vars": []})
                block_scopes[path + (idx,)] = child
                walk(s.body, child, path + (idx,))

    walk(p.body, 0, ())
    return ScopeTree(
        tuple(Scope(i, sc["parent"], tuple(sc["vars"])) for i, sc in enumerate(scopes)),
        block_scopes,
        var_owner,
    )


# ---------------------------------------------------------------------------
# Lowering (classical interpretation)


def _eval_expr(e: Expr, env: dict[str, int]) -> int:
    if isinstance(e, IntLit):
        return wrap64(e.value)
    if isinstance(e, Var):
        return env.get(e.name, 0)
    if isinstance(e, Neg):
        return wrap64(-_eval_expr(e.operand, env))
    lhs = _eval_expr(e.lhs, env)
    rhs = _eval_expr(e.rhs, env)
    if e.op == "+":
        return wrap64(lhs + rhs)
    if e.op == "-":
        return wrap64(lhs - rhs)
    if e.op == "*":
        return wrap64(lhs * rhs)
    if e.op == "<":
        return int(lhs < rhs)
    if e.op == "<=":
        return int(lhs <= rhs)
    if e.op == "==":
        return int(lhs == rhs)
    return int(lhs != rhs)


def lower(p: Program, fuel: int = DEFAULT_FUEL, scopes: ScopeTree | None = None) -> Circuit:
    """Interpret the classical half and emit gates in execution order.

    Variables are implicitly zero at their scope's entry; re-entering a block
    (each loop iteration) re-zeroes the variables owned by that block's scope.
    Raises FuelExhausted once the executed statement count exceeds `fuel`, or
    as soon as a loop provably diverges (its classical state recurs at the
    guard, so the remaining execution can never leave the cycle).
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    if scopes is None:
        scopes = analyze_scopes(p)
    all_vars = tuple(sorted(scopes.var_owner))
    env: dict[str, int] = {}
    ops: list[GateApply] = []
    remaining = fuel

    def enter(path):
        sid = scopes.block_scopes.get(path)
        if sid is not None:
            for v in scopes.scopes[sid].variables:
                env[v] = 0

    def run(stmts, path):
        nonlocal remaining
        for idx, s in enumerate(stmts):
            remaining -= 1
            if remaining < 0:
                raise FuelExhausted(f"exceeded fuel of {fuel} executed statements")
            if isinstance(s, Assign):
                env[s.var] = _eval_expr(s.expr, env)
            elif isinstance(s, GateApply):
                ops.append(s)
            elif isinstance(s, If):
                if _eval_expr(s.cond, env) != 0:
                    enter(path + (idx,))
                    run(s.body, path + (idx,))
            else:  # While
                seen: set[tuple] = set()
                while _eval_expr(s.cond, env) != 0:
                    snapshot = tuple(env.get(v, 0) for v in all_vars)
                    if snapshot in seen:
                        raise FuelExhausted(
                            "dead loop: classical state recurred at the guard")
                    seen.add(snapshot)
                    enter(path + (idx,))
                    run(s.body, path + (idx,))
                    remaining -= 1
                    if remaining < 0:
                        raise FuelExhausted(
                            f"exceeded fuel of {fuel} executed statements")

    for v in scopes.scopes[0].variables:
        env[v] = 0
    run(p.body, ())
    return Circuit(p.qubit_count, tuple(ops))
