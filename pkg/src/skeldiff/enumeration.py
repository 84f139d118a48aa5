"""Variant enumeration over program skeletons.

Classical holes are enumerated as scope-labeled set partitions: every hole
joins a block, each block is owned by a scope that is an ancestor-or-self of
all its holes' locations, and blocks map to their owning scope's variables in
first-hole-index / declaration-order bijection.  This emits exactly one
representative per equivalence class of scope-legal fillings under per-scope
variable renaming.  Quantum holes (angles and qubit operands) are sampled,
rejecting fills that are qubit-permutation-equivalent to the seed.
"""
from __future__ import annotations

import hashlib
import math
import random
import struct
from dataclasses import dataclass, field
from typing import Iterator

from . import lang
from .errors import EmptyEnumeration, FuelExhausted, RejectionExhausted
from .lang import Circuit, GateApply, Program
from .interp import CompiledSkeleton
from .partitions import stirling2
from .skeleton import Skeleton, extract, fill_holes

ANGLE_PALETTE = (0.0, math.pi / 4, math.pi / 2, math.pi, 3 * math.pi / 2)
TWO_PI = 2 * math.pi


def derive_seed(root: int, *tags) -> int:
    """Deterministic 64-bit child seed for (root, tags)."""
    text = ":".join([str(root), *map(str, tags)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class ClassicalAssignment:
    """Mapping from classical hole id to the variable filling it."""

    mapping: dict[int, str]


@dataclass(frozen=True)
class QuantumAssignment:
    angles: dict[int, float]
    qubits: dict[int, int]


@dataclass(frozen=True)
class EnumerationConfig:
    partition_mode: str = "exact_blocks"  # or "at_most_blocks"
    angle_source: str = "uniform"  # or "palette"
    quantum_samples_per_classical: int = 1
    budget: int = 4096
    rng_seed: int = 0

    def __post_init__(self):
        if self.partition_mode not in ("exact_blocks", "at_most_blocks"):
            raise ValueError(f"unknown partition mode {self.partition_mode!r}")
        if self.angle_source not in ("uniform", "palette"):
            raise ValueError(f"unknown angle source {self.angle_source!r}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.quantum_samples_per_classical < 1:
            raise ValueError("quantum_samples_per_classical must be >= 1")


@dataclass(frozen=True)
class VariantSpec:
    seed: str
    index: int
    classical: ClassicalAssignment
    quantum: QuantumAssignment
    canonical_key: bytes


@dataclass
class EnumerationStats:
    naive: int = 1
    classical_total: int = 0
    emitted: int = 0
    skipped_fuel: int = 0
    skipped_rejection: int = 0
    skipped_duplicates: int = 0
    per_scope: list = field(default_factory=list)

    @property
    def reduction_rate(self) -> float:
        return 1.0 - self.emitted / float(self.naive)

    def to_json_dict(self) -> dict:
        return {
            "emitted": self.emitted,
            "naive": self.naive,
            "reduction_rate": self.reduction_rate,
            "classical_total": self.classical_total,
            "per_scope": self.per_scope,
            "skipped": {
                "fuel": self.skipped_fuel,
                "rejection": self.skipped_rejection,
                "duplicates": self.skipped_duplicates,
            },
        }


# ---------------------------------------------------------------------------
# Classical enumeration


class _ClassicalSpace:
    """Count / unrank / stream over scope-labeled hole partitions."""

    def __init__(self, sk: Skeleton, mode: str):
        self.sk = sk
        self.mode = mode
        scopes = sk.scopes
        self.var_scopes = [s.id for s in scopes.scopes if s.variables]
        self.scope_index = {sid: i for i, sid in enumerate(self.var_scopes)}
        self.n_vec = tuple(len(scopes.scopes[sid].variables) for sid in self.var_scopes)
        self.holes = sk.classical_holes
        self.eligible: list[tuple[int, ...]] = []
        for h in self.holes:
            elig = tuple(
                self.scope_index[sid]
                for sid in sorted(scopes.ancestors_or_self(h.scope_id))
                if sid in self.scope_index
            )
            if not elig:
                raise EmptyEnumeration(
                    f"classical hole {h.id} has no eligible variable")
            self.eligible.append(elig)
        self._memo: dict[tuple, int] = {}
        if mode == "exact_blocks":
            self._check_feasible()

    def _check_feasible(self):
        # Each variable needs its own non-empty block of holes located in its
        # scope's subtree; for nested scopes Hall's condition reduces to a
        # per-subtree count comparison.
        scopes = self.sk.scopes
        for scope in scopes.scopes:
            subtree_vars = sum(
                len(s.variables) for s in scopes.scopes
                if scopes.is_ancestor_or_self(scope.id, s.id))
            subtree_holes = sum(
                1 for h in self.holes
                if scopes.is_ancestor_or_self(scope.id, h.scope_id))
            if subtree_vars > subtree_holes:
                raise EmptyEnumeration(
                    f"scope {scope.id}: {subtree_vars} variable(s) in its subtree "
                    f"but only {subtree_holes} hole(s)")

    def count(self, i: int = 0, counts: tuple[int, ...] | None = None) -> int:
        if counts is None:
            counts = (0,) * len(self.n_vec)
        key = (i, counts)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if i == len(self.holes):
            ok = self.mode == "at_most_blocks" or counts == self.n_vec
            self._memo[key] = int(ok)
            return int(ok)
        total = 0
        for s in self.eligible[i]:
            if counts[s] > 0:
                total += counts[s] * self.count(i + 1, counts)
            if counts[s] < self.n_vec[s]:
                bumped = counts[:s] + (counts[s] + 1,) + counts[s + 1:]
                total += self.count(i + 1, bumped)
        self._memo[key] = total
        return total

    def _options(self, i: int, counts: tuple[int, ...]):
        """Deterministic option order shared by unrank and stream: joins of
        existing blocks (scope-major, block-minor), then fresh blocks."""
        for s in self.eligible[i]:
            for b in range(counts[s]):
                yield ("join", s, b, counts)
        for s in self.eligible[i]:
            if counts[s] < self.n_vec[s]:
                bumped = counts[:s] + (counts[s] + 1,) + counts[s + 1:]
                yield ("open", s, counts[s], bumped)

    def _to_assignment(self, blocks: list[tuple[int, int]]) -> ClassicalAssignment:
        mapping = {}
        for hole, (s, b) in zip(self.holes, blocks):
            scope = self.sk.scopes.scopes[self.var_scopes[s]]
            mapping[hole.id] = scope.variables[b]
        return ClassicalAssignment(mapping)

    def unrank(self, rank: int) -> ClassicalAssignment:
        if not 0 <= rank < self.count():
            raise IndexError(f"rank {rank} out of range")
        counts = (0,) * len(self.n_vec)
        blocks: list[tuple[int, int]] = []
        for i in range(len(self.holes)):
            for kind, s, b, nxt in self._options(i, counts):
                weight = self.count(i + 1, nxt)
                if rank < weight:
                    blocks.append((s, b))
                    counts = nxt
                    break
                rank -= weight
            else:
                raise AssertionError("unrank walked off the option list")
        return self._to_assignment(blocks)

    def stream(self) -> Iterator[ClassicalAssignment]:
        blocks: list[tuple[int, int]] = []

        def rec(i: int, counts: tuple[int, ...]) -> Iterator[ClassicalAssignment]:
            if i == len(self.holes):
                if self.mode == "at_most_blocks" or counts == self.n_vec:
                    yield self._to_assignment(blocks)
                return
            for kind, s, b, nxt in self._options(i, counts):
                if self.count(i + 1, nxt) == 0:
                    continue
                blocks.append((s, b))
                yield from rec(i + 1, nxt)
                blocks.pop()

        return rec(0, (0,) * len(self.n_vec))


def count_classical(sk: Skeleton, mode: str = "exact_blocks") -> int:
    return _ClassicalSpace(sk, mode).count()


def unrank_classical(sk: Skeleton, mode: str, rank: int) -> ClassicalAssignment:
    return _ClassicalSpace(sk, mode).unrank(rank)


def enumerate_classical(sk: Skeleton, cfg: EnumerationConfig) -> Iterator[ClassicalAssignment]:
    """All non-alpha-equivalent classical assignments, in a deterministic order."""
    return _ClassicalSpace(sk, cfg.partition_mode).stream()


def naive_count(sk: Skeleton) -> int:
    """The naive baseline: every hole filled by any variable, scopes ignored."""
    total_vars = sum(len(s.variables) for s in sk.scopes.scopes)
    k = len(sk.classical_holes)
    if k == 0:
        return 1
    return total_vars ** k


def scope_valid_count(sk: Skeleton) -> int:
    """Product over holes of the number of scope-eligible variables."""
    scopes = sk.scopes
    total = 1
    for h in sk.classical_holes:
        eligible = sum(
            len(scopes.scopes[sid].variables)
            for sid in scopes.ancestors_or_self(h.scope_id))
        total *= eligible
    return total


def per_scope_stats(sk: Skeleton, mode: str) -> list[dict]:
    rows = []
    for scope in sk.scopes.scopes:
        holes = sum(1 for h in sk.classical_holes if h.scope_id == scope.id)
        nvars = len(scope.variables)
        if nvars == 0:
            partitions = 1 if holes == 0 else 0
        elif mode == "exact_blocks":
            partitions = stirling2(holes, nvars)
        else:
            partitions = sum(stirling2(holes, i) for i in range(1, nvars + 1))
        rows.append({"scope": scope.id, "vars": nvars, "holes": holes,
                     "partitions": int(partitions)})
    return rows


# ---------------------------------------------------------------------------
# Canonical key under qubit permutation


def _operand_groups(gate: str) -> list[tuple[int, ...]]:
    info = lang.GATES[gate]
    grouped: list[tuple[int, ...]] = []
    seen: set[int] = set()
    for i in range(info.arity):
        if i in seen:
            continue
        for g in info.symmetric_groups:
            if i in g:
                grouped.append(tuple(g))
                seen.update(g)
                break
        else:
            grouped.append((i,))
            seen.add(i)
    return grouped


_GROUPS = {name: _operand_groups(name) for name in lang.GATES}


def canonical_qubit_key(c: Circuit) -> bytes:
    """Serialized form invariant under qubit relabeling and under reordering
    of physically symmetric operand groups (cz/swap pairs, ccx controls,
    cswap targets).  Two circuits get equal keys iff one is the other with
    qubit indices permuted (up to those group symmetries)."""
    ops = c.ops
    best: list[str] | None = None

    def rec(idx: int, labels: dict[int, int], acc: list[str]):
        nonlocal best
        if idx == len(ops):
            if best is None or acc < best:
                best = list(acc)
            return
        op = ops[idx]
        angle = struct.pack("<d", op.angle).hex() if op.angle is not None else ""
        # each entry: (ordered labels for the group, fresh assignments made)
        choices: list[list[tuple[int, ...]]] = [[]]
        for group in _GROUPS[op.gate]:
            if len(group) == 1:
                expanded = [ch + [(op.qubits[group[0]],)] for ch in choices]
            else:
                u, v = (op.qubits[i] for i in group)
                in_u, in_v = u in labels, v in labels
                if in_u and in_v:
                    order = (u, v) if labels[u] <= labels[v] else (v, u)
                    expanded = [ch + [order] for ch in choices]
                elif in_u or in_v:
                    order = (u, v) if in_u else (v, u)
                    expanded = [ch + [order] for ch in choices]
                else:
                    expanded = [ch + [(u, v)] for ch in choices]
                    expanded += [ch + [(v, u)] for ch in choices]
            choices = expanded
        for choice in choices:
            new_labels = dict(labels)
            parts: list[int] = []
            for group_order in choice:
                for q in group_order:
                    if q not in new_labels:
                        new_labels[q] = len(new_labels)
                    parts.append(new_labels[q])
            acc.append(f"{op.gate}:{angle}:{','.join(map(str, parts))}")
            rec(idx + 1, new_labels, acc)
            acc.pop()

    rec(0, {}, [])
    body = ";".join(best) if best is not None else ""
    return f"{c.qubit_count}|{body}".encode()


# ---------------------------------------------------------------------------
# Quantum sampling


def _gate_sites(sk: Skeleton) -> list[dict]:
    """Gate statements in program order with their hole ids."""
    angle_by_path = {h.path: h for h in sk.angle_holes}
    qubits_by_path: dict[tuple[int, ...], list] = {}
    for h in sk.qubit_holes:
        qubits_by_path.setdefault(h.path, []).append(h)

    sites = []

    def walk(stmts, path):
        for idx, s in enumerate(stmts):
            spath = path + (idx,)
            if isinstance(s, GateApply):
                qholes = sorted(qubits_by_path.get(spath, []), key=lambda h: h.slot)
                sites.append({
                    "path": spath,
                    "gate": s.gate,
                    "angle_hole": angle_by_path.get(spath),
                    "qubit_holes": qholes,
                })
            elif isinstance(s, (lang.If, lang.While)):
                walk(s.body, spath)

    walk(sk.program.body, ())
    return sites


def _statement_circuit(sk: Skeleton, qa: QuantumAssignment) -> Circuit:
    """Pseudo-circuit of the gate statements (program order, not executions)."""
    ops = []
    for site in _gate_sites(sk):
        angle = None
        if site["angle_hole"] is not None:
            angle = qa.angles[site["angle_hole"].id]
        qubits = tuple(qa.qubits[h.id] for h in site["qubit_holes"])
        ops.append(GateApply(site["gate"], angle, qubits))
    return Circuit(sk.program.qubit_count, tuple(ops))


class QuantumSampler:
    """Prepares a skeleton's quantum hole sites once, then draws assignments."""

    def __init__(self, sk: Skeleton, cfg: EnumerationConfig):
        self.sk = sk
        self.cfg = cfg
        self.sites = _gate_sites(sk)
        self.seed_key = (
            canonical_qubit_key(_statement_circuit(sk, sk.reference_quantum()))
            if self.sites else b"")
        self.reference_angles = {h.id: h.original for h in sk.angle_holes}
        self.attempts = 64 * max(1, len(sk.qubit_holes))

    def draw(self, rng: random.Random) -> QuantumAssignment:
        if not self.sites:
            return QuantumAssignment({}, {})
        sk, cfg = self.sk, self.cfg
        n = sk.program.qubit_count
        for site in self.sites:
            if len(site["qubit_holes"]) > n:
                raise RejectionExhausted(
                    f"gate '{site['gate']}' needs {len(site['qubit_holes'])} "
                    f"distinct qubits but only {n} exist")
        for _ in range(self.attempts):
            angles = {}
            for h in sk.angle_holes:
                if cfg.angle_source == "uniform":
                    angles[h.id] = rng.random() * TWO_PI
                else:
                    angles[h.id] = rng.choice(ANGLE_PALETTE)
            qubits = {}
            for site in self.sites:
                drawn = rng.sample(range(n), len(site["qubit_holes"]))
                for hole, q in zip(site["qubit_holes"], drawn):
                    qubits[hole.id] = q
            qa = QuantumAssignment(angles, qubits)
            # equivalence needs bit-identical angles, so any differing angle
            # settles it without a canonical-key comparison
            if any(angles[h] != self.reference_angles[h] for h in angles):
                return qa
            if canonical_qubit_key(_statement_circuit(sk, qa)) != self.seed_key:
                return qa
        raise RejectionExhausted(
            f"no non-equivalent quantum assignment found in {self.attempts} attempts")


def sample_quantum(sk: Skeleton, cfg: EnumerationConfig,
                   rng: random.Random) -> QuantumAssignment:
    """Draw a quantum assignment obeying qubit range and distinct-operand
    constraints, resampling while the filled gate statements are
    qubit-permutation-equivalent to the seed's."""
    return QuantumSampler(sk, cfg).draw(rng)


# ---------------------------------------------------------------------------
# Full variant enumeration


def enumerate_variants(
    p: Program,
    cfg: EnumerationConfig,
    fuel: int = lang.DEFAULT_FUEL,
) -> tuple[Iterator[tuple[VariantSpec, Program]], EnumerationStats]:
    """Stream at most cfg.budget variants of p, globally deduplicated by the
    canonical key of the lowered circuit.  The returned stats object is
    updated as the stream is consumed."""
    sk = extract(p)
    space = _ClassicalSpace(sk, cfg.partition_mode)
    total = space.count()
    if cfg.partition_mode == "exact_blocks" and total == 0:
        raise EmptyEnumeration("no classical assignment satisfies exact mode")

    stats = EnumerationStats(
        naive=naive_count(sk),
        classical_total=total,
        per_scope=per_scope_stats(sk, cfg.partition_mode),
    )

    qspc = cfg.quantum_samples_per_classical
    base_picks = max(1, -(-cfg.budget // qspc))
    # dead or duplicate variants don't count toward the budget, so allow a
    # bounded number of extra classical picks to top the stream up
    attempt_cap = min(total, base_picks + max(256, base_picks))

    def rank_stream() -> Iterator[int]:
        rng = random.Random(derive_seed(cfg.rng_seed, "thin", p.name))
        if total <= attempt_cap:
            order = list(range(total))
            rng.shuffle(order)
            yield from order
            return
        chosen: set[int] = set()
        while len(chosen) < attempt_cap:
            r = rng.randrange(total)  # handles arbitrarily large spaces
            if r in chosen:
                continue
            chosen.add(r)
            yield r

    sampler = QuantumSampler(sk, cfg)
    compiled = CompiledSkeleton(sk)

    def produce() -> Iterator[tuple[VariantSpec, Program]]:
        seen: set[bytes] = set()
        for rank in rank_stream():
            if stats.emitted >= cfg.budget:
                return
            classical = space.unrank(rank)
            try:
                trace = compiled.execute_trace(classical.mapping, fuel)
            except FuelExhausted:
                stats.skipped_fuel += qspc  # every draw of this rank would die
                continue
            for draw in range(qspc):
                if stats.emitted >= cfg.budget:
                    return
                qrng = random.Random(
                    derive_seed(cfg.rng_seed, "quantum", p.name, rank, draw))
                try:
                    quantum = sampler.draw(qrng)
                except RejectionExhausted:
                    stats.skipped_rejection += 1
                    continue
                circuit = compiled.trace_ops(trace, quantum.angles, quantum.qubits)
                key = canonical_qubit_key(circuit)
                if key in seen:
                    stats.skipped_duplicates += 1
                    continue
                seen.add(key)
                variant = fill_holes(sk, classical.mapping, quantum)
                spec = VariantSpec(p.name, stats.emitted, classical, quantum, key)
                stats.emitted += 1
                yield spec, variant

    return produce(), stats
