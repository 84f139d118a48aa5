"""Differential-testing core: variant matrices, comparison rules, campaigns.

Every variant is lowered once, optimized per level, and executed on each
backend; the rule table then demands fidelity 1 (within epsilon) between
cells that a correct toolchain must keep equivalent.  Cross-backend rules are
restricted to level 0, where no optimizer has touched the circuit.  A
measurement-sampling baseline (two-sample K-S over independent RNG streams)
is kept alongside to quantify how often sampling would cry wolf while the
statevector oracle correctly reports equivalence.
"""
from __future__ import annotations

import hashlib
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import lang
from .enumeration import EnumerationConfig, derive_seed, enumerate_variants
from .errors import ConfigError, FuelExhausted, NotAMismatch, SkeldiffError
from .extern import AdapterClient
from .kstest import ks_two_sample
from .lang import Circuit, GateApply, Program
from .optimizer import Pipeline, inject_fault, pipeline
from .portable import write_circuit, write_statevector
from .simulator import Statevector, fidelity, run_dense, run_unitary, sample


@dataclass(frozen=True)
class ComparisonRule:
    id: str
    lhs: tuple[int, str]  # (level, backend)
    rhs: tuple[int, str]

    def __post_init__(self):
        if self.lhs == self.rhs:
            raise ConfigError(f"rule {self.id} compares a cell to itself")
        if self.lhs[1] != self.rhs[1] and not (self.lhs[0] == self.rhs[0] == 0):
            raise ConfigError(
                f"rule {self.id}: cross-backend comparison only allowed at level 0")


BASE_RULES = (
    ComparisonRule("R1", (0, "dense"), (0, "unitary")),
    ComparisonRule("R2", (0, "dense"), (1, "dense")),
    ComparisonRule("R3", (1, "dense"), (2, "dense")),
    ComparisonRule("R4", (2, "dense"), (3, "dense")),
)

# attached only when an external adapter is configured: one cross-implementation
# check at level 0, then the adjacent-level chain re-run on that backend
EXTERN_RULES = (
    ComparisonRule("R5", (0, "dense"), (0, "extern")),
    ComparisonRule("R6", (0, "extern"), (1, "extern")),
    ComparisonRule("R7", (1, "extern"), (2, "extern")),
    ComparisonRule("R8", (2, "extern"), (3, "extern")),
)


@dataclass(frozen=True)
class Verdict:
    kind: str  # "pass" | "mismatch" | "crash" | "timeout"
    fidelity: float | None = None
    side: str | None = None
    error: str | None = None

    def to_json_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.fidelity is not None:
            d["fidelity"] = self.fidelity
        if self.side is not None:
            d["side"] = self.side
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class Cell:
    status: str  # "ok" | "crash" | "timeout"
    statevector: Statevector | None = None
    circuit: Circuit | None = None
    error: str | None = None


def rules_for(levels: tuple[int, ...], backends: tuple[str, ...],
              extern: bool = False) -> tuple[ComparisonRule, ...]:
    chosen = list(BASE_RULES) + (list(EXTERN_RULES) if extern else [])
    return tuple(
        r for r in chosen
        if r.lhs[0] in levels and r.rhs[0] in levels
        and r.lhs[1] in (*backends, "extern") and r.rhs[1] in (*backends, "extern")
        and (extern or "extern" not in (r.lhs[1], r.rhs[1])))


def _run_backend(backend: str, c: Circuit, adapter: AdapterClient | None) -> Statevector:
    if backend == "dense":
        return run_dense(c)
    if backend == "unitary":
        return run_unitary(c)
    if backend == "extern":
        if adapter is None:
            raise ConfigError("no adapter attached for the extern backend")
        return adapter.statevector(c)
    raise ConfigError(f"unknown backend {backend!r}")


def pipelines_for(levels: tuple[int, ...], fault: str | None = None) -> dict[int, Pipeline]:
    out = {}
    for level in levels:
        pipe = pipeline(level)
        if fault is not None:
            pipe = inject_fault(pipe, fault)
        out[level] = pipe
    return out


def build_matrix_from_circuit(
    c: Circuit,
    pipelines: dict[int, Pipeline],
    backends: tuple[str, ...],
    adapter: AdapterClient | None = None,
    timeout: float = 5.0,
) -> dict[tuple[int, str], Cell]:
    matrix: dict[tuple[int, str], Cell] = {}
    for level, pipe in sorted(pipelines.items()):
        start = time.monotonic()
        try:
            optimized = pipe.run(c)
        except SkeldiffError as exc:
            for b in backends:
                matrix[(level, b)] = Cell("crash", error=f"optimize: {exc}")
            continue
        for b in backends:
            try:
                sv = _run_backend(b, optimized, adapter)
            except SkeldiffError as exc:
                matrix[(level, b)] = Cell("crash", error=str(exc))
                continue
            status = "timeout" if time.monotonic() - start > timeout else "ok"
            matrix[(level, b)] = Cell(status, sv, optimized)
    return matrix


def build_variant_matrix(
    p: Program,
    levels: tuple[int, ...] = (0, 1, 2, 3),
    backends: tuple[str, ...] = ("dense", "unitary"),
    fault: str | None = None,
    fuel: int = lang.DEFAULT_FUEL,
    adapter: AdapterClient | None = None,
    timeout: float = 5.0,
) -> dict[tuple[int, str], Cell]:
    """Lower once, optimize per level, run every configured backend."""
    pipes = pipelines_for(levels, fault)
    try:
        circuit = lang.lower(p, fuel)
    except FuelExhausted as exc:
        return {(lv, b): Cell("timeout", error=str(exc))
                for lv in levels for b in backends}
    return build_matrix_from_circuit(circuit, pipes, backends, adapter, timeout)


def evaluate_rules(
    matrix: dict[tuple[int, str], Cell],
    rules: tuple[ComparisonRule, ...],
    epsilon: float = 1e-9,
) -> list[tuple[ComparisonRule, Verdict]]:
    out = []
    for rule in rules:
        lhs = matrix.get(rule.lhs)
        rhs = matrix.get(rule.rhs)
        if lhs is None or rhs is None:
            continue  # cell not configured
        verdict = None
        for side, cell in (("lhs", lhs), ("rhs", rhs)):
            if cell.status != "ok":
                verdict = Verdict(cell.status, side=side, error=cell.error)
                break
        if verdict is None:
            fid = fidelity(lhs.statevector, rhs.statevector)
            if fid >= 1.0 - epsilon:
                verdict = Verdict("pass", fidelity=fid)
            else:
                verdict = Verdict("mismatch", fidelity=fid)
        out.append((rule, verdict))
    return out


# ---------------------------------------------------------------------------
# Failure minimization


def rule_mismatch(
    c: Circuit,
    rule: ComparisonRule,
    pipelines: dict[int, Pipeline],
    epsilon: float = 1e-9,
    adapter: AdapterClient | None = None,
) -> bool:
    needed = {rule.lhs[0], rule.rhs[0]}
    backends = tuple(sorted({rule.lhs[1], rule.rhs[1]}))
    matrix = build_matrix_from_circuit(
        c, {lv: pipelines[lv] for lv in needed}, backends, adapter)
    for r, verdict in evaluate_rules(matrix, (rule,), epsilon):
        return verdict.kind == "mismatch"
    return False


def minimize_failure(
    c: Circuit,
    rule: ComparisonRule,
    pipelines: dict[int, Pipeline],
    epsilon: float = 1e-9,
) -> Circuit:
    """Greedily drop gates while the rule still yields Mismatch; the result is
    1-minimal (no single remaining gate can be removed)."""
    if not rule_mismatch(c, rule, pipelines, epsilon):
        raise NotAMismatch(f"rule {rule.id} does not mismatch on this circuit")
    ops = list(c.ops)
    changed = True
    while changed:
        changed = False
        for i in range(len(ops)):
            candidate = replace(c, ops=tuple(ops[:i] + ops[i + 1:]))
            if rule_mismatch(candidate, rule, pipelines, epsilon):
                ops.pop(i)
                changed = True
                break
    return replace(c, ops=tuple(ops))


# ---------------------------------------------------------------------------
# Measurement-sampling baseline (the false-positive mechanism)


def uniform_superposition(n: int = 3) -> Circuit:
    return Circuit(n, tuple(GateApply("h", None, (q,)) for q in range(n)))


def rng_divergence_table(
    lhs: Statevector,
    rhs: Statevector,
    shots_list: tuple[int, ...] = (100, 1000, 10000),
    trials: int = 50,
    threshold: float = 0.15,
    rng_seed: int = 0,
    tag: str = "rq2",
) -> list[dict]:
    """K-S statistics between samples of two (equivalent) statevectors drawn
    with independent RNG streams, per shots setting."""
    rows = []
    for shots in shots_list:
        ks = []
        for t in range(trials):
            s1 = sample(lhs, shots, derive_seed(rng_seed, tag, "lhs", shots, t))
            s2 = sample(rhs, shots, derive_seed(rng_seed, tag, "rhs", shots, t))
            ks.append(ks_two_sample(s1, s2).k)
        rows.append({
            "shots": shots,
            "trials": trials,
            "frac_K_gt_t": sum(1 for k in ks if k > threshold) / trials,
            "median_K": statistics.median(ks),
        })
    return rows


# ---------------------------------------------------------------------------
# Campaigns


@dataclass(frozen=True)
class CampaignConfig:
    seeds: tuple[tuple[str, str], ...]  # (name, seed-language source)
    enumeration: EnumerationConfig = EnumerationConfig()
    epsilon: float = 1e-9
    levels: tuple[int, ...] = (0, 1, 2, 3)
    backends: tuple[str, ...] = ("dense", "unitary")
    ks_shots: tuple[int, ...] = (100, 1000, 10000)
    ks_threshold: float = 0.15
    ks_trials: int = 50
    fault: str | None = None
    rng_seed: int = 0
    fuel: int = lang.DEFAULT_FUEL
    jobs: int = 1
    timeout: float = 5.0
    adapter: str | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.1:
            raise ConfigError(f"epsilon must be in (0, 0.1), got {self.epsilon}")
        if not 0.0 < self.ks_threshold < 1.0:
            raise ConfigError(
                f"ks_threshold must be in (0, 1), got {self.ks_threshold}")
        if not self.seeds:
            raise ConfigError("campaign needs at least one seed program")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for level in self.levels:
            if level not in (0, 1, 2, 3):
                raise ConfigError(f"bad optimization level {level}")
        for b in self.backends:
            if b not in ("dense", "unitary"):
                raise ConfigError(f"unknown backend {b!r}")

    def digest(self) -> str:
        payload = {
            "seeds": list(self.seeds),
            "enumeration": vars(self.enumeration),
            "epsilon": self.epsilon,
            "levels": list(self.levels),
            "backends": list(self.backends),
            "ks_shots": list(self.ks_shots),
            "ks_threshold": self.ks_threshold,
            "ks_trials": self.ks_trials,
            "fault": self.fault,
            "rng_seed": self.rng_seed,
            "fuel": self.fuel,
            "timeout": self.timeout,
            "adapter": self.adapter,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class CampaignReport:
    config_digest: str
    seeds: list[str]
    totals: dict
    reduction: dict
    mismatch_groups: list[dict]
    ks_table: list[dict]
    verdicts: list[dict] = field(default_factory=list)

    @property
    def mismatches(self) -> int:
        return self.totals["mismatches"]

    def to_json_dict(self) -> dict:
        return {
            "config_digest": self.config_digest,
            "seeds": self.seeds,
            "totals": self.totals,
            "reduction": self.reduction,
            "mismatch_groups": self.mismatch_groups,
            "ks_table": self.ks_table,
            "verdicts": self.verdicts,
        }


def _write_mismatch_artifacts(outdir: Path, variant_id: str, rule: ComparisonRule,
                              matrix: dict[tuple[int, str], Cell]) -> str:
    vdir = outdir / "artifacts" / variant_id
    for side in (rule.lhs, rule.rhs):
        cell = matrix[side]
        stem = f"{side[0]}-{side[1]}"
        if cell.circuit is not None:
            write_circuit(vdir / f"{stem}.circuit.json", cell.circuit)
        if cell.statevector is not None:
            write_statevector(vdir / f"{stem}.sv.json", cell.statevector)
    return str(vdir)


def run_campaign(cfg: CampaignConfig, outdir: str | Path | None = None) -> CampaignReport:
    """Enumerate, execute, and judge every seed's variants; aggregate a
    deterministic report (identical for any worker count)."""
    programs = []
    for name, text in cfg.seeds:
        try:
            programs.append(lang.parse(text, name))
        except SkeldiffError as exc:
            raise ConfigError(f"seed {name!r} failed to parse: {exc}")

    out = Path(outdir) if outdir is not None else None
    rules = rules_for(cfg.levels, cfg.backends, extern=cfg.adapter is not None)
    pipes = pipelines_for(cfg.levels, cfg.fault)
    adapter = AdapterClient(cfg.adapter) if cfg.adapter else None
    backends = cfg.backends + ("extern",) if adapter else cfg.backends

    # enumerate all variants first so that work items are a stable, ordered list
    variants: list[tuple[str, str, Program]] = []  # (variant_id, seed, program)
    reduction: dict[str, dict] = {}
    ks_source: list[tuple[str, Program]] = []
    for prog in programs:
        enum_cfg = replace(
            cfg.enumeration,
            rng_seed=derive_seed(cfg.rng_seed, "enum", prog.name,
                                 cfg.enumeration.rng_seed))
        stream, stats = enumerate_variants(prog, enum_cfg, cfg.fuel)
        for spec, variant in stream:
            variant_id = f"{prog.name}-{spec.index:05d}"
            variants.append((variant_id, prog.name, variant))
            if len(ks_source) < cfg.ks_trials:
                ks_source.append((variant_id, variant))
        reduction[prog.name] = stats.to_json_dict()

    def evaluate(item):
        variant_id, seed_name, variant = item
        matrix = build_variant_matrix(
            variant, cfg.levels, backends, cfg.fault, cfg.fuel,
            adapter, cfg.timeout)
        return variant_id, seed_name, matrix, evaluate_rules(matrix, rules, cfg.epsilon)

    try:
        if cfg.jobs == 1:
            results = map(evaluate, variants)
        else:
            executor = ThreadPoolExecutor(max_workers=cfg.jobs)
            results = executor.map(evaluate, variants)

        totals = {"variants": len(variants), "evaluations": 0,
                  "mismatches": 0, "crashes": 0, "timeouts": 0}
        groups: dict[tuple[str, str], dict] = {}
        verdict_rows = []
        for variant_id, seed_name, matrix, judged in results:
            for rule, verdict in judged:
                totals["evaluations"] += 1
                if verdict.kind == "mismatch":
                    totals["mismatches"] += 1
                    key = (rule.id, seed_name)
                    group = groups.setdefault(
                        key, {"rule": rule.id, "seed": seed_name, "count": 0,
                              "example_artifact": None})
                    group["count"] += 1
                    if group["example_artifact"] is None and out is not None:
                        group["example_artifact"] = _write_mismatch_artifacts(
                            out, variant_id, rule, matrix)
                elif verdict.kind == "crash":
                    totals["crashes"] += 1
                elif verdict.kind == "timeout":
                    totals["timeouts"] += 1
                verdict_rows.append({
                    "variant": variant_id, "rule": rule.id,
                    **verdict.to_json_dict()})
        if cfg.jobs != 1:
            executor.shutdown()
    finally:
        if adapter is not None:
            adapter.close()

    # sampling baseline over the leading variants: statevector oracle says
    # equivalent, independent RNG streams still make K fluctuate
    ks_table: list[dict] = []
    if ks_source and cfg.ks_trials > 0:
        per_shot_ks: dict[int, list[float]] = {s: [] for s in cfg.ks_shots}
        for variant_id, variant in ks_source:
            try:
                circuit = lang.lower(variant, cfg.fuel)
                lhs, rhs = run_dense(circuit), run_unitary(circuit)
            except SkeldiffError:
                continue
            for shots in cfg.ks_shots:
                s1 = sample(lhs, shots,
                            derive_seed(cfg.rng_seed, "ks", variant_id, shots, "lhs"))
                s2 = sample(rhs, shots,
                            derive_seed(cfg.rng_seed, "ks", variant_id, shots, "rhs"))
                per_shot_ks[shots].append(ks_two_sample(s1, s2).k)
        for shots in cfg.ks_shots:
            ks = per_shot_ks[shots]
            if not ks:
                continue
            ks_table.append({
                "shots": shots,
                "trials": len(ks),
                "frac_K_gt_t": sum(1 for k in ks if k > cfg.ks_threshold) / len(ks),
                "median_K": statistics.median(ks),
            })

    report = CampaignReport(
        config_digest=cfg.digest(),
        seeds=[p.name for p in programs],
        totals=totals,
        reduction=reduction,
        mismatch_groups=[groups[k] for k in sorted(groups)],
        ks_table=ks_table,
        verdicts=verdict_rows,
    )
    if out is not None:
        from .reports import write_campaign_outputs

        write_campaign_outputs(report, out)
    return report


def replay_fidelity(artifact_dir: str | Path, rule: ComparisonRule) -> float:
    """Re-run the two circuit dumps of a mismatch artifact on their backends
    and recompute the fidelity (bit-for-bit reproducible)."""
    from .portable import read_circuit

    vdir = Path(artifact_dir)
    svs = []
    for side in (rule.lhs, rule.rhs):
        circuit = read_circuit(vdir / f"{side[0]}-{side[1]}.circuit.json")
        svs.append(run_unitary(circuit) if side[1] == "unitary" else run_dense(circuit))
    return fidelity(svs[0], svs[1])
