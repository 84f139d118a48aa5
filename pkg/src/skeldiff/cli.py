"""Command-line entry point.

Commands: parse, enumerate, simulate, optimize, campaign, selftest, stats,
export, seedgen.  Exit codes: 0 success (campaign: no mismatches), 1 campaign
found mismatches / selftest failed, 2 usage or config errors.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import difftest, lang, reports, seedgen
from .enumeration import EnumerationConfig, enumerate_variants
from .errors import ConfigError, SkeldiffError
from .fuzz import random_circuit
from .optimizer import FAULTS, inject_fault, optimize, pipeline, zyz_decompose
from .portable import (
    circuit_from_dict,
    circuit_to_dict,
    read_json,
    write_circuit,
    write_json,
)
from .simulator import fidelity, run_dense, run_unitary, sample
from .skeleton import extract, render_skeleton

# seeds whose variants reliably trip one registered fault each
WITNESS_SEEDS: dict[str, tuple[str, str]] = {
    "FAULT_DROP_T": ("witness_drop_t", """qubits 2
a = 1
h q[0]
t q[0]
if a {
  h q[1]
  t q[1]
}
"""),
    "FAULT_CRZ_SIGN": ("witness_crz_sign", """qubits 2
a = 2
h q[0]
h q[1]
while 0 < a {
  crz(0.4) q[0], q[1]
  a = a - 1
}
"""),
    "FAULT_BAD_COMMUTE": ("witness_bad_commute", """qubits 2
a = 1
x q[0]
cx q[0], q[1]
x q[0]
if a {
  h q[1]
}
"""),
}


def _dataclass_kwargs(cls, data: dict, where: str) -> dict:
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {sorted(unknown)}")
    out = dict(data)
    for key in ("levels", "backends", "ks_shots", "gates"):
        if key in out and isinstance(out[key], list):
            out[key] = tuple(out[key])
    return out


def load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = read_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    allowed = {"enumeration", "campaign", "seedgen", "seeds", "corpus"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    return data


def _load_program(path: str) -> lang.Program:
    text = Path(path).read_text()
    return lang.parse(text, Path(path).stem)


def _load_circuit(path: str, level: int = 0, fuel: int = lang.DEFAULT_FUEL) -> lang.Circuit:
    if path.endswith(".json"):
        circuit = circuit_from_dict(read_json(path))
    else:
        circuit = lang.lower(_load_program(path), fuel)
    return optimize(circuit, level)


def _gather_seeds(args, config: dict) -> list[tuple[str, str]]:
    if getattr(args, "seeds", None):
        return [(Path(p).stem, Path(p).read_text()) for p in args.seeds]
    if config.get("seeds"):
        return [(Path(p).stem, Path(p).read_text()) for p in config["seeds"]]
    generated = args.corpus if getattr(args, "corpus", None) else config.get("corpus", 15)
    return seedgen.default_corpus(generated=generated)


# ---------------------------------------------------------------------------
# Commands


def cmd_parse(args, config):
    program = _load_program(args.file)
    if args.skeleton:
        sys.stdout.write(render_skeleton(extract(program)))
    else:
        sys.stdout.write(lang.render(program))
    return 0


_MODE_FLAGS = {"exact": "exact_blocks", "atmost": "at_most_blocks"}


def cmd_enumerate(args, config):
    program = _load_program(args.seed)
    cfg = EnumerationConfig(**_dataclass_kwargs(
        EnumerationConfig,
        {**config.get("enumeration", {}),
         **{k: v for k, v in {
             "partition_mode": _MODE_FLAGS.get(args.mode),
             "angle_source": args.angles,
             "budget": args.budget,
             "quantum_samples_per_classical": args.samples,
             "rng_seed": args.rng_seed,
         }.items() if v is not None}},
        "enumeration"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stream, stats = enumerate_variants(program, cfg)
    for spec, variant in stream:
        (out / f"{program.name}-{spec.index:05d}.qh").write_text(lang.render(variant))
    write_json(out / "stats.json", stats.to_json_dict())
    print(f"classical assignments: {stats.classical_total}")
    print(f"emitted variants: {stats.emitted}  "
          f"(naive {stats.naive}, reduction {stats.reduction_rate:.4f})")
    return 0


def cmd_simulate(args, config):
    circuit = _load_circuit(args.file, args.level)
    backend = run_unitary if args.backend == "unitary" else run_dense
    sv = backend(circuit)
    payload = sv.to_json_dict()
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(payload))
    if args.shots:
        counts = sample(sv, args.shots, args.rng_seed or 0)
        print(json.dumps({"shots": counts.shots, "counts": counts.counts},
                         sort_keys=True))
    return 0


def cmd_optimize(args, config):
    circuit = _load_circuit(args.file, 0)
    pipe = pipeline(args.level)
    if args.fault:
        pipe = inject_fault(pipe, args.fault)
    optimized, trace = pipe.run_traced(circuit)
    if args.trace:
        write_json(args.trace, {"trace": trace})
    if args.out:
        write_circuit(args.out, optimized)
    else:
        print(json.dumps(circuit_to_dict(optimized)))
    print(f"gates: {len(circuit)} -> {len(optimized)}", file=sys.stderr)
    return 0


def cmd_export(args, config):
    circuit = _load_circuit(args.file, args.level)
    if args.out:
        write_circuit(args.out, circuit)
    else:
        print(json.dumps(circuit_to_dict(circuit)))
    return 0


def _campaign_config(args, config) -> difftest.CampaignConfig:
    enum_cfg = EnumerationConfig(**_dataclass_kwargs(
        EnumerationConfig,
        {**config.get("enumeration", {}),
         **({"budget": args.budget} if args.budget is not None else {}),
         **({"quantum_samples_per_classical": args.samples}
            if getattr(args, "samples", None) is not None else {})},
        "enumeration"))
    overrides = {k: v for k, v in {
        "fault": args.fault,
        "jobs": args.jobs,
        "rng_seed": args.rng_seed,
        "epsilon": args.epsilon,
        "ks_trials": args.ks_trials,
        "adapter": args.adapter,
    }.items() if v is not None}
    kwargs = _dataclass_kwargs(
        difftest.CampaignConfig,
        {**config.get("campaign", {}), **overrides},
        "campaign")
    kwargs.pop("seeds", None)
    return difftest.CampaignConfig(
        seeds=tuple(_gather_seeds(args, config)), enumeration=enum_cfg, **kwargs)


def cmd_campaign(args, config):
    cfg = _campaign_config(args, config)
    report = difftest.run_campaign(cfg, outdir=args.out)
    totals = report.totals
    print(f"variants {totals['variants']}  evaluations {totals['evaluations']}  "
          f"mismatches {totals['mismatches']}  crashes {totals['crashes']}  "
          f"timeouts {totals['timeouts']}")
    for group in report.mismatch_groups:
        print(f"  mismatch group rule={group['rule']} seed={group['seed']} "
              f"count={group['count']}")
    return 1 if report.mismatches else 0


def cmd_stats(args, config):
    indir = Path(args.dir)
    counts = []
    for path in sorted(indir.glob("*.qh")):
        try:
            counts.append(len(lang.lower(_load_program(str(path)))))
        except SkeldiffError:
            continue
    reduction = {}
    stats_file = indir / "stats.json"
    if stats_file.exists():
        reduction[indir.name] = read_json(stats_file)
    payload = reports.write_stats_outputs(counts, reduction, args.out)
    print(reports.histogram_text_table(payload["histogram"]))
    return 0


def cmd_seedgen(args, config):
    params = seedgen.SeedParams(**_dataclass_kwargs(
        seedgen.SeedParams,
        {**config.get("seedgen", {}),
         **{k: v for k, v in {
             "qubit_count": args.qubits,
             "min_lines": args.min_lines,
             "max_lines": args.max_lines,
         }.items() if v is not None}},
        "seedgen"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        p = replace(params, rng_seed=args.rng_seed + i)
        name = f"seed_{args.rng_seed + i:02d}"
        program = seedgen.generate_seed(p, name)
        (out / f"{name}.qh").write_text(lang.render(program))
    print(f"wrote {args.count} seed(s) to {out}")
    return 0


# ---------------------------------------------------------------------------
# Self-test


def _selftest_checks(quick: bool, force_fault: str | None = None):
    rng = random.Random(2024)
    n_circuits = 40 if quick else 200

    def check_backends():
        for _ in range(n_circuits):
            c = random_circuit(rng, max_qubits=5, max_gates=30)
            if fidelity(run_dense(c), run_unitary(c)) < 1 - 1e-10:
                return False, "backend disagreement"
        return True, f"{n_circuits} circuits"

    def check_passes():
        for _ in range(n_circuits):
            c = random_circuit(rng, max_qubits=5, max_gates=30)
            reference = run_dense(c)
            previous = len(c)
            for level in (1, 2, 3):
                pipe = pipeline(level)
                if force_fault:
                    pipe = inject_fault(pipe, force_fault)
                optimized = pipe.run(c)
                if fidelity(reference, run_dense(optimized)) < 1 - 1e-9:
                    return False, f"level {level} broke a circuit"
                if len(optimized) > previous:
                    return False, f"level {level} grew the circuit"
                previous = len(optimized)
        return True, f"{n_circuits} circuits x 3 levels"

    def check_zyz():
        for _ in range(n_circuits):
            c = random_circuit(rng, max_qubits=1, max_gates=8, min_qubits=1)
            u = np.eye(2, dtype=complex)
            for op in c.ops:
                from .simulator import gate_matrix

                u = gate_matrix(op.gate, op.angle) @ u
            alpha, beta, gamma, delta = zyz_decompose(u)
            from .simulator import gate_matrix

            rebuilt = (np.exp(1j * alpha) * gate_matrix("rz", beta)
                       @ gate_matrix("ry", gamma) @ gate_matrix("rz", delta))
            if np.max(np.abs(rebuilt - u)) > 1e-9:
                return False, "reconstruction error"
        return True, f"{n_circuits} unitaries"

    def make_fault_check(fault_id):
        def check():
            name, text = WITNESS_SEEDS[fault_id]
            cfg = difftest.CampaignConfig(
                seeds=((name, text),),
                enumeration=EnumerationConfig(
                    budget=200, quantum_samples_per_classical=200, rng_seed=7),
                fault=fault_id, ks_trials=0, rng_seed=7)
            report = difftest.run_campaign(cfg)
            if report.mismatches < 1:
                return False, "fault not detected within 200 variants"
            return True, f"{report.mismatches} mismatches"
        return check

    def check_clean_campaign():
        cfg = difftest.CampaignConfig(
            seeds=tuple(seedgen.default_corpus(generated=2 if quick else 4)),
            enumeration=EnumerationConfig(budget=16 if quick else 64, rng_seed=3),
            fault=force_fault, ks_trials=0, rng_seed=3)
        report = difftest.run_campaign(cfg)
        if report.mismatches:
            return False, f"{report.mismatches} mismatches on a clean build"
        return True, f"{report.totals['evaluations']} evaluations"

    def check_rng_divergence():
        circuit = difftest.uniform_superposition(3)
        rows = difftest.rng_divergence_table(
            run_dense(circuit), run_unitary(circuit),
            trials=50, rng_seed=11)
        if not any(row["shots"] == 100 and row["frac_K_gt_t"] > 0 for row in rows):
            return False, "no measurement false positive at 100 shots"
        medians = [row["median_K"] for row in rows]
        if any(b > a for a, b in zip(medians, medians[1:])):
            return False, "median K not non-increasing"
        return True, "false positives at 100 shots, K converges"

    checks = [
        ("backend-equivalence", check_backends),
        ("pass-soundness", check_passes),
        ("zyz-reconstruction", check_zyz),
    ]
    for fault_id in FAULTS:
        checks.append((f"fault-sensitivity:{fault_id}", make_fault_check(fault_id)))
    checks.append(("clean-campaign", check_clean_campaign))
    checks.append(("rng-divergence", check_rng_divergence))
    return checks


def cmd_selftest(args, config):
    ok = True
    for name, check in _selftest_checks(args.quick, args.force_fault):
        passed, detail = check()
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}  ({detail})")
    print("selftest " + ("passed" if ok else "FAILED"))
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skeldiff",
        description="Enumerate skeletal variants of hybrid quantum programs "
                    "and differential-test circuit optimization levels.")
    parser.add_argument("--config", help="JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and reprint a seed program")
    p.add_argument("file")
    p.add_argument("--skeleton", action="store_true",
                   help="print the hole-marked skeleton instead")

    p = sub.add_parser("enumerate", help="write variant programs for one seed")
    p.add_argument("seed")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["exact", "atmost"])
    p.add_argument("--angles", choices=["uniform", "palette"])
    p.add_argument("--budget", type=int)
    p.add_argument("--samples", type=int,
                   help="quantum samples per classical assignment")
    p.add_argument("--rng-seed", type=int)

    p = sub.add_parser("simulate", help="statevector of a program or circuit")
    p.add_argument("file")
    p.add_argument("--backend", choices=["dense", "unitary"], default="dense")
    p.add_argument("--level", type=int, default=0, choices=[0, 1, 2, 3])
    p.add_argument("--shots", type=int)
    p.add_argument("--rng-seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("optimize", help="run an optimization pipeline")
    p.add_argument("file")
    p.add_argument("--level", type=int, required=True, choices=[0, 1, 2, 3])
    p.add_argument("--fault", choices=sorted(FAULTS))
    p.add_argument("--trace", help="write per-pass gate counts as JSON")
    p.add_argument("--out")

    p = sub.add_parser("export", help="emit the portable circuit JSON")
    p.add_argument("file")
    p.add_argument("--level", type=int, default=0, choices=[0, 1, 2, 3])
    p.add_argument("--out")

    p = sub.add_parser("campaign", help="run a differential-testing campaign")
    p.add_argument("--seeds", nargs="*", help="seed program files")
    p.add_argument("--corpus", type=int,
                   help="use the built-in corpus with N generated seeds")
    p.add_argument("--out", help="report/artifact directory")
    p.add_argument("--budget", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--fault", choices=sorted(FAULTS))
    p.add_argument("--jobs", type=int)
    p.add_argument("--rng-seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--ks-trials", type=int)
    p.add_argument("--adapter", help="external backend command")

    p = sub.add_parser("selftest", help="fault-injection and oracle self-checks")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--force-fault", choices=sorted(FAULTS), help=argparse.SUPPRESS)

    p = sub.add_parser("stats", help="histogram a directory of variant files")
    p.add_argument("dir")
    p.add_argument("--out", required=True)

    p = sub.add_parser("seedgen", help="generate random seed programs")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--qubits", type=int)
    p.add_argument("--min-lines", type=int)
    p.add_argument("--max-lines", type=int)

    return parser


_COMMANDS = {
    "parse": cmd_parse,
    "enumerate": cmd_enumerate,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "export": cmd_export,
    "campaign": cmd_campaign,
    "selftest": cmd_selftest,
    "stats": cmd_stats,
    "seedgen": cmd_seedgen,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config_file(args.config)
        return _COMMANDS[args.command](args, config)
    except (SkeldiffError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
