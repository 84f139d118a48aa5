"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines live.
"""
import json
import random
import subprocess
import time
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import pytest

from skeldiff.cli import WITNESS_SEEDS
from skeldiff.difftest import (
    BASE_RULES,
    CampaignConfig,
    minimize_failure,
    pipelines_for,
    rng_divergence_table,
    rule_mismatch,
    run_campaign,
    uniform_superposition,
)
from skeldiff.enumeration import EnumerationConfig, enumerate_variants
from skeldiff.fuzz import random_circuit
from skeldiff.lang import parse
from skeldiff.optimizer import optimize
from skeldiff.partitions import enumerate_partitions, stirling2
from skeldiff.simulator import fidelity, run_dense, run_unitary
from skeldiff.skeleton import extract
from tests.conftest import EXAMPLE_SRC
from tests.test_partitions import brute_force_partition_count, construct_partitions

ADAPTER_MAIN = Path(__file__).resolve().parent.parent / "adapter" / "dist" / "main.js"


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL {name} ({time.monotonic() - start:.1f}s)")
        raise
    elapsed = time.monotonic() - start
    print(f"ACCEPTANCE PASS {name} ({elapsed:.1f}s, budget {budget_seconds:.0f}s)")
    assert elapsed < budget_seconds


def test_partition_counts():
    with criterion("partition-counts", 5):
        assert sum(1 for _ in enumerate_partitions(7, 2)) == 63
        for k in range(0, 9):
            for n in range(1, min(k, 5) + 1):
                assert stirling2(k, n) == brute_force_partition_count(k, n)
        for k in range(0, 11):
            by_blocks = {}
            for partition in set(construct_partitions(list(range(k)))):
                by_blocks[len(partition)] = by_blocks.get(len(partition), 0) + 1
            for n in range(1, k + 1):
                assert stirling2(k, n) == by_blocks.get(n, 0)


def test_naive_baseline():
    with criterion("naive-baseline", 5):
        from skeldiff.enumeration import naive_count

        assert naive_count(extract(parse(EXAMPLE_SRC))) == 2187


def test_reduction_rate(corpus):
    with criterion("reduction-rate", 60):
        qualifying = 0
        for name, text in corpus:
            program = parse(text, name)
            stream, stats = enumerate_variants(
                program,
                EnumerationConfig(budget=512, quantum_samples_per_classical=4,
                                  rng_seed=5),
                fuel=20_000)
            for _ in stream:
                pass
            total_vars = sum(row["vars"] for row in stats.per_scope)
            widest = max(row["holes"] for row in stats.per_scope)
            if name.startswith("gen_") and total_vars >= 3 and widest >= 7:
                assert stats.reduction_rate > 0.90, (name, stats.reduction_rate)
                qualifying += 1
        assert qualifying >= 5  # the corpus must actually exercise the claim


def test_backend_equivalence():
    with criterion("backend-equivalence", 120):
        rng = random.Random(1001)
        for _ in range(500):
            c = random_circuit(rng, max_qubits=6, max_gates=60)
            assert fidelity(run_dense(c), run_unitary(c)) >= 1 - 1e-10


def test_pipeline_soundness():
    with criterion("pass-soundness", 300):
        rng = random.Random(1002)
        for _ in range(1000):
            c = random_circuit(rng, max_qubits=6, max_gates=60)
            reference = run_dense(c)
            previous = len(c)
            for level in (1, 2, 3):
                optimized = optimize(c, level)
                assert fidelity(reference, run_dense(optimized)) >= 1 - 1e-9
                assert len(optimized) <= previous
                previous = len(optimized)


def test_zero_false_positives(corpus):
    with criterion("zero-false-positives", 900):
        cfg = CampaignConfig(
            seeds=tuple(corpus),
            enumeration=EnumerationConfig(
                budget=512, quantum_samples_per_classical=4, rng_seed=5),
            ks_trials=50, rng_seed=9)
        report = run_campaign(cfg)
        assert report.totals["evaluations"] >= 10_000
        assert report.totals["mismatches"] == 0


@pytest.mark.parametrize("fault", sorted(WITNESS_SEEDS))
def test_fault_sensitivity(fault):
    with criterion(f"fault-sensitivity-{fault}", 300):
        name, text = WITNESS_SEEDS[fault]
        cfg = CampaignConfig(
            seeds=((name, text),),
            enumeration=EnumerationConfig(
                budget=200, quantum_samples_per_classical=200, rng_seed=7),
            fault=fault, ks_trials=0, rng_seed=7)
        report = run_campaign(cfg)
        assert report.totals["variants"] <= 200
        assert report.totals["mismatches"] >= 1
        mismatch_rows = [r for r in report.verdicts if r["kind"] == "mismatch"]
        assert all(r["fidelity"] <= 1 - 1e-6 for r in mismatch_rows)

        # the failing circuit minimizes to a 1-minimal core
        rule = next(r for r in BASE_RULES
                    if r.id == report.mismatch_groups[0]["rule"])
        pipes = pipelines_for((0, 1, 2, 3), fault)
        program = parse(text, name)
        stream, _ = enumerate_variants(
            program, EnumerationConfig(
                budget=200, quantum_samples_per_classical=200, rng_seed=7))
        from skeldiff.lang import lower

        failing = None
        for _, variant in stream:
            circuit = lower(variant)
            if rule_mismatch(circuit, rule, pipes):
                failing = circuit
                break
        assert failing is not None
        minimized = minimize_failure(failing, rule, pipes)
        for i in range(len(minimized.ops)):
            candidate = replace(minimized,
                                ops=minimized.ops[:i] + minimized.ops[i + 1:])
            assert not rule_mismatch(candidate, rule, pipes)


def test_measurement_false_positives():
    with criterion("measurement-false-positives", 60):
        circuit = uniform_superposition(3)
        lhs, rhs = run_dense(circuit), run_unitary(circuit)
        assert fidelity(lhs, rhs) >= 1 - 1e-10
        rows = rng_divergence_table(
            lhs, rhs, shots_list=(100, 1000, 10000), trials=50,
            threshold=0.15, rng_seed=11)
        at_100 = next(r for r in rows if r["shots"] == 100)
        assert at_100["frac_K_gt_t"] > 0  # sampling cries wolf, the oracle not
        medians = [r["median_K"] for r in rows]
        assert all(later <= earlier for earlier, later in zip(medians, medians[1:]))


def test_report_determinism(corpus):
    with criterion("report-determinism", 600):
        def run(jobs):
            cfg = CampaignConfig(
                seeds=tuple(corpus[:6]),
                enumeration=EnumerationConfig(budget=64, rng_seed=3),
                ks_trials=12, jobs=jobs, rng_seed=3)
            return json.dumps(run_campaign(cfg).to_json_dict(), sort_keys=True)

        assert run(1) == run(8)


@pytest.mark.skipif(not ADAPTER_MAIN.exists(),
                    reason="external adapter not built (npm install && npm run "
                           "build in adapter/); primary suite is adapter-free")
def test_adapter_equivalence():
    with criterion("adapter-equivalence", 120):
        from skeldiff.extern import AdapterClient

        rng = random.Random(2003)
        with AdapterClient(f"node {ADAPTER_MAIN}") as client:
            for _ in range(50):
                c = random_circuit(rng, max_qubits=5, max_gates=40)
                assert fidelity(client.statevector(c), run_dense(c)) >= 1 - 1e-6

        # malformed-input fuzzing: the process answers errors and stays alive
        proc = subprocess.Popen(
            ["node", str(ADAPTER_MAIN)], stdin=subprocess.PIPE,
            stdout=subprocess.PIPE, text=True)
        lines = ["not json at all", '{"id": 1}', '{"id": 2, "task": "statevector"}',
                 '{"id": 3, "task": "statevector", "circuit": {"n": 1, "ops": '
                 '[{"gate": "xyzzy", "qubits": [0]}]}}',
                 '{"id": 4, "task": "statevector", "circuit": {"n": 1, "ops": '
                 '[{"gate": "x", "qubits": [7]}]}}']
        for line in lines:
            proc.stdin.write(line + "\n")
        proc.stdin.flush()
        answers = [json.loads(proc.stdout.readline()) for _ in lines]
        assert all("error" in a for a in answers)
        assert proc.poll() is None  # survived the abuse
        proc.stdin.write('{"id": 9, "task": "statevector", "circuit": '
                         '{"n": 1, "ops": [{"gate": "x", "qubits": [0]}]}}\n')
        proc.stdin.flush()
        final = json.loads(proc.stdout.readline())
        assert final["statevector"][1] == [1, 0]
        proc.stdin.close()
        proc.terminate()
