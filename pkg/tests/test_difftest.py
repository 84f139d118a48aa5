"""Variant matrices, rule evaluation, campaigns, minimization, replay."""
import json
import random
from dataclasses import replace
from pathlib import Path

import pytest

from skeldiff.cli import WITNESS_SEEDS
from skeldiff.difftest import (
    BASE_RULES,
    CampaignConfig,
    ComparisonRule,
    build_variant_matrix,
    evaluate_rules,
    minimize_failure,
    pipelines_for,
    replay_fidelity,
    rng_divergence_table,
    rule_mismatch,
    rules_for,
    run_campaign,
    uniform_superposition,
)
from skeldiff.enumeration import EnumerationConfig
from skeldiff.errors import ConfigError, NotAMismatch
from skeldiff.fuzz import random_circuit
from skeldiff.lang import Circuit, GateApply, parse
from skeldiff.simulator import Statevector, run_dense, run_unitary

BELL_SEED = "qubits 2\na = 1\nh q[0]\nif a {\n  cx q[0], q[1]\n}\n"


class TestRules:
    def test_base_rule_table(self):
        table = {r.id: (r.lhs, r.rhs) for r in BASE_RULES}
        assert table["R1"] == ((0, "dense"), (0, "unitary"))
        assert table["R2"] == ((0, "dense"), (1, "dense"))
        assert table["R3"] == ((1, "dense"), (2, "dense"))
        assert table["R4"] == ((2, "dense"), (3, "dense"))

    def test_cross_backend_only_at_level_zero(self):
        with pytest.raises(ConfigError):
            ComparisonRule("bad", (1, "dense"), (1, "unitary"))
        with pytest.raises(ConfigError):
            ComparisonRule("self", (0, "dense"), (0, "dense"))

    def test_rules_for_filters_levels(self):
        rules = rules_for((0, 1), ("dense", "unitary"))
        assert [r.id for r in rules] == ["R1", "R2"]

    def test_extern_rules_attached(self):
        rules = rules_for((0, 1, 2, 3), ("dense", "unitary"), extern=True)
        assert [r.id for r in rules] == [
            "R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8"]


class TestVariantMatrix:
    def test_bell_seed_all_cells_agree(self):
        program = parse(BELL_SEED, "bell")
        matrix = build_variant_matrix(program)
        assert len(matrix) == 8
        svs = [cell.statevector for cell in matrix.values()]
        for sv in svs:
            assert sv.fidelity(svs[0]) >= 1 - 1e-10

    def test_dead_loop_seed_times_out_everywhere(self):
        program = parse("qubits 1\nwhile 1 {\n  x q[0]\n}\n", "dead")
        matrix = build_variant_matrix(program, fuel=2000)
        assert all(cell.status == "timeout" for cell in matrix.values())

    def test_fault_shows_up_at_its_level(self):
        program = parse("qubits 1\na = 1\nh q[0]\nt q[0]\n", "twitness")
        matrix = build_variant_matrix(program, fault="FAULT_DROP_T")
        judged = dict(
            (rule.id, verdict)
            for rule, verdict in evaluate_rules(matrix, BASE_RULES, 1e-9))
        assert judged["R1"].kind == "pass"
        assert judged["R2"].kind == "mismatch"
        assert judged["R2"].fidelity <= 1 - 1e-6


class TestEvaluateRules:
    def _matrix_with_fidelity(self, fid):
        from skeldiff.difftest import Cell
        import numpy as np

        a = Statevector(np.array([1, 0], dtype=complex), 1)
        b = Statevector(np.array([fid, np.sqrt(1 - fid * fid)], dtype=complex), 1)
        return {(0, "dense"): Cell("ok", a), (0, "unitary"): Cell("ok", b)}

    def test_boundary_inclusive(self):
        eps = 1e-9
        matrix = self._matrix_with_fidelity(1 - eps / 2)
        [(rule, verdict)] = evaluate_rules(matrix, BASE_RULES[:1], eps)
        assert verdict.kind == "pass"

    def test_mismatch_below_threshold(self):
        matrix = self._matrix_with_fidelity(0.45)
        [(rule, verdict)] = evaluate_rules(matrix, BASE_RULES[:1], 1e-9)
        assert verdict.kind == "mismatch"
        assert verdict.fidelity == pytest.approx(0.45)

    def test_crash_cell_propagates(self):
        from skeldiff.difftest import Cell

        matrix = {(0, "dense"): Cell("crash", error="boom"),
                  (0, "unitary"): Cell("ok", run_dense(Circuit(1, ())))}
        [(rule, verdict)] = evaluate_rules(matrix, BASE_RULES[:1], 1e-9)
        assert verdict.kind == "crash"
        assert verdict.side == "lhs"


class TestCampaign:
    def test_clean_mini_campaign(self, corpus):
        cfg = CampaignConfig(
            seeds=tuple(corpus[:4]),
            enumeration=EnumerationConfig(budget=48, rng_seed=3),
            ks_trials=8, rng_seed=3)
        report = run_campaign(cfg)
        assert report.totals["mismatches"] == 0
        assert report.totals["variants"] > 0
        assert report.totals["evaluations"] == report.totals["variants"] * 4
        assert set(report.reduction) == {name for name, _ in corpus[:4]}

    @pytest.mark.parametrize("fault", sorted(WITNESS_SEEDS))
    def test_fault_campaign_detects(self, fault):
        name, text = WITNESS_SEEDS[fault]
        cfg = CampaignConfig(
            seeds=((name, text),),
            enumeration=EnumerationConfig(
                budget=200, quantum_samples_per_classical=200, rng_seed=7),
            fault=fault, ks_trials=0, rng_seed=7)
        report = run_campaign(cfg)
        assert report.totals["variants"] <= 200
        assert report.totals["mismatches"] >= 1
        for row in report.verdicts:
            if row["kind"] == "mismatch":
                assert row["fidelity"] <= 1 - 1e-6

    def test_report_determinism_across_jobs(self, corpus):
        def run(jobs):
            cfg = CampaignConfig(
                seeds=tuple(corpus[:3]),
                enumeration=EnumerationConfig(budget=32, rng_seed=5),
                ks_trials=6, jobs=jobs, rng_seed=5)
            return json.dumps(run_campaign(cfg).to_json_dict(), sort_keys=True)

        assert run(1) == run(4)

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigError):
            CampaignConfig(seeds=(("s", "qubits 1\n"),), epsilon=0.5)
        with pytest.raises(ConfigError):
            CampaignConfig(seeds=(("s", "qubits 1\n"),), ks_threshold=1.5)
        with pytest.raises(ConfigError):
            CampaignConfig(seeds=())
        with pytest.raises(ConfigError):
            run_campaign(CampaignConfig(seeds=(("bad", "qubits\n"),)))

    def test_artifacts_written_and_replayable(self, tmp_path):
        name, text = WITNESS_SEEDS["FAULT_DROP_T"]
        cfg = CampaignConfig(
            seeds=((name, text),),
            enumeration=EnumerationConfig(
                budget=50, quantum_samples_per_classical=50, rng_seed=7),
            fault="FAULT_DROP_T", ks_trials=0, rng_seed=7)
        report = run_campaign(cfg, outdir=tmp_path)
        assert report.mismatch_groups
        group = report.mismatch_groups[0]
        artifact = Path(group["example_artifact"])
        assert artifact.exists()
        rule = next(r for r in BASE_RULES if r.id == group["rule"])
        recorded = next(
            row["fidelity"] for row in report.verdicts
            if row["rule"] == group["rule"] and row["kind"] == "mismatch"
            and row["variant"] == artifact.name)
        assert replay_fidelity(artifact, rule) == recorded  # bit-for-bit
        assert (tmp_path / "report.json").exists()
        assert (tmp_path / "verdicts.csv").exists()
        assert (tmp_path / "mismatches_by_rule.png").exists()


class TestMinimize:
    def _drop_t_setup(self):
        rng = random.Random(11)
        base = random_circuit(rng, max_qubits=3, max_gates=36, min_qubits=3,
                              gates=("x", "z", "cx", "rz", "swap", "h", "cp"))
        embedded = Circuit(3, base.ops + (GateApply("h", None, (1,)),
                                          GateApply("t", None, (1,))))
        pipes = pipelines_for((0, 1, 2, 3), "FAULT_DROP_T")
        rule = next(r for r in BASE_RULES if r.id == "R2")
        return embedded, rule, pipes

    def test_minimized_is_one_minimal(self):
        embedded, rule, pipes = self._drop_t_setup()
        minimized = minimize_failure(embedded, rule, pipes)
        assert any(op.gate == "t" for op in minimized.ops)
        assert len(minimized) < len(embedded)
        for i in range(len(minimized.ops)):
            candidate = replace(
                minimized, ops=minimized.ops[:i] + minimized.ops[i + 1:])
            assert not rule_mismatch(candidate, rule, pipes)

    def test_already_minimal_unchanged(self):
        _, rule, pipes = self._drop_t_setup()
        tiny = Circuit(1, (GateApply("h", None, (0,)), GateApply("t", None, (0,))))
        assert minimize_failure(tiny, rule, pipes) == tiny

    def test_passing_circuit_raises(self):
        _, rule, pipes = self._drop_t_setup()
        with pytest.raises(NotAMismatch):
            minimize_failure(Circuit(1, (GateApply("x", None, (0,)),)), rule, pipes)


class TestRngDivergence:
    def test_false_positive_phenomenon(self):
        circuit = uniform_superposition(3)
        lhs, rhs = run_dense(circuit), run_unitary(circuit)
        assert lhs.fidelity(rhs) >= 1 - 1e-10
        rows = rng_divergence_table(lhs, rhs, trials=50, rng_seed=11)
        at_100 = next(r for r in rows if r["shots"] == 100)
        assert at_100["frac_K_gt_t"] > 0
        medians = [r["median_K"] for r in rows]
        assert all(b <= a for a, b in zip(medians, medians[1:]))

    def test_campaign_ks_table_populated(self, corpus):
        cfg = CampaignConfig(
            seeds=tuple(corpus[:2]),
            enumeration=EnumerationConfig(budget=16, rng_seed=2),
            ks_trials=5, rng_seed=2)
        report = run_campaign(cfg)
        assert [row["shots"] for row in report.ks_table] == [100, 1000, 10000]
        assert all(row["trials"] >= 1 for row in report.ks_table)
