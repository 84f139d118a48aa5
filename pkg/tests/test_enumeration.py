"""Classical/quantum enumeration against brute-force oracles."""
import itertools
import random

import pytest

from skeldiff.enumeration import (
    EnumerationConfig,
    QuantumAssignment,
    _ClassicalSpace,
    canonical_qubit_key,
    count_classical,
    enumerate_classical,
    enumerate_variants,
    naive_count,
    sample_quantum,
    scope_valid_count,
)
from skeldiff.errors import (
    EmptyEnumeration,
    IncompleteAssignment,
    RejectionExhausted,
)
from skeldiff.fuzz import random_circuit
from skeldiff.lang import Circuit, GateApply, lower, parse
from skeldiff.skeleton import extract, fill_holes


def brute_force_classes(sk, mode):
    """All scope-legal hole labelings, quotiented by per-scope variable
    renaming.  Returns the set of canonical class keys."""
    scopes = sk.scopes
    eligible = []
    for h in sk.classical_holes:
        vs = []
        for sid in scopes.ancestors_or_self(h.scope_id):
            vs.extend(scopes.scopes[sid].variables)
        eligible.append(sorted(vs))
    var_scope = {}
    for scope in scopes.scopes:
        for v in scope.variables:
            var_scope[v] = scope.id
    all_vars = sorted(var_scope)

    def canonical_key(labeling):
        # per scope, rename variables by order of first hole occurrence
        order = {}
        key = []
        for name in labeling:
            if name not in order:
                order[name] = sum(1 for v in order if var_scope[v] == var_scope[name])
            key.append((var_scope[name], order[name]))
        return tuple(key)

    classes = set()
    for labeling in itertools.product(*eligible):
        if mode == "exact_blocks" and set(labeling) != set(all_vars):
            continue
        classes.add(canonical_key(labeling))
    return classes


def assignment_key(sk, assignment):
    scopes = sk.scopes
    var_scope = {}
    for scope in scopes.scopes:
        for v in scope.variables:
            var_scope[v] = scope.id
    labeling = [assignment.mapping[h.id] for h in sk.classical_holes]
    order = {}
    key = []
    for name in labeling:
        if name not in order:
            order[name] = sum(1 for v in order if var_scope[v] == var_scope[name])
        key.append((var_scope[name], order[name]))
    return tuple(key)


class TestCounts:
    def test_naive_baseline(self, example_program):
        assert naive_count(extract(example_program)) == 3 ** 7 == 2187

    def test_naive_no_holes(self):
        assert naive_count(extract(parse("qubits 1\nh q[0]\n"))) == 1

    def test_scope_valid_count(self, example_program):
        # three top-level holes take {a, b}; four branch holes take {a, b, c}
        assert scope_valid_count(extract(example_program)) == 2 ** 3 * 3 ** 4 == 648

    def test_two_variable_case_reproduces_63(self, example_program_2var):
        sk = extract(example_program_2var)
        assert count_classical(sk, "exact_blocks") == 63
        assert count_classical(sk, "at_most_blocks") == 64


class TestClassicalEnumeration:
    @pytest.mark.parametrize("mode", ["exact_blocks", "at_most_blocks"])
    def test_matches_brute_force_classes(self, example_program, mode):
        sk = extract(example_program)
        expected = brute_force_classes(sk, mode)
        emitted = list(enumerate_classical(sk, EnumerationConfig(partition_mode=mode)))
        assert count_classical(sk, mode) == len(expected) == len(emitted)
        keys = {assignment_key(sk, a) for a in emitted}
        assert keys == expected  # one representative per class, none missed

    def test_example_exact_count_frozen(self, example_program):
        # brute force gives 245 exact / 324 at-most for the running example
        sk = extract(example_program)
        assert count_classical(sk, "exact_blocks") == 245
        assert count_classical(sk, "at_most_blocks") == 324

    @pytest.mark.parametrize("mode", ["exact_blocks", "at_most_blocks"])
    def test_unrank_agrees_with_stream(self, example_program, mode):
        sk = extract(example_program)
        space = _ClassicalSpace(sk, mode)
        streamed = [a.mapping for a in space.stream()]
        unranked = [space.unrank(r).mapping for r in range(space.count())]
        assert streamed == unranked

    def test_no_two_assignments_alpha_equivalent(self, corpus):
        # spot check on a generated seed with a small space
        for name, text in corpus:
            sk = extract(parse(text, name))
            if len(sk.classical_holes) <= 8:
                emitted = list(enumerate_classical(sk, EnumerationConfig()))
                keys = [assignment_key(sk, a) for a in emitted]
                assert len(keys) == len(set(keys))

    def test_branch_swap_partition_is_emitted(self, example_program):
        # the {{1,5},{2,3},{4,6,7}} grouping is one of the exact-mode outputs
        sk = extract(example_program)
        target = {1: "a", 5: "a", 2: "b", 3: "b", 4: "c", 6: "c", 7: "c"}
        assert any(a.mapping == target
                   for a in enumerate_classical(sk, EnumerationConfig()))

    def test_exact_mode_infeasible(self):
        # two variables but a single hole cannot use both
        src = "qubits 1\na = 1\n"
        sk = extract(parse(src))
        object.__setattr__(
            sk.scopes.scopes[0], "variables", ("a", "b"))
        with pytest.raises(EmptyEnumeration):
            count_classical(sk, "exact_blocks")


class TestCanonicalKey:
    def test_relabeled_circuits_share_keys(self):
        c1 = Circuit(2, (GateApply("h", None, (1,)), GateApply("cx", None, (1, 0))))
        c2 = Circuit(2, (GateApply("h", None, (0,)), GateApply("cx", None, (0, 1))))
        assert canonical_qubit_key(c1) == canonical_qubit_key(c2)

    def test_symmetric_operands(self):
        a = Circuit(2, (GateApply("swap", None, (0, 1)),))
        b = Circuit(2, (GateApply("swap", None, (1, 0)),))
        assert canonical_qubit_key(a) == canonical_qubit_key(b)

    def test_angle_inequality_distinguishes(self):
        a = Circuit(1, (GateApply("rx", 0.1, (0,)),))
        b = Circuit(1, (GateApply("rx", 0.2, (0,)),))
        assert canonical_qubit_key(a) != canonical_qubit_key(b)

    def test_double_cz_permutation(self):
        # ambiguous symmetric-pair labeling needs the branch-and-minimize step
        c1 = Circuit(3, (GateApply("cz", None, (1, 0)), GateApply("cz", None, (1, 2))))
        c2 = Circuit(3, (GateApply("cz", None, (1, 2)), GateApply("cz", None, (1, 0))))
        assert canonical_qubit_key(c1) == canonical_qubit_key(c2)

    def test_permutation_invariance_fuzz(self):
        rng = random.Random(13)
        for _ in range(300):
            c = random_circuit(rng, max_qubits=4, max_gates=12)
            perm = list(range(c.qubit_count))
            rng.shuffle(perm)
            permuted = Circuit(c.qubit_count, tuple(
                GateApply(op.gate, op.angle, tuple(perm[q] for q in op.qubits))
                for op in c.ops))
            assert canonical_qubit_key(c) == canonical_qubit_key(permuted)

    def test_distinct_keys_mean_no_permutation_exists(self):
        # soundness direction, checked exhaustively on 3 qubits
        rng = random.Random(5)
        sym = {"cz": [(0, 1)], "swap": [(0, 1)], "ccx": [(0, 1)], "cswap": [(1, 2)]}

        def equivalent(c1, c2):
            if len(c1.ops) != len(c2.ops):
                return False
            for perm in itertools.permutations(range(c1.qubit_count)):
                ok = True
                for a, b in zip(c1.ops, c2.ops):
                    if a.gate != b.gate or a.angle != b.angle:
                        ok = False
                        break
                    mapped = tuple(perm[q] for q in a.qubits)
                    if mapped == b.qubits:
                        continue
                    groups = sym.get(a.gate)
                    if groups is None:
                        ok = False
                        break
                    i, j = groups[0]
                    swapped = list(mapped)
                    swapped[i], swapped[j] = swapped[j], swapped[i]
                    if tuple(swapped) != b.qubits:
                        ok = False
                        break
                if ok:
                    return True
            return False

        for _ in range(120):
            c1 = random_circuit(rng, max_qubits=3, max_gates=4, min_qubits=3)
            c2 = random_circuit(rng, max_qubits=3, max_gates=4, min_qubits=3)
            same_key = canonical_qubit_key(c1) == canonical_qubit_key(c2)
            if same_key:
                assert equivalent(c1, c2)
            elif len(c1.ops) == len(c2.ops):
                assert not equivalent(c1, c2)


class TestSampleQuantum:
    def test_respects_constraints(self, example_program):
        sk = extract(example_program)
        cfg = EnumerationConfig()
        rng = random.Random(3)
        for _ in range(50):
            qa = sample_quantum(sk, cfg, rng)
            assert set(qa.angles) == {1}
            assert 0 <= qa.angles[1] < 6.2832
            assert all(0 <= q < 3 for q in qa.qubits.values())

    def test_per_gate_operands_distinct(self):
        sk = extract(parse("qubits 3\nh q[0]\nccx q[0], q[1], q[2]\n"))
        rng = random.Random(9)
        for _ in range(100):
            qa = sample_quantum(sk, EnumerationConfig(), rng)
            ccx_fill = [qa.qubits[h.id] for h in sk.qubit_holes[1:]]
            assert len(set(ccx_fill)) == 3

    def test_rejects_pure_qubit_permutations(self):
        # a single cx: every distinct operand pair is a relabeling of the seed
        sk = extract(parse("qubits 2\ncx q[0], q[1]\n"))
        with pytest.raises(RejectionExhausted):
            sample_quantum(sk, EnumerationConfig(), random.Random(1))

    def test_impossible_distinct_pair(self):
        sk = extract(parse("qubits 2\ncx q[0], q[1]\n"))
        shrunk = extract(parse("qubits 2\ncx q[0], q[1]\n"))
        object.__setattr__(shrunk.program, "qubit_count", 1)
        with pytest.raises(RejectionExhausted):
            sample_quantum(shrunk, EnumerationConfig(), random.Random(1))

    def test_palette_angles(self, example_program):
        sk = extract(example_program)
        cfg = EnumerationConfig(angle_source="palette")
        rng = random.Random(17)
        seen = set()
        for _ in range(60):
            qa = sample_quantum(sk, cfg, rng)
            seen.add(qa.angles[1])
        import math
        assert seen <= {0.0, math.pi / 4, math.pi / 2, math.pi, 3 * math.pi / 2}
        assert len(seen) > 1


class TestFillHoles:
    def test_incomplete_assignment(self, example_program):
        sk = extract(example_program)
        classical = sk.reference_classical()
        del classical[7]
        with pytest.raises(IncompleteAssignment):
            fill_holes(sk, classical, sk.reference_quantum())

    def test_branch_swap_variant(self, example_program):
        sk = extract(example_program)
        classical = {1: "a", 5: "a", 2: "b", 3: "b", 4: "c", 6: "c", 7: "c"}
        quantum = QuantumAssignment({1: 0.3}, {1: 2, 2: 0})
        variant = fill_holes(sk, classical, quantum)
        assert lower(variant).ops == (GateApply("t", None, (2,)),)


class TestEnumerateVariants:
    def test_no_holes_yields_seed_once(self):
        p = parse("qubits 1\n", "empty")
        stream, stats = enumerate_variants(p, EnumerationConfig())
        out = list(stream)
        assert len(out) == 1 and out[0][1] == p
        assert stats.emitted == 1

    def test_budget_respected(self, example_program):
        cfg = EnumerationConfig(budget=10, rng_seed=1)
        stream, stats = enumerate_variants(example_program, cfg)
        assert len(list(stream)) <= 10

    def test_deterministic(self, example_program):
        def run():
            cfg = EnumerationConfig(budget=40, rng_seed=5)
            stream, _ = enumerate_variants(example_program, cfg)
            return [(spec.canonical_key, variant) for spec, variant in stream]

        assert run() == run()

    def test_no_duplicate_keys_and_all_valid(self, example_program):
        cfg = EnumerationConfig(budget=120, rng_seed=2)
        stream, stats = enumerate_variants(example_program, cfg)
        keys = set()
        for spec, variant in stream:
            assert spec.canonical_key not in keys
            keys.add(spec.canonical_key)
            circuit = lower(variant)  # validates and terminates
            for op in circuit.ops:
                assert len(set(op.qubits)) == len(op.qubits)
                assert all(0 <= q < variant.qubit_count for q in op.qubits)

    def test_stats_reduction(self, corpus):
        # a generated seed with >= 3 variables and a >= 7-hole scope reduces
        # the naive space by more than 90%
        checked = 0
        for name, text in corpus[5:]:
            p = parse(text, name)
            stream, stats = enumerate_variants(
                p, EnumerationConfig(budget=64, rng_seed=4))
            for _ in stream:
                pass
            if (sum(r["vars"] for r in stats.per_scope) >= 3
                    and max(r["holes"] for r in stats.per_scope) >= 7):
                assert stats.reduction_rate > 0.90
                checked += 1
            if checked >= 3:
                break
        assert checked >= 1
