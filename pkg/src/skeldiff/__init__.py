"""skeldiff: skeletal-variant enumeration and differential testing of
quantum circuit optimization pipelines."""

from .difftest import (
    BASE_RULES,
    CampaignConfig,
    CampaignReport,
    ComparisonRule,
    Verdict,
    build_variant_matrix,
    evaluate_rules,
    minimize_failure,
    rng_divergence_table,
    run_campaign,
)
from .enumeration import (
    ClassicalAssignment,
    EnumerationConfig,
    QuantumAssignment,
    VariantSpec,
    canonical_qubit_key,
    enumerate_classical,
    enumerate_variants,
    naive_count,
    sample_quantum,
)
from .kstest import KsResult, ks_two_sample
from .lang import Circuit, GateApply, Program, lower, parse, render
from .optimizer import FAULTS, Pipeline, inject_fault, optimize, pipeline, zyz_decompose
from .partitions import PartitionRGS, enumerate_partitions, stirling2
from .seedgen import SeedParams, default_corpus, generate_seed
from .simulator import (
    MeasurementSample,
    Statevector,
    fidelity,
    gate_matrix,
    run_dense,
    run_unitary,
    sample,
)
from .skeleton import Skeleton, count_holes, extract, fill_holes

__version__ = "0.1.0"

__all__ = [
    "BASE_RULES", "CampaignConfig", "CampaignReport", "Circuit",
    "ClassicalAssignment", "ComparisonRule", "EnumerationConfig", "FAULTS",
    "GateApply", "KsResult", "MeasurementSample", "PartitionRGS", "Pipeline",
    "Program", "QuantumAssignment", "SeedParams", "Skeleton", "Statevector",
    "VariantSpec", "Verdict", "build_variant_matrix", "canonical_qubit_key",
    "count_holes", "default_corpus", "enumerate_classical",
    "enumerate_partitions", "enumerate_variants", "evaluate_rules",
    "extract", "fidelity", "fill_holes", "gate_matrix", "generate_seed",
    "inject_fault", "ks_two_sample", "lower", "minimize_failure",
    "naive_count", "optimize", "parse", "pipeline", "render",
    "rng_divergence_table", "run_campaign", "run_dense", "run_unitary",
    "sample", "sample_quantum", "stirling2", "zyz_decompose",
]
