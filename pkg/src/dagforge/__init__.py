"""Uniform random generation of labelled directed acyclic graphs."""

from dagforge.counting import (
    CountTable,
    WeightedTable,
    asymptotic_ratio,
    build_children_limited_table,
    build_count_table,
    build_restricted_table,
    build_weighted_table,
    c_link_count,
    total_inclusion_exclusion,
)
from dagforge.dag import Dag
from dagforge.rng import RandomSource
from dagforge.sample_exact import (
    OutpointSequence,
    draw_uniform_bigint,
    permute_labels,
    reconstruct_dag,
    sample_outpoint_sequence,
    sample_uniform_dag,
)
from dagforge.sample_limit import (
    LimitTables,
    build_limit_tables,
    sample_large_dag,
    sample_outpoint_sequence_hybrid,
)

__version__ = "0.1.0"

__all__ = [
    "CountTable",
    "Dag",
    "LimitTables",
    "OutpointSequence",
    "RandomSource",
    "WeightedTable",
    "asymptotic_ratio",
    "build_children_limited_table",
    "build_count_table",
    "build_limit_tables",
    "build_restricted_table",
    "build_weighted_table",
    "c_link_count",
    "draw_uniform_bigint",
    "permute_labels",
    "reconstruct_dag",
    "sample_large_dag",
    "sample_outpoint_sequence",
    "sample_outpoint_sequence_hybrid",
    "sample_uniform_dag",
    "total_inclusion_exclusion",
]
