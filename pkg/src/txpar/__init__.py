"""Simulate how much of a block's transaction workload can run in parallel."""

from .conflict import ClusterMetric, ConflictGraph, build_conflict_graph, largest_cluster_metric
from .heft import PrecedenceDag, build_dag, heft_schedule, upward_rank
from .oracle import OracleResult, optimal_schedule
from .report import BlockReport, RunConfig, aggregate, run_block
from .schedule import Schedule, ScheduleMetrics, check_valid, chunk, combine_chunked, metrics
from .simple import simple_schedule
from .synth import SynthParams, generate
from .trace import BlockTrace, TransactionRecord, parse_trace, validate_block, write_trace

__version__ = "0.1.0"
