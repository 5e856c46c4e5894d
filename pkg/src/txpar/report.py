"""Per-block evaluation of all strategies, CSV/JSON rows and windowed aggregates."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .conflict import build_conflict_graph, largest_cluster_metric
from .heft import build_dag, heft_schedule
from .schedule import SchedulerBugError, Schedule, check_valid, chunk, combine_chunked, metrics
from .simple import VARIANTS, simple_schedule
from .trace import BlockTrace

log = logging.getLogger(__name__)

STRATEGIES = ("lc", "simple", "heft")

CSV_COLUMNS = (
    "block", "tx_count", "total_gas", "threads", "cap", "simple_variant",
    "lc_makespan", "lc_speedup",
    "simple_makespan", "simple_speedup", "simple_util",
    "heft_makespan", "heft_speedup", "heft_util",
)


class InvalidScheduleError(SchedulerBugError):
    """A scheduler emitted a schedule that fails check_valid."""


@dataclass(frozen=True)
class RunConfig:
    threads: int = 8
    cap: Optional[int] = None
    strategies: Tuple[str, ...] = STRATEGIES
    simple_variant: str = "prefix"

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be >= 1 or None")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ValueError(f"unknown strategies: {', '.join(bad)}")
        if self.simple_variant not in VARIANTS:
            raise ValueError(f"unknown simple variant {self.simple_variant!r}")


@dataclass(frozen=True)
class StrategyResult:
    makespan: int
    speedup: float
    utilization: Optional[float] = None


@dataclass(frozen=True)
class BlockReport:
    block_number: int
    tx_count: int
    total_gas: int
    threads: int
    cap: Optional[int]
    simple_variant: str
    results: Dict[str, StrategyResult] = field(default_factory=dict)

    def row(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "block": self.block_number,
            "tx_count": self.tx_count,
            "total_gas": self.total_gas,
            "threads": self.threads,
            "cap": "none" if self.cap is None else self.cap,
            "simple_variant": self.simple_variant,
        }
        for name in STRATEGIES:
            r = self.results.get(name)
            out[f"{name}_makespan"] = None if r is None else r.makespan
            out[f"{name}_speedup"] = None if r is None else r.speedup
            if name != "lc":
                out[f"{name}_util"] = None if r is None else r.utilization
        return out


def _checked(schedule: Schedule, piece: BlockTrace, graph, strategy: str) -> int:
    violations = check_valid(schedule, piece, graph)
    if violations:
        detail = "; ".join(str(v) for v in violations[:5])
        raise InvalidScheduleError(
            f"{strategy} schedule for block {piece.block_number} is invalid: {detail}"
        )
    return schedule.makespan


def run_block(block: BlockTrace, config: RunConfig = RunConfig()) -> BlockReport:
    """Evaluate every requested strategy on one block, chunked by ``config.cap``.

    Each chunk is scheduled independently; chunk makespans are summed. Every
    schedule is checked and an invalid one raises InvalidScheduleError.
    """
    if len(block) == 0:
        raise ValueError(f"block {block.block_number} has no transactions")

    spans: Dict[str, List[int]] = {s: [] for s in config.strategies}
    for piece in chunk(block, config.cap):
        graph = build_conflict_graph(piece)
        if "lc" in spans:
            spans["lc"].append(largest_cluster_metric(graph).makespan)
        if "simple" in spans:
            sched = simple_schedule(piece, graph, config.threads, config.simple_variant)
            spans["simple"].append(_checked(sched, piece, graph, "simple"))
        if "heft" in spans:
            sched = heft_schedule(build_dag(piece, graph), config.threads)
            spans["heft"].append(_checked(sched, piece, graph, "heft"))

    results = {}
    for name in STRATEGIES:
        if name not in spans:
            continue
        makespan = combine_chunked(spans[name])
        m = metrics(makespan, block, config.threads)
        results[name] = StrategyResult(m.makespan, m.speedup, None if name == "lc" else m.utilization)

    return BlockReport(
        block_number=block.block_number,
        tx_count=len(block),
        total_gas=block.total_gas,
        threads=config.threads,
        cap=config.cap,
        simple_variant=config.simple_variant,
        results=results,
    )


def empty_report(block: BlockTrace, config: RunConfig) -> BlockReport:
    return BlockReport(block.block_number, 0, 0, config.threads, config.cap, config.simple_variant)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


class CsvReportWriter:
    """Writes the header comment, the column header, then one row per report, flushing each."""

    def __init__(self, out, threads: int):
        self.out = out
        out.write(f"# threads={threads}\n")
        self._csv = csv.writer(out, lineterminator="\n")
        self._csv.writerow(CSV_COLUMNS)

    def write(self, report: BlockReport) -> None:
        row = report.row()
        self._csv.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        self.out.flush()


class JsonReportWriter:
    """JSON Lines: a header object, then one object per block (floats at 6 significant digits)."""

    def __init__(self, out, threads: int):
        self.out = out
        out.write(json.dumps({"threads": threads}) + "\n")

    def write(self, report: BlockReport) -> None:
        row = {k: (float(_fmt(v)) if isinstance(v, float) else v) for k, v in report.row().items()}
        self.out.write(json.dumps(row, separators=(",", ":")) + "\n")
        self.out.flush()


def reports_to_csv(reports: Iterable[BlockReport], threads: int) -> str:
    buf = io.StringIO()
    writer = CsvReportWriter(buf, threads)
    for r in reports:
        writer.write(r)
    return buf.getvalue()


@dataclass(frozen=True)
class StrategyAggregate:
    mean_speedup: float
    gas_weighted_speedup: float
    blocks: int


@dataclass(frozen=True)
class AggregateReport:
    first_block: int
    last_block: int
    per_strategy: Dict[str, StrategyAggregate]


AGGREGATE_COLUMNS = ("first_block", "last_block", "strategy", "blocks", "mean_speedup", "gas_weighted_speedup")


def _aggregate_window(window: List[BlockReport]) -> AggregateReport:
    per = {}
    for name in STRATEGIES:
        members = [(r.results[name].speedup, r.total_gas) for r in window if name in r.results]
        if not members:
            continue
        total_gas = sum(g for _, g in members)
        per[name] = StrategyAggregate(
            mean_speedup=sum(s for s, _ in members) / len(members),
            gas_weighted_speedup=sum(s * g for s, g in members) / total_gas,
            blocks=len(members),
        )
    numbers = [r.block_number for r in window]
    return AggregateReport(min(numbers), max(numbers), per)


def aggregate(reports: Iterable[BlockReport], window: int) -> List[AggregateReport]:
    """Group consecutive reports into windows of ``window`` blocks and average their speedups.

    Blocks skipped as empty carry no results and count toward no strategy.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    out = []
    current: List[BlockReport] = []
    for r in reports:
        current.append(r)
        if len(current) == window:
            out.append(_aggregate_window(current))
            current = []
    if current:
        out.append(_aggregate_window(current))
    return out


def write_aggregate_csv(aggs: Iterable[AggregateReport], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(AGGREGATE_COLUMNS)
    for a in aggs:
        for name, s in a.per_strategy.items():
            w.writerow([a.first_block, a.last_block, name, s.blocks,
                        _fmt(s.mean_speedup), _fmt(s.gas_weighted_speedup)])
