"""Command-line entry point: ``txpar simulate|generate|oracle-check|validate``.

Exit codes: 0 ok, 1 usage error, 2 bad input data, 3 internal invariant
violation (a scheduler emitted an invalid schedule).
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterator, List, Optional

from .conflict import build_conflict_graph
from .heft import build_dag, heft_schedule
from .oracle import DEFAULT_MAX_TASKS, DEFAULT_MAX_THREADS, optimal_schedule
from .report import (
    STRATEGIES, CsvReportWriter, JsonReportWriter, RunConfig,
    aggregate, empty_report, run_block, write_aggregate_csv,
)
from .schedule import SchedulerBugError, check_valid, chunk
from .simple import VARIANTS, simple_schedule
from .synth import SynthParams, iter_generate
from .trace import TraceFormatError, iter_blocks, parse_trace, validate_block, write_trace

log = logging.getLogger("txpar")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

_LOG_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO, "warn": logging.WARNING, "warning": logging.WARNING}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _setup_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("TXPAR_LOG", "warn").lower(), logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(level)
    log.propagate = False


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _cap(text: str) -> Optional[int]:
    if text.lower() == "none":
        return None
    return _positive_int(text)


def _strategies(text: str):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in STRATEGIES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"strategies must be drawn from {','.join(STRATEGIES)}")
    # canonical order keeps output independent of flag spelling
    return tuple(s for s in STRATEGIES if s in names)


@contextlib.contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as f:
            yield f


@contextlib.contextmanager
def _open_out(path: str, binary: bool = False):
    if path == "-":
        if binary:
            yield sys.stdout.buffer
            sys.stdout.buffer.flush()
        else:
            yield sys.stdout
            sys.stdout.flush()
    elif binary:
        with open(path, "wb") as f:
            yield f
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            yield f


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="txpar", description="Simulate parallel execution of blockchain transactions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_input(sp):
        sp.add_argument("--input", default="-", help="trace file (JSON Lines) or - for stdin")
        sp.add_argument("--lenient", action="store_true", help="clamp gasUsed 0 to 1 instead of rejecting it")

    sim = sub.add_parser("simulate", help="run the strategies on every block of a trace")
    add_input(sim)
    sim.add_argument("--out", default="-")
    sim.add_argument("--threads", type=_positive_int, default=8)
    sim.add_argument("--cap", type=_cap, default=None, help="chunk cap, or 'none' (default)")
    sim.add_argument("--strategies", type=_strategies, default=STRATEGIES)
    sim.add_argument("--simple-variant", choices=VARIANTS, default="prefix")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--jobs", type=_positive_int, default=1)
    sim.add_argument("--window", type=_positive_int, default=None,
                     help="also emit windowed mean speedups over this many blocks")
    sim.add_argument("--aggregate-out", default=None,
                     help="where to write the aggregate CSV (default: <out>.agg.csv, or stderr for stdout)")
    sim.add_argument("--dump-components", default=None, help="write per-block component partitions (JSON Lines)")
    sim.add_argument("--dump-schedules", default=None, help="write per-chunk Gantt rows of simple/heft (JSON Lines)")

    gen = sub.add_parser("generate", help="write a seeded synthetic trace")
    gen.add_argument("--config", default=None, help="JSON file with synth parameters")
    gen.add_argument("--out", default="-")
    gen.add_argument("--seed", type=int, default=None)
    for name, typ in (("blocks", int), ("txs-per-block", float), ("gas-mu", float), ("gas-sigma", float),
                      ("gas-min", int), ("gas-max", int), ("hot-contracts", int), ("zipf-s", float),
                      ("users", int), ("extra-touch-p", float), ("p-contract-call", float),
                      ("first-block", int)):
        gen.add_argument(f"--{name}", type=typ, default=None)

    orc = sub.add_parser("oracle-check", help="compare heft/simple makespans with the exhaustive optimum")
    add_input(orc)
    orc.add_argument("--out", default="-")
    orc.add_argument("--threads", type=_positive_int, default=2)
    orc.add_argument("--simple-variant", choices=VARIANTS, default="prefix")
    orc.add_argument("--max-tasks", type=_positive_int, default=DEFAULT_MAX_TASKS)
    orc.add_argument("--max-threads", type=_positive_int, default=DEFAULT_MAX_THREADS)

    val = sub.add_parser("validate", help="check a trace against the record invariants")
    add_input(val)
    val.add_argument("--out", default="-")
    return p


def _evaluate(args):
    block, config = args
    if len(block) == 0:
        return empty_report(block, config)
    return run_block(block, config)


def _batched(it, size) -> Iterator[list]:
    it = iter(it)
    while True:
        batch = list(itertools.islice(it, size))
        if not batch:
            return
        yield batch


def _reports(blocks, config: RunConfig, jobs: int):
    if jobs == 1:
        for b in blocks:
            yield _evaluate((b, config))
        return
    # bounded look-ahead keeps memory flat; map preserves block order
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for batch in _batched(blocks, jobs * 16):
            yield from pool.map(_evaluate, [(b, config) for b in batch], chunksize=4)


def _debug_dumps(block, config: RunConfig, comp_out, sched_out) -> None:
    for k, piece in enumerate(chunk(block, config.cap)):
        graph = build_conflict_graph(piece)
        if comp_out is not None:
            comp_out.write(json.dumps({"block": block.block_number, "chunk": k,
                                       "components": graph.components}, separators=(",", ":")) + "\n")
        if sched_out is not None:
            scheds = {}
            if "simple" in config.strategies:
                scheds["simple"] = simple_schedule(piece, graph, config.threads, config.simple_variant)
            if "heft" in config.strategies:
                scheds["heft"] = heft_schedule(build_dag(piece, graph), config.threads)
            for name, s in scheds.items():
                for row in s.gantt_rows():
                    sched_out.write(json.dumps({"block": block.block_number, "chunk": k,
                                                "strategy": name, **row}, separators=(",", ":")) + "\n")


def cmd_simulate(args) -> int:
    config = RunConfig(args.threads, args.cap, args.strategies, args.simple_variant)
    log.info("simulate threads=%d cap=%s strategies=%s simple_variant=%s jobs=%d",
             config.threads, config.cap, ",".join(config.strategies), config.simple_variant, args.jobs)
    collected = [] if args.window else None

    with contextlib.ExitStack() as stack:
        src = stack.enter_context(_open_in(args.input))
        out = stack.enter_context(_open_out(args.out))
        comp_out = stack.enter_context(_open_out(args.dump_components)) if args.dump_components else None
        sched_out = stack.enter_context(_open_out(args.dump_schedules)) if args.dump_schedules else None

        writer_cls = CsvReportWriter if args.format == "csv" else JsonReportWriter
        writer = writer_cls(out, config.threads)

        blocks = iter_blocks(src, strict=not args.lenient)
        if comp_out is not None or sched_out is not None:
            def tapped(bs):
                for b in bs:
                    _debug_dumps(b, config, comp_out, sched_out)
                    yield b
            blocks = tapped(blocks)

        n = 0
        for report in _reports(blocks, config, args.jobs):
            if report.tx_count == 0:
                log.warning("block %d is empty; skipped", report.block_number)
            writer.write(report)
            if collected is not None:
                collected.append(report)
            n += 1
        log.info("wrote %d block rows", n)

    if collected is not None:
        aggs = aggregate(collected, args.window)
        if args.aggregate_out:
            target = args.aggregate_out
        elif args.out == "-":
            target = None
        else:
            target = args.out + ".agg.csv"
        if target is None:
            write_aggregate_csv(aggs, sys.stderr)
        else:
            with _open_out(target) as f:
                write_aggregate_csv(aggs, f)
    return EXIT_OK


def cmd_generate(args) -> int:
    data = {}
    if args.config:
        data.update(dataclasses.asdict(SynthParams.from_json_file(args.config)))
    overrides = {
        "seed": args.seed, "blocks": args.blocks, "txs_per_block": args.txs_per_block,
        "gas_mu": args.gas_mu, "gas_sigma": args.gas_sigma, "gas_min": args.gas_min, "gas_max": args.gas_max,
        "hot_contracts": args.hot_contracts, "zipf_s": args.zipf_s, "users": args.users,
        "extra_touch_p": args.extra_touch_p, "p_contract_call": args.p_contract_call,
        "first_block": args.first_block,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    params = SynthParams.from_dict(data)
    params.validate()
    log.info("generate %s", params)
    with _open_out(args.out, binary=True) as out:
        for block in iter_generate(params):
            write_trace([block], out)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    with _open_in(args.input) as src:
        blocks = parse_trace(src, strict=not args.lenient)
    worst = EXIT_OK
    with _open_out(args.out) as out:
        out.write(f"# threads={args.threads}\n")
        out.write("block,tx_count,optimal,heft,simple,ok\n")
        for block in blocks:
            n = len(block)
            if n > args.max_tasks:
                log.warning("block %d has %d transactions (> %d); skipped", block.block_number, n, args.max_tasks)
                out.write(f"{block.block_number},{n},,,,skipped\n")
                continue
            graph = build_conflict_graph(block)
            dag = build_dag(block, graph)
            opt = optimal_schedule(dag, args.threads, args.max_tasks, args.max_threads)
            heft = heft_schedule(dag, args.threads)
            simple = simple_schedule(block, graph, args.threads, args.simple_variant)
            bad = [name for name, s in (("oracle", opt.witness), ("heft", heft), ("simple", simple))
                   if check_valid(s, block, graph)]
            ok = not bad and opt.optimal_makespan <= heft.makespan and opt.optimal_makespan <= simple.makespan
            if not ok:
                log.error("block %d: optimal=%d heft=%d simple=%d invalid=%s", block.block_number,
                          opt.optimal_makespan, heft.makespan, simple.makespan, bad)
                worst = EXIT_INTERNAL
            out.write(f"{block.block_number},{n},{opt.optimal_makespan},{heft.makespan},"
                      f"{simple.makespan},{'yes' if ok else 'NO'}\n")
    return worst


def cmd_validate(args) -> int:
    with _open_in(args.input) as src:
        blocks = parse_trace(src, strict=not args.lenient)
    count = 0
    with _open_out(args.out) as out:
        for block in blocks:
            for v in validate_block(block):
                out.write(f"block {block.block_number} {v}\n")
                count += 1
        out.write(f"{len(blocks)} blocks, {sum(len(b) for b in blocks)} transactions, {count} violations\n")
    return EXIT_DATA if count else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "generate": cmd_generate,
    "oracle-check": cmd_oracle_check,
    "validate": cmd_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (TraceFormatError, ValueError, OSError) as e:
        log.error("%s", e)
        return EXIT_DATA
    except SchedulerBugError as e:
        log.error("internal invariant violated: %s", e)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
