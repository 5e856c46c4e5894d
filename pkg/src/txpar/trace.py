"""
Transaction trace model and the JSON Lines trace format.

One line per transaction::

    {"hash":"0x<64 hex>","block":7,"index":0,"gasUsed":21000,"accounts":["0x<40 hex>",...]}

Addresses are kept as raw 20-byte values internally and only rendered to hex
at the I/O boundary. Unknown keys are ignored on read and never written.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, List, Optional, Sequence, Union

ADDRESS_LEN = 20
HASH_LEN = 32

_ADDRESS_RE = re.compile(r"0x[0-9a-fA-F]{40}")
_HASH_RE = re.compile(r"0x[0-9a-fA-F]{64}")

KEY_ORDER = ("hash", "block", "index", "gasUsed", "accounts")


class TraceFormatError(ValueError):
    """Raised for malformed trace input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def parse_address(text: str) -> bytes:
    if not isinstance(text, str) or not _ADDRESS_RE.fullmatch(text):
        raise ValueError(f"invalid address {text!r}: expected 0x + 40 hex digits")
    return bytes.fromhex(text[2:])


def format_address(raw: bytes) -> str:
    return "0x" + raw.hex()


def parse_hash(text: str) -> bytes:
    if not isinstance(text, str) or not _HASH_RE.fullmatch(text):
        raise ValueError(f"invalid hash {text!r}: expected 0x + 64 hex digits")
    return bytes.fromhex(text[2:])


@dataclass(frozen=True)
class TransactionRecord:
    hash: bytes
    block_number: int
    index: int
    gas_used: int
    accounts: frozenset

    def to_json(self) -> str:
        obj = {
            "hash": "0x" + self.hash.hex(),
            "block": self.block_number,
            "index": self.index,
            "gasUsed": self.gas_used,
            "accounts": [format_address(a) for a in sorted(self.accounts)],
        }
        return json.dumps(obj, separators=(",", ":"))


@dataclass(frozen=True)
class BlockTrace:
    block_number: int
    transactions: tuple = ()

    def __len__(self) -> int:
        return len(self.transactions)

    @property
    def total_gas(self) -> int:
        return sum(tx.gas_used for tx in self.transactions)

    @property
    def max_gas(self) -> int:
        return max((tx.gas_used for tx in self.transactions), default=0)

    @property
    def gas(self) -> List[int]:
        return [tx.gas_used for tx in self.transactions]

    @property
    def access_lists(self) -> List[frozenset]:
        return [tx.accounts for tx in self.transactions]


@dataclass(frozen=True)
class Violation:
    """One broken invariant. ``record`` is the transaction index, or None for block-level rules."""

    record: Optional[int]
    rule: str

    def __str__(self) -> str:
        where = "block" if self.record is None else f"tx {self.record}"
        return f"{where}: {self.rule}"


def _record_from_obj(obj, strict: bool) -> TransactionRecord:
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    missing = [k for k in KEY_ORDER if k not in obj]
    if missing:
        raise ValueError(f"missing keys: {', '.join(missing)}")

    block, index, gas = obj["block"], obj["index"], obj["gasUsed"]
    for name, value in (("block", block), ("index", index), ("gasUsed", gas)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    if gas < 1:
        if strict:
            raise ValueError("gasUsed must be >= 1 (use lenient mode to clamp)")
        gas = 1

    accounts = obj["accounts"]
    if not isinstance(accounts, list):
        raise ValueError("accounts must be a list")
    return TransactionRecord(
        hash=parse_hash(obj["hash"]),
        block_number=block,
        index=index,
        gas_used=gas,
        accounts=frozenset(parse_address(a) for a in accounts),
    )


def _iter_records(stream: Union[IO[bytes], Iterable[bytes]], strict: bool) -> Iterator[TransactionRecord]:
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise TraceFormatError(f"invalid UTF-8: {e}", lineno) from None
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            yield _record_from_obj(obj, strict)
        except ValueError as e:
            raise TraceFormatError(str(e), lineno) from None


def _make_block(number: int, records: Sequence[TransactionRecord]) -> BlockTrace:
    ordered = sorted(records, key=lambda r: r.index)
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.index == cur.index:
            raise TraceFormatError(f"duplicate transaction (block {number}, index {cur.index})")
    return BlockTrace(number, tuple(ordered))


def parse_trace(stream, strict: bool = True) -> List[BlockTrace]:
    """Read a whole trace, grouping records by block and sorting by (block, index)."""
    by_block: dict = {}
    for rec in _iter_records(stream, strict):
        by_block.setdefault(rec.block_number, []).append(rec)
    return [_make_block(b, by_block[b]) for b in sorted(by_block)]


def iter_blocks(stream, strict: bool = True) -> Iterator[BlockTrace]:
    """Streaming variant of :func:`parse_trace`.

    Records of one block must be contiguous in the input (their relative order
    is free). Blocks are yielded in input order; a block number that reappears
    after another block started is an error.
    """
    seen = set()
    current: Optional[int] = None
    pending: List[TransactionRecord] = []
    for rec in _iter_records(stream, strict):
        if rec.block_number != current:
            if pending:
                yield _make_block(current, pending)
            if rec.block_number in seen:
                raise TraceFormatError(f"block {rec.block_number} is not contiguous in the input")
            seen.add(rec.block_number)
            current, pending = rec.block_number, []
        pending.append(rec)
    if pending:
        yield _make_block(current, pending)


def write_trace(blocks: Iterable[BlockTrace], out: Optional[IO[bytes]] = None) -> bytes:
    """Serialize blocks as JSON Lines. Writes to ``out`` if given; returns the bytes otherwise."""
    chunks = []
    for block in blocks:
        for tx in block.transactions:
            line = (tx.to_json() + "\n").encode("utf-8")
            if out is not None:
                out.write(line)
            else:
                chunks.append(line)
    return b"".join(chunks)


def validate_block(block: BlockTrace) -> List[Violation]:
    violations = []
    prev_index = None
    seen_index = set()
    for tx in block.transactions:
        if tx.block_number != block.block_number:
            violations.append(Violation(tx.index, f"block number {tx.block_number} != {block.block_number}"))
        if tx.index in seen_index:
            violations.append(Violation(tx.index, "duplicate index"))
        elif prev_index is not None and tx.index < prev_index:
            violations.append(Violation(tx.index, "indices not increasing"))
        seen_index.add(tx.index)
        prev_index = tx.index
        if tx.gas_used < 1:
            violations.append(Violation(tx.index, "gas_used < 1"))
        if not tx.accounts:
            violations.append(Violation(tx.index, "empty access list"))
        for a in tx.accounts:
            if not isinstance(a, (bytes, bytearray)) or len(a) != ADDRESS_LEN:
                violations.append(Violation(tx.index, "address is not 20 bytes"))
                break
        if len(tx.hash) != HASH_LEN:
            violations.append(Violation(tx.index, "hash is not 32 bytes"))
    return violations


def make_block(block_number: int, access_lists, gas, start_index: int = 0) -> BlockTrace:
    """Build a block from plain access lists and gas values.

    Access-list entries may be raw 20-byte values, 0x-hex strings, or short
    labels (any other string/int), which are hashed into stable addresses.
    Handy for tests and small hand-made instances.
    """
    import hashlib

    def addr(x) -> bytes:
        if isinstance(x, bytes) and len(x) == ADDRESS_LEN:
            return x
        if isinstance(x, str) and _ADDRESS_RE.fullmatch(x):
            return parse_address(x)
        return hashlib.sha256(f"label:{x}".encode()).digest()[:ADDRESS_LEN]

    txs = []
    for i, (accts, g) in enumerate(zip(access_lists, gas)):
        idx = start_index + i
        h = hashlib.sha256(f"tx:{block_number}:{idx}".encode()).digest()
        txs.append(TransactionRecord(h, block_number, idx, int(g), frozenset(addr(a) for a in accts)))
    return BlockTrace(block_number, tuple(txs))
