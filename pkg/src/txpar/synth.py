"""
Seeded synthetic trace generator.

Workload model (per transaction):

* sender: uniform over a pool of ``users`` user accounts
* recipient: with probability ``p_contract_call`` a hot contract drawn from a
  truncated Zipf(``zipf_s``) over ``hot_contracts``, otherwise a uniform user
* extra touched accounts (value-transfer recipients, token holders): a
  geometric count, P(k) = (1 - q) q^k with q = ``extra_touch_p`` (mean
  q / (1 - q)), each a uniform user
* gas: round(exp(N(gas_mu, gas_sigma))) clipped to [gas_min, gas_max]

Block sizes are max(1, Poisson(``txs_per_block``)).

Randomness comes from numpy's Philox4x64-10 counter-based generator. Each
transaction gets its own stream: key (seed, 0), counter (0, 0, tx, block).
Block sizes use key (seed, 1), counter (0, 0, 0, block). Generation order
therefore never changes values, and blocks can be generated in parallel.

Per transaction the draws are, in order: one standard normal (gas), then
four uniforms (sender, call coin, Zipf rank, user recipient), then pairs of
uniforms (continue coin, extra user) until a continue coin fails. User ids
are floor(u * users). Every fixed draw happens whatever the parameters, so
changing ``p_contract_call`` leaves all other draws of a seed untouched.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .trace import BlockTrace, TransactionRecord

_CONTRACT_TAG = 0xCC
_USER_TAG = 0x0A


@dataclass(frozen=True)
class SynthParams:
    blocks: int = 100
    txs_per_block: float = 120.0
    gas_mu: float = math.log(45000.0)
    gas_sigma: float = 1.0
    gas_min: int = 21000
    gas_max: int = 8000000
    hot_contracts: int = 200
    zipf_s: float = 1.1
    users: int = 1000000
    extra_touch_p: float = 2.0 / 3.0
    p_contract_call: float = 0.6
    seed: int = 0
    first_block: int = 0

    def validate(self) -> None:
        problems = []
        for name in ("extra_touch_p", "p_contract_call"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name}={v} not in [0, 1]")
        if self.extra_touch_p >= 1.0:
            problems.append("extra_touch_p must be < 1 (the geometric count would never stop)")
        for name in ("hot_contracts", "users"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if self.zipf_s <= 0:
            problems.append("zipf_s must be > 0")
        if self.blocks < 0 or self.first_block < 0:
            problems.append("blocks and first_block must be >= 0")
        if self.txs_per_block <= 0:
            problems.append("txs_per_block must be > 0")
        if self.gas_sigma < 0:
            problems.append("gas_sigma must be >= 0")
        if not 1 <= self.gas_min <= self.gas_max:
            problems.append("need 1 <= gas_min <= gas_max")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be a 64-bit unsigned integer")
        if problems:
            raise ValueError("invalid synth params: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, data: dict) -> "SynthParams":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown synth params: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "SynthParams":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def contract_address(k: int) -> bytes:
    return bytes([_CONTRACT_TAG]) + k.to_bytes(19, "big")


def user_address(k: int) -> bytes:
    return bytes([_USER_TAG]) + k.to_bytes(19, "big")


def zipf_cdf(n: int, s: float) -> np.ndarray:
    weights = 1.0 / np.arange(1, n + 1, dtype=np.float64) ** s
    cdf = np.cumsum(weights)
    return cdf / cdf[-1]


class _Streams:
    """Repositions a single Philox generator onto per-(block, tx) substreams."""

    def __init__(self, seed: int):
        self.seed = seed
        self.bitgen = np.random.Philox(key=[seed, 0])
        self.gen = np.random.Generator(self.bitgen)

    def at(self, key_word: int, tx: int, block: int) -> np.random.Generator:
        self.bitgen.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": np.array([0, 0, tx, block], dtype=np.uint64),
                "key": np.array([self.seed, key_word], dtype=np.uint64),
            },
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self.gen


class _Sampler:
    def __init__(self, params: SynthParams):
        self.p = params
        self.cdf = zipf_cdf(params.hot_contracts, params.zipf_s)
        self.streams = _Streams(params.seed)

    def _user(self, u: float) -> bytes:
        return user_address(min(int(u * self.p.users), self.p.users - 1))

    def transaction(self, block: int, index: int) -> TransactionRecord:
        p = self.p
        g = self.streams.at(0, index, block)
        gas = int(round(math.exp(p.gas_mu + p.gas_sigma * float(g.standard_normal()))))
        gas = min(max(gas, p.gas_min), p.gas_max)
        u_sender, coin, zipf_u, u_user = g.random(4).tolist()
        if coin < p.p_contract_call:
            k = int(np.searchsorted(self.cdf, zipf_u, side="right"))
            target = contract_address(min(k, p.hot_contracts - 1))
        else:
            target = self._user(u_user)
        accounts = {self._user(u_sender), target}
        while True:
            more, u_extra = g.random(2).tolist()
            if more >= p.extra_touch_p:
                break
            accounts.add(self._user(u_extra))
        tx_hash = hashlib.sha256(f"txpar-synth:{p.seed}:{block}:{index}".encode()).digest()
        return TransactionRecord(tx_hash, block, index, gas, frozenset(accounts))

    def block(self, number: int) -> BlockTrace:
        count = max(1, int(self.streams.at(1, 0, number).poisson(self.p.txs_per_block)))
        return BlockTrace(number, tuple(self.transaction(number, i) for i in range(count)))


def generate_block(params: SynthParams, number: int) -> BlockTrace:
    params.validate()
    return _Sampler(params).block(number)


def iter_generate(params: SynthParams):
    params.validate()
    sampler = _Sampler(params)
    for b in range(params.first_block, params.first_block + params.blocks):
        yield sampler.block(b)


def generate(params: SynthParams) -> List[BlockTrace]:
    return list(iter_generate(params))
