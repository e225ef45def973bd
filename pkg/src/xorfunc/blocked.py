"""Blocked retrieval: per-block single-attempt solves plus an overflow structure.

Keys are split into blocks of expected size b.  Each block gets one segment
of the primary table and one solve attempt; blocks that are too large or
produce a dependent system send their keys to a secondary 3-probe structure.
The primary stores f(x) XOR f'(x) where f' is the secondary's answer, so a
query is a nonadaptive XOR over k primary probes and 3 secondary probes with
no record of which blocks failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .basic import Pair, check_values, normalize_pairs, threshold_warning
from .errors import KTooLarge, RandomnessExhausted
from .gf2 import solve_xor_system, system_full_rank
from .hashing import (
    ROLE_PROBE,
    ROLE_SECONDARY,
    ROLE_SPLIT,
    SeededHasher,
    distinct_k_set,
    fn_index,
    probe_hashers,
)

SECONDARY_K = 3
SECONDARY_FACTOR = 1.3


def secondary_size(n_prime: int) -> int:
    """Overflow table length; floored so 3 distinct probes always fit."""
    if n_prime == 0:
        return 0
    return max(math.ceil(SECONDARY_FACTOR * n_prime), n_prime + 2)


@dataclass(eq=False)
class BlockedRetrieval:
    n: int
    r: int
    k: int
    b: int
    eps: float
    delta: float
    m0: int
    b_prime: int
    segment_len: int
    master_seed: int
    secondary_generation: int
    overflow_count: int
    primary: np.ndarray
    secondary: np.ndarray
    _splitter: SeededHasher = field(init=False, repr=False)
    _primary_hashers: list[SeededHasher] = field(init=False, repr=False)
    _secondary_hashers: list[SeededHasher] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._splitter = SeededHasher(self.master_seed, fn_index(ROLE_SPLIT))
        self._primary_hashers = probe_hashers(self.master_seed, ROLE_PROBE, 0, self.k)
        self._secondary_hashers = probe_hashers(
            self.master_seed, ROLE_SECONDARY, self.secondary_generation, SECONDARY_K
        )

    @property
    def m(self) -> int:
        return int(len(self.primary))

    @property
    def secondary_len(self) -> int:
        return int(len(self.secondary))

    @property
    def overflow_fraction(self) -> float:
        return self.overflow_count / self.n if self.n else 0.0

    @property
    def table_bits(self) -> int:
        return (len(self.primary) + len(self.secondary)) * self.r

    def block_of(self, key: bytes) -> int:
        return self._splitter.hash_to_range(key, self.m0)


def build_blocked(
    pairs: Iterable[Pair],
    r: int,
    k: int = 3,
    eps: float = 0.10,
    delta: float = 0.30,
    b: int = 64,
    seed: int = 0,
    retry_cap: int = 64,
    force_fail_blocks: Sequence[int] = (),
) -> BlockedRetrieval:
    """Single-pass block solves; the secondary retries until it solves.

    ``force_fail_blocks`` is a test hook that marks chosen blocks as failed
    regardless of their rank, exercising the compensation path.
    """
    items = normalize_pairs(pairs)
    n = len(items)
    if n == 0:
        raise ValueError("need at least one pair")
    if b < 8:
        raise ValueError("block size b must be >= 8")
    check_values((v for _, v in items), r)
    threshold_warning(k, delta)

    b_prime = math.ceil((1 + eps) * b)
    segment_len = math.ceil((1 + delta) * b_prime)
    if k > segment_len:
        raise KTooLarge(f"k={k} exceeds segment length {segment_len}")
    m0 = math.ceil(n / b)
    forced = set(force_fail_blocks)

    splitter = SeededHasher(seed, fn_index(ROLE_SPLIT))
    blocks: list[list[Pair]] = [[] for _ in range(m0)]
    for key, value in items:
        blocks[splitter.hash_to_range(key, m0)].append((key, value))

    primary_hashers = probe_hashers(seed, ROLE_PROBE, 0, k)
    overflow: list[Pair] = []
    plans: list[list[tuple[int, ...]] | None] = []
    for bi, members in enumerate(blocks):
        if not members:
            plans.append([])
            continue
        if len(members) > b_prime or bi in forced:
            plans.append(None)
            overflow.extend(members)
            continue
        rows = [distinct_k_set(key, k, segment_len, primary_hashers) for key, _ in members]
        if system_full_rank(rows, segment_len) is None:
            plans.append(None)
            overflow.extend(members)
        else:
            plans.append(rows)

    n_prime = len(overflow)
    sec_len = secondary_size(n_prime)
    secondary = np.zeros(0, dtype=np.uint64)
    sec_gen = 0
    if n_prime:
        for sec_gen in range(retry_cap):
            sec_hashers = probe_hashers(seed, ROLE_SECONDARY, sec_gen, SECONDARY_K)
            rows = [
                distinct_k_set(key, SECONDARY_K, sec_len, sec_hashers) for key, _ in overflow
            ]
            solved = solve_xor_system(rows, [v for _, v in overflow], sec_len)
            if solved is not None:
                secondary = solved[0]
                break
        else:
            raise RandomnessExhausted(
                f"secondary structure failed {retry_cap} generations (n'={n_prime})"
            )
    sec_hashers = probe_hashers(seed, ROLE_SECONDARY, sec_gen, SECONDARY_K)

    def f_prime(key: bytes) -> int:
        if not n_prime:
            return 0
        acc = 0
        for j in distinct_k_set(key, SECONDARY_K, sec_len, sec_hashers):
            acc ^= int(secondary[j])
        return acc

    primary = np.zeros(m0 * segment_len, dtype=np.uint64)
    for bi, members in enumerate(blocks):
        rows = plans[bi]
        if not rows:  # empty block or failed block: segment stays all-zero
            continue
        vals = [value ^ f_prime(key) for key, value in members]
        solved = solve_xor_system(rows, vals, segment_len)
        if solved is None:  # rank was checked above on the same rows
            raise AssertionError("block solve diverged from its rank check")
        base = bi * segment_len
        primary[base : base + segment_len] = solved[0]

    return BlockedRetrieval(
        n=n,
        r=r,
        k=k,
        b=b,
        eps=eps,
        delta=delta,
        m0=m0,
        b_prime=b_prime,
        segment_len=segment_len,
        master_seed=seed,
        secondary_generation=sec_gen,
        overflow_count=n_prime,
        primary=primary,
        secondary=secondary,
    )


def query_blocked(d: BlockedRetrieval, key: bytes) -> int:
    """XOR of k probes in the key's segment and 3 probes in the secondary."""
    base = d.block_of(key) * d.segment_len
    acc = 0
    for j in distinct_k_set(key, d.k, d.segment_len, d._primary_hashers):
        acc ^= int(d.primary[base + j])
    if d.secondary_len:
        for j in distinct_k_set(key, SECONDARY_K, d.secondary_len, d._secondary_hashers):
            acc ^= int(d.secondary[j])
    return acc


def probe_plan(d: BlockedRetrieval, key: bytes) -> tuple[int, ...]:
    """Absolute offsets into the concatenated primary+secondary table.

    The plan is a pure function of seeds and key, so all lookups can issue in
    parallel.  With an empty secondary only the k primary offsets exist.
    """
    base = d.block_of(key) * d.segment_len
    plan = [base + j for j in distinct_k_set(key, d.k, d.segment_len, d._primary_hashers)]
    if d.secondary_len:
        shift = d.m0 * d.segment_len
        plan.extend(
            shift + j
            for j in distinct_k_set(key, SECONDARY_K, d.secondary_len, d._secondary_hashers)
        )
    return tuple(plan)


def gather_query(d: BlockedRetrieval, key: bytes, table: np.ndarray | None = None) -> int:
    """Evaluate by XOR-gathering over the probe plan (query equivalence check)."""
    if table is None:
        table = np.concatenate([d.primary, d.secondary]) if d.secondary_len else d.primary
    acc = 0
    for off in probe_plan(d, key):
        acc ^= int(table[off])
    return acc


def verify_blocked(d: BlockedRetrieval, pairs: Iterable[Pair]) -> bool:
    return all(query_blocked(d, key) == value for key, value in pairs)
