"""XOR-probe retrieval with constant probes per key.

Each key is mapped to k distinct table positions; a build solves the induced
sparse GF(2) system so the XOR of a key's probes equals its stored value.
Construction succeeds exactly when the random system has full row rank and
retries with a fresh hash-function generation otherwise.  A split-and-share
variant partitions the keys into small chunks and builds one segment per
chunk from simulated per-chunk randomness.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bitvector import RankBitvector
from .errors import DuplicateKeys, KTooLarge, PivotMismatch, RandomnessExhausted
from .gf2 import solve_xor_system
from .hashing import (
    ROLE_PROBE,
    ChunkHasher,
    SeededHasher,
    SplitShareTables,
    build_split_share,
    distinct_k_set,
    probe_hashers,
)

DEFAULT_RETRY_CAP = 64
_SPLIT_SHARE_T = 1 << 32

Pair = tuple[bytes, int]


def normalize_pairs(pairs: Iterable[Pair]) -> list[Pair]:
    """Sort by key and reject duplicates, so builds are order-insensitive."""
    items = sorted(pairs, key=lambda kv: kv[0])
    for a, b in zip(items, items[1:]):
        if a[0] == b[0]:
            raise DuplicateKeys(f"key {a[0]!r} appears more than once")
    return items


def check_values(values: Iterable[int], r: int) -> None:
    limit = 1 << r
    for v in values:
        if not 0 <= v < limit:
            raise ValueError(f"value {v} does not fit in {r} bits")


def threshold_warning(k: int, delta: float) -> None:
    """Warn when the density is at or above the full-rank threshold."""
    if k < 3:
        return
    from .thresholds import beta_k_cached

    inv = 1.0 / beta_k_cached(k)
    if 1.0 + delta <= inv:
        warnings.warn(
            f"1+delta = {1 + delta:.5f} <= 1/beta_{k} = {inv:.5f}: "
            "full-rank probability vanishes for large n",
            UserWarning,
            stacklevel=3,
        )


@dataclass(eq=False)
class RetrievalStructure:
    """Seeds plus a table of m r-bit entries; query XORs k probed entries."""

    n: int
    m: int
    k: int
    r: int
    delta: float
    master_seed: int
    seed_generation: int
    table: np.ndarray
    pivots: tuple[int, ...] | None = None
    _hashers: list[SeededHasher] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._hashers = probe_hashers(self.master_seed, ROLE_PROBE, self.seed_generation, self.k)

    def probes(self, key: bytes) -> tuple[int, ...]:
        return distinct_k_set(key, self.k, self.m, self._hashers)

    @property
    def table_bits(self) -> int:
        return self.m * self.r


@dataclass(eq=False)
class CompressedRetrieval:
    """Only the n significant table entries, addressed through a rank bitvector."""

    base: np.ndarray  # entries at the marked columns, in column order
    membership: RankBitvector
    k: int
    r: int
    master_seed: int
    seed_generation: int
    _hashers: list[SeededHasher] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._hashers = probe_hashers(self.master_seed, ROLE_PROBE, self.seed_generation, self.k)

    @property
    def m(self) -> int:
        return len(self.membership)


@dataclass(eq=False)
class SplitShareRetrieval:
    """Per-chunk XOR-probe segments driven by shared-table simulated hashing."""

    n: int
    k: int
    r: int
    delta: float
    master_seed: int
    provider: SplitShareTables
    chunk_generations: list[int]
    chunk_offsets: np.ndarray  # prefix offsets, len num_chunks + 1
    table: np.ndarray

    @property
    def m(self) -> int:
        return int(len(self.table))

    @property
    def seed_generation(self) -> int:
        return max(self.chunk_generations, default=0)

    @property
    def table_bits(self) -> int:
        return self.m * self.r

    def _chunk_hashers(self, chunk: int) -> list[ChunkHasher]:
        gen = self.chunk_generations[chunk]
        return [ChunkHasher(self.provider, chunk, gen * self.k + l + 1) for l in range(self.k)]


def build(
    pairs: Iterable[Pair],
    r: int,
    k: int = 3,
    delta: float = 0.25,
    seed: int = 0,
    retry_cap: int = DEFAULT_RETRY_CAP,
    split_share: bool = False,
) -> "RetrievalStructure | SplitShareRetrieval":
    """Construct a retrieval structure for (key, value) pairs.

    m = ceil((1+delta) n).  Raises RandomnessExhausted when retry_cap
    hash-function generations all produce a rank-deficient system.
    """
    items = normalize_pairs(pairs)
    if k < 2:
        raise ValueError("k must be >= 2")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    check_values((v for _, v in items), r)
    threshold_warning(k, delta)
    if split_share:
        return _build_split_share(items, r, k, delta, seed, retry_cap)

    n = len(items)
    m = math.ceil((1 + delta) * n)
    if n and k > m:
        raise KTooLarge(f"k={k} exceeds table size m={m}")
    values = [v for _, v in items]
    for gen in range(retry_cap):
        hashers = probe_hashers(seed, ROLE_PROBE, gen, k)
        rows = [distinct_k_set(key, k, m, hashers) for key, _ in items]
        solved = solve_xor_system(rows, values, m)
        if solved is not None:
            table, pivots = solved
            return RetrievalStructure(
                n=n,
                m=m,
                k=k,
                r=r,
                delta=delta,
                master_seed=seed,
                seed_generation=gen,
                table=table,
                pivots=tuple(sorted(pivots)),
            )
    raise RandomnessExhausted(f"no full-rank system within {retry_cap} generations")


def _build_split_share(
    items: list[Pair], r: int, k: int, delta: float, seed: int, retry_cap: int
) -> SplitShareRetrieval:
    provider = build_split_share([key for key, _ in items], L=k, t=_SPLIT_SHARE_T, seed=seed)
    chunks: list[list[Pair]] = [[] for _ in range(provider.num_chunks)]
    for key, value in items:
        chunks[provider.chunk_of(key)].append((key, value))

    # small chunks need headroom beyond (1+delta): with seg_len == k every
    # row is the all-ones vector and two keys can never be independent
    seg_lens = [
        max(math.ceil((1 + delta) * len(c)), len(c) + 2, k) if c else 0 for c in chunks
    ]
    offsets = np.concatenate(([0], np.cumsum(seg_lens))).astype(np.int64)
    table = np.zeros(int(offsets[-1]), dtype=np.uint64)
    generations: list[int] = []
    for ci, members in enumerate(chunks):
        if not members:
            generations.append(0)
            continue
        seg_len = seg_lens[ci]
        values = [v for _, v in members]
        for gen in range(retry_cap):
            provider.ensure_tables((gen + 1) * k)
            hashers = [ChunkHasher(provider, ci, gen * k + l + 1) for l in range(k)]
            rows = [distinct_k_set(key, k, seg_len, hashers) for key, _ in members]
            solved = solve_xor_system(rows, values, seg_len)
            if solved is not None:
                base = int(offsets[ci])
                table[base : base + seg_len] = solved[0]
                generations.append(gen)
                break
        else:
            raise RandomnessExhausted(f"chunk {ci} failed {retry_cap} generations")
    return SplitShareRetrieval(
        n=len(items),
        k=k,
        r=r,
        delta=delta,
        master_seed=seed,
        provider=provider,
        chunk_generations=generations,
        chunk_offsets=offsets,
        table=table,
    )


def query(d: "RetrievalStructure | SplitShareRetrieval", key: bytes) -> int:
    """Stored value for construction keys; some r-bit value for any other key."""
    if isinstance(d, SplitShareRetrieval):
        ci = d.provider.chunk_of(key)
        start = int(d.chunk_offsets[ci])
        seg_len = int(d.chunk_offsets[ci + 1]) - start
        if seg_len == 0:
            return 0
        acc = 0
        for j in distinct_k_set(key, d.k, seg_len, d._chunk_hashers(ci)):
            acc ^= int(d.table[start + j])
        return acc
    if d.m == 0 or d.k > d.m:
        return 0
    acc = 0
    for j in d.probes(key):
        acc ^= int(d.table[j])
    return acc


def verify(d, pairs: Iterable[Pair]) -> bool:
    """True iff every pair's query returns its stored value."""
    lookup = query_compressed if isinstance(d, CompressedRetrieval) else query
    return all(lookup(d, key) == value for key, value in pairs)


def compress(d: RetrievalStructure, pivots: Sequence[int]) -> CompressedRetrieval:
    """Keep only the significant entries; probes route through a rank bitvector."""
    piv = sorted(pivots)
    if len(piv) != d.n or len(set(piv)) != d.n:
        raise PivotMismatch("expected exactly n distinct pivot columns")
    if piv and (piv[0] < 0 or piv[-1] >= d.m):
        raise PivotMismatch("pivot column out of table range")
    marked = np.zeros(d.m, dtype=np.uint8)
    marked[piv] = 1
    if np.any(d.table[marked == 0]):
        raise PivotMismatch("table has nonzero entries outside the pivot columns")
    return CompressedRetrieval(
        base=d.table[np.array(piv, dtype=np.int64)] if piv else np.zeros(0, dtype=np.uint64),
        membership=RankBitvector(marked),
        k=d.k,
        r=d.r,
        master_seed=d.master_seed,
        seed_generation=d.seed_generation,
    )


def query_compressed(c: CompressedRetrieval, key: bytes) -> int:
    """Same answer as the uncompressed structure; non-pivot probes contribute 0."""
    if c.m == 0 or c.k > c.m:
        return 0
    acc = 0
    for j in distinct_k_set(key, c.k, c.m, c._hashers):
        if c.membership.get(j):
            acc ^= int(c.base[c.membership.rank1(j)])
    return acc
