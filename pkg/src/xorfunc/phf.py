"""Perfect hashing from full-rank probe systems.

A full-rank build guarantees the probe sets admit an injective placement
into the pivot columns (the pivot submatrix is regular), found here with
Hopcroft-Karp.  Storing which of its k probes each key was matched to is
itself a retrieval problem over ceil(log2 k)-bit values; evaluation reads
that selector and returns the selected probe.  The minimal variant ranks
the image set with a bitvector.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .basic import normalize_pairs, threshold_warning
from .bitvector import RankBitvector
from .errors import KTooLarge, RandomnessExhausted
from .gf2 import solve_xor_system, system_full_rank
from .hashing import ROLE_PROBE, SeededHasher, distinct_k_set, probe_hashers

_INF = -1


def hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int) -> list[int]:
    """Maximum bipartite matching; returns the matched right vertex per left."""
    n_left = len(adj)
    match_l = [_INF] * n_left
    match_r = [_INF] * n_right
    dist = [0] * n_left

    def bfs() -> bool:
        queue = deque()
        for u in range(n_left):
            if match_l[u] == _INF:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == _INF:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w == _INF or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = _INF
        return False

    import sys

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n_left + 1000))
    try:
        while bfs():
            for u in range(n_left):
                if match_l[u] == _INF:
                    dfs(u)
    finally:
        sys.setrecursionlimit(old_limit)
    return match_l


@dataclass(eq=False)
class PerfectHash:
    """Selector table mapping each key to one of its k probe positions."""

    n: int
    m: int
    k: int
    r_lambda: int
    delta: float
    master_seed: int
    seed_generation: int
    lambda_table: np.ndarray
    pivots: tuple[int, ...] | None = None
    _hashers: list[SeededHasher] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._hashers = probe_hashers(self.master_seed, ROLE_PROBE, self.seed_generation, self.k)

    @property
    def table_bits(self) -> int:
        return self.m * self.r_lambda

    @property
    def bits_per_key(self) -> float:
        return self.table_bits / self.n if self.n else 0.0


@dataclass(eq=False)
class MinimalPerfectHash:
    base: PerfectHash
    used: RankBitvector

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def table_bits(self) -> int:
        return self.base.table_bits + len(self.used) + self.used.index_bits

    @property
    def bits_per_key(self) -> float:
        return self.table_bits / self.n if self.n else 0.0


def build_phf(
    keys: Iterable[bytes],
    k: int = 4,
    delta: float = 0.10,
    seed: int = 0,
    retry_cap: int = 64,
) -> PerfectHash:
    """Injective map from the keys into [ceil((1+delta) n)]."""
    items = normalize_pairs((key, 0) for key in keys)
    ordered = [key for key, _ in items]
    n = len(ordered)
    if k < 2:
        raise ValueError("k must be >= 2")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    m = math.ceil((1 + delta) * n)
    if n and k > m:
        raise KTooLarge(f"k={k} exceeds range m={m}")
    threshold_warning(k, delta)
    r_lambda = max(1, math.ceil(math.log2(k)))

    for gen in range(retry_cap):
        hashers = probe_hashers(seed, ROLE_PROBE, gen, k)
        probe_sets = [distinct_k_set(key, k, m, hashers) for key in ordered]
        pivots = system_full_rank(probe_sets, m)
        if pivots is None:
            continue
        pivot_rank = {c: t for t, c in enumerate(sorted(pivots))}
        adj = [[pivot_rank[c] for c in row if c in pivot_rank] for row in probe_sets]
        match_l = hopcroft_karp(adj, n)
        if any(v == _INF for v in match_l):  # regular pivot submatrix: cannot happen
            raise AssertionError("pivot submatrix admitted no perfect matching")
        sorted_pivots = sorted(pivots)
        selectors = []
        for i, row in enumerate(probe_sets):
            col = sorted_pivots[match_l[i]]
            selectors.append(row.index(col))
        solved = solve_xor_system(probe_sets, selectors, m)
        if solved is None:
            raise AssertionError("selector solve diverged from the rank check")
        return PerfectHash(
            n=n,
            m=m,
            k=k,
            r_lambda=r_lambda,
            delta=delta,
            master_seed=seed,
            seed_generation=gen,
            lambda_table=solved[0],
            pivots=tuple(sorted_pivots),
        )
    raise RandomnessExhausted(f"no full-rank system within {retry_cap} generations")


def eval_phf(p: PerfectHash, key: bytes) -> int:
    """Injective on construction keys; some position in [m] for any other key."""
    probes = distinct_k_set(key, p.k, p.m, p._hashers)
    selector = 0
    for j in probes:
        selector ^= int(p.lambda_table[j])
    return probes[selector % p.k]


def build_mphf(
    keys: Iterable[bytes],
    k: int = 4,
    delta: float = 0.10,
    seed: int = 0,
    retry_cap: int = 64,
) -> MinimalPerfectHash:
    """Perfect hash composed with rank over its image: a bijection onto [n]."""
    base = build_phf(keys, k=k, delta=delta, seed=seed, retry_cap=retry_cap)
    assert base.pivots is not None
    used = RankBitvector.from_indices(base.m, base.pivots)
    return MinimalPerfectHash(base=base, used=used)


def eval_mphf(mp: MinimalPerfectHash, key: bytes) -> int:
    return mp.used.rank1(eval_phf(mp.base, key))
