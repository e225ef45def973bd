"""Approximate membership and Bloomier filters on top of retrieval backends.

A filter stores an s-bit signature q(x) for every key in any retrieval
backend; a query answers "member" iff the retrieved value equals the query
key's own signature.  Non-members collide with probability 2^-s because the
backend's contents are independent of their signatures.  The Bloomier
variant concatenates an r-bit payload with the signature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from . import basic, blocked, compact
from .errors import DomainError
from .hashing import ROLE_SIGNATURE, SeededHasher, fn_index

LOG2_E = math.log2(math.e)


@dataclass(frozen=True)
class BackendParams:
    """Knobs forwarded to the chosen retrieval backend."""

    kind: str = "basic"  # basic | compact | blocked
    k: int = 3
    delta: float = 0.25
    eps: float = 0.10
    block_size: int = 64
    split_share: bool = False
    trial_cap: int | None = None
    retry_cap: int = 64


def _build_backend(pairs, r: int, seed: int, params: BackendParams):
    if params.kind == "basic":
        return basic.build(
            pairs,
            r=r,
            k=params.k,
            delta=params.delta,
            seed=seed,
            retry_cap=params.retry_cap,
            split_share=params.split_share,
        )
    if params.kind == "compact":
        return compact.build_compact(pairs, r=r, seed=seed, trial_cap=params.trial_cap)
    if params.kind == "blocked":
        return blocked.build_blocked(
            pairs,
            r=r,
            k=params.k,
            eps=params.eps,
            delta=params.delta,
            b=params.block_size,
            seed=seed,
            retry_cap=params.retry_cap,
        )
    raise ValueError(f"unknown backend kind {params.kind!r}")


def backend_query(backend, key: bytes) -> int:
    if isinstance(backend, blocked.BlockedRetrieval):
        return blocked.query_blocked(backend, key)
    if isinstance(backend, compact.CompactRetrieval):
        return compact.query_compact(backend, key)
    return basic.query(backend, key)


@dataclass(eq=False)
class MembershipFilter:
    """No false negatives; false positives at rate 2^-s."""

    s: int
    signature_seed: int
    backend_kind: str
    backend: object | None  # None only for s = 0

    def signature(self, key: bytes) -> int:
        if self.s == 0:
            return 0
        h = SeededHasher(self.signature_seed, fn_index(ROLE_SIGNATURE))
        return h.u64(key) & ((1 << self.s) - 1)

    @property
    def table_bits(self) -> int:
        return getattr(self.backend, "table_bits", 0)


@dataclass(eq=False)
class BloomierFilter:
    """Members decode to their r-bit payload; non-members are mostly rejected."""

    r: int
    s: int
    signature_seed: int
    backend_kind: str
    backend: object

    def signature(self, key: bytes) -> int:
        if self.s == 0:
            return 0
        h = SeededHasher(self.signature_seed, fn_index(ROLE_SIGNATURE))
        return h.u64(key) & ((1 << self.s) - 1)

    @property
    def table_bits(self) -> int:
        return getattr(self.backend, "table_bits", 0)


def build_filter(
    keys: Iterable[bytes],
    s: int,
    backend_kind: str = "basic",
    params: BackendParams | None = None,
    seed: int = 0,
    signature_seed: int | None = None,
) -> MembershipFilter:
    """Store each key's s-bit signature in the chosen backend.

    The signature seed is kept disjoint from the backend seed so backend
    contents stay independent of any non-member's signature.
    """
    if not 0 <= s <= 64:
        raise ValueError("signature bits s must be in 0..64")
    params = params or BackendParams(kind=backend_kind)
    if params.kind != backend_kind:
        params = BackendParams(**{**params.__dict__, "kind": backend_kind})
    if signature_seed is None:
        signature_seed = (seed ^ 0x5157_3143_9E37_79B9) & ((1 << 64) - 1)
    if s == 0:
        list(keys)  # consume for interface parity; nothing to store
        return MembershipFilter(
            s=0, signature_seed=signature_seed, backend_kind=backend_kind, backend=None
        )
    f = MembershipFilter(
        s=s, signature_seed=signature_seed, backend_kind=backend_kind, backend=None
    )
    pairs = [(key, f.signature(key)) for key in keys]
    f.backend = _build_backend(pairs, r=s, seed=seed, params=params)
    return f


def query_filter(f: MembershipFilter, key: bytes) -> bool:
    if f.s == 0:
        return True
    return backend_query(f.backend, key) == f.signature(key)


def build_bloomier(
    pairs: Iterable[basic.Pair],
    r: int,
    s: int,
    backend_kind: str = "basic",
    params: BackendParams | None = None,
    seed: int = 0,
    signature_seed: int | None = None,
) -> BloomierFilter:
    """Backend stores payload << s | signature, giving lookup plus rejection."""
    if r < 1:
        raise ValueError("payload bits r must be >= 1")
    if not 0 <= s <= 64 - r:
        raise ValueError("need r + s <= 64")
    params = params or BackendParams(kind=backend_kind)
    if params.kind != backend_kind:
        params = BackendParams(**{**params.__dict__, "kind": backend_kind})
    if signature_seed is None:
        signature_seed = (seed ^ 0x5157_3143_9E37_79B9) & ((1 << 64) - 1)
    f = BloomierFilter(
        r=r, s=s, signature_seed=signature_seed, backend_kind=backend_kind, backend=None
    )
    stored = [(key, (value << s) | f.signature(key)) for key, value in pairs]
    f.backend = _build_backend(stored, r=r + s, seed=seed, params=params)
    return f


def query_bloomier(f: BloomierFilter, key: bytes) -> tuple[bool, int | None]:
    word = backend_query(f.backend, key)
    if f.s and (word & ((1 << f.s) - 1)) != f.signature(key):
        return False, None
    return True, word >> f.s


def membership_lower_bound(n: int, epsilon: float, u: int | None = None) -> float:
    """Information-theoretic space floor in bits for approximate membership.

    u = None is the infinite-universe mode n log2(1/eps); a finite universe
    subtracts the explicit (1-eps) n^2 / (eps u + (1-eps) n) * log2(e) term.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 < epsilon < 1.0:
        if epsilon == 1.0:
            return 0.0
        raise DomainError("epsilon must be in (0, 1)")
    main = n * math.log2(1.0 / epsilon)
    if u is None:
        return main
    if u <= n:
        raise DomainError("universe must exceed n")
    slack = (1.0 - epsilon) * n * n / (epsilon * u + (1.0 - epsilon) * n)
    return main - slack * LOG2_E


def _log2_bigint(x: int) -> float:
    bits = x.bit_length()
    if bits <= 53:
        return math.log2(x)
    return (bits - 53) + math.log2(x >> (bits - 53))


def counting_lower_bound(n: int, epsilon: float, u: int) -> int:
    """Exact covering-count bound via big-integer binomial coefficients."""
    if n < 1 or u <= n:
        raise DomainError("need u > n >= 1")
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must be in (0, 1)")
    covered = math.floor(epsilon * (u - n)) + n
    num = math.comb(u, n)
    den = math.comb(covered, n)
    return math.ceil(_log2_bigint(num) - _log2_bigint(den))


def bloom_comparison(n: int, epsilon: float) -> tuple[float, float, float]:
    """(bloom_bits, retrieval_bits, lower_bound_bits) for the textbook designs."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 < epsilon <= 1.0:
        raise DomainError("epsilon must be in (0, 1]")
    base = 0.0 if epsilon == 1.0 else n * math.log2(1.0 / epsilon)
    return base * LOG2_E, base, base
