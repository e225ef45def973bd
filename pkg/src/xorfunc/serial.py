"""Binary container format for every structure kind.

Layout (all little-endian):

    magic "SDR1" | version u8 | kind u8 | k u8 | r u8 | reserved u8
    n u64 | m u64 | master_seed u64 | seed_generation u32
    kind_specific_len u32 | kind_specific bytes
    payload_len_bits u64 | payload (entries bit-packed LSB-first, contiguous)
    crc32 u32 over everything preceding

Kinds: 1 basic retrieval, 2 compact, 3 blocked, 4 membership filter,
5 Bloomier filter, 6 perfect hash, 7 minimal perfect hash.  Filters embed
their backend's whole container in the kind-specific block.  Derived data
(rank indexes, binomial tables, shared hash tables) is rebuilt on load.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from . import basic, blocked, compact, filters, phf
from .bitvector import RankBitvector
from .errors import BadCrc, BadMagic, ContainerError, UnsupportedVersion
from .hashing import SplitShareTables, UniversalPair, build_binomial_table

MAGIC = b"SDR1"
VERSION = 1

KIND_BASIC = 1
KIND_COMPACT = 2
KIND_BLOCKED = 3
KIND_FILTER = 4
KIND_BLOOMIER = 5
KIND_PHF = 6
KIND_MPHF = 7

_BACKEND_CODES = {"none": 0, "basic": 1, "compact": 2, "blocked": 3}
_BACKEND_NAMES = {v: k for k, v in _BACKEND_CODES.items()}

_FIXED_HEADER = struct.Struct("<4sBBBBBQQQII")


def pack_entries(entries: np.ndarray, r: int) -> bytes:
    """Bit-pack r-bit entries LSB-first with no per-entry padding."""
    n = int(len(entries))
    if n == 0 or r == 0:
        return b""
    shifts = np.arange(r, dtype=np.uint64)
    bits = ((entries.astype(np.uint64)[:, None] >> shifts[None, :]) & np.uint64(1)).astype(
        np.uint8
    )
    return np.packbits(bits.reshape(-1), bitorder="little").tobytes()


def unpack_entries(buf: bytes, n: int, r: int) -> np.ndarray:
    if n == 0 or r == 0:
        return np.zeros(n, dtype=np.uint64)
    raw = np.frombuffer(buf, dtype=np.uint8)
    bits = np.unpackbits(raw, count=n * r, bitorder="little").reshape(n, r).astype(np.uint64)
    shifts = np.arange(r, dtype=np.uint64)
    return np.bitwise_or.reduce(bits << shifts[None, :], axis=1)


def _container(
    kind: int,
    k: int,
    r: int,
    n: int,
    m: int,
    master_seed: int,
    seed_generation: int,
    kind_specific: bytes,
    payload: bytes,
    payload_len_bits: int,
) -> bytes:
    head = _FIXED_HEADER.pack(
        MAGIC,
        VERSION,
        kind,
        k,
        r,
        0,
        n,
        m,
        master_seed & ((1 << 64) - 1),
        seed_generation,
        len(kind_specific),
    )
    body = head + kind_specific + struct.pack("<Q", payload_len_bits) + payload
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def serialize(structure) -> bytes:
    if isinstance(structure, basic.RetrievalStructure):
        ks = struct.pack("<dB", structure.delta, 0)
        payload = pack_entries(structure.table, structure.r)
        return _container(
            KIND_BASIC,
            structure.k,
            structure.r,
            structure.n,
            structure.m,
            structure.master_seed,
            structure.seed_generation,
            ks,
            payload,
            structure.m * structure.r,
        )
    if isinstance(structure, basic.SplitShareRetrieval):
        prov = structure.provider
        ks = struct.pack("<dB", structure.delta, 1)
        ks += struct.pack(
            "<IIQII",
            prov.num_chunks,
            prov.r_tab,
            prov.t,
            prov.splitter_generation,
            prov.max_chunk,
        )
        for ci in range(prov.num_chunks):
            seg_len = int(structure.chunk_offsets[ci + 1] - structure.chunk_offsets[ci])
            gen = structure.chunk_generations[ci]
            pair = prov.pairs[ci]
            a0, b0, a1, b1 = (pair.a0, pair.b0, pair.a1, pair.b1) if pair else (0, 0, 0, 0)
            ks += struct.pack("<IIQQQQ", seg_len, gen, a0, b0, a1, b1)
        payload = pack_entries(structure.table, structure.r)
        return _container(
            KIND_BASIC,
            structure.k,
            structure.r,
            structure.n,
            structure.m,
            structure.master_seed,
            structure.seed_generation,
            ks,
            payload,
            structure.m * structure.r,
        )
    if isinstance(structure, compact.CompactRetrieval):
        ks = struct.pack("<IId", structure.binom.lo, structure.binom.hi, structure.binom.p)
        payload = pack_entries(structure.table, structure.r)
        return _container(
            KIND_COMPACT,
            0,
            structure.r,
            structure.n,
            structure.n,
            structure.master_seed,
            structure.seed_index,
            ks,
            payload,
            structure.n * structure.r,
        )
    if isinstance(structure, blocked.BlockedRetrieval):
        ks = struct.pack(
            "<IIIQddQQI",
            structure.b,
            structure.b_prime,
            structure.segment_len,
            structure.m0,
            structure.eps,
            structure.delta,
            structure.overflow_count,
            structure.secondary_len,
            structure.secondary_generation,
        )
        entries = (
            np.concatenate([structure.primary, structure.secondary])
            if structure.secondary_len
            else structure.primary
        )
        payload = pack_entries(entries, structure.r)
        return _container(
            KIND_BLOCKED,
            structure.k,
            structure.r,
            structure.n,
            structure.m,
            structure.master_seed,
            0,
            ks,
            payload,
            len(entries) * structure.r,
        )
    if isinstance(structure, filters.MembershipFilter):
        backend_blob = b"" if structure.backend is None else serialize(structure.backend)
        code = _BACKEND_CODES["none" if structure.backend is None else structure.backend_kind]
        ks = struct.pack("<QB", structure.signature_seed, code) + backend_blob
        n = getattr(structure.backend, "n", 0)
        m = getattr(structure.backend, "m", 0)
        seed = getattr(structure.backend, "master_seed", 0)
        return _container(
            KIND_FILTER, 0, structure.s, n, m, seed, 0, ks, b"", 0
        )
    if isinstance(structure, filters.BloomierFilter):
        backend_blob = serialize(structure.backend)
        code = _BACKEND_CODES[structure.backend_kind]
        ks = struct.pack("<QBB", structure.signature_seed, structure.s, code) + backend_blob
        return _container(
            KIND_BLOOMIER,
            0,
            structure.r,
            getattr(structure.backend, "n", 0),
            getattr(structure.backend, "m", 0),
            getattr(structure.backend, "master_seed", 0),
            0,
            ks,
            b"",
            0,
        )
    if isinstance(structure, phf.MinimalPerfectHash):
        base = structure.base
        ks = struct.pack("<d", base.delta)
        payload_bits = base.m * base.r_lambda + base.m
        shifts = np.arange(base.r_lambda, dtype=np.uint64)
        lam_bits = (
            (base.lambda_table.astype(np.uint64)[:, None] >> shifts[None, :]) & np.uint64(1)
        ).astype(np.uint8)
        stream = np.concatenate([lam_bits.reshape(-1), structure.used.to_bits()])
        payload = np.packbits(stream, bitorder="little").tobytes()
        return _container(
            KIND_MPHF,
            base.k,
            base.r_lambda,
            base.n,
            base.m,
            base.master_seed,
            base.seed_generation,
            ks,
            payload,
            payload_bits,
        )
    if isinstance(structure, phf.PerfectHash):
        ks = struct.pack("<d", structure.delta)
        payload = pack_entries(structure.lambda_table, structure.r_lambda)
        return _container(
            KIND_PHF,
            structure.k,
            structure.r_lambda,
            structure.n,
            structure.m,
            structure.master_seed,
            structure.seed_generation,
            ks,
            payload,
            structure.m * structure.r_lambda,
        )
    raise TypeError(f"cannot serialize {type(structure).__name__}")


def _parse_header(data: bytes):
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("missing SDR1 magic")
    if len(data) < _FIXED_HEADER.size:
        raise ContainerError("truncated header")
    magic, version, kind, k, r, _reserved, n, m, seed, seed_gen, ks_len = _FIXED_HEADER.unpack(
        data[: _FIXED_HEADER.size]
    )
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}")
    return kind, k, r, n, m, seed, seed_gen, ks_len


def deserialize(data: bytes):
    kind, k, r, n, m, seed, seed_gen, ks_len = _parse_header(data)
    pos = _FIXED_HEADER.size
    if len(data) < pos + ks_len + 8 + 4:
        raise ContainerError("truncated container")
    ks = data[pos : pos + ks_len]
    pos += ks_len
    (payload_bits,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    payload_bytes = (payload_bits + 7) // 8
    if len(data) != pos + payload_bytes + 4:
        raise ContainerError("container length mismatch")
    payload = data[pos : pos + payload_bytes]
    pos += payload_bytes
    (crc_stored,) = struct.unpack_from("<I", data, pos)
    if crc_stored != (zlib.crc32(data[:-4]) & 0xFFFFFFFF):
        raise BadCrc("checksum mismatch")

    if kind == KIND_BASIC:
        delta, split_flag = struct.unpack_from("<dB", ks, 0)
        if not split_flag:
            table = unpack_entries(payload, m, r)
            return basic.RetrievalStructure(
                n=n, m=m, k=k, r=r, delta=delta, master_seed=seed,
                seed_generation=seed_gen, table=table, pivots=None,
            )
        off = struct.calcsize("<dB")
        num_chunks, r_tab, t, splitter_gen, max_chunk = struct.unpack_from("<IIQII", ks, off)
        off += struct.calcsize("<IIQII")
        seg_lens, gens, pairs = [], [], []
        for _ in range(num_chunks):
            seg_len, gen, a0, b0, a1, b1 = struct.unpack_from("<IIQQQQ", ks, off)
            off += struct.calcsize("<IIQQQQ")
            seg_lens.append(seg_len)
            gens.append(gen)
            pairs.append(UniversalPair(a0, b0, a1, b1, r_tab) if a0 else None)
        provider = SplitShareTables(
            master_seed=seed,
            num_chunks=num_chunks,
            r_tab=r_tab,
            t=t,
            splitter_generation=splitter_gen,
            pairs=pairs,
            tables=[],
            max_chunk=max_chunk,
        )
        provider.ensure_tables(k * (max(gens, default=0) + 1))
        offsets = np.concatenate(([0], np.cumsum(seg_lens))).astype(np.int64)
        return basic.SplitShareRetrieval(
            n=n, k=k, r=r, delta=delta, master_seed=seed, provider=provider,
            chunk_generations=gens, chunk_offsets=offsets,
            table=unpack_entries(payload, m, r),
        )
    if kind == KIND_COMPACT:
        lo, hi, p = struct.unpack_from("<IId", ks, 0)
        binom = build_binomial_table(n, p, lo, hi)
        return compact.CompactRetrieval(
            n=n, r=r, master_seed=seed, seed_index=seed_gen, binom=binom,
            table=unpack_entries(payload, n, r),
        )
    if kind == KIND_BLOCKED:
        b, b_prime, seg_len, m0, eps, delta, n_prime, sec_len, sec_gen = struct.unpack_from(
            "<IIIQddQQI", ks, 0
        )
        entries = unpack_entries(payload, m + sec_len, r)
        return blocked.BlockedRetrieval(
            n=n, r=r, k=k, b=b, eps=eps, delta=delta, m0=m0, b_prime=b_prime,
            segment_len=seg_len, master_seed=seed, secondary_generation=sec_gen,
            overflow_count=n_prime,
            primary=entries[:m],
            secondary=entries[m:],
        )
    if kind == KIND_FILTER:
        sig_seed, code = struct.unpack_from("<QB", ks, 0)
        blob = ks[struct.calcsize("<QB") :]
        backend = deserialize(blob) if code else None
        return filters.MembershipFilter(
            s=r, signature_seed=sig_seed, backend_kind=_BACKEND_NAMES[code], backend=backend
        )
    if kind == KIND_BLOOMIER:
        sig_seed, s, code = struct.unpack_from("<QBB", ks, 0)
        blob = ks[struct.calcsize("<QBB") :]
        return filters.BloomierFilter(
            r=r, s=s, signature_seed=sig_seed, backend_kind=_BACKEND_NAMES[code],
            backend=deserialize(blob),
        )
    if kind == KIND_PHF:
        (delta,) = struct.unpack_from("<d", ks, 0)
        return phf.PerfectHash(
            n=n, m=m, k=k, r_lambda=r, delta=delta, master_seed=seed,
            seed_generation=seed_gen, lambda_table=unpack_entries(payload, m, r), pivots=None,
        )
    if kind == KIND_MPHF:
        (delta,) = struct.unpack_from("<d", ks, 0)
        stream = np.unpackbits(
            np.frombuffer(payload, dtype=np.uint8), count=m * r + m, bitorder="little"
        )
        lam_bits = stream[: m * r].reshape(m, r).astype(np.uint64)
        shifts = np.arange(r, dtype=np.uint64)
        table = np.bitwise_or.reduce(lam_bits << shifts[None, :], axis=1) if m else np.zeros(
            0, dtype=np.uint64
        )
        used_bits = stream[m * r :]
        base = phf.PerfectHash(
            n=n, m=m, k=k, r_lambda=r, delta=delta, master_seed=seed,
            seed_generation=seed_gen, lambda_table=table, pivots=None,
        )
        return phf.MinimalPerfectHash(base=base, used=RankBitvector(used_bits))
    raise ContainerError(f"unknown kind {kind}")


def header_bits(structure) -> int:
    """Serialized size minus the payload's own bits (the seed bookkeeping)."""
    blob = serialize(structure)
    payload_bits = getattr(structure, "table_bits", 0)
    return len(blob) * 8 - payload_bits
