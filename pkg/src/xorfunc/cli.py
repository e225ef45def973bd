"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (parse, duplicate keys,
verification mismatch, corrupt container), 3 randomness exhausted.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import basic, blocked, compact, filters, phf, serial, thresholds
from .errors import (
    ContainerError,
    DuplicateKeys,
    ParseError,
    RandomnessExhausted,
    XorFuncError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RANDOMNESS = 3

KINDS = ("basic", "compact", "blocked", "filter", "bloomier", "phf", "mphf")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise SystemExit((EXIT_USAGE, f"{self.prog}: error: {message}"))


def ingest(path: str, fmt: str, r: int) -> list[tuple[bytes, int]]:
    """(key bytes, value) pairs from csv / tsv / binary-lines input.

    binary-lines treats each line as a bare key with value 0 (for filters
    and hash functions).  Values must parse as unsigned ints below 2^r.
    """
    sep = {"csv": b",", "tsv": b"\t"}.get(fmt)
    if fmt not in ("csv", "tsv", "binary-lines"):
        raise ParseError(f"unknown format {fmt!r}")
    pairs: list[tuple[bytes, int]] = []
    seen: dict[bytes, int] = {}
    data = Path(path).read_bytes()
    limit = 1 << r
    for lineno, line in enumerate(data.split(b"\n"), start=1):
        if lineno > 1 and not line:
            continue  # trailing blank lines
        if not line:
            continue
        if sep is None:
            key, value = line, 0
        else:
            if sep not in line:
                raise ParseError(f"line {lineno}: missing {sep!r} separator")
            key, _, raw = line.partition(sep)
            try:
                value = int(raw)
            except ValueError as exc:
                raise ParseError(f"line {lineno}: bad value {raw!r}") from exc
            if not 0 <= value < limit:
                raise ParseError(f"line {lineno}: value {value} out of range for r={r}")
        if key in seen:
            raise DuplicateKeys(f"line {lineno}: key seen before at line {seen[key]}")
        seen[key] = lineno
        pairs.append((key, value))
    return pairs


def _build_structure(args, pairs):
    params = filters.BackendParams(
        kind="basic",
        k=args.k,
        delta=args.delta,
        eps=args.eps,
        block_size=args.block_size,
        split_share=args.split_share,
    )
    if args.kind == "basic":
        return basic.build(
            pairs, r=args.bits, k=args.k, delta=args.delta, seed=args.seed,
            split_share=args.split_share,
        )
    if args.kind == "compact":
        return compact.build_compact(pairs, r=args.bits, seed=args.seed)
    if args.kind == "blocked":
        return blocked.build_blocked(
            pairs, r=args.bits, k=args.k, eps=args.eps, delta=args.delta,
            b=args.block_size, seed=args.seed,
        )
    if args.kind == "filter":
        return filters.build_filter(
            [key for key, _ in pairs], s=args.sig_bits,
            backend_kind=args.backend, params=params, seed=args.seed,
        )
    if args.kind == "bloomier":
        return filters.build_bloomier(
            pairs, r=args.bits, s=args.sig_bits,
            backend_kind=args.backend, params=params, seed=args.seed,
        )
    if args.kind == "phf":
        return phf.build_phf(
            [key for key, _ in pairs], k=args.k, delta=args.delta, seed=args.seed
        )
    if args.kind == "mphf":
        return phf.build_mphf(
            [key for key, _ in pairs], k=args.k, delta=args.delta, seed=args.seed
        )
    raise ParseError(f"unknown kind {args.kind!r}")


def _query_one(structure, key: bytes) -> str:
    if isinstance(structure, filters.MembershipFilter):
        return "yes" if filters.query_filter(structure, key) else "no"
    if isinstance(structure, filters.BloomierFilter):
        found, value = filters.query_bloomier(structure, key)
        return f"yes {value}" if found else "no"
    if isinstance(structure, phf.MinimalPerfectHash):
        return str(phf.eval_mphf(structure, key))
    if isinstance(structure, phf.PerfectHash):
        return str(phf.eval_phf(structure, key))
    if isinstance(structure, blocked.BlockedRetrieval):
        return str(blocked.query_blocked(structure, key))
    if isinstance(structure, compact.CompactRetrieval):
        return str(compact.query_compact(structure, key))
    return str(basic.query(structure, key))


def _verify_structure(structure, pairs) -> bool:
    if isinstance(structure, filters.MembershipFilter):
        return all(filters.query_filter(structure, key) for key, _ in pairs)
    if isinstance(structure, filters.BloomierFilter):
        return all(
            filters.query_bloomier(structure, key) == (True, value) for key, value in pairs
        )
    if isinstance(structure, phf.MinimalPerfectHash):
        outs = [phf.eval_mphf(structure, key) for key, _ in pairs]
        return sorted(outs) == list(range(len(outs)))
    if isinstance(structure, phf.PerfectHash):
        outs = [phf.eval_phf(structure, key) for key, _ in pairs]
        return len(set(outs)) == len(outs) and all(0 <= o < structure.m for o in outs)
    if isinstance(structure, blocked.BlockedRetrieval):
        return blocked.verify_blocked(structure, pairs)
    if isinstance(structure, compact.CompactRetrieval):
        return all(compact.query_compact(structure, key) == v for key, v in pairs)
    return basic.verify(structure, pairs)


def _stats_lines(structure) -> list[str]:
    blob = serial.serialize(structure)
    total_bits = len(blob) * 8
    table_bits = getattr(structure, "table_bits", 0)
    lines = [
        f"type: {type(structure).__name__}",
        f"n: {getattr(structure, 'n', 0)}",
        f"m: {getattr(structure, 'm', 0)}",
        f"r: {getattr(structure, 'r', getattr(structure, 's', 0))}",
        f"table_bits: {table_bits}",
        f"header_bits: {total_bits - table_bits}",
        f"total_bits: {total_bits}",
    ]
    n = getattr(structure, "n", 0)
    if n:
        lines.append(f"bits_per_key: {table_bits / n:.4f}")
        lines.append(f"total_bits_per_key: {total_bits / n:.4f}")
    if isinstance(structure, basic.RetrievalStructure):
        lines.append(f"k: {structure.k}")
        lines.append(f"seed_generation: {structure.seed_generation}")
    if isinstance(structure, basic.SplitShareRetrieval):
        lines.append(f"k: {structure.k}")
        lines.append("split_share: true")
        lines.append(f"chunks: {structure.provider.num_chunks}")
        lines.append(f"max_chunk: {structure.provider.max_chunk}")
    if isinstance(structure, compact.CompactRetrieval):
        lines.append(f"seed_index: {structure.seed_index}")
        lines.append(f"probe_range: [{structure.binom.lo}, {structure.binom.hi}]")
    if isinstance(structure, blocked.BlockedRetrieval):
        lines.append(f"k: {structure.k}")
        lines.append(f"blocks: {structure.m0}")
        lines.append(f"segment_len: {structure.segment_len}")
        lines.append(f"overflow_fraction: {structure.overflow_fraction:.4f}")
        lines.append(f"secondary_len: {structure.secondary_len}")
    if isinstance(structure, filters.MembershipFilter):
        lines.append(f"sig_bits: {structure.s}")
        lines.append(f"backend: {structure.backend_kind}")
        lines.append(f"fp_rate: {2.0 ** -structure.s:.6g}")
        if isinstance(structure.backend, basic.SplitShareRetrieval):
            lines.append("split_share: true")
            lines.append("fp_note: simulated hashing adds O(1/sqrt(n)) to the fp rate")
    if isinstance(structure, filters.BloomierFilter):
        lines.append(f"sig_bits: {structure.s}")
        lines.append(f"payload_bits: {structure.r}")
        lines.append(f"backend: {structure.backend_kind}")
    if isinstance(structure, phf.PerfectHash):
        lines.append(f"k: {structure.k}")
        lines.append(f"lambda_bits_per_slot: {structure.r_lambda}")
    if isinstance(structure, phf.MinimalPerfectHash):
        lines.append(f"k: {structure.base.k}")
        lines.append(f"lambda_bits_per_slot: {structure.base.r_lambda}")
        lines.append(f"rank_index_bits: {structure.used.index_bits}")
    return lines


def _read_structure(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read structure file: {exc}") from exc
    return serial.deserialize(data)


def _cmd_build(args) -> int:
    pairs = ingest(args.input, args.format, args.bits)
    structure = _build_structure(args, pairs)
    Path(args.out).write_bytes(serial.serialize(structure))
    print(f"built kind={args.kind} n={len(pairs)} -> {args.out}")
    return EXIT_OK


def _cmd_query(args) -> int:
    structure = _read_structure(args.structure)
    if args.key is not None:
        keys = [args.key.encode()]
    else:
        keys = [line for line in Path(args.keys_file).read_bytes().split(b"\n") if line]
    for key in keys:
        print(_query_one(structure, key))
    return EXIT_OK


def _cmd_verify(args) -> int:
    structure = _read_structure(args.structure)
    r = getattr(structure, "r", 64)
    pairs = ingest(args.input, args.format, r if r else 64)
    if _verify_structure(structure, pairs):
        print(f"verified {len(pairs)} keys")
        return EXIT_OK
    print("verification FAILED", file=sys.stderr)
    return EXIT_DATA


def _cmd_stats(args) -> int:
    structure = _read_structure(args.structure)
    for line in _stats_lines(structure):
        print(line)
    return EXIT_OK


def _cmd_bench(args) -> int:
    structure = _read_structure(args.structure)
    keys = [b"bench-%d" % i for i in range(args.queries)]
    start = time.perf_counter()
    for key in keys:
        _query_one(structure, key)
    elapsed = time.perf_counter() - start
    qps = args.queries / elapsed if elapsed > 0 else float("inf")
    print(f"queries: {args.queries}")
    print(f"seconds: {elapsed:.4f}")
    print(f"queries_per_sec: {qps:.0f}")
    return EXIT_OK


def _cmd_thresholds(args) -> int:
    print("k,beta,beta_approx,beta_inverse")
    for k in range(args.k_min, args.k_max + 1):
        res = thresholds.beta_k(k, args.tol)
        print(f"{k},{res.beta:.5f},{thresholds.beta_approx(k):.5f},{res.beta_inverse:.5f}")
    return EXIT_OK


def _cmd_mc_rank(args) -> int:
    if args.m is not None:
        m = args.m
    elif args.ratio is not None:
        m = round(args.n / args.ratio)
    else:
        raise ParseError("need --m or --ratio")
    if args.field == "gf2":
        exp = thresholds.rank_mc_gf2(args.n, m, args.k, args.trials, args.seed)
    else:
        try:
            p = int(args.field.removeprefix("prime:"))
        except ValueError as exc:
            raise ParseError(f"bad field spec {args.field!r}") from exc
        exp = thresholds.rank_mc_weighted(
            args.n, m, args.k, p, args.trials, args.seed, plant=args.plant
        )
    print("k,n,m,trials,full_rank_count,fraction")
    print(
        f"{exp.k},{exp.n},{exp.m},{exp.trials},{exp.full_rank_count},{exp.fraction:.4f}"
    )
    return EXIT_OK


def _cmd_lower_bound(args) -> int:
    u = None if args.universe in (None, 0) else args.universe
    bound = filters.membership_lower_bound(args.n, args.epsilon, u)
    bloom_bits, retrieval_bits, lb = filters.bloom_comparison(args.n, args.epsilon)
    print(f"lower_bound_bits: {bound:.2f}")
    print(f"bloom_bits: {bloom_bits:.2f}")
    print(f"retrieval_bits: {retrieval_bits:.2f}")
    if args.exact and u is not None:
        print(f"counting_bound_bits: {filters.counting_lower_bound(args.n, args.epsilon, u)}")
    return EXIT_OK


def make_parser() -> _Parser:
    parser = _Parser(prog="xorfunc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a structure from key/value input")
    b.add_argument("--kind", choices=KINDS, required=True)
    b.add_argument("--input", required=True)
    b.add_argument("--format", choices=("csv", "tsv", "binary-lines"), default="csv")
    b.add_argument("--bits", type=int, default=8, help="value bits r")
    b.add_argument("--k", type=int, default=3, help="probes per key")
    b.add_argument("--delta", type=float, default=0.25)
    b.add_argument("--eps", type=float, default=0.10)
    b.add_argument("--block-size", type=int, default=64)
    b.add_argument("--sig-bits", type=int, default=8, help="signature bits s")
    b.add_argument("--backend", choices=("basic", "compact", "blocked"), default="basic")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--split-share", action="store_true")
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_build)

    q = sub.add_parser("query", help="query a serialized structure")
    q.add_argument("--structure", required=True)
    group = q.add_mutually_exclusive_group(required=True)
    group.add_argument("--key")
    group.add_argument("--keys-file")
    q.set_defaults(func=_cmd_query)

    v = sub.add_parser("verify", help="check a structure against its input")
    v.add_argument("--structure", required=True)
    v.add_argument("--input", required=True)
    v.add_argument("--format", choices=("csv", "tsv", "binary-lines"), default="csv")
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("stats", help="print size and shape numbers")
    s.add_argument("--structure", required=True)
    s.set_defaults(func=_cmd_stats)

    be = sub.add_parser("bench", help="measure query throughput")
    be.add_argument("--structure", required=True)
    be.add_argument("--queries", type=int, default=100000)
    be.set_defaults(func=_cmd_bench)

    t = sub.add_parser("thresholds", help="full-rank density thresholds as CSV")
    t.add_argument("--k-min", type=int, default=3)
    t.add_argument("--k-max", type=int, default=6)
    t.add_argument("--tol", type=float, default=1e-6)
    t.set_defaults(func=_cmd_thresholds)

    mc = sub.add_parser("mc-rank", help="Monte-Carlo full-rank experiment")
    mc.add_argument("--k", type=int, default=3)
    mc.add_argument("--n", type=int, required=True)
    mc.add_argument("--ratio", type=float)
    mc.add_argument("--m", type=int)
    mc.add_argument("--trials", type=int, default=50)
    mc.add_argument("--field", default="gf2", help="gf2 or prime:P")
    mc.add_argument("--plant", action="store_true")
    mc.add_argument("--seed", type=int, default=0)
    mc.set_defaults(func=_cmd_mc_rank)

    lb = sub.add_parser("lower-bound", help="approximate-membership space bounds")
    lb.add_argument("--n", type=int, required=True)
    lb.add_argument("--epsilon", type=float, required=True)
    lb.add_argument("--universe", type=int, default=None)
    lb.add_argument("--exact", action="store_true")
    lb.set_defaults(func=_cmd_lower_bound)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors routed through _Parser.error
        if isinstance(exc.code, tuple):
            code, message = exc.code
            print(message, file=sys.stderr)
            return code
        return EXIT_USAGE if exc.code else EXIT_OK
    except (ParseError, DuplicateKeys, ContainerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RandomnessExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANDOMNESS
    except XorFuncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())
