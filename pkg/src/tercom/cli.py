"""Batch front end.

Three commands: ``table`` computes per-partition rank reports, ``extract``
prints the explicit new identity of a partition in matrix-unit form, and
``multidegree`` runs the full non-multilinear search.  Progress goes to
stderr, results to stdout or --out, in JSON (default) or CSV.

Exit codes: 0 success, 2 invariant violation, 3 resource failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import mdpipeline, mlpipeline, modlinalg, permgroup, ternary

DEFAULT_PRIME = 1048573
LARGE_DIMENSION = 400


def _progress(msg: str):
    print(msg, file=sys.stderr, flush=True)


def _parse_partitions(text: str) -> list[tuple[int, ...]]:
    out = []
    for chunk in text.split(";"):
        lam = tuple(int(x) for x in chunk.split(",") if x.strip())
        if not permgroup.is_partition(lam):
            raise ValueError(f"not a partition: {chunk!r}")
        out.append(lam)
    return out


def _selected_partitions(args) -> list[tuple[int, ...]]:
    if args.partitions:
        lams = _parse_partitions(args.partitions)
        for lam in lams:
            if sum(lam) != args.degree:
                raise ValueError(f"partition {lam} does not sum to {args.degree}")
    else:
        lams = [
            lam
            for lam in permgroup.partitions(args.degree)
            if permgroup.dimension(lam) <= args.max_dim
        ]
    if not args.allow_large:
        big = [lam for lam in lams if permgroup.dimension(lam) >= LARGE_DIMENSION]
        if big:
            raise ValueError(
                f"partitions {big} have dimension >= {LARGE_DIMENSION}; "
                "pass --allow-large to run them"
            )
    # ascending dimension keeps the cheap jobs first
    lams.sort(key=permgroup.dimension)
    return lams


def _report_one(job) -> dict:
    lam, p, degree, cache_dir = job
    rep = mlpipeline.pipeline(lam, p, degree, cache_dir).report()
    return rep.as_dict()


def cmd_table(args) -> dict:
    lams = _selected_partitions(args)
    jobs = [(lam, args.prime, args.degree, args.cache_dir) for lam in lams]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(_report_one, jobs))
    else:
        rows = []
        for job in jobs:
            _progress(f"partition {job[0]} (dimension {permgroup.dimension(job[0])})")
            rows.append(_report_one(job))
    if args.check_prime:
        p2 = _next_prime(args.prime)
        _progress(f"re-checking ranks at second prime {p2}")
        for row, lam in zip(rows, lams):
            rep2 = mlpipeline.pipeline(lam, p2, args.degree).report().as_dict()
            for key in ("sym", "sym_lif", "all"):
                if rep2[key] != row[key]:
                    raise AssertionError(
                        f"rank mismatch between primes for {lam}: {key}"
                    )
    return {
        "schema": "tercom/table/v1",
        "degree": args.degree,
        "prime": args.prime,
        "rows": rows,
    }


def cmd_extract(args) -> dict:
    lams = _selected_partitions(args) if args.partitions else [(2, 2, 2, 2, 2, 1)]
    lam = lams[0]
    pipe = mlpipeline.pipeline(lam, args.prime, args.degree, args.cache_dir)
    report = pipe.extract_new_identity()
    summands = pipe.emit_group_algebra_identity(report)
    _progress("verifying the emitted identity against the identity spaces")
    row = pipe.rep_row_of_d_combination(summands)
    in_all = pipe.contains_row(pipe.allmat, row)
    in_old = pipe.contains_row(pipe.oldmat, row)
    if not in_all or in_old:
        raise AssertionError("emitted identity failed the row-space check")
    return {
        "schema": "tercom/extract/v1",
        "partition": list(lam),
        "prime": args.prime,
        "dimension": report.d,
        "row_index": report.row_index,
        "leading_column": report.leading_column,
        "new_leading_columns": list(report.new_leading_columns),
        "nonzero_entries": len(report.entries),
        "distinct_coefficients": report.coefficients(),
        "entries": [
            {
                "column": e.column,
                "type": e.type_index,
                "tableau": e.tableau_index,
                "tableau_flat": list(e.tableau_flat),
                "coefficient": e.coefficient,
            }
            for e in report.entries
        ],
        "group_algebra": [
            {
                "coefficient": s.coefficient,
                "type": s.type_index,
                "d_terms": [[c, k] for c, k in s.d_terms],
            }
            for s in summands
        ],
        "in_all_space": in_all,
        "in_old_space": in_old,
    }


def cmd_multidegree(args) -> dict:
    result = mdpipeline.run_multidegree(args.prime, progress=_progress)
    if result.rank != 19964 or result.nullity != 676:
        raise AssertionError(
            f"kernel rank {result.rank}/nullity {result.nullity} "
            "disagree with the expected profile"
        )
    if result.consequence_rank != 675:
        raise AssertionError("consequence rank is not 675")
    if not result.expansion_zero:
        raise AssertionError("winner does not expand to zero over the integers")
    if not result.representation.matches_allmat:
        raise AssertionError("stacked representation does not match allmat")
    artifact = args.artifact or "identity_a2b2c2d2e2f.tsv"
    mdpipeline.write_identity_artifact(
        artifact, result.store, args.prime, result.winner.vector
    )
    _progress(f"identity artifact written to {artifact}")
    return {
        "schema": "tercom/multidegree/v1",
        "multidegree": list(result.delta),
        "prime": result.p,
        "per_type_counts": result.per_type_counts,
        "rank": result.rank,
        "nullity": result.nullity,
        "consequence_rank": result.consequence_rank,
        "kernel_stats": result.kernel_stats,
        "winner": {
            "sorted_position": result.winner.sorted_position,
            "original_position": result.winner.original_position,
            "nonzero_count": result.winner.nonzero_count,
            "square_length": result.winner.square_length,
            "coefficients": result.winner.coefficients,
            "types_used": result.winner.types_used,
        },
        "expansion_zero": result.expansion_zero,
        "linear_term_count": result.linear_term_count,
        "final_rank": result.representation.rank_with_identity,
        "rank_without_identity": result.representation.rank_without_identity,
        "allmat_match": result.representation.matches_allmat,
        "artifact": artifact,
    }


def _next_prime(p: int) -> int:
    q = p + 1
    while not modlinalg.is_prime(q):
        q += 1
    return q


def _emit(payload: dict, args):
    if args.format == "json":
        text = json.dumps(payload, indent=2)
    else:
        buf = io.StringIO()
        rows = payload.get("rows")
        if rows is None:
            rows = [payload]
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    k: (json.dumps(v) if isinstance(v, (list, dict)) else v)
                    for k, v in row.items()
                }
            )
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tercom",
        description="identities of the alternating ternary commutator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("table", cmd_table),
        ("extract", cmd_extract),
        ("multidegree", cmd_multidegree),
    ):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
        p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
        p.add_argument("--degree", type=int, default=11, choices=(5, 7, 9, 11))
        p.add_argument("--max-dim", type=int, default=45)
        p.add_argument("--partitions", type=str, default="")
        p.add_argument("--cache-dir", type=str, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--check-prime", action="store_true")
        p.add_argument("--allow-large", action="store_true")
        p.add_argument("--out", type=str, default=None)
        if name == "multidegree":
            p.add_argument("--artifact", type=str, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not modlinalg.is_prime(args.prime):
        print(f"error: {args.prime} is not prime", file=sys.stderr)
        return 2
    if args.prime <= args.degree:
        print(
            f"error: prime {args.prime} must exceed the degree {args.degree}",
            file=sys.stderr,
        )
        return 2
    try:
        payload = args.func(args)
    except (AssertionError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MemoryError, OSError) as exc:
        print(f"resource failure: {exc}", file=sys.stderr)
        return 3
    _emit(payload, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
