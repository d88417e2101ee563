"""Command-line front end: encode, repair, verify, grid, report.

Exit codes: 0 success; 1 a verification or repair failed; 2 bad usage or
parameters; 3 unreadable or malformed files.  ``ZZMR_THREADS`` caps the
worker processes the grid command may spawn.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from pathlib import Path

import numpy as np

from . import sim
from .errors import (
    InconsistentDataError,
    MdsViolationError,
    ParameterError,
    ProtocolOrderError,
    RepairFailureError,
    ShardFormatError,
)
from .field import smallest_prime_geq
from .repair import verify_recover_matrices
from .zigzag import CodeParams, check_parity, encode, erasure_decode

__all__ = ["main"]

_REPORT_KEYS = ("params", "I", "J", "gamma1", "gamma2", "gamma", "bound",
                "optimal", "per_link")


def _node_list(text: str):
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated node ids, got {text!r}"
        )


def _int_list(text: str):
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zzmr",
        description="Erasure-coded storage with cooperative multi-failure "
                    "repair at optimal bandwidth.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode data into shard files")
    enc.add_argument("-n", "--nodes", type=int, required=True,
                     help="total number of storage nodes")
    enc.add_argument("-k", "--data-nodes", type=int, required=True,
                     help="number of systematic data nodes")
    enc.add_argument("-d", "--repair-helpers", type=int, required=True,
                     help="helpers contacted per repair")
    enc.add_argument("-f", "--failures", type=int, required=True,
                     help="simultaneous failures the repair scheme handles")
    enc.add_argument("-q", "--field-size", type=int, default=None,
                     help="prime field modulus (default: smallest prime >= n+1)")
    enc.add_argument("--generator", type=int, default=None,
                     help="multiplicative generator (default: smallest)")
    src = enc.add_mutually_exclusive_group()
    src.add_argument("--seed", type=int, default=0,
                     help="seed for the deterministic data generator (default 0)")
    src.add_argument("--data-file", type=Path,
                     help="raw symbol file to encode instead of seeded data")
    enc.add_argument("--out", type=Path, required=True,
                     help="directory to write shards and manifest into")
    enc.add_argument("--json", action="store_true",
                     help="print the manifest as JSON")
    enc.set_defaults(func=_cmd_encode)

    rep = sub.add_parser("repair", help="repair failed nodes from shards on disk")
    rep.add_argument("shard_dir", type=Path)
    rep.add_argument("--fail", type=_node_list, required=True,
                     help="comma-separated node ids to fail and repair")
    rep.add_argument("--helpers", type=_node_list, default=None,
                     help="comma-separated helper ids (default: the "
                          "lowest-indexed d survivors)")
    rep.add_argument("--report-out", type=Path, default=None,
                     help="also write the repair report as JSON to this path")
    rep.add_argument("--json", action="store_true",
                     help="print the report as JSON instead of a table")
    rep.set_defaults(func=_cmd_repair)

    ver = sub.add_parser("verify", help="check parity (and optionally the "
                                        "any-k-subsets decode) of stored shards")
    ver.add_argument("shard_dir", type=Path)
    ver.add_argument("--mds", action="store_true",
                     help="also decode from every k-subset and compare")
    ver.add_argument("--json", action="store_true")
    ver.set_defaults(func=_cmd_verify)

    grid = sub.add_parser("grid", help="exhaustively validate a family of "
                                       "parameter tuples")
    grid.add_argument("--nodes", type=_int_list, required=True,
                      help="comma-separated n values")
    grid.add_argument("--radix", type=_int_list, required=True,
                      help="comma-separated digit alphabet sizes (d-k+1)")
    grid.add_argument("--failures", type=_int_list, required=True,
                      help="comma-separated h values")
    grid.add_argument("--data-nodes", type=_int_list, default=None,
                      help="restrict k to these values")
    grid.add_argument("--seed", type=int, default=1,
                      help="data seed used for the repair runs (default 1)")
    grid.add_argument("--json", action="store_true")
    grid.set_defaults(func=_cmd_grid)

    repo = sub.add_parser("report", help="render a saved repair report")
    repo.add_argument("report_file", type=Path)
    repo.add_argument("--json", action="store_true",
                      help="re-emit the normalized JSON")
    repo.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ShardFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (RepairFailureError, MdsViolationError, InconsistentDataError,
            ProtocolOrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _params_from_args(args) -> CodeParams:
    return CodeParams.build(args.nodes, args.data_nodes, args.repair_helpers,
                            args.failures, q=args.field_size,
                            gamma=args.generator)


def _cmd_encode(args) -> int:
    params = _params_from_args(args)
    if args.data_file is not None:
        data = sim.symbols_from_bytes(params, args.data_file.read_bytes())
        source = {"data_file": args.data_file.name}
    else:
        data = sim.generate_data(params, args.seed)
        source = {"seed": args.seed,
                  "generator_version": sim.GENERATOR_VERSION}
    cw = encode(params, data)
    cluster = sim.Cluster.from_codeword(params, cw)
    paths = sim.save_cluster(cluster, args.out)
    manifest = {
        "params": {"n": params.n, "k": params.k, "d": params.d,
                   "h": params.h, "q": params.q, "gamma": params.gamma},
        "symbols_per_node": params.symbols_per_node,
        "symbol_width": sim.symbol_width(params.q),
        "shards": [p.name for p in paths],
        **source,
    }
    (args.out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    if args.json:
        print(json.dumps(manifest, indent=2, sort_keys=True))
    else:
        print(f"wrote {len(paths)} shards of {params.symbols_per_node} "
              f"symbols each (GF({params.q})) to {args.out}")
    return 0


def _render_report(rep: dict) -> str:
    p = rep["params"]
    lines = [
        "repair report",
        f"  params    : n={p['n']} k={p['k']} d={p['d']} h={p['h']} "
        f"q={p['q']} gamma={p['gamma']}",
        f"  failed    : {','.join(str(i) for i in rep['I'])}",
        f"  helpers   : {','.join(str(j) for j in rep['J'])}",
        f"  downloaded: {rep['gamma1']} symbols",
        f"  exchanged : {rep['gamma2']} symbols",
        f"  total     : {rep['gamma']} symbols; bound {rep['bound']} -> "
        f"{'optimal' if rep['optimal'] else 'NOT optimal'}",
    ]
    if "wall_time_s" in rep:
        lines.append(f"  wall time : {rep['wall_time_s']:.4f} s")
    links = [
        f"    {src} -> {dst}: {count}"
        for src, row in enumerate(rep["per_link"])
        for dst, count in enumerate(row)
        if count
    ]
    lines.append("  traffic per link:")
    lines.extend(links if links else ["    (none)"])
    return "\n".join(lines)


def _cmd_repair(args) -> int:
    cluster = sim.load_cluster(args.shard_dir)
    params = cluster.params
    fail = sorted(set(args.fail))
    already = set(cluster.erased)
    if not already <= set(fail):
        raise ParameterError(
            f"shards for nodes {sorted(already - set(fail))} are missing but "
            f"not listed in --fail"
        )
    for node in fail:
        if node not in already:
            cluster.erase(node)
    cluster.ledger.reset()
    survivors = cluster.intact
    if len(survivors) >= params.k:
        oracle = erasure_decode(params, cluster.codeword(), known=survivors)
    else:
        oracle = None
    report = sim.run_repair(cluster, args.helpers)
    sim.save_cluster(cluster, args.shard_dir)
    rep = report.to_dict()
    if args.report_out is not None:
        args.report_out.write_text(report.to_json() + "\n")
    print(json.dumps(rep, indent=2, sort_keys=True) if args.json
          else _render_report(rep))
    mismatches = []
    if oracle is not None:
        for node in report.failed:
            diff = int(np.count_nonzero(cluster.read(node) - oracle[:, node, :]))
            if diff:
                mismatches.append((node, diff))
    if mismatches:
        for node, diff in mismatches:
            print(f"MISMATCH: node {node} differs from the decode oracle in "
                  f"{diff} symbols", file=sys.stderr)
        return 1
    if not report.optimal:
        print(f"bandwidth {report.gamma} exceeds the bound {report.bound}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    cluster = sim.load_cluster(args.shard_dir)
    params = cluster.params
    if cluster.erased:
        raise ParameterError(
            f"verification needs all {params.n} shards; missing "
            f"{list(cluster.erased)}"
        )
    cw = cluster.codeword()
    parity = check_parity(params, cw)
    mds_checked = 0
    mds_failures = []
    if args.mds and parity.ok:
        for subset in combinations(range(params.n), params.k):
            mds_checked += 1
            try:
                rebuilt = erasure_decode(params, cw, known=subset)
            except (MdsViolationError, InconsistentDataError) as exc:
                mds_failures.append({"subset": list(subset), "error": str(exc)})
                continue
            if not np.array_equal(rebuilt, cw):
                mds_failures.append({"subset": list(subset),
                                     "error": "decode differs from stored data"})
    ok = parity.ok and not mds_failures
    if args.json:
        print(json.dumps({
            "parity_ok": parity.ok,
            "violation": list(parity.violation) if parity.violation else None,
            "equations": parity.equations,
            "mds_checked": mds_checked,
            "mds_failures": mds_failures,
        }, indent=2, sort_keys=True))
    else:
        if parity.ok:
            print(f"parity: all {parity.equations} equations hold")
        else:
            w, t, a = parity.violation
            print(f"parity: FAILED at instance {w}, level {t}, row {a}")
        if args.mds and parity.ok:
            print(f"decode oracle: {mds_checked - len(mds_failures)} of "
                  f"{mds_checked} k-subsets reconstruct the data")
            for failure in mds_failures:
                print(f"  subset {failure['subset']}: {failure['error']}")
    return 0 if ok else 1


def _grid_tuples(args):
    out = []
    for n in sorted(set(args.nodes)):
        for radix in sorted(set(args.radix)):
            for h in sorted(set(args.failures)):
                for k in range(1, n):
                    if args.data_nodes and k not in args.data_nodes:
                        continue
                    d = k + radix - 1
                    if k <= d <= n - h:
                        out.append((n, k, d, h))
    return out


def _grid_row(task) -> dict:
    (n, k, d, h), seed = task
    # The smallest prime with q-1 > n: every node's multiplier stays != 1,
    # so every node is repairable and the grid exercises the full claim.
    params = CodeParams.build(n, k, d, h, q=smallest_prime_geq(n + 2))
    start = time.perf_counter()
    verify = verify_recover_matrices(params)
    data = sim.generate_data(params, seed)
    cw = encode(params, data)
    scenarios = 0
    repairs_ok = True
    for failed in combinations(range(n), h):
        rest = [i for i in range(n) if i not in failed]
        for helpers in combinations(rest, d):
            scenarios += 1
            cluster = sim.Cluster.from_codeword(params, cw)
            sim.fail_nodes(cluster, failed)
            report = sim.run_repair(cluster, helpers)
            exact = all(
                np.array_equal(cluster.read(i), cw[:, i, :]) for i in failed
            )
            if not (exact and report.optimal):
                repairs_ok = False
    side = params.parities * params.radix ** (n - d - 1)
    return {
        "params": f"({n},{k},{d},{h})",
        "q": params.q,
        "scenarios": scenarios,
        "systems": verify.systems,
        "nonsingular": verify.ok,
        "optimal": repairs_ok,
        "max_side": side,
        "seconds": round(time.perf_counter() - start, 3),
    }


def _cmd_grid(args) -> int:
    tuples = _grid_tuples(args)
    tasks = [(t, args.seed) for t in tuples]
    cap = int(os.environ.get("ZZMR_THREADS", "0") or 0)
    workers = min(len(tasks), os.cpu_count() or 1, cap if cap > 0 else 64)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_row, tasks))
    else:
        rows = [_grid_row(t) for t in tasks]
    ok = all(row["nonsingular"] and row["optimal"] for row in rows)
    if args.json:
        print(json.dumps({"rows": rows, "ok": ok}, indent=2, sort_keys=True))
    else:
        header = (f"{'params':>12} {'q':>3} {'scenarios':>9} {'systems':>7} "
                  f"{'nonsingular':>11} {'optimal':>7} {'max|R|':>6} {'sec':>8}")
        print(header)
        for row in rows:
            print(f"{row['params']:>12} {row['q']:>3} {row['scenarios']:>9} "
                  f"{row['systems']:>7} {str(row['nonsingular']):>11} "
                  f"{str(row['optimal']):>7} {row['max_side']:>6} "
                  f"{row['seconds']:>8.3f}")
        print(f"{len(rows)} parameter tuples: "
              f"{'all pass' if ok else 'FAILURES PRESENT'}")
    return 0 if ok else 1


def _cmd_report(args) -> int:
    try:
        rep = json.loads(args.report_file.read_text())
    except json.JSONDecodeError as exc:
        raise ShardFormatError(f"{args.report_file}: not valid JSON: {exc}")
    missing = [key for key in _REPORT_KEYS if key not in rep]
    if missing:
        raise ShardFormatError(
            f"{args.report_file}: report lacks keys {missing}"
        )
    print(json.dumps(rep, indent=2, sort_keys=True) if args.json
          else _render_report(rep))
    return 0


if __name__ == "__main__":
    sys.exit(main())
