"""Command-line front end.  Machine output is JSON on stdout, logs go to stderr.

Exit codes: 0 success, 1 verification failure, 2 usage or validation
error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .domain import load_domain
from .errors import CoverageGap, GeometryError, IoError, ParseError, UnknownBlock
from .geodesic import oracle_shortest_path
from .query import BuildConfig, build, build_segments
from .serialize import load_index, save_index
from .svg import export_block

log = logging.getLogger("boundary_paths")

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


@dataclass
class RunConfig:
    command: str
    domain: str | None = None
    index: str | None = None
    delta: float = 1.0
    eps_geom: float | None = None
    eps_env: float | None = None
    curve_res: float = 1.0 / 16
    seed: int = 0
    samples: int = 0
    tol: float = 1e-9
    outputs: list = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise GeometryError(f"--delta must lie in (0, 1], got {self.delta}")
        if not (0 <= self.seed < 2 ** 64):
            raise GeometryError("--seed must be a 64-bit unsigned integer")
        for name in ("eps_geom", "eps_env", "curve_res", "tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise GeometryError(f"--{name.replace('_', '-')} must be positive")
        if self.samples < 0:
            raise GeometryError("sample count must be non-negative")


@dataclass
class VerifyReport:
    queries: int
    seed: int
    tol: float
    max_abs_error: float
    mean_abs_error: float
    max_rel_error: float
    mean_rel_error: float
    direct: int
    failures: list
    timings: dict

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _build_stats(qs) -> dict:
    st = qs.stats()
    return {
        "n": st["n"],
        "h": st["h"],
        "delta": st["delta"],
        "m": st["m"],
        "breakpoints": st["breakpoints"],
        "grid_intervals": st["grid_intervals"],
        "blocks": st["blocks"],
        "direct_blocks": st["direct_blocks"],
        "total_diagram_vertices": st["total_diagram_vertices"],
        "build_seconds": st["build_seconds"],
    }


def cmd_validate(args) -> int:
    dom = load_domain(args.domain)
    _emit({"n": dom.n, "h": dom.h, "perimeter": dom.perimeter})
    return EXIT_OK


def cmd_build(args) -> int:
    rc = RunConfig("build", domain=args.domain, index=args.output, delta=args.delta, eps_geom=args.eps_geom,
                   eps_env=args.eps_env, curve_res=args.curve_res)
    dom = load_domain(rc.domain, rc.eps_geom)
    cfg = BuildConfig(delta=rc.delta, eps_geom=rc.eps_geom, eps_env=rc.eps_env, curve_res=rc.curve_res,
                      check=args.check)
    log.info("building index for %s (n=%d, delta=%g)", rc.domain, dom.n, rc.delta)
    qs = build(dom, rc.delta, config=cfg)
    save_index(qs, rc.index)
    out = _build_stats(qs)
    out["index"] = rc.index
    _emit(out)
    return EXIT_OK


def _query_params(qs, args):
    if args.s is not None or args.t is not None:
        if args.s is None or args.t is None:
            raise GeometryError("give both --s and --t")
        return float(args.s), float(args.t)
    coords = (args.px, args.py, args.qx, args.qy)
    if any(c is None for c in coords):
        raise GeometryError("give --s/--t or all of --px --py --qx --qy")
    dom = qs.domain
    return dom.point_to_param((args.px, args.py)), dom.point_to_param((args.qx, args.qy))


def cmd_query(args) -> int:
    qs = load_index(args.index)
    s, t = _query_params(qs, args)
    res = qs.query(s, t)
    out = res.to_json(qs.domain, path=args.path)
    out.update({"s": s, "t": t})
    _emit(out)
    return EXIT_OK


def cmd_batch(args) -> int:
    qs = load_index(args.index)
    try:
        with open(args.queries) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {args.queries!r}: {exc}") from exc
    out = []
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{args.queries}:{num}: expected 's t'")
        try:
            s, t = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ParseError(f"{args.queries}:{num}: {exc}") from exc
        r = qs.query(s, t).to_json(qs.domain, path=args.path)
        r.update({"s": s, "t": t})
        out.append(r)
    _emit(out)
    return EXIT_OK


def random_pairs(domain, count: int, seed: int):
    """Uniform pairs in [0, perimeter)^2, skipping pairs whose points nearly coincide."""
    rng = np.random.default_rng(seed)
    P = domain.perimeter
    out = []
    while len(out) < count:
        s, t = rng.uniform(0.0, P, 2)
        if s >= P or t >= P:
            continue
        if math.dist(domain.param_to_point(s), domain.param_to_point(t)) <= domain.eps:
            continue
        out.append((float(s), float(t)))
    return out


def verify(qs, count: int, seed: int, tol: float = 1e-9) -> VerifyReport:
    """Compare random queries against the augmented visibility-graph oracle.

    A query fails when |length - oracle| > tol * (1 + oracle).
    """
    dom = qs.domain
    graph = qs.maps.graph
    abs_err, rel_err, failures = [], [], []
    direct = 0
    tq = to = 0.0
    for s, t in random_pairs(dom, count, seed):
        a = time.perf_counter()
        res = qs.query(s, t)
        b = time.perf_counter()
        ref, _ = oracle_shortest_path(dom, graph, dom.param_to_point(s), dom.param_to_point(t))
        c = time.perf_counter()
        tq += b - a
        to += c - b
        e = abs(res.length - ref)
        r = e / (1.0 + ref)
        abs_err.append(e)
        rel_err.append(r)
        direct += int(res.direct)
        if r > tol:
            failures.append({"s": s, "t": t, "length": res.length, "oracle": ref, "rel_error": r})
    k = max(len(abs_err), 1)
    return VerifyReport(
        queries=len(abs_err), seed=seed, tol=tol,
        max_abs_error=max(abs_err, default=0.0), mean_abs_error=sum(abs_err) / k,
        max_rel_error=max(rel_err, default=0.0), mean_rel_error=sum(rel_err) / k,
        direct=direct, failures=failures,
        timings={"build_seconds": qs.build_seconds, "query_seconds_mean": tq / k, "oracle_seconds_mean": to / k},
    )


def cmd_verify(args) -> int:
    rc = RunConfig("verify", index=args.index, seed=args.seed, samples=args.random, tol=args.tol)
    qs = load_index(rc.index)
    rep = verify(qs, rc.samples, rc.seed, rc.tol)
    _emit(rep.to_json())
    if rep.failures:
        log.error("%d of %d queries failed", len(rep.failures), rep.queries)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_stats(args) -> int:
    qs = load_index(args.index)
    _emit(qs.stats())
    return EXIT_OK


def cmd_export(args) -> int:
    qs = load_index(args.index)
    if not (0 <= args.part < len(qs.parts)):
        raise UnknownBlock(f"part {args.part} does not exist")
    part = qs.parts[args.part]
    if not (0 <= args.block < len(part.diagrams)):
        raise UnknownBlock(f"block {args.block} does not exist (0..{len(part.diagrams) - 1})")
    blk = part.blocks[args.block]
    s_lo = float(part.grid_s.starts[blk.s_interval])
    s_hi = float(part.grid_s.ends[blk.s_interval])
    csv_path = args.csv
    if csv_path is None and args.output.endswith(".svg"):
        csv_path = args.output[:-4] + ".csv"
    info = export_block(part.diagrams[args.block], s_lo, s_hi, args.output, csv_path)
    info.update({"block": args.block, "part": args.part, "kind": part.diagrams[args.block].kind})
    _emit(info)
    return EXIT_OK


def _read_segments(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        segs = [((float(a[0]), float(a[1])), (float(b[0]), float(b[1]))) for a, b in data]
    except (TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"{path}: expected a list of [[x1, y1], [x2, y2]]") from exc
    if not segs:
        raise ParseError(f"{path}: no segments")
    return segs


def cmd_segbuild(args) -> int:
    rc = RunConfig("segbuild", domain=args.domain, index=args.output, delta=args.delta,
                   eps_geom=args.eps_geom, eps_env=args.eps_env, curve_res=args.curve_res)
    dom = load_domain(rc.domain, rc.eps_geom)
    src = _read_segments(args.sources)
    dst = _read_segments(args.targets) if args.targets else src
    cfg = BuildConfig(delta=rc.delta, eps_geom=rc.eps_geom, eps_env=rc.eps_env, curve_res=rc.curve_res)
    ss = build_segments(dom, src, dst, rc.delta, config=cfg)
    save_index(ss, rc.index)
    blocks = sum(len(p.diagrams) for lst in ss.parts.values() for p in lst)
    _emit({"index": rc.index, "sources": len(src), "targets": len(dst), "structures": sum(
        len(lst) for lst in ss.parts.values()), "blocks": blocks, "build_seconds": ss.build_seconds})
    return EXIT_OK


def cmd_segquery(args) -> int:
    ss = load_index(args.index)
    if not hasattr(ss, "sources"):
        raise GeometryError("index holds a boundary structure; use 'query'")
    res = ss.query((int(args.src[0]), float(args.src[1])), (int(args.dst[0]), float(args.dst[1])))
    _emit(res.to_json(ss.domain, path=args.path))
    return EXIT_OK


def _add_build_opts(p):
    p.add_argument("--delta", type=float, default=1.0, help="tradeoff exponent in (0, 1]")
    p.add_argument("--eps-geom", type=float, default=None)
    p.add_argument("--eps-env", type=float, default=None)
    p.add_argument("--curve-res", type=float, default=1.0 / 16, help="relative sample spacing per column")
    p.add_argument("-o", "--output", required=True, help="index path (.json or .json.gz)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="boundary-paths", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a domain file")
    p.add_argument("domain")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", help="build and save a boundary query index")
    p.add_argument("domain")
    _add_build_opts(p)
    p.add_argument("--check", action="store_true", help="spot-check every diagram while building")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="one boundary-to-boundary query")
    p.add_argument("index")
    p.add_argument("--s", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--px", type=float)
    p.add_argument("--py", type=float)
    p.add_argument("--qx", type=float)
    p.add_argument("--qy", type=float)
    p.add_argument("--path", action="store_true", help="include the polyline")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("batch", help="queries from a file of 's t' lines")
    p.add_argument("index")
    p.add_argument("queries")
    p.add_argument("--path", action="store_true")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("verify", help="compare random queries with the oracle")
    p.add_argument("index")
    p.add_argument("--random", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", help="structure statistics")
    p.add_argument("index")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="write one block diagram as SVG and CSV")
    p.add_argument("index")
    p.add_argument("--block", type=int, required=True)
    p.add_argument("--part", type=int, default=0, help="corner subset index")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("segbuild", help="build a segment-restricted index")
    p.add_argument("domain")
    p.add_argument("--sources", required=True)
    p.add_argument("--targets", default=None, help="defaults to the sources")
    _add_build_opts(p)
    p.set_defaults(func=cmd_segbuild)

    p = sub.add_parser("segquery", help="query a segment-restricted index")
    p.add_argument("index")
    p.add_argument("--src", nargs=2, required=True, metavar=("SEG", "OFFSET"))
    p.add_argument("--dst", nargs=2, required=True, metavar=("SEG", "OFFSET"))
    p.add_argument("--path", action="store_true")
    p.set_defaults(func=cmd_segquery)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CoverageGap as exc:
        log.error("CoverageGap: %s", exc)
        _emit({"error": "CoverageGap", "message": str(exc)})
        return EXIT_INTERNAL
    except GeometryError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        _emit({"error": "InternalError", "message": f"{type(exc).__name__}: {exc}"})
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
