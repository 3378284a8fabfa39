"""Index files: versioned JSON, gzip-compressed when the path ends in ``.gz``.

Floats are written with ``repr`` precision, so a loaded index answers
queries bit-for-bit like the structure it was saved from.
"""
from __future__ import annotations

import gzip
import json
import os

import numpy as np

from .boundary_maps import BoundaryMaps, GridIndex, Locus, layout_from_chunks
from .domain import validate_domain
from .envelope import BlockDiagram, PartialFunc
from .errors import IndexVersionMismatch, IoError, ParseError
from .geodesic import GeodesicTable
from .query import BuildConfig, PairStructure, QueryStructure, SegmentQueryStructure

FORMAT = "boundary-paths-index"
VERSION = 1


def _grid_to(g: GridIndex) -> dict:
    return {
        "starts": g.starts.tolist(),
        "ends": g.ends.tolist(),
        "carrier": np.asarray(g.carrier).tolist(),
        "kinds": [sorted(k) for k in g.kinds],
        "visible": [np.nonzero(row)[0].tolist() for row in g.visible],
        "total": g.total,
    }


def _grid_from(d: dict, n: int) -> GridIndex:
    vis = np.zeros((len(d["starts"]), n), bool)
    for k, ids in enumerate(d["visible"]):
        vis[k, ids] = True
    return GridIndex(np.array(d["starts"], float), np.array(d["ends"], float), np.array(d["carrier"], int),
                     [frozenset(k) for k in d["kinds"]], vis, float(d["total"]))


def _diagram_to(dg: BlockDiagram) -> dict:
    return {
        "id": dg.block_id,
        "kind": dg.kind,
        "funcs": [f.to_list() for f in dg.funcs],
        "t_breaks": dg.t_breaks.tolist(),
        "slabs": [list(s) for s in dg.slabs],
        "stats": dg.stats,
    }


def _diagram_from(d: dict) -> BlockDiagram:
    return BlockDiagram(int(d["id"]), d["kind"], [PartialFunc.from_list(x) for x in d["funcs"]],
                        np.array(d["t_breaks"], float), [tuple(s) for s in d["slabs"]], dict(d["stats"]))


def _locus_to(loc: Locus) -> dict:
    if loc.name == "boundary":
        return {"kind": "boundary"}
    c = loc.carriers[0]
    return {"kind": "segment", "a": c.a.tolist(), "b": c.b.tolist(), "side": int(c.side)}


def _part_to(p: PairStructure) -> dict:
    return {
        "subset": p.subset,
        "locus_s": _locus_to(p.locus_s),
        "locus_t": _locus_to(p.locus_t),
        "grid_s": None if p.grid_s is p.grid_t else _grid_to(p.grid_s),
        "grid_t": _grid_to(p.grid_t),
        "chunks": [list(c) for c in p.layout.chunks],
        "diagrams": [_diagram_to(d) for d in p.diagrams],
        "rows_breaks": sorted([int(k), int(v)] for k, v in p.rows_breaks.items()),
    }


def _part_from(d: dict, maps: BoundaryMaps, loci: dict) -> PairStructure:
    n = maps.domain.n

    def locus(desc):
        if desc["kind"] == "boundary":
            return maps.boundary
        key = (tuple(desc["a"]), tuple(desc["b"]), desc["side"])
        if key not in loci:
            loci[key] = Locus.segment(maps.domain, desc["a"], desc["b"], desc["side"])
        return loci[key]

    grid_t = _grid_from(d["grid_t"], n)
    grid_s = grid_t if d["grid_s"] is None else _grid_from(d["grid_s"], n)
    layout = layout_from_chunks(grid_s.size, d["chunks"])
    diagrams = [_diagram_from(x) for x in d["diagrams"]]
    return PairStructure(d["subset"], locus(d["locus_s"]), locus(d["locus_t"]), grid_s, grid_t, layout,
                         diagrams, {k: v for k, v in d["rows_breaks"]})


def _config_to(c: BuildConfig) -> dict:
    return {"delta": c.delta, "eps_geom": c.eps_geom, "eps_env": c.eps_env, "curve_res": c.curve_res,
            "cap": c.cap, "check": c.check}


def to_dict(qs) -> dict:
    dom = qs.domain
    out = {
        "format": FORMAT,
        "version": VERSION,
        "domain": dom.to_json(),
        "eps_geom": dom.eps,
        "eps_env": qs.maps.eps_env,
        "config": _config_to(qs.config),
        "geodesic": {"dist": qs.table.dist.tolist(), "pred": qs.table.pred.tolist()},
        "build_seconds": qs.build_seconds,
    }
    if isinstance(qs, SegmentQueryStructure):
        out["type"] = "segments"
        out["sources"] = [[a.tolist(), b.tolist()] for a, b in qs.sources]
        out["targets"] = [[a.tolist(), b.tolist()] for a, b in qs.targets]
        out["parts"] = [[si, ti, [_part_to(p) for p in lst]] for (si, ti), lst in sorted(qs.parts.items())]
    else:
        out["type"] = "boundary"
        out["parts"] = [_part_to(p) for p in qs.parts]
    return out


def from_dict(d: dict):
    if not isinstance(d, dict) or d.get("format") != FORMAT:
        raise IndexVersionMismatch("not an index file")
    if d.get("version") != VERSION:
        raise IndexVersionMismatch(f"index version {d.get('version')} but this build reads {VERSION}")
    dom = validate_domain(d["domain"]["outer"], d["domain"]["holes"], d["eps_geom"])
    table = GeodesicTable(np.array(d["geodesic"]["dist"], float), np.array(d["geodesic"]["pred"], int))
    maps = BoundaryMaps(dom, d["eps_env"], table=table)
    config = BuildConfig(**d["config"])
    loci: dict = {}
    if d.get("type") == "segments":
        src = [(np.array(a, float), np.array(b, float)) for a, b in d["sources"]]
        dst = [(np.array(a, float), np.array(b, float)) for a, b in d["targets"]]
        parts = {(int(si), int(ti)): [_part_from(p, maps, loci) for p in lst] for si, ti, lst in d["parts"]}
        return SegmentQueryStructure(dom, maps, config, src, dst, parts, d.get("build_seconds", 0.0))
    parts = [_part_from(p, maps, loci) for p in d["parts"]]
    return QueryStructure(dom, maps, config, parts, d.get("build_seconds", 0.0))


def save_index(qs, path: str) -> None:
    data = json.dumps(to_dict(qs), separators=(",", ":"))
    try:
        if str(path).endswith(".gz"):
            with gzip.open(path, "wt", encoding="utf-8") as fh:
                fh.write(data)
        else:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(data)
    except OSError as exc:
        raise IoError(f"cannot write index {path!r}: {exc}") from exc


def load_index(path: str):
    if not path or not os.path.isfile(path):
        raise IoError(f"index file {path!r} not found")
    try:
        if str(path).endswith(".gz"):
            with gzip.open(path, "rt", encoding="utf-8") as fh:
                d = json.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read index {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"index {path!r} is not valid JSON: {exc}") from exc
    return from_dict(d)
