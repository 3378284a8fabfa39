"""Shortest paths between boundary points of a polygonal domain with holes."""
from .boundary_maps import BoundaryMaps, GridIndex, all_breakpoints, boundary_spm, make_blocks
from .domain import (
    Point2,
    PolygonalDomain,
    is_visible,
    load_domain,
    validate_domain,
    visible_corners,
)
from .envelope import BlockDiagram, PartialFunc, block_diagram, partial_functions
from .errors import GeometryError
from .geodesic import (
    GeodesicTable,
    VisibilityGraph,
    all_pairs_corner_distances,
    build_visibility_graph,
    oracle_shortest_path,
    spt,
)
from .query import (
    BuildConfig,
    PathResult,
    QueryStructure,
    SegmentQueryStructure,
    build,
    build_segments,
    segment_query,
)
from .serialize import load_index, save_index

__version__ = "0.1.0"

__all__ = [
    "BlockDiagram", "BoundaryMaps", "BuildConfig", "GeodesicTable", "GeometryError", "GridIndex",
    "PartialFunc", "PathResult", "Point2", "PolygonalDomain", "QueryStructure", "SegmentQueryStructure",
    "VisibilityGraph", "all_breakpoints", "all_pairs_corner_distances", "block_diagram", "boundary_spm",
    "build", "build_segments", "build_visibility_graph", "is_visible", "load_domain", "make_blocks",
    "oracle_shortest_path", "partial_functions", "save_index", "load_index", "segment_query", "spt",
    "validate_domain", "visible_corners",
]
