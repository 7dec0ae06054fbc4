# Level geometry: contour tracing, planar topology and the band E_t
from .contours import IndexChain, trace_contours
from .polygons import (
    contains_origin,
    points_in_polygon,
    polyline_length,
    self_intersections,
    signed_area,
)
from .region import (
    RegionEt,
    detached_components,
    interior_weights,
    omega_t_weights,
    pocket_mask,
    region_Et,
)
from .topology import (
    Classification,
    LevelAnalysis,
    LevelCurve,
    LevelEntry,
    LevelSetFamily,
    build_family,
    classify,
    extract_level_set,
    family_levels,
    g_of_t,
    is_regular,
    regular_flags,
    t_star,
)

__all__ = [
    "IndexChain",
    "trace_contours",
    "contains_origin",
    "points_in_polygon",
    "polyline_length",
    "self_intersections",
    "signed_area",
    "RegionEt",
    "detached_components",
    "interior_weights",
    "omega_t_weights",
    "pocket_mask",
    "region_Et",
    "Classification",
    "LevelAnalysis",
    "LevelCurve",
    "LevelEntry",
    "LevelSetFamily",
    "build_family",
    "classify",
    "extract_level_set",
    "family_levels",
    "g_of_t",
    "is_regular",
    "regular_flags",
    "t_star",
]
