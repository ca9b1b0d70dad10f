"""Boundary expressions of groups as dense amalgams, their normal-form
algebra, and finite metric approximations of the amalgam construction."""

from .boundary import (
    Amalgam,
    Atom,
    BoundaryExpr,
    CANTOR,
    Cantor,
    EMPTY,
    Empty,
    POINT_PAIR,
    PointPair,
    amalgam_of,
    equal_normal,
    format_expr,
    normalize,
    parse_expr,
)
from .simplicial import SimplicialComplex, Splitting
from .coxeter import (
    CoxeterSystem,
    EndednessClass,
    classify_endedness,
    gram_pd_test,
    is_finite_type,
    nerve,
    parse_coxeter,
)
from .coxeter import boundary_expression as coxeter_boundary_expression
from .graphs_of_groups import (
    BassSerreBall,
    GraphOfGroups,
    GroupDescriptor,
    OrientedEdge,
    bass_serre_ball,
    check_separation,
    elementary_collapse,
    is_non_elementary,
    reduce,
    trivial_edges,
)
from .graphs_of_groups import boundary_expression as gog_boundary_expression
from .metric import (
    FiniteMetricSpace,
    disjoint_union,
    read_matrix_csv,
    space_from_json,
    space_to_json,
    write_matrix_csv,
)
from .approx import (
    AmalgamApprox,
    ConditionReport,
    ConditionTolerances,
    basic_open_set,
    build_approx,
    check_conditions,
    half_space,
    load_bundle,
    save_bundle,
)
from .characterize import (
    MergeResult,
    RegularStructure,
    TLabelling,
    as_regular_structure,
    build_t_labelling,
    check_regularity,
    labelling_from_json,
    labelling_to_json,
    load_structure,
    merge_families,
    quotient_profile,
    save_structure,
    verify_labelling,
)

__all__ = [
    "AmalgamApprox",
    "Amalgam",
    "Atom",
    "BassSerreBall",
    "BoundaryExpr",
    "CANTOR",
    "Cantor",
    "ConditionReport",
    "ConditionTolerances",
    "CoxeterSystem",
    "EMPTY",
    "Empty",
    "EndednessClass",
    "FiniteMetricSpace",
    "GraphOfGroups",
    "GroupDescriptor",
    "MergeResult",
    "OrientedEdge",
    "POINT_PAIR",
    "PointPair",
    "RegularStructure",
    "SimplicialComplex",
    "Splitting",
    "TLabelling",
    "amalgam_of",
    "as_regular_structure",
    "basic_open_set",
    "bass_serre_ball",
    "build_approx",
    "build_t_labelling",
    "check_conditions",
    "check_regularity",
    "check_separation",
    "classify_endedness",
    "coxeter_boundary_expression",
    "disjoint_union",
    "elementary_collapse",
    "equal_normal",
    "format_expr",
    "gog_boundary_expression",
    "gram_pd_test",
    "half_space",
    "is_finite_type",
    "is_non_elementary",
    "labelling_from_json",
    "labelling_to_json",
    "load_bundle",
    "load_structure",
    "merge_families",
    "nerve",
    "normalize",
    "parse_coxeter",
    "parse_expr",
    "quotient_profile",
    "read_matrix_csv",
    "reduce",
    "save_bundle",
    "save_structure",
    "space_from_json",
    "space_to_json",
    "verify_labelling",
    "write_matrix_csv",
]

__version__ = "0.1.0"
