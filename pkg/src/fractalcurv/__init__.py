"""Curvature measures of parallel sets of self-similar fractals.

The package computes the intrinsic volumes (Euler characteristic, half
boundary length, area) and their total variations for eps-parallel
bodies of compact sets on the line and in the plane, estimates the
curvature scaling exponents and their Cesaro-averaged counterparts, and
ships exactly solvable reference families for validation.
"""

from .errors import (
    AccuracyGuardError,
    DegenerateArrangementError,
    FractalCurvError,
    GridMemoryError,
    SampleBudgetError,
    ScaleRangeError,
    SchemaError,
)
from .ifs import (
    IFS,
    PointSample,
    Similarity,
    cylinder_hulls,
    cylinder_maps,
    diameter,
    embed_in_plane,
    hull_ball,
    hull_interval,
    ifs_from_dict,
    ifs_to_dict,
    load_ifs,
    moran_dimension,
    sample_attractor,
)
from .fractal_string import (
    FractalString,
    c0var_dd_upper,
    c0var_line,
    c0var_plane,
    c1var_product,
    component_count,
    load_string,
    make_string,
    parallel_length_line,
    string_from_dict,
    string_from_ifs,
    string_from_points,
    string_to_dict,
)
from .exponents import (
    AverageExponentFit,
    ExponentFit,
    cesaro_average,
    fit_average_exponent,
    fit_exponent,
    fractal_curvature,
)
from .disk_union import (
    DiskUnionCurvatures,
    disk_union_curvatures,
    sweep_curvatures,
)
from .structure import (
    ClusterReport,
    ComplementRegion,
    FlatnessReport,
    TilingReport,
    bounded_complement_component,
    clusters,
    flatness_test,
    generator_boundary_points,
    load_open_set,
    open_set_from_dict,
    tiling_compatible,
    tiling_generator,
)
from .catalog import (
    CatalogEntry,
    DigitSetFamily,
    PrescribedExponentFamily,
    block_family_dimension,
    catalog_entry,
    digit_set,
    prescribed_exponent_family,
    square_parallel_curvatures,
    standard_names,
    standard_set,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyGuardError", "DegenerateArrangementError", "FractalCurvError",
    "GridMemoryError", "SampleBudgetError", "ScaleRangeError", "SchemaError",
    "IFS", "PointSample", "Similarity", "cylinder_hulls", "cylinder_maps",
    "diameter", "embed_in_plane", "hull_ball", "hull_interval",
    "ifs_from_dict", "ifs_to_dict", "load_ifs", "moran_dimension",
    "sample_attractor",
    "FractalString", "c0var_dd_upper", "c0var_line", "c0var_plane",
    "c1var_product", "component_count", "load_string", "make_string",
    "parallel_length_line", "string_from_dict", "string_from_ifs",
    "string_from_points", "string_to_dict",
    "AverageExponentFit", "ExponentFit", "cesaro_average",
    "fit_average_exponent", "fit_exponent", "fractal_curvature",
    "DiskUnionCurvatures", "disk_union_curvatures", "sweep_curvatures",
    "ClusterReport", "ComplementRegion", "FlatnessReport", "TilingReport",
    "bounded_complement_component", "clusters", "flatness_test",
    "generator_boundary_points", "load_open_set", "open_set_from_dict",
    "tiling_compatible", "tiling_generator",
    "CatalogEntry", "DigitSetFamily", "PrescribedExponentFamily",
    "block_family_dimension", "catalog_entry", "digit_set",
    "prescribed_exponent_family", "square_parallel_curvatures",
    "standard_names", "standard_set",
    "__version__",
]
