"""Conformal geometry of canal hypersurfaces: lifts, curvature ladders,
envelopes of sphere families, and their singular points."""

from .config import DEFAULT_TOLERANCES, Tolerances
from .conformal import (
    Causal,
    Dropped,
    PencilClass,
    PencilKind,
    PolyVector,
    classify_direction,
    classify_pencil,
    drop_sphere,
    form_matrix,
    inner,
    lift_plane,
    lift_point,
    lift_sphere,
    normalize_sphere,
    scalar_product,
)
from .errors import (
    CanalGeoError,
    DegenerateFrameError,
    DegeneratePencilError,
    DimensionMismatch,
    DomainError,
    FrameConsistencyError,
    ImaginaryCharacteristicError,
    ImmersionError,
)
from .jets import (
    ConformalFrame,
    ParametricSurface,
    SurfaceJet,
    evaluate_jet,
    fundamental_forms,
    gauge_frame,
    shape_derivative,
)
from .canal import (
    CanalReport,
    ConformalTensors,
    ContactSphere,
    PrincipalSpectrum,
    build_tensors,
    contact_spheres,
    detect_canal,
    principal_spectrum,
    third_order_in_principal_frame,
)
from .envelope import (
    CharacteristicSphere,
    EnvelopeMesh,
    FamilyCausalReport,
    FamilyJet,
    SphereFamily,
    causal_classify_family,
    characteristic_sphere,
    envelope_mesh,
    envelope_surface,
    family_lift,
)
from .focal import (
    FocalCoefficients,
    PlaneClass,
    RankDropReport,
    SingularReport,
    adapted_frame_coefficients,
    classify_tube_plane,
    constraint_residual,
    focal_determinant,
    rank_drop_singular_points,
    singular_set,
)
from .catalog import (
    family_catalog,
    family_from_expressions,
    graph_surface,
    make_family,
    make_surface,
    planar_canal_surface,
    sampled_family,
    surface_catalog,
    surface_from_expressions,
    transform_surface,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "PolyVector",
    "Causal",
    "PencilKind",
    "PencilClass",
    "Dropped",
    "scalar_product",
    "form_matrix",
    "inner",
    "lift_point",
    "lift_sphere",
    "lift_plane",
    "drop_sphere",
    "normalize_sphere",
    "classify_pencil",
    "classify_direction",
    "CanalGeoError",
    "DimensionMismatch",
    "DomainError",
    "ImmersionError",
    "FrameConsistencyError",
    "DegeneratePencilError",
    "DegenerateFrameError",
    "ImaginaryCharacteristicError",
    "ParametricSurface",
    "SurfaceJet",
    "ConformalFrame",
    "evaluate_jet",
    "fundamental_forms",
    "shape_derivative",
    "gauge_frame",
    "ConformalTensors",
    "PrincipalSpectrum",
    "ContactSphere",
    "CanalReport",
    "build_tensors",
    "principal_spectrum",
    "contact_spheres",
    "third_order_in_principal_frame",
    "detect_canal",
    "FamilyJet",
    "SphereFamily",
    "FamilyCausalReport",
    "CharacteristicSphere",
    "EnvelopeMesh",
    "family_lift",
    "causal_classify_family",
    "characteristic_sphere",
    "envelope_surface",
    "envelope_mesh",
    "FocalCoefficients",
    "SingularReport",
    "PlaneClass",
    "RankDropReport",
    "adapted_frame_coefficients",
    "focal_determinant",
    "constraint_residual",
    "singular_set",
    "classify_tube_plane",
    "rank_drop_singular_points",
    "surface_catalog",
    "family_catalog",
    "make_surface",
    "make_family",
    "graph_surface",
    "surface_from_expressions",
    "family_from_expressions",
    "planar_canal_surface",
    "sampled_family",
    "transform_surface",
]
