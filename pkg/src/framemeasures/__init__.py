"""Composable Borel measure expressions, Fourier transforms with certified
error control, and numerical verification of Bessel/frame-measure
inequalities against propagated bound certificates."""

from .errors import (
    ConfigError,
    ConstructionError,
    EnvelopeViolationError,
    InvalidMeasureError,
    MeasureError,
    RealizationTooLargeError,
    TransformError,
)
from .intervals import IntervalUnion, as_interval_union
from .measures import (
    Atomic,
    BoundedDensity,
    Convolve,
    Density,
    IfsInvariant,
    LebesgueOnSet,
    MeasureExpr,
    Normalize,
    Restrict,
    Scale,
    Sum,
    SupportSet,
    Translate,
    approximate_identity,
    atomic,
    constant_density,
    lebesgue_on,
    mass_with_error,
    piecewise_constant_density,
    piecewise_polynomial_density,
    realize_atomic,
    support_superset,
    total_mass,
    translate,
    validate,
)
from .transforms import (
    ComplexValueWithError,
    TransformRequest,
    ft_measure,
    ft_measure_grid,
    ft_weighted,
    ft_weighted_grid,
    ifs_mask,
)
from .verifier import (
    FrameReport,
    PointValues,
    StepFunction,
    TestFunction,
    TrigPolynomial,
    TruncationInfo,
    approx_identity_limit_check,
    estimate_bounds,
    exact_frame_bounds_atomic,
    extremal_test_functions,
    frame_ratio,
    gen_test_family,
    norm_sq,
)
from .constructions import (
    BoundCert,
    CatalogConfig,
    CertifiedPair,
    ProvenanceStep,
    bessel_finite_pair,
    canonical_pairs,
    convolution_chain,
    convolve_frame_measure_with_probability,
    density_restrict,
    discrete_bessel,
    mix_frame_measures,
    replay_provenance,
    scale_base,
    scale_frame_measure,
    smooth_base,
    sum_bessel,
    sum_with_densities,
    translate_pair,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
