"""Numerical lab for windowed (alpha beta) statistical convergence and farthest points in normed spaces."""

from .errors import (
    CertificateMismatch,
    ConfigError,
    DimensionCap,
    DomainError,
    HorizonExceeded,
    InvalidInput,
    InvalidSubset,
    InvalidWindowPair,
    InvalidWitness,
    LabError,
)
from .windows import (
    DensityTrace,
    IndexPredicate,
    Status,
    Verdict,
    WindowPair,
    classical_pair,
    density_trace,
    linear_window,
    poly_window,
    powers_of_two,
    perfect_squares,
    shifted_poly,
    validate_window_pair,
    verdict_converges_to_zero,
)
from .seqlab import (
    LabSequence,
    ab_stat_converges,
    ab_stat_diverges_to_inf,
    is_ab_stat_maximizing,
    is_maximizing,
    partial_ab_stat_continuity,
)
from .geometry import BoundedSet, NormedSpace, chebyshev_center, diameter, farthest_points, remotality_scan
from .compactness import (
    attainment_check,
    max_chebyshev_check,
    partial_ab_compact_check,
    slab,
    slab_trace,
    x_ab_compact_verdict,
    x_compact_verdict,
)
from .gauge import power_gauge, remotality_hypothesis_div, remotality_hypothesis_ratio

__version__ = "0.1.0"
