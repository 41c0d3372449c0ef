"""Sketched matrix products that estimate their own error-size tradeoff.

The library compresses a tall matrix pair (A, B) with a random sketching
operator, bootstraps the distribution of the max-abs error of the sketched
product from the sketches alone, and extrapolates the resulting quantile
curve across sketch sizes, so accuracy can be certified or the minimal
sketch size planned for a target error.
"""

from .booterr import (
    BootstrapConfig,
    BootstrapScheme,
    QuantileEstimate,
    bootstrap_quantile,
    budget_check,
    empirical_quantile,
    extrapolate,
    multinomial_weight_sample,
    multiplier_bootstrap_sample,
    multiplier_error,
    nonparametric_bootstrap_sample,
    plan_sketch_size,
    resample_error,
)
from .datagen import (
    RankMode,
    SynthProfile,
    libsvm_load,
    mvt_rows,
    normalize_gram_linf,
    singular_value_profile,
    synth_matrix,
)
from .matcore import (
    DenseMatrix,
    PowerIterationError,
    RankDeficiencyError,
    ZeroMatrixError,
    frobenius_norm,
    linf_norm,
    matmul_t,
    reduced_qr,
    spectral_norm,
    stable_rank,
)
from .oracle import QuantileCurve, coverage_probe, mc_quantile_curve, true_error
from .sketch import (
    LengthSamplingError,
    SketchKind,
    SketchPair,
    SketchSpec,
    apply_spec,
    fwht_in_place,
    gaussian_sketch,
    length_sampling_probs,
    row_sample_sketch,
    srht_sketch,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapConfig",
    "BootstrapScheme",
    "DenseMatrix",
    "LengthSamplingError",
    "PowerIterationError",
    "QuantileCurve",
    "QuantileEstimate",
    "RankDeficiencyError",
    "RankMode",
    "SketchKind",
    "SketchPair",
    "SketchSpec",
    "SynthProfile",
    "ZeroMatrixError",
    "apply_spec",
    "bootstrap_quantile",
    "budget_check",
    "coverage_probe",
    "empirical_quantile",
    "extrapolate",
    "frobenius_norm",
    "fwht_in_place",
    "gaussian_sketch",
    "length_sampling_probs",
    "libsvm_load",
    "linf_norm",
    "matmul_t",
    "mc_quantile_curve",
    "multinomial_weight_sample",
    "multiplier_bootstrap_sample",
    "multiplier_error",
    "mvt_rows",
    "nonparametric_bootstrap_sample",
    "normalize_gram_linf",
    "plan_sketch_size",
    "reduced_qr",
    "resample_error",
    "row_sample_sketch",
    "singular_value_profile",
    "spectral_norm",
    "srht_sketch",
    "stable_rank",
    "synth_matrix",
    "true_error",
]
