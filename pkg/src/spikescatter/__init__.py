"""Two-layer hybrid scattering pipeline for spike signals: wavelet
sparsification of piecewise polynomials, translation-invariant
Gabor-modulus measurements, and provably correct recovery of sparse spike
trains up to translation, reflection, and global sign."""

from .amplitudes import (
    ChainResult,
    PairInvariants,
    RecoveryResult,
    chain_amplitudes,
    fit_pair_invariants,
    recover_signal,
    required_frequencies,
    resolve_alternation,
)
from .errors import (
    AmbiguousRecoveryError,
    NumericalFailureError,
    PreconditionError,
    SpikeScatterError,
)
from .expoly import ExpPoly, LemmaReport, check_lemma_statement, modulus_squared
from .gabor import (
    GaborSpec,
    MeasurementRecord,
    MeasurementSet,
    beta,
    measure_analytic,
    measure_numeric,
    measure_sweep,
    measurement_batch,
    region_length,
    second_derivative_jump,
)
from .generate import random_piecewise_polynomial, random_sparse_signal
from .estimators import GaborMeasurer, GreedySynthesizer, SpikeRecoverer, WaveletSparsifier
from .signals import (
    DifferenceMultiset,
    PiecewisePolynomial,
    SampledSignal,
    SparseSignal,
    canonicalize,
    difference_set,
    equivalent_up_to_symmetry,
    is_collision_free,
)
from .support import (
    KnotEstimate,
    SupportEstimate,
    detect_knots,
    estimate_difference_set,
    recover_support,
    turnpike,
)
from .synthesis import (
    SynthesisConfig,
    SynthesisResult,
    evaluate_reconstruction,
    greedy_synthesize,
    residual,
)
from .wavelets import (
    MotherWavelet,
    convolve,
    dilate,
    make_wavelet,
    max_pool,
    sample_piecewise,
    sparsify,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousRecoveryError",
    "ChainResult",
    "DifferenceMultiset",
    "ExpPoly",
    "GaborMeasurer",
    "GaborSpec",
    "GreedySynthesizer",
    "KnotEstimate",
    "LemmaReport",
    "MeasurementRecord",
    "MeasurementSet",
    "MotherWavelet",
    "NumericalFailureError",
    "PairInvariants",
    "PiecewisePolynomial",
    "PreconditionError",
    "RecoveryResult",
    "SampledSignal",
    "SparseSignal",
    "SpikeRecoverer",
    "SpikeScatterError",
    "SupportEstimate",
    "SynthesisConfig",
    "SynthesisResult",
    "WaveletSparsifier",
    "beta",
    "canonicalize",
    "chain_amplitudes",
    "check_lemma_statement",
    "convolve",
    "detect_knots",
    "difference_set",
    "dilate",
    "equivalent_up_to_symmetry",
    "estimate_difference_set",
    "evaluate_reconstruction",
    "fit_pair_invariants",
    "greedy_synthesize",
    "is_collision_free",
    "make_wavelet",
    "max_pool",
    "measure_analytic",
    "measure_numeric",
    "measure_sweep",
    "measurement_batch",
    "modulus_squared",
    "random_piecewise_polynomial",
    "random_sparse_signal",
    "recover_signal",
    "recover_support",
    "region_length",
    "required_frequencies",
    "residual",
    "resolve_alternation",
    "sample_piecewise",
    "second_derivative_jump",
    "sparsify",
    "turnpike",
]
