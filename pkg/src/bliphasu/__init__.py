"""Blind deconvolution from low-resolution phaseless measurements.

Recovers a kernel and a signal, each confined to a known low-dimensional
subspace, from noisy squared magnitudes of low-frequency Fourier samples
of their circular convolution.  The pipeline is a spectral initializer
(leading eigenvectors of intensity-weighted correlation matrices)
followed by minibatch Wirtinger-gradient descent on the intensity
least-squares objective, with a benchmark harness that sweeps the
measurement ratio and noise level.
"""

from .core import (
    SeededRng,
    circular_convolve,
    dft,
    dft_matrix,
    hermitian_inner,
    matvec,
    partial_dft,
    partial_dft_matrix,
    sample_complex_gaussian,
    sample_complex_gaussian_matrix,
)
from .errors import (
    BliPhaSuError,
    ConfigError,
    DegenerateInputError,
    DegenerateSpectrumError,
    DimensionError,
    DivergenceError,
    InstanceFormatError,
)
from .harness import (
    CellSummary,
    ExperimentConfig,
    ExperimentReport,
    TrialRecord,
    emit_report,
    experiment_init_quality,
    experiment_success_rate,
    recover_from_file,
    run_trial,
)
from .metrics import AlignedPair, align_scale, dist, pair_error, relative_error, snr_db
from .model import (
    MeasurementSet,
    ProblemInstance,
    add_noise,
    forward_convolutional,
    forward_intensities,
    load_instance,
    noise_std_for_snr,
    save_instance,
    synthesize_instance,
)
from .refine import (
    IterateState,
    RecoveryResult,
    RefineConfig,
    RefineOutcome,
    TraceRecord,
    bliphasu,
    full_gradient,
    objective,
    residual,
    run_refinement,
    sample_minibatch,
    sgd_step,
)
from .spectral import (
    CorrelationMatrix,
    EigenEstimate,
    InitEstimate,
    build_correlation,
    power_iteration,
)
from .spectral import initialize as spectral_initialize

__version__ = "0.1.0"

__all__ = [
    "AlignedPair",
    "BliPhaSuError",
    "CellSummary",
    "ConfigError",
    "CorrelationMatrix",
    "DegenerateInputError",
    "DegenerateSpectrumError",
    "DimensionError",
    "DivergenceError",
    "EigenEstimate",
    "ExperimentConfig",
    "ExperimentReport",
    "InitEstimate",
    "InstanceFormatError",
    "IterateState",
    "MeasurementSet",
    "ProblemInstance",
    "RecoveryResult",
    "RefineConfig",
    "RefineOutcome",
    "SeededRng",
    "TraceRecord",
    "TrialRecord",
    "add_noise",
    "align_scale",
    "bliphasu",
    "build_correlation",
    "circular_convolve",
    "dft",
    "dft_matrix",
    "dist",
    "emit_report",
    "experiment_init_quality",
    "experiment_success_rate",
    "forward_convolutional",
    "forward_intensities",
    "full_gradient",
    "hermitian_inner",
    "load_instance",
    "matvec",
    "noise_std_for_snr",
    "objective",
    "pair_error",
    "partial_dft",
    "partial_dft_matrix",
    "power_iteration",
    "recover_from_file",
    "relative_error",
    "residual",
    "run_refinement",
    "run_trial",
    "sample_complex_gaussian",
    "sample_complex_gaussian_matrix",
    "sample_minibatch",
    "save_instance",
    "sgd_step",
    "snr_db",
    "spectral_initialize",
    "synthesize_instance",
]
