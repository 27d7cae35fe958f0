"""Recovery of Gaussian-blurred spike groups from Fourier samples.

Single-kernel recovery uses an SVD-projected matrix pencil; mixtures of
kernels are unmixed stage by stage through Fourier tail sampling, deflation of
already recovered groups and deconvolution.
"""
from .bench import ExperimentConfig, TrialRecord, emit_results, generate_instance, run_experiment
from .estimators import KernelUnmixer, MatrixPencilEstimator
from .evaluation import MatchResult, chordal_distance, match_spikes, min_separation, wrap_distance
from .exceptions import (
    ConfigurationError,
    DegenerateInputError,
    InfeasibleInstanceError,
    KrummpError,
    NumericalError,
    StageFailure,
)
from .pencil import (
    PencilPair,
    SpikeEstimate,
    build_pencil,
    generalized_eigenvalues,
    mmp_estimate,
    vandermonde_extremal_singular_values,
)
from .signal import (
    FourierWindow,
    MixtureModel,
    NoiseSpec,
    SpikeGroup,
    estimate_ft,
    fourier_oracle,
    gaussian_ft,
    log_gaussian_ft,
    sample_window,
)
from .theory import BoundContext, corollary1_noise_bound, epsilon_cascade_check, theorem3_constants
from .unmix import StagePlan, UnmixReport, choose_plans, deflate_and_deconvolve, run_krummp

__version__ = "0.1.0"
