"""scikit-learn style wrappers around the functional API.

``fit`` consumes Fourier samples (or a model to sample from) and stores the
recovered spikes in trailing-underscore attributes; ``predict`` evaluates the
fitted Fourier series at new integer frequencies.
"""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex_vector, check_int
from .exceptions import ConfigurationError
from .pencil import mmp_estimate, pencil_from_samples
from .signal import FourierWindow, MixtureModel, NoiseSpec, estimate_ft, exponential_sum
from .unmix import choose_plans, run_krummp


class MatrixPencilEstimator(BaseEstimator):
    """Single-kernel spike recovery from ``2m`` consecutive Fourier samples.

    Parameters
    ----------
    n_spikes : int
        Number of spikes ``K``.
    offset : int
        Centre frequency ``s0``; samples cover ``s0 - m .. s0 + m - 1``.
    """

    def __init__(self, n_spikes=1, offset=0):
        self.n_spikes = n_spikes
        self.offset = offset

    def fit(self, X, y=None):
        samples = X.samples if isinstance(X, FourierWindow) else check_complex_vector(X, "X")
        offset = X.offset if isinstance(X, FourierWindow) else check_int(self.offset, "offset")
        k = check_int(self.n_spikes, "n_spikes", minimum=1)
        self.estimate_ = mmp_estimate(pencil_from_samples(samples, offset), k, offset)
        self.locations_ = self.estimate_.locations
        self.amplitudes_ = self.estimate_.amplitudes
        self.half_width_ = len(samples) // 2
        return self

    def predict(self, X):
        """Fitted ``sum_j u_j exp(i 2 pi s t_j)`` at frequencies ``X``."""
        check_is_fitted(self, "estimate_")
        return np.asarray(exponential_sum(self.locations_, self.amplitudes_, np.asarray(X, dtype=float)))


class KernelUnmixer(BaseEstimator):
    """Sequential unmixing of ``L`` Gaussian-blurred spike groups.

    ``fit`` accepts a :class:`~krummp.signal.MixtureModel` (sampled through the
    exact oracle, with noise when ``noise_sigma > 0``) or one
    :class:`FourierWindow` per group whose offsets match the computed plans.
    """

    def __init__(self, n_spikes=2, scales=None, delta=0.05, eps_last=0.01, c_mult=0.6,
                 m_pad=5, noise_sigma=0.0, random_state=None, strict=False):
        self.n_spikes = n_spikes
        self.scales = scales
        self.delta = delta
        self.eps_last = eps_last
        self.c_mult = c_mult
        self.m_pad = m_pad
        self.noise_sigma = noise_sigma
        self.random_state = random_state
        self.strict = strict

    def _noise(self):
        if not self.noise_sigma:
            return NoiseSpec()
        seed = self.random_state
        if seed is None or isinstance(seed, np.random.Generator):
            rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng()
            seed = int(rng.integers(0, 2 ** 63))
        return NoiseSpec.gaussian(self.noise_sigma, check_int(seed, "random_state", minimum=0))

    def plan(self, scales=None):
        scales = self.scales if scales is None else scales
        if scales is None:
            raise ConfigurationError("scales must be given")
        k = check_int(self.n_spikes, "n_spikes", minimum=1)
        return choose_plans(scales, self.delta, k, self.eps_last, self.c_mult, self.m_pad)

    def fit(self, X, y=None):
        k = check_int(self.n_spikes, "n_spikes", minimum=1)
        if isinstance(X, MixtureModel):
            if X.k != k:
                raise ConfigurationError(f"model has K = {X.k}, estimator expects {k}")
            scales = X.scales if self.scales is None else np.asarray(self.scales, dtype=float)
            if not np.array_equal(scales, X.scales):
                raise ConfigurationError("estimator scales disagree with the model")
            plans = self.plan(scales)
            report = run_krummp(X, plans, k, self._noise(), strict=self.strict)
        else:
            windows = list(X)
            plans = self.plan()
            report = run_krummp(windows, plans, k, scales=self.scales, strict=self.strict)
        self.scales_ = np.asarray(scales if isinstance(X, MixtureModel) else self.scales, dtype=float)
        self.plans_ = tuple(plans)
        self.report_ = report
        self.estimates_ = report.estimates
        self.n_groups_ = len(plans)
        return self

    def predict(self, X):
        """Fourier transform of the fitted mixture at frequencies ``X``."""
        check_is_fitted(self, "estimates_")
        s = np.asarray(X, dtype=float)
        out = np.zeros(s.shape, dtype=complex)
        for est, mu in zip(self.estimates_, self.scales_):
            out = out + estimate_ft(est, mu, s)
        return out
