"""Sequential unmixing of Gaussian-blurred spike groups (KrUMMP).

Groups are processed from the narrowest kernel (widest Fourier transform) to
the broadest.  Stage ``l`` samples the Fourier data at an offset deep enough
that kernels ``l+1, ..., L`` have decayed, subtracts the fitted contributions
of groups ``1, ..., l-1``, divides by ``gbar_l`` and runs the matrix pencil
estimator on the result.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_positive, check_real_vector
from .exceptions import ConfigurationError, NumericalError, StageFailure
from .pencil import mmp_estimate, pencil_from_samples
from .signal import (
    MixtureModel,
    NoiseSpec,
    estimate_ft,
    log_gaussian_ft,
    sample_window,
)

LOG_SPACE_THRESHOLD = 200.0
MIN_EPSILON = 1e-300


def log_half(x):
    """``sqrt(|log x|)``, the paper's ``log^{1/2}`` convention."""
    return math.sqrt(abs(math.log(x)))


@dataclass(frozen=True)
class StagePlan:
    """Sampling parameters for stage ``group_index`` (1-based)."""

    group_index: int
    epsilon: float
    half_width: int
    offset: int
    bounds: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        check_int(self.group_index, "group_index", minimum=1)
        check_positive(self.epsilon, "epsilon")
        check_int(self.half_width, "half_width", minimum=1)
        check_int(self.offset, "offset", minimum=0)


@dataclass(frozen=True)
class StageDiagnostics:
    max_deconvolved_magnitude: float
    deflation_residual: float
    sigma_k_of_h0: float = math.nan
    residual_norm: float = math.nan


@dataclass(frozen=True)
class UnmixReport:
    """Per-group estimates in stage order.

    When a stage fails, ``estimates`` stops at the last successful stage,
    ``partial`` is true and ``failure`` holds the :class:`StageFailure`.
    """

    estimates: tuple
    plans: tuple
    per_stage_diagnostics: tuple
    failure: object = None

    @property
    def partial(self):
        return self.failure is not None


def choose_plans(scales, separations, k, eps_last=0.01, c_mult=0.6, m_pad=5):
    """Experimental sampling schedule.

    ``m_l = ceil(1/Delta_l) + m_pad``, ``eps_L = eps_last``,
    ``eps_l = eps_{l+1}^2``, ``s_L = 0`` and for ``l < L``

        s_l = m_l + ceil(C / sqrt(2 pi^2 (mu_{l+1}^2 - mu_l^2))
                         * sqrt(|log(mu_L / (mu_l eps_l))|)).
    """
    mu = check_real_vector(scales, "scales")
    n = mu.size
    if n < 1 or np.any(mu <= 0) or np.any(np.diff(mu) <= 0):
        raise ConfigurationError("scales must be positive and strictly increasing")
    delta = np.broadcast_to(check_real_vector(np.atleast_1d(separations), "separations"), (n,))
    if np.any(delta <= 0):
        raise ConfigurationError("separations must be positive")
    k = check_int(k, "k", minimum=1)
    eps_last = check_positive(eps_last, "eps_last")
    if eps_last >= 1:
        raise ConfigurationError("eps_last must lie in (0, 1)")
    c_mult = check_positive(c_mult, "c_mult")
    m_pad = check_int(m_pad, "m_pad", minimum=0)

    eps = [0.0] * n
    eps[-1] = eps_last
    for l in range(n - 2, -1, -1):
        eps[l] = eps[l + 1] ** 2
        if eps[l] < MIN_EPSILON:
            raise ConfigurationError(
                f"epsilon cascade underflows at group {l + 1} ({eps[l]:.3e})")

    plans = []
    for l in range(n):
        # tolerance keeps 1/0.05 from rounding up to 21
        m_l = int(math.ceil(1.0 / delta[l] - 1e-9)) + m_pad
        if m_l < k:
            raise ConfigurationError(f"half-width m_{l + 1} = {m_l} is smaller than k = {k}")
        if l == n - 1:
            s_l = 0
            depth = 0.0
        else:
            gap = math.sqrt(2.0 * math.pi ** 2 * (mu[l + 1] ** 2 - mu[l] ** 2))
            depth = c_mult / gap * log_half(mu[-1] / (mu[l] * eps[l]))
            s_l = m_l + int(math.ceil(depth))
        plans.append(StagePlan(l + 1, eps[l], m_l, s_l, {"S_l": m_l + depth}))
    return plans


def deflate_and_deconvolve(window, prior, scales, l):
    """Subtract fitted groups ``1 .. l-1`` from the window and divide by ``gbar_l``.

    ``prior`` holds the estimates of groups ``1 .. l-1`` in order and
    ``scales`` the kernel scales of all groups.  Where ``|log gbar_l|`` exceeds
    200 the division is carried out on log-magnitudes.
    """
    l = check_int(l, "l", minimum=1)
    if len(prior) < l - 1:
        raise ConfigurationError(f"stage {l} needs estimates for {l - 1} earlier groups")
    residual = _deflate(window, prior[:l - 1], scales)
    return _deconvolve(residual, scales[l - 1], window.frequencies, l)


def _deflate(window, prior, scales):
    freqs = window.frequencies
    residual = np.array(window.samples, dtype=complex)
    for p, est in enumerate(prior):
        residual -= estimate_ft(est, scales[p], freqs)
    return residual


def _deconvolve(residual, scale, freqs, stage):
    log_g = np.asarray(log_gaussian_ft(scale, freqs), dtype=float)
    out = np.empty_like(residual)
    direct = np.abs(log_g) <= LOG_SPACE_THRESHOLD
    out[direct] = residual[direct] / np.exp(log_g[direct])
    deep = ~direct
    if np.any(deep):
        mag = np.abs(residual[deep])
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            log_mag = np.log(mag) - log_g[deep]
            out[deep] = np.where(mag > 0, np.exp(log_mag), 0.0) * np.exp(1j * np.angle(residual[deep]))
    bad = ~np.isfinite(out)
    if np.any(bad):
        s_bad = int(freqs[np.argmax(bad)])
        raise StageFailure(stage, f"deconvolution overflow at frequency {s_bad}", frequency=s_bad)
    return out


def _window_source(source, noise):
    if isinstance(source, MixtureModel):
        return lambda plan: sample_window(source, plan.offset, plan.half_width, noise, plan.group_index)
    if callable(source):
        return source
    windows = list(source)

    def pick(plan):
        w = windows[plan.group_index - 1]
        if w.offset != plan.offset or w.half_width != plan.half_width:
            raise ConfigurationError(
                f"window {plan.group_index} does not match its plan "
                f"(offset {w.offset} vs {plan.offset}, half-width {w.half_width} vs {plan.half_width})")
        return w
    return pick


def run_krummp(source, plans, k, noise=None, scales=None, strict=False):
    """Run the sequential unmixing pipeline.

    Parameters
    ----------
    source : MixtureModel, callable or sequence of FourierWindow
        A model is sampled through :func:`sample_window` with ``noise``; a
        callable receives the :class:`StagePlan` and returns a window; a
        sequence supplies one pre-recorded window per stage.
    plans : sequence of StagePlan
        Ordered ``l = 1 .. L``.
    k : int
        Spikes per group.
    scales : sequence of float, optional
        Kernel scales; taken from the model when ``source`` is a model.
    strict : bool
        Re-raise a :class:`StageFailure` instead of returning a partial report.
    """
    k = check_int(k, "k", minimum=1)
    plans = tuple(plans)
    if [p.group_index for p in plans] != list(range(1, len(plans) + 1)):
        raise ConfigurationError("plans must be ordered by group index starting at 1")
    if scales is None:
        if not isinstance(source, MixtureModel):
            raise ConfigurationError("scales are required unless sampling from a model")
        scales = source.scales
    scales = check_real_vector(scales, "scales")
    if scales.size != len(plans):
        raise ConfigurationError(f"{len(plans)} plans for {scales.size} kernel scales")
    noise = noise or NoiseSpec()
    fetch = _window_source(source, noise)

    estimates, diagnostics = [], []
    for plan in plans:
        l = plan.group_index
        try:
            window = fetch(plan)
            residual = _deflate(window, estimates, scales)
            deconv = _deconvolve(residual, scales[l - 1], window.frequencies, l)
            pencil = pencil_from_samples(deconv, plan.offset)
            est = mmp_estimate(pencil, k, group_index=l)
        except StageFailure as exc:
            if strict:
                raise
            return UnmixReport(tuple(estimates), plans, tuple(diagnostics), exc)
        except NumericalError as exc:
            failure = StageFailure(l, str(exc))
            if strict:
                raise failure from exc
            return UnmixReport(tuple(estimates), plans, tuple(diagnostics), failure)
        estimates.append(est)
        diagnostics.append(StageDiagnostics(
            float(np.abs(deconv).max()),
            float(np.abs(residual).max()),
            est.diagnostics["sigma_k_of_h0"],
            est.diagnostics["residual_norm"],
        ))
    return UnmixReport(tuple(estimates), plans, tuple(diagnostics))
