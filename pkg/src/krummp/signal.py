"""Spike-train mixtures, Gaussian kernels and the exact Fourier sampling oracle.

The observed signal is ``y = sum_l g_l * x_l`` where ``x_l`` is a train of
``K`` spikes and ``g_l(t) = exp(-t^2 / (2 mu_l^2))``.  Its Fourier transform at
integer frequency ``s`` is

    f(s) = sum_l gbar_l(s) sum_j u_{l,j} exp(i 2 pi s t_{l,j}),
    gbar_l(s) = sqrt(2 pi) mu_l exp(-2 pi^2 s^2 mu_l^2).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    check_complex_vector,
    check_finite_scalar,
    check_int,
    check_positive,
    check_real_vector,
    frozen,
)
from .evaluation import min_separation
from .exceptions import ConfigurationError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_frequency(frequency):
    s = np.asarray(frequency, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ConfigurationError("frequency must be finite")
    return s


def _scalar_or_array(out):
    return out.item() if out.ndim == 0 else out


def log_gaussian_ft(scale, frequency):
    """Natural log of the Gaussian kernel's Fourier transform.

    Stays finite where :func:`gaussian_ft` underflows to zero.
    """
    mu = check_positive(scale, "scale")
    s = _check_frequency(frequency)
    out = LOG_SQRT_2PI + math.log(mu) - 2.0 * math.pi ** 2 * s ** 2 * mu ** 2
    return _scalar_or_array(out)


def gaussian_ft(scale, frequency):
    """Fourier transform ``sqrt(2 pi) mu exp(-2 pi^2 s^2 mu^2)`` of ``exp(-t^2/(2 mu^2))``."""
    mu = check_positive(scale, "scale")
    s = _check_frequency(frequency)
    out = math.sqrt(2.0 * math.pi) * mu * np.exp(-2.0 * math.pi ** 2 * s ** 2 * mu ** 2)
    return _scalar_or_array(out)


def exponential_sum(locations, amplitudes, frequency):
    """``sum_j u_j exp(i 2 pi s t_j)`` evaluated at each frequency."""
    t = np.asarray(locations, dtype=float)
    u = np.asarray(amplitudes, dtype=complex)
    s = np.asarray(frequency, dtype=float)
    phase = np.exp(2j * np.pi * np.multiply.outer(s, t))
    return _scalar_or_array(phase @ u)


@dataclass(frozen=True)
class SpikeGroup:
    """One spike train convolved with a Gaussian of the given scale."""

    locations: np.ndarray
    amplitudes: np.ndarray
    scale: float

    def __post_init__(self):
        t = check_real_vector(self.locations, "locations")
        u = check_complex_vector(self.amplitudes, "amplitudes")
        if t.size < 1 or t.size != u.size:
            raise ConfigurationError("locations and amplitudes must be non-empty and of equal length")
        if np.any(t < 0.0) or np.any(t >= 1.0):
            raise ConfigurationError("spike locations must lie in [0, 1)")
        if np.any(np.abs(u) == 0.0):
            raise ConfigurationError("spike amplitudes must be non-zero")
        if t.size > 1 and min_separation(t) <= 0.0:
            raise ConfigurationError("spike locations within a group must be distinct")
        object.__setattr__(self, "locations", frozen(t))
        object.__setattr__(self, "amplitudes", frozen(u))
        object.__setattr__(self, "scale", check_positive(self.scale, "scale"))

    @property
    def k(self):
        return int(self.locations.size)

    @property
    def separation(self):
        return min_separation(self.locations)

    def fourier(self, frequency):
        """This group's contribution ``gbar_l(s) sum_j u_j exp(i 2 pi s t_j)``."""
        return estimate_ft(self, self.scale, frequency)


@dataclass(frozen=True)
class MixtureModel:
    """``L`` spike groups ordered by strictly increasing kernel scale."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise ConfigurationError("a mixture needs at least one group")
        for g in groups:
            if not isinstance(g, SpikeGroup):
                raise ConfigurationError("groups must be SpikeGroup instances")
        ks = {g.k for g in groups}
        if len(ks) != 1:
            raise ConfigurationError(f"all groups must share the same K, got {sorted(ks)}")
        scales = [g.scale for g in groups]
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ConfigurationError(f"scales must be strictly increasing, got {scales}")
        object.__setattr__(self, "groups", groups)

    @property
    def n_groups(self):
        return len(self.groups)

    @property
    def k(self):
        return self.groups[0].k

    @property
    def scales(self):
        return np.array([g.scale for g in self.groups])

    @property
    def separations(self):
        return np.array([g.separation for g in self.groups])

    @property
    def u_max(self):
        return float(max(np.abs(g.amplitudes).max() for g in self.groups))

    @property
    def u_min(self):
        return float(min(np.abs(g.amplitudes).min() for g in self.groups))

    def scaled(self, factor):
        return MixtureModel(tuple(
            SpikeGroup(g.locations, factor * g.amplitudes, g.scale) for g in self.groups
        ))


def fourier_oracle(model, frequency):
    """Exact noiseless ``f(s)`` of the mixture; vectorised over ``frequency``."""
    s = _check_frequency(frequency)
    total = np.zeros(s.shape, dtype=complex)
    for g in model.groups:
        total = total + g.fourier(s)
    return _scalar_or_array(total)


def estimate_ft(estimate, scale, frequency):
    """Fourier contribution ``gbar(s) sum_j u_j exp(i 2 pi s t_j)`` of a recovered group.

    ``estimate`` is anything exposing ``locations`` and ``amplitudes``.
    """
    s = _check_frequency(frequency)
    return _scalar_or_array(
        np.asarray(gaussian_ft(scale, s)) * np.asarray(
            exponential_sum(estimate.locations, estimate.amplitudes, s))
    )


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise model for Fourier samples.

    ``complex-gaussian-iid`` draws real and imaginary parts independently from
    ``N(0, sigma^2)``.  Each stage gets its own stream keyed by ``(seed, stage)``.
    """

    kind: str = "none"
    sigma: float = 0.0
    seed: int = 0

    KINDS = ("none", "complex-gaussian-iid")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"unknown noise kind {self.kind!r}")
        sigma = check_finite_scalar(self.sigma, "sigma")
        if sigma < 0:
            raise ConfigurationError("sigma must be non-negative")
        if (sigma == 0.0) != (self.kind == "none"):
            raise ConfigurationError("sigma must be zero exactly when kind is 'none'")
        seed = check_int(self.seed, "seed", minimum=0)
        if seed >= 2 ** 64:
            raise ConfigurationError("seed must fit in 64 bits")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "seed", seed)

    @classmethod
    def gaussian(cls, sigma, seed=0):
        if sigma == 0:
            return cls("none", 0.0, seed)
        return cls("complex-gaussian-iid", sigma, seed)

    def draw(self, n, stage):
        """Noise vector of length ``n`` for ``stage``; zeros when noiseless."""
        if self.kind == "none":
            return np.zeros(n, dtype=complex)
        rng = np.random.default_rng([self.seed, check_int(stage, "stage", minimum=0)])
        z = rng.standard_normal((2, n))
        return self.sigma * (z[0] + 1j * z[1])


@dataclass(frozen=True)
class FourierWindow:
    """``2m`` samples at frequencies ``offset - m, ..., offset + m - 1``."""

    offset: int
    half_width: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        offset = check_int(self.offset, "offset")
        m = check_int(self.half_width, "half_width", minimum=1)
        samples = check_complex_vector(self.samples, "samples", length=2 * m)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "half_width", m)
        object.__setattr__(self, "samples", frozen(samples))

    @property
    def frequencies(self):
        return window_frequencies(self.offset, self.half_width)

    def at(self, i):
        """Sample at relative index ``i`` in ``-m .. m-1``."""
        m = self.half_width
        if not -m <= i < m:
            raise IndexError(f"relative index {i} outside [-{m}, {m})")
        return self.samples[i + m]


def window_frequencies(offset, half_width):
    return np.arange(offset - half_width, offset + half_width)


def sample_window(model, offset, half_width, noise=None, stage=1):
    """Sample ``f(s) + w(s)`` on the window centred at ``offset``."""
    offset = check_int(offset, "offset")
    half_width = check_int(half_width, "half_width", minimum=1)
    freqs = window_frequencies(offset, half_width)
    samples = np.asarray(fourier_oracle(model, freqs), dtype=complex)
    if noise is not None:
        samples = samples + noise.draw(freqs.size, stage)
    return FourierWindow(offset, half_width, samples)
