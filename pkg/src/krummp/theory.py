"""Closed-form recovery guarantees: noise thresholds, error envelopes and
sampling-parameter conditions for the matrix pencil and unmixing estimators.

Every function here is a plain plug-in evaluation.  Constants follow the
notation ``m_plus = 2 / (Delta (1 - c)) + 1``, ``C = 10 + 1/(2 sqrt 2)`` and
``c_tilde > 1``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_positive
from .exceptions import ConfigurationError
from .signal import log_gaussian_ft
from .unmix import StagePlan, log_half

PENCIL_CONSTANT = 10.0 + 1.0 / (2.0 * math.sqrt(2.0))
# single-group corollary of the noisy theorem uses a doubled constant
SINGLE_GROUP_CONSTANT = 20.0 + 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class BoundContext:
    u_max: float
    u_min: float
    k: int
    l_total: int
    scales: tuple
    separations: tuple
    c: float = 0.5
    c_tilde: float = 1.5
    big_c: float = field(default=PENCIL_CONSTANT)

    def __post_init__(self):
        check_positive(self.u_min, "u_min")
        if self.u_max < self.u_min:
            raise ConfigurationError("need 0 < u_min <= u_max")
        check_int(self.k, "k", minimum=1)
        n = check_int(self.l_total, "l_total", minimum=1)
        scales = tuple(float(x) for x in np.atleast_1d(self.scales))
        seps = np.atleast_1d(np.asarray(self.separations, dtype=float))
        if seps.size == 1:
            seps = np.repeat(seps, n)
        if len(scales) != n or seps.size != n:
            raise ConfigurationError("scales and separations must have one entry per group")
        if any(b <= a for a, b in zip(scales, scales[1:])) or scales[0] <= 0:
            raise ConfigurationError("scales must be positive and strictly increasing")
        if not 0.0 < self.c < 1.0:
            raise ConfigurationError("c must lie in (0, 1)")
        if self.c_tilde <= 1.0:
            raise ConfigurationError("c_tilde must exceed 1")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "separations", tuple(float(x) for x in seps))

    @classmethod
    def from_model(cls, model, **kwargs):
        return cls(model.u_max, model.u_min, model.k, model.n_groups,
                   tuple(model.scales), tuple(model.separations), **kwargs)

    @property
    def dynamic_range_factor(self):
        return 1.0 + 48.0 * self.u_max / self.u_min

    def _check_group(self, l):
        l = check_int(l, "l", minimum=1)
        if l > self.l_total:
            raise ConfigurationError(f"group index {l} exceeds L = {self.l_total}")
        return l


def m_plus(separation, c):
    return 2.0 / (separation * (1.0 - c)) + 1.0


def corollary1_noise_bound(ctx, epsilon):
    """Largest admissible ``eta_max`` for single-kernel recovery to accuracy ``epsilon``."""
    epsilon = check_positive(epsilon, "epsilon")
    return epsilon * ctx.u_min / (5.0 * ctx.big_c * math.sqrt(ctx.k)) / ctx.dynamic_range_factor


def _c_tilde_from_m_plus(ctx, mp):
    return (4.0 * math.pi * ctx.k * ctx.u_max * mp
            + ctx.u_min / (ctx.big_c * math.sqrt(ctx.k))
            / (1.0 + 16.0 * ctx.u_max ** 2 / ctx.u_min ** 2))


def corollary1_amplitude_bound(ctx, epsilon, separation=None, offset=0):
    """Amplitude error bound ``(C_tilde + 2 pi u_max s0) epsilon`` of the single-kernel estimator."""
    epsilon = check_positive(epsilon, "epsilon")
    sep = ctx.separations[0] if separation is None else separation
    c_tilde = _c_tilde_from_m_plus(ctx, m_plus(sep, ctx.c))
    return (c_tilde + 2.0 * math.pi * ctx.u_max * offset) * epsilon


def pencil_size_interval(separation, epsilon, c):
    """Open/closed range ``(2/(Delta - 2 eps) + 1, 2/((1-c) Delta) + 1]`` for ``m``."""
    if not 0 <= epsilon < c * separation / 2:
        raise ConfigurationError("need 0 <= epsilon < c * Delta / 2")
    return 2.0 / (separation - 2.0 * epsilon) + 1.0, m_plus(separation, c)


@dataclass(frozen=True)
class Theorem3Constants:
    m_plus: float
    c_tilde_l: float
    c_bar_1: float = None
    c_bar_2: float = None
    d_l: float = None
    c_bar_3: float = None


def _d_l(ctx, l):
    mu = ctx.scales
    return (5.0 * ctx.big_c * ctx.k ** 1.5 * (ctx.l_total - l) * ctx.u_max * mu[-1]
            / (ctx.u_min * mu[l - 1]) * ctx.dynamic_range_factor)


def _kernel_gap(ctx, l):
    mu = ctx.scales
    return math.sqrt(2.0 * math.pi ** 2 * (mu[l] ** 2 - mu[l - 1] ** 2))


def theorem3_constants(ctx, l):
    """Constants of the general unmixing guarantee for group ``l``.

    ``c_bar_*`` and ``d_l`` exist only for ``l < L``.
    """
    l = ctx._check_group(l)
    mp = m_plus(ctx.separations[l - 1], ctx.c)
    c_tilde_l = _c_tilde_from_m_plus(ctx, mp)
    if l == ctx.l_total:
        return Theorem3Constants(mp, c_tilde_l)
    c_bar_1 = c_tilde_l + 2.0 * math.pi * ctx.u_max * ctx.c_tilde * mp
    c_bar_2 = 2.0 * math.pi * ctx.u_max * ctx.c_tilde / _kernel_gap(ctx, l)
    d_l = _d_l(ctx, l)
    c_bar_3 = d_l if l == 1 else 2.0 * d_l
    return Theorem3Constants(mp, c_tilde_l, c_bar_1, c_bar_2, d_l, c_bar_3)


def error_envelope(ctx, l, epsilon):
    """Amplitude error envelope ``E_l(epsilon)``."""
    epsilon = check_positive(epsilon, "epsilon")
    const = theorem3_constants(ctx, l)
    if const.c_bar_1 is None:
        return const.c_tilde_l * epsilon
    return (const.c_bar_1 + const.c_bar_2 * log_half(const.c_bar_3 / epsilon)) * epsilon


def f_envelope(ctx, l, epsilon, noisy=False):
    """Offset envelope ``F_l`` (``F'_l`` when ``noisy``), defined for ``2 <= l <= L-1``."""
    l = check_int(l, "l")
    if not 2 <= l <= ctx.l_total - 1:
        raise ConfigurationError(f"F_l is defined for 2 <= l <= L-1, got l = {l}")
    epsilon = check_positive(epsilon, "epsilon")
    mp = m_plus(ctx.separations[l - 1], ctx.c)
    c1 = (ctx.c_tilde + 1.0) * mp
    c2 = ctx.c_tilde / _kernel_gap(ctx, l)
    factor = 3.0 if noisy else 2.0
    return c1 + c2 * log_half(factor * _d_l(ctx, l) / epsilon)


def sampling_offset_lower_bound(ctx, l, epsilon, half_width, noisy=False):
    """Minimal offset ``S_l`` from the general guarantee (``l < L``)."""
    l = ctx._check_group(l)
    if l == ctx.l_total:
        return 0.0
    epsilon = check_positive(epsilon, "epsilon")
    if noisy:
        b_l = 10.0 if l == 1 else 15.0
    else:
        b_l = 5.0 if l == 1 else 10.0
    mu = ctx.scales
    arg = (b_l * ctx.big_c * ctx.k ** 1.5 * ctx.u_max * (ctx.l_total - l) * mu[-1]
           / (epsilon * ctx.u_min * mu[l - 1]) * ctx.dynamic_range_factor)
    return half_width + log_half(arg) / _kernel_gap(ctx, l)


def theorem3_plans(ctx, eps_last, noisy=False, cascade=None):
    """Alternative plan generator following the general guarantee literally.

    ``m_l`` is the smallest integer strictly above ``2/(Delta_l - 2 eps_l) + 1``
    and ``s_l = ceil(S_l)``.  ``cascade`` maps ``eps_{l+1}`` to ``eps_l``
    (default: squaring).
    """
    cascade = cascade or (lambda e: e * e)
    n = ctx.l_total
    eps = [0.0] * n
    eps[-1] = check_positive(eps_last, "eps_last")
    for l in range(n - 2, -1, -1):
        eps[l] = cascade(eps[l + 1])
    plans = []
    for l in range(1, n + 1):
        sep = ctx.separations[l - 1]
        lo, hi = pencil_size_interval(sep, eps[l - 1], ctx.c)
        m_l = int(math.floor(lo)) + 1
        if m_l > hi:
            raise ConfigurationError(f"no admissible pencil size for group {l}")
        s_real = sampling_offset_lower_bound(ctx, l, eps[l - 1], m_l, noisy)
        plans.append(StagePlan(l, eps[l - 1], m_l, int(math.ceil(s_real)), {"S_l": s_real}))
    return annotate_plans(ctx, plans)


def annotate_plans(ctx, plans):
    """Copy of ``plans`` with ``E_l``, ``S_l``, ``D_l`` and ``F_l`` attached."""
    out = []
    for p in plans:
        l = p.group_index
        const = theorem3_constants(ctx, l)
        bounds = dict(p.bounds)
        bounds["E_l"] = error_envelope(ctx, l, p.epsilon)
        bounds.setdefault("S_l", sampling_offset_lower_bound(ctx, l, p.epsilon, p.half_width))
        bounds["D_l"] = const.d_l
        bounds["F_l"] = (f_envelope(ctx, l, p.epsilon)
                         if 2 <= l <= ctx.l_total - 1 else None)
        out.append(StagePlan(l, p.epsilon, p.half_width, p.offset, bounds))
    return out


def stage_noise_threshold(ctx, l, epsilon):
    """Admissible sup of the deconvolved noise ``|w_l(i) / gbar_l(s_l + i)|`` at stage ``l``."""
    l = ctx._check_group(l)
    epsilon = check_positive(epsilon, "epsilon")
    if ctx.l_total == 1:
        big_c, b = SINGLE_GROUP_CONSTANT, 10.0
    else:
        big_c = ctx.big_c
        b = 10.0 if l in (1, ctx.l_total) else 15.0
    return epsilon * ctx.u_min / (b * big_c * math.sqrt(ctx.k)) / ctx.dynamic_range_factor


def deconvolved_noise_sup(noise, scale, frequencies):
    """``max_i |w(i)| / gbar(s_i)`` computed in log space."""
    noise = np.asarray(noise, dtype=complex)
    mag = np.abs(noise)
    if not np.any(mag > 0):
        return 0.0
    log_g = np.asarray(log_gaussian_ft(scale, frequencies), dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.log(mag) - log_g
    top = float(np.max(logs))
    return math.exp(top) if top < 709.0 else math.inf


def theorem5_noise_admissible(ctx, plans, noise_sup_per_stage):
    """Per-stage verdicts on whether the deconvolved noise meets its threshold."""
    plans = list(plans)
    sups = list(noise_sup_per_stage)
    if len(plans) != len(sups):
        raise ConfigurationError("need one noise level per stage")
    return [float(sup) <= stage_noise_threshold(ctx, p.group_index, p.epsilon)
            for p, sup in zip(plans, sups)]


@dataclass(frozen=True)
class ConditionCheck:
    condition: str
    satisfied: bool
    lhs: float
    rhs: float


def epsilon_cascade_check(ctx, plans, noisy=False):
    """Evaluate every accuracy-cascade inequality of the general guarantee.

    Labels: ``sep(l)`` for ``eps_l < c Delta_l / 2``; ``1a(l)`` for
    ``eps_l < D_l``; ``1b`` for the last-two-groups condition; ``1c-order(l)``,
    ``1c-envelope(l)`` and ``1c-tail(l)`` for the intermediate conditions.
    With ``noisy`` the stricter constants of the noisy guarantee are used.
    """
    plans = sorted(plans, key=lambda p: p.group_index)
    n = ctx.l_total
    if len(plans) != n:
        raise ConfigurationError(f"need {n} plans, got {len(plans)}")
    eps = [p.epsilon for p in plans]
    mu = ctx.scales
    big_c, k15, dr = ctx.big_c, ctx.k ** 1.5, ctx.dynamic_range_factor
    checks = []

    def add(label, lhs, rhs, strict=False):
        ok = lhs < rhs if strict else lhs <= rhs
        checks.append(ConditionCheck(label, bool(ok), float(lhs), float(rhs)))

    for l in range(1, n + 1):
        add(f"sep({l})", eps[l - 1], ctx.c * ctx.separations[l - 1] / 2.0, strict=True)
    for l in range(2, n):
        add(f"1a({l})", eps[l - 1], _d_l(ctx, l), strict=True)
    if n >= 2:
        mp_last = m_plus(ctx.separations[-1], ctx.c)
        lhs = 2.0 * math.pi * ctx.u_max * mp_last * eps[-2] + error_envelope(ctx, n - 1, eps[-2])
        denom = (10.0 if noisy else 5.0) * big_c * k15 * (n - 1) * mu[-2]
        rhs = (eps[-1] * ctx.u_min * mu[-1]
               * math.exp(-2.0 * math.pi ** 2 * (mu[-1] ** 2 - mu[0] ** 2) * mp_last ** 2)
               / denom / dr)
        add("1b", lhs, rhs)
    for l in range(1, n - 1):
        add(f"1c-order({l})", eps[l - 1], eps[l])
        add(f"1c-envelope({l})", error_envelope(ctx, l, eps[l - 1]), error_envelope(ctx, l + 1, eps[l]))
        f_lo = f_envelope(ctx, l + 1, eps[l - 1], noisy)
        f_hi = f_envelope(ctx, l + 1, eps[l], noisy)
        lhs = 2.0 * math.pi * ctx.u_max * f_lo * eps[l - 1] + error_envelope(ctx, l, eps[l - 1])
        denom = (15.0 if noisy else 10.0) * big_c * k15 * l * mu[l - 1]
        rhs = (eps[l] * math.exp(-2.0 * math.pi ** 2 * (mu[l] ** 2 - mu[0] ** 2) * f_hi ** 2)
               * ctx.u_min * mu[l] / denom / dr)
        add(f"1c-tail({l})", lhs, rhs)
    return checks


def tail_perturbation_bound(model_or_ctx, offset, half_width):
    """Closed-form bound on the stage-1 tail perturbation
    ``K u_max (L-1) (mu_L/mu_1) exp(-2 pi^2 (s_1 - m_1)^2 (mu_2^2 - mu_1^2))``."""
    src = model_or_ctx
    mu = np.asarray(src.scales, dtype=float)
    n = mu.size
    if n < 2:
        return 0.0
    if offset <= half_width:
        raise ConfigurationError("the tail bound needs offset > half_width")
    return (src.k * src.u_max * (n - 1) * mu[-1] / mu[0]
            * math.exp(-2.0 * math.pi ** 2 * (offset - half_width) ** 2 * (mu[1] ** 2 - mu[0] ** 2)))
