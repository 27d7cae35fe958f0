"""Matrix pencil construction and the SVD-projected (modified) matrix pencil estimator."""
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_complex_vector, check_int, check_square, frozen
from .exceptions import (
    CoincidentNodesError,
    ConfigurationError,
    DegenerateInputError,
    ZeroEigenvalueError,
)

RANK_TOLERANCE = 1e-10  # relative to sigma_1 of the data matrix
EIGENVALUE_TOLERANCE = 1e-12
NODE_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PencilPair:
    """Toeplitz pair ``H0[r, c] = d(c - r)``, ``H1[r, c] = d(c - r - 1)``.

    ``d(i)`` is the window sample at relative index ``i``; the absolute
    frequency is ``offset + i``.
    """

    h0: np.ndarray
    h1: np.ndarray
    offset: int = 0
    half_width: int = field(init=False)

    def __post_init__(self):
        h0 = check_square(self.h0, "h0")
        h1 = check_square(self.h1, "h1")
        if h0.shape != h1.shape:
            raise ConfigurationError("h0 and h1 must have the same shape")
        object.__setattr__(self, "h0", frozen(h0))
        object.__setattr__(self, "h1", frozen(h1))
        object.__setattr__(self, "offset", check_int(self.offset, "offset"))
        object.__setattr__(self, "half_width", h0.shape[0])

    @property
    def window_samples(self):
        """Recover the ``2m`` generating samples ``d(-m), ..., d(m-1)``."""
        m = self.half_width
        return np.concatenate([self.h1[::-1, 0], self.h0[0, :]]) if m else np.empty(0)

    def is_consistent(self, atol=0.0):
        rebuilt = pencil_from_samples(self.window_samples, self.offset)
        return (np.allclose(rebuilt.h0, self.h0, rtol=0, atol=atol)
                and np.allclose(rebuilt.h1, self.h1, rtol=0, atol=atol))


def pencil_from_samples(samples, offset=0):
    """Build the pencil from ``2m`` samples ordered by relative index ``-m .. m-1``."""
    d = check_complex_vector(samples, "samples")
    if d.size < 2 or d.size % 2:
        raise ConfigurationError(f"need an even, positive number of samples, got {d.size}")
    m = d.size // 2
    lag = np.arange(m)[None, :] - np.arange(m)[:, None]
    return PencilPair(d[m + lag], d[m + lag - 1], offset)


def build_pencil(window):
    """Pencil of a :class:`~krummp.signal.FourierWindow` (or any object with
    ``samples``, ``offset`` and ``half_width``)."""
    m = check_int(window.half_width, "half_width", minimum=1)
    if len(window.samples) != 2 * m:
        raise ConfigurationError(
            f"window has {len(window.samples)} samples, expected {2 * m}"
        )
    return pencil_from_samples(window.samples, window.offset)


@dataclass(frozen=True)
class VandermondeMatrix:
    """``rows x K`` matrix with entry ``[r, j] = nodes[j] ** r``."""

    nodes: np.ndarray
    rows: int

    def __post_init__(self):
        nodes = check_complex_vector(self.nodes, "nodes")
        if not np.allclose(np.abs(nodes), 1.0, rtol=0, atol=1e-12):
            raise ConfigurationError("Vandermonde nodes must lie on the unit circle")
        object.__setattr__(self, "nodes", frozen(nodes))
        object.__setattr__(self, "rows", check_int(self.rows, "rows", minimum=1))

    @property
    def matrix(self):
        return vandermonde(self.nodes, self.rows)

    def singular_values(self):
        return np.linalg.svd(self.matrix, compute_uv=False)

    def extremal_singular_values(self):
        s = self.singular_values()
        return float(s[-1]), float(s[0])


def vandermonde(nodes, rows):
    nodes = np.asarray(nodes, dtype=complex)
    return nodes[None, :] ** np.arange(rows)[:, None]


def vandermonde_extremal_singular_values(nodes, rows):
    """Return ``(sigma_min, sigma_max)`` of the ``rows x K`` Vandermonde matrix."""
    rows = check_int(rows, "rows", minimum=1)
    nodes = check_complex_vector(nodes, "nodes")
    if rows < nodes.size:
        raise ConfigurationError("need rows >= number of nodes")
    return VandermondeMatrix(nodes, rows).extremal_singular_values()


def _min_node_gap(nodes):
    if nodes.size < 2:
        return math.inf
    gaps = np.abs(nodes[:, None] - nodes[None, :])
    return float(gaps[np.triu_indices(nodes.size, k=1)].min())


def _vandermonde_solve(nodes, rhs):
    nodes = check_complex_vector(nodes, "nodes")
    v = check_complex_vector(rhs, "rhs")
    if v.size < nodes.size:
        raise ConfigurationError("need at least as many equations as nodes")
    gap = _min_node_gap(nodes)
    if gap < NODE_TIE_TOLERANCE:
        raise CoincidentNodesError(gap)
    mat = vandermonde(nodes, v.size)
    x = np.linalg.lstsq(mat, v, rcond=None)[0]
    return x, float(np.linalg.norm(mat @ x - v))


def vandermonde_lstsq(nodes, rhs):
    """Least-squares coefficients ``x`` minimising ``||V x - rhs||_2``."""
    return _vandermonde_solve(nodes, rhs)[0]


def generalized_eigenvalues(a, b, rank_tolerance=RANK_TOLERANCE):
    """Eigenvalues ``lambda`` of the pencil ``b - lambda a`` for invertible ``a``.

    Computed as the eigenvalues of ``a^{-1} b``.  ``a`` counts as singular when
    ``sigma_min(a) <= rank_tolerance * sigma_max(a)``.
    """
    a = check_square(a, "a")
    b = check_square(b, "b")
    if a.shape != b.shape:
        raise ConfigurationError("a and b must have the same shape")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= rank_tolerance * sv[0]:
        raise DegenerateInputError(sv[-1], f"near-singular pencil: sigma_min(a) = {sv[-1]:.3e}")
    return np.linalg.eigvals(np.linalg.solve(a, b))


def locations_from_nodes(nodes):
    """Map ``alpha = exp(-i 2 pi t)`` back to ``t`` in [0, 1).

    The branch cut ``arg = pi`` maps to ``t = 0.5``.
    """
    t = np.mod(-np.angle(nodes) / (2.0 * np.pi), 1.0)
    t[t >= 1.0] = 0.0
    return t


@dataclass(frozen=True)
class SpikeEstimate:
    """Recovered spikes for one group, sorted by location."""

    locations: np.ndarray
    amplitudes: np.ndarray
    group_index: int = 1
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.locations, dtype=float)
        u = np.asarray(self.amplitudes, dtype=complex)
        if t.shape != u.shape or t.ndim != 1:
            raise ConfigurationError("locations and amplitudes must be matching 1-d arrays")
        if np.any(t < 0.0) or np.any(t >= 1.0):
            raise ConfigurationError("estimated locations must lie in [0, 1)")
        object.__setattr__(self, "locations", frozen(t))
        object.__setattr__(self, "amplitudes", frozen(u))

    @property
    def k(self):
        return int(self.locations.size)


def mmp_estimate(pencil, k, offset=None, amplitude_samples=None,
                 rank_tolerance=RANK_TOLERANCE, eigenvalue_tolerance=EIGENVALUE_TOLERANCE,
                 group_index=1):
    """Estimate ``k`` spike locations and amplitudes from a (noisy) pencil.

    Parameters
    ----------
    pencil : PencilPair
    k : int
        Number of spikes, ``1 <= k <= m``.
    offset : int, optional
        Frequency offset ``s0`` of the window; defaults to ``pencil.offset``.
    amplitude_samples : array of m complex, optional
        Samples at ``s0, ..., s0 + m - 1`` used for the amplitude solve.
        Defaults to the first row of ``H0``, which holds exactly those samples.

    Returns
    -------
    SpikeEstimate
        Sorted by location; diagnostics hold ``sigma_k_of_h0`` and
        ``residual_norm`` of the amplitude least-squares fit.
    """
    m = pencil.half_width
    k = check_int(k, "k", minimum=1)
    if k > m:
        raise ConfigurationError(f"k = {k} exceeds the pencil size m = {m}")
    s0 = pencil.offset if offset is None else check_int(offset, "offset")
    if amplitude_samples is None:
        v = np.asarray(pencil.h0[0, :], dtype=complex)
    else:
        v = check_complex_vector(amplitude_samples, "amplitude_samples", length=m)

    u_mat, sv, _ = np.linalg.svd(pencil.h0)
    sigma_k = float(sv[k - 1])
    if sv[0] == 0.0 or sigma_k <= rank_tolerance * sv[0]:
        raise DegenerateInputError(sigma_k)
    basis = u_mat[:, :k]
    a_hat = basis.conj().T @ pencil.h0 @ basis
    b_hat = basis.conj().T @ pencil.h1 @ basis
    lam = generalized_eigenvalues(a_hat, b_hat, rank_tolerance)
    smallest = float(np.abs(lam).min())
    if smallest <= eigenvalue_tolerance:
        raise ZeroEigenvalueError(smallest)

    alpha = lam / np.abs(lam)
    t_hat = locations_from_nodes(alpha)
    # f(s0 + r) = sum_j u'_j exp(+i 2 pi r t_j): the amplitude system uses conj(alpha)
    u_prime, residual = _vandermonde_solve(np.conj(alpha), v)
    u_hat = u_prime * np.exp(-2j * np.pi * s0 * t_hat)

    order = np.argsort(t_hat, kind="stable")
    return SpikeEstimate(
        t_hat[order], u_hat[order], group_index,
        {"sigma_k_of_h0": sigma_k, "residual_norm": residual},
    )
