"""Circle metrics and the greedy spike matching used to score estimates."""
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError


def _check_unit_interval(t, name):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise ConfigurationError(f"{name} must lie in [0, 1)")
    return arr


def wrap_distance(t1, t2):
    """Wrap-around distance ``min(|t1 - t2|, 1 - |t1 - t2|)`` on [0, 1).

    Broadcasts over arrays; the result lies in [0, 1/2].
    """
    a = _check_unit_interval(t1, "t1")
    b = _check_unit_interval(t2, "t2")
    diff = np.abs(a - b)
    out = np.minimum(diff, 1.0 - diff)
    return float(out) if out.ndim == 0 else out


def pairwise_wrap_distances(locations):
    t = _check_unit_interval(locations, "locations")
    diff = np.abs(t[:, None] - t[None, :])
    return np.minimum(diff, 1.0 - diff)


def min_separation(locations):
    """Smallest pairwise wrap distance; ``inf`` for a single location."""
    t = np.asarray(locations, dtype=float)
    if t.size < 2:
        return float("inf")
    d = pairwise_wrap_distances(t)
    return float(d[np.triu_indices(t.size, k=1)].min())


def chordal_distance(u, v):
    """Chordal metric ``|u - v| / (sqrt(1 + |u|^2) sqrt(1 + |v|^2))``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ConfigurationError("chordal_distance requires finite inputs")
    out = np.abs(u - v) / (np.sqrt(1.0 + np.abs(u) ** 2) * np.sqrt(1.0 + np.abs(v) ** 2))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one estimated group against its ground truth.

    ``permutation[j]`` is the estimate index paired with truth spike ``j``.
    """

    permutation: tuple
    per_spike_location_error: np.ndarray
    per_spike_amplitude_error: np.ndarray

    @property
    def d_max(self):
        return float(np.max(self.per_spike_location_error))

    @property
    def d_avg(self):
        return float(np.mean(self.per_spike_location_error))

    @property
    def amplitude_error_max(self):
        return float(np.max(self.per_spike_amplitude_error))


def match_spikes(truth, estimate):
    """Greedily pair true and estimated spikes by wrap-around distance.

    The globally closest unmatched (truth, estimate) pair is fixed first, then
    both are removed and the search repeats.  Ties go to the lowest truth index,
    then the lowest estimate index.  This is a heuristic: it does not always
    minimise the largest matched distance.
    """
    t_true = np.asarray(truth.locations, dtype=float)
    t_est = np.asarray(estimate.locations, dtype=float)
    if t_true.shape != t_est.shape:
        raise ConfigurationError(
            f"cannot match {t_true.size} true spikes against {t_est.size} estimates"
        )
    k = t_true.size
    dist = np.minimum(np.abs(t_true[:, None] - t_est[None, :]),
                      1.0 - np.abs(t_true[:, None] - t_est[None, :]))
    work = dist.copy()
    perm = [-1] * k
    for _ in range(k):
        # argmin scans row-major, which realises the tie rule
        flat = int(np.argmin(work))
        i, j = divmod(flat, k)
        perm[i] = j
        work[i, :] = np.inf
        work[:, j] = np.inf
    perm = tuple(perm)
    loc_err = dist[np.arange(k), list(perm)]
    u_true = np.asarray(truth.amplitudes, dtype=complex)
    u_est = np.asarray(estimate.amplitudes, dtype=complex)
    amp_err = np.abs(u_est[list(perm)] - u_true)
    return MatchResult(perm, loc_err, amp_err)
