"""Monte Carlo harness: random instances, trials, success statistics and result files."""
import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_int, check_positive
from .evaluation import match_spikes, pairwise_wrap_distances
from .exceptions import ConfigurationError, InfeasibleInstanceError
from .signal import MixtureModel, NoiseSpec, SpikeGroup
from .unmix import choose_plans, run_krummp

MAX_REJECTIONS = 10 ** 6
SUCCESS_THRESHOLD = 0.05
CSV_HEADER = ("trial_id", "k", "group", "delta_l", "d_max", "d_avg", "amp_err_max", "stage_failed")


@dataclass(frozen=True)
class ExperimentConfig:
    """Protocol parameters; defaults reproduce the published four-group experiment."""

    l_total: int = 4
    k_values: tuple = (2, 3, 4, 5)
    mu_last: float = 0.01
    mu_ratio: float = 0.5
    delta: float = 0.05
    m_pad: int = 5
    eps_last: float = 0.01
    c_mult: float = 0.6
    trials: int = 400
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    u_min: float = 3.0
    u_max: float = 10.0
    seed: int = 0

    def __post_init__(self):
        check_int(self.l_total, "l_total", minimum=1)
        ks = tuple(check_int(k, "k_values", minimum=1) for k in np.atleast_1d(self.k_values).tolist())
        if not ks:
            raise ConfigurationError("k_values must not be empty")
        object.__setattr__(self, "k_values", ks)
        check_positive(self.mu_last, "mu_last")
        if not 0.0 < self.mu_ratio < 1.0:
            raise ConfigurationError("mu_ratio must lie in (0, 1)")
        if not 0.0 < self.delta < 0.5:
            raise ConfigurationError("delta must lie in (0, 1/2)")
        check_int(self.m_pad, "m_pad", minimum=0)
        if not 0.0 < self.eps_last < 1.0:
            raise ConfigurationError("eps_last must lie in (0, 1)")
        check_positive(self.c_mult, "c_mult")
        check_int(self.trials, "trials", minimum=1)
        if not isinstance(self.noise, NoiseSpec):
            raise ConfigurationError("noise must be a NoiseSpec")
        check_positive(self.u_min, "u_min")
        if self.u_max < self.u_min:
            raise ConfigurationError("u_max must be >= u_min")
        seed = check_int(self.seed, "seed", minimum=0)
        if seed >= 2 ** 64:
            raise ConfigurationError("seed must fit in 64 bits")

    @property
    def scales(self):
        return tuple(self.mu_last * self.mu_ratio ** (self.l_total - 1 - i) for i in range(self.l_total))

    def to_dict(self):
        out = asdict(self)
        out["k_values"] = list(self.k_values)
        out["noise"] = {"kind": self.noise.kind, "sigma": self.noise.sigma}
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigurationError("experiment config must be a mapping")
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__} - {"noise_sigma"}
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        noise = data.pop("noise", None)
        sigma = data.pop("noise_sigma", None)
        if isinstance(noise, dict):
            sigma = noise.get("sigma", 0.0) if sigma is None else sigma
        elif noise is not None:
            raise ConfigurationError("noise must be a mapping with a 'sigma' entry")
        try:
            return cls(noise=NoiseSpec.gaussian(float(sigma or 0.0)), **data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc

    def replace(self, **changes):
        d = asdict(self)
        d["noise"] = self.noise
        d.update(changes)
        return ExperimentConfig(**d)


def _draw_locations(rng, k, delta):
    if k * delta >= 1.0:
        raise ConfigurationError(f"k * delta = {k * delta} leaves no room for separated spikes")
    for _ in range(MAX_REJECTIONS):
        t = rng.random(k)
        if k == 1:
            return t
        d = pairwise_wrap_distances(t)
        if d[np.triu_indices(k, 1)].min() >= delta:
            return t
    raise InfeasibleInstanceError(
        f"no {k} locations with separation {delta} after {MAX_REJECTIONS} attempts")


def generate_instance(config, k, rng):
    """Draw one mixture: per group, real amplitudes of random sign and
    locations resampled until all pairwise wrap distances reach ``delta``."""
    k = check_int(k, "k", minimum=1)
    groups = []
    for mu in config.scales:
        t = _draw_locations(rng, k, config.delta)
        mag = rng.uniform(config.u_min, config.u_max, k)
        sign = np.where(rng.random(k) < 0.5, -1.0, 1.0)
        groups.append(SpikeGroup(t, mag * sign, mu))
    return MixtureModel(tuple(groups))


@dataclass(frozen=True)
class GroupOutcome:
    delta_l: float
    d_max: float
    d_avg: float
    amp_err_max: float
    stage_failed: bool


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    k: int
    per_group: tuple
    stage_failures: tuple


def trial_rng(seed, k, trial_id):
    return np.random.default_rng([seed, k, trial_id])


def run_trial(config, k, trial_id):
    rng = trial_rng(config.seed, k, trial_id)
    model = generate_instance(config, k, rng)
    noise = config.noise
    if noise.kind != "none":
        noise = NoiseSpec(noise.kind, noise.sigma, int(rng.integers(0, 2 ** 63)))
    plans = choose_plans(model.scales, config.delta, k, config.eps_last, config.c_mult, config.m_pad)
    report = run_krummp(model, plans, k, noise)
    outcomes = []
    for l, group in enumerate(model.groups):
        sep = group.separation
        delta_l = float(sep) if math.isfinite(sep) else 1.0
        if l < len(report.estimates):
            res = match_spikes(group, report.estimates[l])
            outcomes.append(GroupOutcome(delta_l, res.d_max, res.d_avg, res.amplitude_error_max, False))
        else:
            outcomes.append(GroupOutcome(delta_l, math.nan, math.nan, math.nan, True))
    return TrialRecord(trial_id, k, tuple(outcomes), tuple(o.stage_failed for o in outcomes))


def _run_batch(args):
    config, k, ids = args
    return [run_trial(config, k, i) for i in ids]


def run_experiment(config, workers=1):
    """Run every (k, trial) pair; returns ``(records, summary)``.

    Records are ordered by ``(k, trial_id)`` whatever the execution order.
    """
    workers = check_int(workers, "workers", minimum=1)
    jobs = [(config, k, range(config.trials)) for k in config.k_values]
    if workers == 1:
        batches = [_run_batch(j) for j in jobs]
    else:
        chunks = []
        for k in config.k_values:
            ids = list(range(config.trials))
            step = max(1, math.ceil(len(ids) / workers))
            chunks += [(config, k, ids[i:i + step]) for i in range(0, len(ids), step)]
        with ProcessPoolExecutor(workers) as pool:
            batches = list(pool.map(_run_batch, chunks))
    records = sorted((r for b in batches for r in b), key=lambda r: (r.k, r.trial_id))
    return records, summarize(records, config.l_total)


def _success(value):
    return bool(value <= SUCCESS_THRESHOLD) if not math.isnan(value) else False


def summarize(records, l_total):
    """Per ``(k, group)`` fractions of trials with ``d_max`` and ``d_avg`` at most 0.05."""
    table = {}
    for k in sorted({r.k for r in records}):
        rows = [r for r in records if r.k == k]
        per = {}
        for l in range(l_total):
            per[str(l + 1)] = {
                "d_max": sum(_success(r.per_group[l].d_max) for r in rows) / len(rows),
                "d_avg": sum(_success(r.per_group[l].d_avg) for r in rows) / len(rows),
                "stage_failures": sum(r.per_group[l].stage_failed for r in rows),
                "trials": len(rows),
            }
        table[str(k)] = per
    return table


def _fmt(x):
    return "nan" if math.isnan(x) else repr(float(x))


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in sorted(records, key=lambda r: (r.k, r.trial_id)):
        for l, g in enumerate(r.per_group, start=1):
            writer.writerow([r.trial_id, r.k, l, _fmt(g.delta_l), _fmt(g.d_max), _fmt(g.d_avg),
                             _fmt(g.amp_err_max), int(g.stage_failed)])
    return buf.getvalue()


def records_from_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ConfigurationError(f"unexpected CSV header {reader.fieldnames}")
    grouped = {}
    for row in reader:
        key = (int(row["k"]), int(row["trial_id"]))
        grouped.setdefault(key, []).append((int(row["group"]), GroupOutcome(
            float(row["delta_l"]), float(row["d_max"]), float(row["d_avg"]),
            float(row["amp_err_max"]), bool(int(row["stage_failed"])))))
    out = []
    for (k, tid), items in sorted(grouped.items()):
        per = tuple(g for _, g in sorted(items, key=lambda p: p[0]))
        out.append(TrialRecord(tid, k, per, tuple(g.stage_failed for g in per)))
    return out


def summary_document(config, summary):
    return {"config_echo": config.to_dict(), "per_group_success_rates": summary}


def emit_results(records, summary, path, fmt="csv", config=None):
    """Write ``results.csv`` (or ``results.json``) plus ``summary.json`` under ``path``.

    Returns the list of written files.
    """
    if not records:
        raise ConfigurationError("no records to emit")
    if fmt not in ("csv", "json"):
        raise ConfigurationError(f"unknown format {fmt!r}")
    try:
        os.makedirs(path, exist_ok=True)
        written = []
        if fmt == "csv":
            target = os.path.join(path, "results.csv")
            with open(target, "w", newline="") as fh:
                fh.write(records_to_csv(records))
        else:
            target = os.path.join(path, "results.json")
            rows = list(csv.DictReader(io.StringIO(records_to_csv(records))))
            with open(target, "w") as fh:
                json.dump(rows, fh, indent=1, sort_keys=True)
                fh.write("\n")
        written.append(target)
        doc = {"per_group_success_rates": summary}
        if config is not None:
            doc = summary_document(config, summary)
        target = os.path.join(path, "summary.json")
        with open(target, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        written.append(target)
    except OSError as exc:
        raise OSError(f"cannot write results to {path!r}: {exc}") from exc
    return written
