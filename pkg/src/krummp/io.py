"""JSON documents for models, sample windows and estimates.

Model::

    {"groups": [{"mu": 0.01, "spikes": [{"t": 0.25, "re": 3.0, "im": 0.0}, ...]}, ...]}

Windows::

    {"scales": [...], "k": 2,
     "windows": [{"offset": 75, "half_width": 25, "samples": [[re, im], ...]}, ...]}
"""
import json

import numpy as np

from .exceptions import ConfigurationError
from .signal import FourierWindow, MixtureModel, SpikeGroup


def model_to_dict(model):
    return {"groups": [
        {"mu": float(g.scale),
         "spikes": [{"t": float(t), "re": float(u.real), "im": float(u.imag)}
                    for t, u in zip(g.locations, g.amplitudes)]}
        for g in model.groups
    ]}


def model_from_dict(doc):
    try:
        groups = []
        for g in doc["groups"]:
            spikes = g["spikes"]
            t = [float(s["t"]) for s in spikes]
            u = [complex(float(s["re"]), float(s.get("im", 0.0))) for s in spikes]
            groups.append(SpikeGroup(np.array(t), np.array(u), float(g["mu"])))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed model document: {exc!r}") from exc
    return MixtureModel(tuple(groups))


def windows_to_dict(windows, scales, k):
    return {
        "scales": [float(x) for x in scales],
        "k": int(k),
        "windows": [{"offset": int(w.offset), "half_width": int(w.half_width),
                     "samples": [[float(z.real), float(z.imag)] for z in w.samples]}
                    for w in windows],
    }


def windows_from_dict(doc):
    """Returns ``(windows, scales, k)``."""
    try:
        windows = [FourierWindow(int(w["offset"]), int(w["half_width"]),
                                 np.array([complex(a, b) for a, b in w["samples"]]))
                   for w in doc["windows"]]
        return windows, [float(x) for x in doc["scales"]], int(doc["k"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed windows document: {exc!r}") from exc


def estimates_to_dict(estimates, scales=None):
    out = []
    for i, est in enumerate(estimates):
        entry = {"group": int(est.group_index),
                 "spikes": [{"t": float(t), "re": float(u.real), "im": float(u.imag)}
                            for t, u in zip(est.locations, est.amplitudes)]}
        if scales is not None:
            entry["mu"] = float(scales[i])
        out.append(entry)
    return out


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path!r} is not valid JSON: {exc}") from exc


def dump_json(doc, path=None):
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
