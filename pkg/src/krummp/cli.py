"""Command line entry point: ``krummp synth|estimate|bench|bounds``.

Exit status is 0 on success, 1 on a configuration error and 2 when a stage of
``estimate`` fails numerically.
"""
import argparse
import csv
import io
import logging
import math
import os
import sys

import numpy as np

from . import io as kio
from .bench import ExperimentConfig, emit_results, generate_instance, run_experiment
from .exceptions import ConfigurationError, InfeasibleInstanceError, StageFailure
from .signal import NoiseSpec, sample_window
from .theory import (
    BoundContext,
    annotate_plans,
    corollary1_noise_bound,
    epsilon_cascade_check,
    stage_noise_threshold,
    theorem3_constants,
)
from .unmix import StagePlan, choose_plans, run_krummp

log = logging.getLogger("krummp")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _load_config(args):
    cfg = ExperimentConfig.from_dict(kio.load_json(args.config)) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.c_mult is not None:
        changes["c_mult"] = args.c_mult
    if args.noise_sigma is not None:
        changes["noise"] = NoiseSpec.gaussian(args.noise_sigma)
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if getattr(args, "k", None) is not None:
        changes["k_values"] = (args.k,)
    return cfg.replace(**changes) if changes else cfg


def _write(text, out, name):
    if out is None:
        sys.stdout.write(text)
        return
    os.makedirs(out, exist_ok=True)
    target = os.path.join(out, name)
    with open(target, "w", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", target)


def _rows_to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_synth(args):
    cfg = _load_config(args)
    k = cfg.k_values[0]
    rng = np.random.default_rng([cfg.seed, k, 0])
    model = generate_instance(cfg, k, rng)
    if args.windows:
        plans = choose_plans(model.scales, cfg.delta, k, cfg.eps_last, cfg.c_mult, cfg.m_pad)
        noise = cfg.noise if cfg.noise.kind == "none" else NoiseSpec(cfg.noise.kind, cfg.noise.sigma, cfg.seed)
        windows = [sample_window(model, p.offset, p.half_width, noise, p.group_index) for p in plans]
        _write(kio.dump_json(kio.windows_to_dict(windows, model.scales, k)), args.out, "windows.json")
    _write(kio.dump_json(kio.model_to_dict(model)), args.out, "model.json")
    return EXIT_OK


def _plans_for_windows(windows, scales, k, cfg):
    base = choose_plans(scales, cfg.delta, k, cfg.eps_last, cfg.c_mult, cfg.m_pad)
    return [StagePlan(p.group_index, p.epsilon, w.half_width, w.offset) for p, w in zip(base, windows)]


def cmd_estimate(args):
    cfg = _load_config(args)
    doc = kio.load_json(args.input)
    if "groups" in doc:
        model = kio.model_from_dict(doc)
        scales, k = model.scales, model.k
        seps = cfg.delta if args.config else model.separations
        plans = choose_plans(scales, seps, k, cfg.eps_last, cfg.c_mult, cfg.m_pad)
        noise = cfg.noise if cfg.noise.kind == "none" else NoiseSpec(cfg.noise.kind, cfg.noise.sigma, cfg.seed)
        report = run_krummp(model, plans, k, noise)
    elif "windows" in doc:
        windows, scales, k = kio.windows_from_dict(doc)
        if len(windows) != len(scales):
            raise ConfigurationError("windows document needs one window per scale")
        plans = _plans_for_windows(windows, scales, k, cfg)
        report = run_krummp(windows, plans, k, scales=scales)
    else:
        raise ConfigurationError(f"{args.input!r} is neither a model nor a windows document")

    estimates = kio.estimates_to_dict(report.estimates, scales)
    if args.format == "json":
        out = {"estimates": estimates, "partial": report.partial,
               "failure": str(report.failure) if report.failure else None}
        _write(kio.dump_json(out), args.out, "estimates.json")
    else:
        rows = [(e["group"], repr(s["t"]), repr(s["re"]), repr(s["im"]))
                for e in estimates for s in e["spikes"]]
        _write(_rows_to_csv(("group", "t", "re", "im"), rows), args.out, "estimates.csv")
    if report.partial:
        log.error("%s", report.failure)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_bench(args):
    cfg = _load_config(args)
    records, summary = run_experiment(cfg, workers=args.workers)
    out = args.out or "."
    emit_results(records, summary, out, args.format, cfg)
    for k, per in summary.items():
        line = " ".join(f"l{l}={v['d_max']:.3f}/{v['d_avg']:.3f}" for l, v in per.items())
        log.info("K=%s d_max/d_avg success: %s", k, line)
    return EXIT_OK


def _bounds_rows(cfg, k):
    scales = cfg.scales
    ctx = BoundContext(cfg.u_max, cfg.u_min, k, cfg.l_total, scales, (cfg.delta,) * cfg.l_total)
    plans = annotate_plans(ctx, choose_plans(scales, cfg.delta, k, cfg.eps_last, cfg.c_mult, cfg.m_pad))
    rows = []
    for p in plans:
        const = theorem3_constants(ctx, p.group_index)
        for name, value in (("epsilon", p.epsilon), ("half_width", p.half_width), ("offset", p.offset),
                            ("m_plus", const.m_plus), ("c_tilde_l", const.c_tilde_l),
                            ("c_bar_1", const.c_bar_1), ("c_bar_2", const.c_bar_2),
                            ("c_bar_3", const.c_bar_3), ("E_l", p.bounds["E_l"]),
                            ("S_l", p.bounds["S_l"]), ("D_l", p.bounds["D_l"]), ("F_l", p.bounds["F_l"]),
                            ("noise_threshold", stage_noise_threshold(ctx, p.group_index, p.epsilon))):
            rows.append(("constant", f"{name}({p.group_index})", value, None))
    rows.append(("constant", "single_kernel_noise_bound", corollary1_noise_bound(ctx, cfg.eps_last), None))
    for noisy in (False, True):
        for chk in epsilon_cascade_check(ctx, plans, noisy=noisy):
            tag = "noisy" if noisy else "noiseless"
            rows.append((f"condition-{tag}", chk.condition, chk.lhs, chk.rhs, chk.satisfied))
    return rows


def cmd_bounds(args):
    cfg = _load_config(args)
    k = cfg.k_values[0]
    rows = _bounds_rows(cfg, k)

    def num(x):
        return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)

    if args.format == "json":
        doc = {"k": k, "constants": {}, "conditions": {"noiseless": [], "noisy": []}}
        for row in rows:
            if row[0] == "constant":
                doc["constants"][row[1]] = num(row[2])
            else:
                doc["conditions"][row[0].split("-", 1)[1]].append(
                    {"condition": row[1], "lhs": num(row[2]), "rhs": num(row[3]), "satisfied": row[4]})
        _write(kio.dump_json(doc), args.out, "bounds.json")
    else:
        body = [(r[0], r[1], "" if r[2] is None else repr(float(r[2])),
                 "" if r[3] is None else repr(float(r[3])),
                 "" if len(r) < 5 else int(r[4])) for r in rows]
        _write(_rows_to_csv(("kind", "name", "value", "rhs", "satisfied"), body), args.out, "bounds.csv")
    return EXIT_OK


def _u64(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=_u64)
    common.add_argument("--out", help="output directory (default: stdout, or . for bench)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--noise-sigma", type=float, help="per-component noise standard deviation")
    common.add_argument("--c-mult", type=float, help="offset multiplier C")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="krummp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="draw a random model")
    p.add_argument("--k", type=int)
    p.add_argument("--windows", action="store_true", help="also write the sampled windows")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("estimate", parents=[common], help="run the unmixing pipeline on a file")
    p.add_argument("input", help="model or windows document")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bench", parents=[common], help="Monte Carlo experiment")
    p.add_argument("--trials", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bounds", parents=[common], help="evaluate the recovery guarantees for a config")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except StageFailure as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL
    except (ConfigurationError, InfeasibleInstanceError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
