"""Command line entry point: ``complexity``, ``learn``, ``gap`` and ``bench``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name
from .chaining import complexity_report
from .errors import ArtifactError
from .function_class import load_class_file
from .harness import (ExperimentConfig, build_class, choose_radius, default_z0, gen_regression,
                      plot_gap, run_benchmark, run_gap_experiment, trial_seed)
from .tournament import learn

log = logging.getLogger("gaussian_tournament")


def _load_config(path):
    return ExperimentConfig.from_file(path) if path else ExperimentConfig()


def cmd_complexity(args):
    F = load_class_file(args.class_file)
    rep = complexity_report(F, kappa=args.kappa, N=args.n, sigma=args.sigma, n_mc=args.n_mc,
                            seed=args.seed, with_entropy=args.entropy)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep.to_json(out / "complexity.json")
    rep.to_csv(out / "complexity.csv")
    print(json.dumps({k: v.value for k, v in rep.fixed_points.items()}, indent=2))
    return 0


def _dump_oracles(out_dir, F, outcome):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    crude = outcome.crude
    v_hat = set(crude.v_hat.tolist())
    with open(out / "psi_c.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label", "psi_c", "in_v_hat"])
        for i, val in enumerate(crude.psi_c):
            w.writerow([i, int(F.labels[i]), repr(float(val)), int(i in v_hat)])
    m = outcome.matches
    with open(out / "psi_l.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f", "h", "psi_l", "home_win"])
        for a, f in enumerate(m.members):
            for b, h in enumerate(m.members):
                if a != b:
                    w.writerow([int(f), int(h), repr(float(m.psi[a, b])), int(m.wins[b, a])])


def cmd_learn(args):
    cfg = _load_config(args.config)
    F = build_class(cfg)
    z0 = np.asarray(cfg.z0) if cfg.z0 is not None else default_z0(F)
    sample = gen_regression(cfg, trial_seed(cfg.master_seed, args.trial), F, z0)
    r = cfg.r
    if r is None:
        r, _ = choose_radius(cfg, F, sample.truth, seed=cfg.master_seed)
    out = learn(F, sample.X, sample.Y, r, cfg.oracle_constants, split=cfg.split,
                truth=sample.truth)
    if args.dump_oracles:
        _dump_oracles(args.dump_oracles, F, out)
    result = {
        "r": r, "selected": out.selected,
        "selected_point": None if out.selected is None else F.points[out.selected].tolist(),
        "v_hat_size": int(out.v_hat.size), "v_star_size": int(out.v_star.size),
        "sigma_hat": out.sigma_hat, "sigma_star": out.sigma_star,
        "error_l2": out.error_l2, "excess_risk": out.excess_risk,
        "crude_event": out.crude_event, "fine_event": out.fine_event, "fine": out.fine_meta,
    }
    print(json.dumps(result, indent=2, default=float))
    return 0 if out.selected is not None else 3


def cmd_gap(args):
    k_grid = [int(k) for k in args.k_grid.split(",")]
    rep = run_gap_experiment(d=args.d, alpha=args.alpha, k_grid=k_grid, N=args.n, n_mc=args.n_mc,
                             seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "gap.json").write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
    with open(out / "gap.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "phi_n", "phi_se", "gauss", "gauss_se", "ratio", "ratio_se", "in_window"])
        for row in zip(rep.k, rep.phi, rep.phi_se, rep.gauss, rep.gauss_se, rep.ratio,
                       rep.ratio_se, rep.in_window):
            w.writerow([row[0], *(repr(float(x)) for x in row[1:7]), int(row[7])])
    plot_gap(rep, out / "gap_ratio.svg")
    for k, ratio, se, ok in zip(rep.k, rep.ratio, rep.ratio_se, rep.in_window):
        note = "" if ok else "  (outside N <= k <= N d)"
        print(f"k={k:>8d}  ratio={ratio:.4f} ± {se:.4f}{note}")
    return 0


def cmd_bench(args):
    cfg = _load_config(args.config)
    summary = run_benchmark(cfg, args.out, plots=not args.no_plots)
    brief = {m: summary[m]["success_frequency"] for m in ("tournament", "erm")}
    print(json.dumps({"r": summary["r"], "success_frequency": brief}, indent=2))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="gaussian-tournament",
                                description="Gaussian-complexity tournament learner and benchmarks")
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__} ({backend_name()} kernels)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("complexity", help="complexity profiles and fixed points of a class file")
    c.add_argument("--class-file", required=True)
    c.add_argument("--kappa", type=float, default=0.25)
    c.add_argument("--sigma", type=float, default=None)
    c.add_argument("--n", "-N", type=int, default=2000, dest="n")
    c.add_argument("--n-mc", type=int, default=2000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--entropy", action="store_true", help="add the packing-entropy table")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_complexity)

    lrn = sub.add_parser("learn", help="run the learner on one generated sample")
    lrn.add_argument("--config")
    lrn.add_argument("--trial", type=int, default=0)
    lrn.add_argument("--dump-oracles", metavar="DIR")
    lrn.set_defaults(func=cmd_learn)

    g = sub.add_parser("gap", help="Rademacher versus Gaussian complexity on B_1^d")
    g.add_argument("--d", type=int, default=256)
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--k-grid", default="256,4096,65536")
    g.add_argument("--n", "-N", type=int, default=None, dest="n")
    g.add_argument("--n-mc", type=int, default=4000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gap)

    b = sub.add_parser("bench", help="end-to-end benchmark against ERM")
    b.add_argument("--config")
    b.add_argument("--out", required=True)
    b.add_argument("--no-plots", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.details:
            print(json.dumps(exc.details, default=str), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
