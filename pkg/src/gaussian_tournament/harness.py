"""Synthetic regression testbeds, the ERM baseline, the Rademacher-versus-Gaussian
gap experiment and the end-to-end benchmark runner.

Everything random is driven by per-trial generators derived from
``(master_seed, trial_id)``, so a config and a seed fix every output byte.
"""
from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .chaining import complexity_report, gaussian_sup_mc, rademacher_phi
from .errors import ArtifactError, ConfigError
from .function_class import (CovarianceStructure, FunctionClass, l1_ball_lattice, l1_ball_vertices,
                             load_class_file)
from .risk_oracles import OracleConstants
from .tournament import Truth, learn

RESULT_COLUMNS = ("trial_id", "seed", "method", "error_l2", "excess_risk", "v_hat_size",
                  "v_star_size", "crude_event", "fine_event")


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------


def appendix_b_scale(k):
    """``c0 = sqrt(1 - 1/k + k^(-1/2))``, the standard deviation of ``x~``."""
    return math.sqrt(1.0 - 1.0 / k + k ** -0.5)


def sample_appendixB_scalar(k, rng, size=None):
    """``eps |x~| / c0`` with ``P(|x~| = k^(1/4)) = 1/k`` and ``|x~| = 1`` otherwise."""
    if k < 2:
        raise ConfigError("k must be >= 2", k=k)
    n = 1 if size is None else size
    spike = rng.random(n) < 1.0 / k
    mag = np.where(spike, k ** 0.25, 1.0)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    out = sign * mag / appendix_b_scale(k)
    return float(out[0]) if size is None else out


def _standard_coords(spec, rng, shape):
    kind = spec.get("kind", "gaussian")
    if kind == "gaussian":
        return rng.standard_normal(shape)
    if kind in ("student_t", "t"):
        nu = float(spec["nu"])
        return rng.standard_t(nu, size=shape) / math.sqrt(nu / (nu - 2))
    if kind == "appendixB":
        return sample_appendixB_scalar(int(spec["k"]), rng, int(np.prod(shape))).reshape(shape)
    if kind == "rademacher":
        return rng.choice((-1.0, 1.0), size=shape)
    raise ConfigError(f"unknown distribution kind {kind!r}", kind=kind)


def _check_dist(spec, what):
    kind = spec.get("kind", "gaussian")
    if kind in ("student_t", "t") and not float(spec.get("nu", 0)) > 4:
        raise ConfigError(f"{what}: Student-t needs nu > 4 for finite fourth moments",
                          nu=spec.get("nu"))
    if kind == "appendixB" and int(spec.get("k", 0)) < 2:
        raise ConfigError(f"{what}: appendixB needs k >= 2", k=spec.get("k"))
    if kind not in ("gaussian", "student_t", "t", "appendixB", "rademacher", "none"):
        raise ConfigError(f"{what}: unknown kind {kind!r}", kind=kind)


def make_sampler(spec, cov: CovarianceStructure):
    """``sampler(rng, n)`` drawing ``n`` points with i.i.d. unit-variance coordinates and covariance Sigma."""
    root = cov.root("true")

    def sampler(rng, n):
        return _standard_coords(spec, rng, (n, cov.dim)) @ root

    return sampler


def make_noise(spec):
    """``(sampler, variance)`` for the additive noise ``w``."""
    kind = spec.get("kind", "gaussian")
    sigma = float(spec.get("sigma", 0.0))
    if kind == "none" or sigma == 0.0:
        return (lambda rng, n: np.zeros(n)), 0.0
    return (lambda rng, n: sigma * _standard_coords(spec, rng, (n,))), sigma ** 2


# ---------------------------------------------------------------------------
# configuration and samples
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    class_spec: dict = field(default_factory=lambda: {"kind": "l1_lattice", "dim": 4,
                                                      "resolution": 4})
    eta: float = 1.1
    oracle_seed: int = 7
    distribution: dict = field(default_factory=lambda: {"kind": "student_t", "nu": 5})
    noise: dict = field(default_factory=lambda: {"kind": "t", "nu": 5, "sigma": 0.2})
    z0: list | None = None
    N: int = 2000
    trials: int = 200
    master_seed: int = 0
    split: float = 0.5
    kappa: float = 0.25
    r: float | None = None
    r_factor: float = 4.0
    n_mc: int = 2000
    constants: dict = field(default_factory=dict)
    workers: int = 1
    L: float | None = None

    def __post_init__(self):
        if self.trials < 1 or self.N < 2:
            raise ConfigError("trials >= 1 and N >= 2 are required")
        if self.eta < 1 or self.kappa <= 0 or self.r_factor <= 0:
            raise ConfigError("eta >= 1, kappa > 0 and r_factor > 0 are required")
        if self.L is not None and self.L < 1:
            raise ConfigError("L >= 1 is required (L4 norms dominate L2 norms)", L=self.L)
        if self.r is not None and self.r <= 0:
            raise ConfigError("r must be positive", r=self.r)
        _check_dist(self.distribution, "distribution")
        _check_dist(self.noise, "noise")
        bad = set(self.constants) - set(OracleConstants.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown constants {sorted(bad)}")

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)

    @property
    def oracle_constants(self):
        return OracleConstants(**self.constants)


def build_class(cfg: ExperimentConfig) -> FunctionClass:
    spec = cfg.class_spec
    if "file" in spec:
        return load_class_file(spec["file"])
    kind = spec.get("kind", "l1_lattice")
    dim = int(spec.get("dim", 4))
    sigma = np.asarray(spec.get("sigma_true", np.eye(dim)), dtype=np.float64)
    cov = CovarianceStructure.with_distortion(sigma, cfg.eta, cfg.oracle_seed)
    if kind == "l1_lattice":
        return FunctionClass(l1_ball_lattice(dim, int(spec.get("resolution", 4))), cov)
    if kind == "l1_vertices":
        return FunctionClass(l1_ball_vertices(dim), cov)
    if kind == "points":
        return FunctionClass(np.asarray(spec["points"], dtype=np.float64), cov)
    raise ConfigError(f"unknown class kind {kind!r}", kind=kind)


def default_z0(F: FunctionClass):
    """A fixed non-zero member of the class, so that ``f* = z0``."""
    target = np.zeros(F.dim)
    target[: min(3, F.dim)] = [0.25, -0.25, 0.25][: min(3, F.dim)]
    return F.points[F.index_of(target)].copy()


@dataclass
class LabeledSample:
    X: np.ndarray
    Y: np.ndarray
    truth: Truth
    split: float = 0.5

    @property
    def n_first(self):
        return int(round(self.split * self.X.shape[0]))

    def halves(self):
        n = self.n_first
        return (self.X[:n], self.Y[:n]), (self.X[n:], self.Y[n:])


def trial_seed(master_seed, trial_id):
    """Counter-based split of the master seed."""
    return int(np.random.SeedSequence([int(master_seed), int(trial_id)]).generate_state(1)[0])


def gen_regression(cfg: ExperimentConfig, seed, F: FunctionClass | None = None,
                   z0=None) -> LabeledSample:
    """``2N`` draws of ``Y = <X, z0> + w`` with ``w`` independent of ``X``."""
    F = build_class(cfg) if F is None else F
    if z0 is None:
        z0 = np.asarray(cfg.z0, dtype=np.float64) if cfg.z0 is not None else default_z0(F)
    rng = np.random.default_rng(seed)
    X = make_sampler(cfg.distribution, F.cov)(rng, 2 * cfg.N)
    noise, var = make_noise(cfg.noise)
    Y = X @ z0 + noise(rng, 2 * cfg.N)
    return LabeledSample(X, Y, Truth(np.asarray(z0, dtype=np.float64), var), cfg.split)


def erm_baseline(F: FunctionClass, X, Y):
    """Position of the empirical risk minimiser over the net (smallest label on ties)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise ConfigError("empty sample")
    resid = X @ F.points.T - np.asarray(Y)[:, None]
    risk = np.einsum("ij,ij->j", resid, resid) / X.shape[0]
    best = np.flatnonzero(risk == risk.min())
    return int(best[np.argmin(F.labels[best])])


# ---------------------------------------------------------------------------
# gap experiment
# ---------------------------------------------------------------------------


@dataclass
class GapReport:
    d: int
    N: int
    alpha: float
    k: list
    phi: list
    phi_se: list
    gauss: list
    gauss_se: list
    ratio: list
    ratio_se: list
    in_window: list
    control_ratio: float | None = None
    control_se: float | None = None
    n_mc: int = 0

    def to_dict(self):
        return asdict(self)

    def increasing(self, n_se=1.0):
        """Successive ratios increase by more than ``n_se`` combined standard errors."""
        r, s = np.asarray(self.ratio), np.asarray(self.ratio_se)
        return bool(np.all(np.diff(r) > n_se * np.hypot(s[1:], s[:-1])))


def _ratio_se(a, sa, b, sb):
    return (a / b) * math.hypot(sa / a if a else 0.0, sb / b if b else 0.0)


def run_gap_experiment(d=256, alpha=2.0, k_grid=(256, 4096, 65536), N=None, n_mc=4000, seed=0,
                       control=True) -> GapReport:
    """``Phi_N`` over ``B_1^d`` with heavy-tailed coordinates against ``E max_j |g_j|``.

    ``N`` defaults to ``d^(1/alpha)``.  Both suprema are over the vertices
    ``±e_j`` (the extreme points), with the radius above the diameter so no
    localisation happens.
    """
    N = int(round(d ** (1.0 / alpha))) if N is None else int(N)
    cov = CovarianceStructure.identity(d)
    T = FunctionClass(l1_ball_vertices(d), cov, validate=False)
    big = 4.0
    rep = GapReport(d, N, alpha, [], [], [], [], [], [], [], [], n_mc=n_mc)
    for i, k in enumerate(k_grid):
        sampler = make_sampler({"kind": "appendixB", "k": int(k)}, cov)
        (phi, phi_se), _ = rademacher_phi(T, big, sampler, N, n_mc, seed=seed + 101 * i + 1,
                                          cov=cov)
        g, g_se = gaussian_sup_mc(T, cov, n_mc, seed=seed + 101 * i + 2)
        rep.k.append(int(k))
        rep.phi.append(phi)
        rep.phi_se.append(phi_se)
        rep.gauss.append(g)
        rep.gauss_se.append(g_se)
        rep.ratio.append(phi / g)
        rep.ratio_se.append(_ratio_se(phi, phi_se, g, g_se))
        rep.in_window.append(bool(N <= k <= N * d))
    if control:
        sampler = make_sampler({"kind": "gaussian"}, cov)
        (phi, phi_se), _ = rademacher_phi(T, big, sampler, N, n_mc, seed=seed + 7, cov=cov)
        g, g_se = gaussian_sup_mc(T, cov, n_mc, seed=seed + 8)
        rep.control_ratio = phi / g
        rep.control_se = _ratio_se(phi, phi_se, g, g_se)
    return rep


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(bool(x)))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def choose_radius(cfg: ExperimentConfig, F: FunctionClass, truth: Truth, seed=0):
    """``(r, report)``: ``r = r_factor max(r*, lambda*)`` unless the config pins ``r``."""
    sigma = math.sqrt(truth.risks(F, [truth.f_star(F)])[0])
    rep = complexity_report(F, kappa=cfg.kappa, N=cfg.N, sigma=max(sigma, 1e-12), n_mc=cfg.n_mc,
                            seed=seed)
    if cfg.r is not None:
        return float(cfg.r), rep
    return cfg.r_factor * max(rep.r_star, rep.fixed_points["lambda"].value), rep


def moment_check(cfg: ExperimentConfig, F: FunctionClass, sample: LabeledSample):
    """Empirical moment contracts on one sample.

    Reports the per-coordinate variance of the standardised design with its
    standard error and the largest ratio ``||f - Y||_4 / ||f - Y||_2`` over F.
    """
    Z = sample.X @ np.linalg.pinv(F.cov.root("true"))
    n = Z.shape[0]
    var = Z.var(axis=0, ddof=1)
    var_se = np.sqrt(np.maximum((Z ** 4).mean(axis=0) - var ** 2, 0.0) / n)
    resid = sample.X @ F.points.T - sample.Y[:, None]
    l2 = np.sqrt((resid ** 2).mean(axis=0))
    l4 = ((resid ** 4).mean(axis=0)) ** 0.25
    ratio = float(np.max(l4 / np.maximum(l2, 1e-300)))
    out = {"coord_var": var.tolist(), "coord_var_se": var_se.tolist(),
           "coord_var_ok": bool(np.all(np.abs(var - 1) <= 5 * var_se)), "l4_l2_max": ratio}
    if cfg.L is not None:
        out["l4_l2_ok"] = ratio <= cfg.L
        if ratio > cfg.L:
            warnings.warn(f"empirical L4/L2 ratio {ratio:.3g} exceeds L={cfg.L}", stacklevel=2)
    return out


def run_trial(cfg: ExperimentConfig, F, z0, r, trial_id):
    seed = trial_seed(cfg.master_seed, trial_id)
    sample = gen_regression(cfg, seed, F, z0)
    truth = sample.truth
    star = truth.f_star(F)
    rows = []
    try:
        out = learn(F, sample.X, sample.Y, r, cfg.oracle_constants, split=cfg.split, truth=truth)
        rows.append([trial_id, seed, "tournament", out.error_l2, out.excess_risk,
                     out.v_hat.size, out.v_star.size, out.crude_event, out.fine_event])
    except ArtifactError:
        rows.append([trial_id, seed, "tournament", math.inf, math.inf, None, None, None, None])
    e = erm_baseline(F, sample.X, sample.Y)
    err = float(F.cov.norms(F.points[e] - F.points[star], "true")[0])
    risk = truth.risks(F, [e, star])
    rows.append([trial_id, seed, "erm", err, float(risk[0] - risk[1]), None, None, None, None])
    return rows


def _quantiles(x):
    # no interpolation, so failed trials (inf) give inf rather than nan
    x = np.asarray(x, dtype=np.float64)
    out = {}
    for q in ("0.5", "0.9", "0.95", "0.99"):
        v = float(np.quantile(x, float(q), method="inverted_cdf"))
        out[q] = v if math.isfinite(v) else None
    return out


def summarize(rows, r, eta):
    summary = {}
    for method in ("tournament", "erm"):
        sel = [row for row in rows if row[2] == method]
        err = [row[3] for row in sel]
        exc = [row[4] for row in sel]
        ok = [e <= r and x <= eta ** 4 * r * r for e, x in zip(err, exc)]
        summary[method] = {"error_quantiles": _quantiles(err), "excess_quantiles": _quantiles(exc),
                           "success_frequency": float(np.mean(ok)), "trials": len(sel)}
    t = [row for row in rows if row[2] == "tournament"]
    flags = [(row[7], row[8]) for row in t]
    summary["tournament"].update({
        "crude_event_frequency": float(np.mean([bool(c) for c, _ in flags])),
        "fine_event_frequency": float(np.mean([bool(f) for _, f in flags])),
        "failure_frequency": float(np.mean([math.isinf(row[3]) for row in t])),
        "empty_v_star_frequency": float(np.mean([row[6] == 0 for row in t])),
    })
    return summary


def _trial_worker(args):
    cfg, F, z0, r, ids = args
    return [row for i in ids for row in run_trial(cfg, F, z0, r, i)]


def run_benchmark(cfg: ExperimentConfig, out_dir, plots=True):
    """Fixed points, ``trials`` learner and ERM runs, then CSV, JSON and SVG outputs."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}", path=str(out)) from exc
    t0 = time.perf_counter()
    F = build_class(cfg)
    z0 = np.asarray(cfg.z0, dtype=np.float64) if cfg.z0 is not None else default_z0(F)
    _, noise_var = make_noise(cfg.noise)
    truth = Truth(z0, noise_var)
    r, rep = choose_radius(cfg, F, truth, seed=cfg.master_seed)
    rep.to_csv(out / "complexity.csv")
    ids = list(range(cfg.trials))
    if cfg.workers > 1:
        chunks = [ids[w::cfg.workers] for w in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(_trial_worker, [(cfg, F, z0, r, c) for c in chunks]))
        rows = sorted((row for p in parts for row in p), key=lambda row: (row[0], row[2] != "tournament"))
    else:
        rows = _trial_worker((cfg, F, z0, r, ids))
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    summary = {
        "config": cfg.to_dict(), "r": r, "eta": F.cov.eta, "class_size": len(F),
        "fixed_points": {k: v.value for k, v in rep.fixed_points.items()},
        "r_star": rep.r_star, **summarize(rows, r, F.cov.eta),
        "moments": moment_check(cfg, F, gen_regression(cfg, trial_seed(cfg.master_seed, 0), F, z0)),
        "wall_clock_seconds": time.perf_counter() - t0,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if plots:
        plot_error_cdf(rows, out / "error_cdf.svg", r)
    return summary


# ---------------------------------------------------------------------------
# plots
# ---------------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "gaussian-tournament"
    return plt


def plot_error_cdf(rows, path, r=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for method in ("tournament", "erm"):
        err = np.sort([row[3] for row in rows if row[2] == method and math.isfinite(row[3])])
        if err.size:
            ax.step(err, np.arange(1, err.size + 1) / err.size, where="post", label=method)
    if r is not None:
        ax.axvline(r, color="grey", ls=":", label="r")
    ax.set_xlabel("L2 error")
    ax.set_ylabel("empirical CDF")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_gap(rep: GapReport, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(rep.k, rep.ratio, yerr=rep.ratio_se, marker="o", capsize=3)
    ax.set_xscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel("Phi_N / E max|g_j|")
    ax.axhline(1.0, color="grey", ls=":")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def with_overrides(cfg: ExperimentConfig, **kw):
    return replace(cfg, **kw)
