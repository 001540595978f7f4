"""Admissible sequences, gamma_2 and Monte-Carlo complexities with their fixed points.

All processes here are linear in the index vector: for a draw ``S`` in R^d
the value at ``h`` is ``<S, h>``.  That makes the supremum over the star-shaped
localisation of a symmetric set computable from one sorted pass (see
:func:`gaussian_tournament.kernels.sup_profile`), so every radius of a grid is
evaluated on the same draws.  Common random numbers make ``E sup(r) / r``
exactly non-increasing, which keeps the fixed-point searches honest.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import kernels
from ._accel import backend_name
from .errors import ConfigError
from .function_class import DistanceOracle, FunctionClass, LocalizedSet, difference_class

POINTS_PER_DECADE = 200
KINDS = ("rQ", "rM", "lambda", "r_tilde", "rQ_rad", "rM_rad")
DEFAULT_KAPPA = 0.25


# ---------------------------------------------------------------------------
# admissible sequences
# ---------------------------------------------------------------------------


def level_size(s, n):
    """``min(2^(2^s), n)`` without overflow; level 0 is a single point."""
    if s == 0:
        return min(1, n)
    if s >= 6:
        return n
    return min(2 ** (2 ** s), n)


def saturation_level(n):
    s = 0
    while level_size(s, n) < n:
        s += 1
    return s


def _carrier_points(H):
    if isinstance(H, (FunctionClass, LocalizedSet)):
        return H.points if isinstance(H, FunctionClass) else H.members
    return np.atleast_2d(np.asarray(H, dtype=np.float64))


@dataclass(frozen=True)
class AdmissibleSequence:
    """Nested levels ``H_0 ⊆ H_1 ⊆ ...`` of a carrier set.

    ``levels[s]`` are sorted carrier indices, ``proj[s][i]`` is the carrier
    index of the nearest level-``s`` point to carrier point ``i``.  Levels past
    ``s_max`` equal the last stored one.
    """

    carrier: np.ndarray
    coords: np.ndarray
    metric: DistanceOracle
    levels: tuple
    proj: tuple
    order: np.ndarray

    @property
    def s_max(self):
        return len(self.levels) - 1

    @property
    def saturation(self):
        """First level equal to the whole carrier (or ``s_max``)."""
        n = self.carrier.shape[0]
        for s, lev in enumerate(self.levels):
            if lev.size == n:
                return s
        return self.s_max

    def level(self, s):
        return self.levels[min(s, self.s_max)]

    def pi(self, s):
        return self.proj[min(s, self.s_max)]

    def increments(self, s):
        """``Delta_s h = pi_{s+1} h - pi_s h`` for every carrier point."""
        return self.carrier[self.pi(s + 1)] - self.carrier[self.pi(s)]

    def project(self, vectors, levels=None):
        """Carrier indices of ``pi_s v`` for arbitrary vectors, shape ``(n_vec, n_levels)``.

        Ties go to the smallest carrier index.
        """
        V = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        Yv = self.metric.coords(V)
        levels = range(self.s_max + 1) if levels is None else levels
        out = []
        for s in levels:
            lev = self.level(s)
            idx, _ = kernels.nearest(Yv, self.coords[lev])
            out.append(lev[idx])
        return np.stack(out, axis=1) if out else np.zeros((V.shape[0], 0), dtype=np.int64)


def build_admissible_sequence(H, metric: DistanceOracle, s_max=None, root=None,
                              restarts=0, seed=None) -> AdmissibleSequence:
    """Greedy farthest-point admissible sequence.

    ``H_0`` is the point minimising the maximal distance (or ``root``), and
    ``H_s`` is the first ``2^(2^s)`` points of a farthest-point traversal.
    With ``restarts > 0`` additional traversals from random roots are tried
    and the one with the smallest gamma_2 kept.
    """
    P = _carrier_points(H)
    n = P.shape[0]
    if n == 0:
        raise ConfigError("empty carrier")
    Y = metric.coords(P)
    if s_max is None:
        s_max = saturation_level(n)
    start = kernels.minimax(Y) if root is None else int(root)
    seq = _sequence_from_order(P, Y, metric, kernels.farthest_order(Y, start, n), s_max)
    if restarts:
        rng = np.random.default_rng(seed)
        best = gamma2(seq)
        for start in rng.integers(0, n, size=restarts):
            cand = _sequence_from_order(P, Y, metric, kernels.farthest_order(Y, start, n), s_max)
            g = gamma2(cand)
            if g < best:
                best, seq = g, cand
    return seq


def sequence_from_order(H, metric, order, s_max=None):
    """Admissible sequence whose level ``s`` is ``order[:2^(2^s)]``."""
    P = _carrier_points(H)
    Y = metric.coords(P)
    if s_max is None:
        s_max = saturation_level(P.shape[0])
    return _sequence_from_order(P, Y, metric, np.asarray(order, dtype=np.int64), s_max)


def _sequence_from_order(P, Y, metric, order, s_max):
    n = P.shape[0]
    levels, proj = [], []
    for s in range(s_max + 1):
        lev = np.sort(order[:level_size(s, n)])
        levels.append(lev)
        if lev.size == n:
            proj.append(np.arange(n))
        else:
            idx, _ = kernels.nearest(Y, Y[lev])
            proj.append(lev[idx])
    for a in (*levels, *proj):
        a.setflags(write=False)
    return AdmissibleSequence(P, Y, metric, tuple(levels), tuple(proj), order)


def chain_lengths(seq: AdmissibleSequence, metric: DistanceOracle | None = None):
    """``sum_s 2^(s/2) rho(pi_s v, pi_{s+1} v)`` for every carrier point."""
    Y = seq.coords if metric is None else metric.coords(seq.carrier)
    total = np.zeros(seq.carrier.shape[0])
    for s in range(seq.saturation):
        a, b = seq.pi(s), seq.pi(s + 1)
        total += 2.0 ** (s / 2) * np.linalg.norm(Y[b] - Y[a], axis=1)
    return total


def gamma2(seq: AdmissibleSequence, metric: DistanceOracle | None = None):
    """gamma_2 functional of the given sequence (an upper bound on the infimum)."""
    lengths = chain_lengths(seq, metric)
    return float(lengths.max()) if lengths.size else 0.0


# ---------------------------------------------------------------------------
# Monte-Carlo draws
# ---------------------------------------------------------------------------


def worker_streams(seed, workers):
    return [np.random.default_rng([int(seed), w]) for w in range(workers)]


def _split(n, workers):
    base, extra = divmod(n, workers)
    return [base + (w < extra) for w in range(workers)]


def _batches(n, batch):
    while n > 0:
        m = min(batch, n)
        yield m
        n -= m


def gaussian_draws(cov, n_mc, seed, workers=1, batch=4096):
    """Yield batches ``Z`` whose rows, paired with true coordinates, give ``<G, h>``.

    With ``Z`` standard normal and ``C`` the true coordinates of ``h``,
    ``Z @ C.T`` is distributed as ``<G, h>`` with ``G ~ N(0, Sigma_X)``.
    """
    cov.root("true")  # raises NotPSDError early
    for rng, share in zip(worker_streams(seed, workers), _split(n_mc, workers)):
        for m in _batches(share, batch):
            yield rng.standard_normal((m, cov.dim))


def gaussian_sup_mc(H, cov, n_mc=2000, seed=0, workers=1, batch=4096):
    """Mean and standard error of ``max(0, max_h <G, h>)``."""
    if n_mc < 2:
        raise ConfigError("n_mc must be >= 2", n_mc=n_mc)
    P = _carrier_points(H)
    C = cov.coords(P, "true")
    vals = []
    for Z in gaussian_draws(cov, n_mc, seed, workers, batch):
        vals.append(np.maximum((Z @ C.T).max(axis=1), 0.0))
    v = np.concatenate(vals)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def rademacher_draws(sampler, N, n_mc, seed, xi_sampler=None, workers=1, batch=512):
    """Yield ``(S, S_xi)`` batches with ``S = sum_i eps_i X_i / sqrt(N)``.

    ``S_xi`` uses ``eps_i xi_i`` in place of ``eps_i`` (``None`` without a
    multiplier source).  ``sampler(rng, n)`` returns ``(n, d)`` points and
    ``xi_sampler(rng, n)`` returns ``n`` multipliers.
    """
    root_n = math.sqrt(N)
    for rng, share in zip(worker_streams(seed, workers), _split(n_mc, workers)):
        for m in _batches(share, batch):
            X = np.asarray(sampler(rng, m * N), dtype=np.float64)
            X = X.reshape(m, N, -1)
            eps = rng.choice((-1.0, 1.0), size=(m, N))
            S = np.einsum("mn,mnd->md", eps, X) / root_n
            S_xi = None
            if xi_sampler is not None:
                xi = np.asarray(xi_sampler(rng, m * N), dtype=np.float64).reshape(m, N)
                S_xi = np.einsum("mn,mnd->md", eps * xi, X) / root_n
            yield S, S_xi


# ---------------------------------------------------------------------------
# supremum profiles over localisations
# ---------------------------------------------------------------------------


@dataclass
class SupProfile:
    """``r -> E sup_{h in localize(H, r)} <S, h>`` on a fixed set of draws.

    ``draws`` is a zero-argument callable returning a fresh iterator of
    ``(m, d)`` batches in true coordinates (re-seeded each time), so any set
    of radii can be evaluated on identical draws.
    """

    norms: np.ndarray
    directions: np.ndarray
    draws: Callable
    absolute: bool = True
    n_mc: int = 0

    @classmethod
    def build(cls, H, cov, draws, absolute=True, raw=False):
        """``raw`` pairs draws with the vectors themselves instead of true coordinates."""
        P = _carrier_points(H)
        C = cov.coords(P, "true")
        nrm = np.linalg.norm(C, axis=1)
        keep = nrm > 1e-12 * max(1.0, float(nrm.max()) if nrm.size else 1.0)
        D = P[keep] if raw else C[keep]
        nrm = nrm[keep]
        order = np.argsort(nrm, kind="stable")
        return cls(nrm[order], D[order], draws, absolute)

    def __call__(self, radii):
        """Mean and standard error at each radius."""
        radii = np.atleast_1d(np.asarray(radii, dtype=np.float64))
        tot = np.zeros(radii.size)
        tot2 = np.zeros(radii.size)
        n = 0
        for S in self.draws():
            proj = S @ self.directions.T
            proj = np.abs(proj) if self.absolute else np.maximum(proj, 0.0)
            a, b = kernels.sup_profile(proj, self.norms, radii)
            tot += a
            tot2 += b
            n += S.shape[0]
        self.n_mc = n
        mean = tot / n
        var = np.maximum(tot2 / n - mean ** 2, 0.0) * n / max(n - 1, 1)
        return mean, np.sqrt(var / n)


def gaussian_profile(H, cov, n_mc=2000, seed=0, workers=1, batch=4096):
    """Profile of ``E sup <G, h>`` (one-sided, 0 adjoined) over localisations of ``H``."""
    return SupProfile.build(H, cov, lambda: gaussian_draws(cov, n_mc, seed, workers, batch),
                            absolute=False)


def rademacher_profiles(H, cov, sampler, N, n_mc=500, seed=0, xi_sampler=None, workers=1,
                        batch=512):
    """Profiles of ``Phi_N`` and (optionally) ``Phi_{N,xi}`` on shared draws."""
    def stream(which):
        def gen():
            for pair in rademacher_draws(sampler, N, n_mc, seed, xi_sampler, workers, batch):
                yield pair[which]
        return gen

    phi = SupProfile.build(H, cov, stream(0), absolute=True, raw=True)
    phi_xi = SupProfile.build(H, cov, stream(1), absolute=True, raw=True) if xi_sampler else None
    return phi, phi_xi


def rademacher_phi(H, r, sampler, N, n_mc=500, with_multiplier=False, xi_source=None, seed=0,
                   cov=None, workers=1):
    """``Phi_N(r)`` and, with a multiplier, ``Phi_{N,xi}(r)`` as ``(mean, stderr)`` pairs.

    ``H`` is a symmetric set (typically ``F - F``); the supremum runs over its
    localisation at ``r``.  Returns ``(phi, phi_xi)`` with ``phi_xi = None``
    when no multiplier is requested.
    """
    if cov is None:
        cov = H.cov
    if with_multiplier and xi_source is None:
        raise ConfigError("with_multiplier requires xi_source")
    phi, phi_xi = rademacher_profiles(H, cov, sampler, N, n_mc, seed,
                                      xi_source if with_multiplier else None, workers)
    m, s = phi(r)
    out = (float(m[0]), float(s[0])) if np.ndim(r) == 0 else (m, s)
    if phi_xi is None:
        return out, None
    m2, s2 = phi_xi(r)
    return out, ((float(m2[0]), float(s2[0])) if np.ndim(r) == 0 else (m2, s2))


# ---------------------------------------------------------------------------
# entropy
# ---------------------------------------------------------------------------


def log_packing(F: FunctionClass, radii):
    """``log`` of the greedy packing count of ``F`` at separation ``r`` (true metric)."""
    Y = F.true_coords
    radii = np.atleast_1d(radii)
    out = np.zeros(radii.size)
    for i, r in enumerate(radii):
        if r < 2 * F.diameter and len(F) > 1:
            out[i] = math.log(kernels.greedy_centers(Y, float(r)).size)
    return out


def local_log_packing(F: FunctionClass, t):
    """``max_f log M(F ∩ (f + 4tD), tD)`` with greedy counts."""
    Y = F.true_coords
    best = 0
    for i in range(len(F)):
        near = np.flatnonzero(np.linalg.norm(Y - Y[i], axis=1) <= 4 * t)
        best = max(best, kernels.greedy_centers(Y[near], float(t)).size)
    return math.log(best)


def entropy_bounds(F: FunctionClass, r_grid, profile=None, n_mc=2000, seed=0, c_sudakov=1.0,
                   c_local=1.0):
    """Packing entropies against the Sudakov and local-to-global bounds.

    Returns a dict of arrays keyed ``r``, ``log_m``, ``sudakov`` and
    ``local_to_global``.  The Sudakov column is
    ``c_sudakov * (E sup_{(F-F) ∩ 4rD} G / r)^2``.
    """
    r_grid = np.asarray(r_grid, dtype=np.float64)
    if profile is None:
        profile = gaussian_profile(difference_class(F), F.cov, n_mc, seed)
    esup, _ = profile(4 * r_grid)
    d_f = max(F.diameter, 1e-300)
    return {
        "r": r_grid,
        "log_m": log_packing(F, r_grid),
        "sudakov": c_sudakov * (esup / r_grid) ** 2,
        "local_to_global": np.array([
            c_local * max(1.0, math.log(2 * d_f / r)) * local_log_packing(F, r)
            if r < 2 * d_f else 0.0 for r in r_grid]),
    }


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------


def default_grid(d_f, per_decade=POINTS_PER_DECADE):
    """Geometric grid over ``[d_F 1e-6, 2 d_F]``."""
    lo, hi = d_f * 1e-6, 2 * d_f
    n = int(math.ceil(per_decade * math.log10(hi / lo))) + 1
    return np.geomspace(lo, hi, n)


def theta(r, d_f):
    r = np.asarray(r, dtype=np.float64)
    return 1.0 / np.maximum(1.0, np.sqrt(np.maximum(np.log(2 * d_f / r), 0.0)))


@dataclass(frozen=True)
class FixedPoint:
    kind: str
    value: float
    at_floor: bool = False
    saturated: bool = False

    def __float__(self):
        return self.value


@dataclass
class FixedPointProblem:
    """``lhs(r) <= rhs(r)`` for one fixed-point kind.

    ``lhs`` returns ``(value, stderr)`` arrays on any radii, so the defining
    property can be re-checked off the grid.
    """

    kind: str
    lhs: Callable
    rhs: Callable
    d_f: float

    def holds(self, radii, slack=0.0):
        radii = np.atleast_1d(np.asarray(radii, dtype=np.float64))
        val, se = self.lhs(radii)
        return val - slack * se <= self.rhs(radii) * (1 + 1e-12)

    def solve(self, r_grid=None) -> FixedPoint:
        grid = default_grid(self.d_f) if r_grid is None else np.asarray(r_grid, dtype=np.float64)
        ok = self.holds(grid)
        # monotone closure: the condition must hold at every larger radius
        closure = np.flip(np.logical_and.accumulate(np.flip(ok)))
        if closure[0]:
            return FixedPoint(self.kind, float(grid[0]), at_floor=True)
        if not closure[-1]:
            return FixedPoint(self.kind, 2 * self.d_f, saturated=True)
        return FixedPoint(self.kind, float(grid[np.argmax(closure)]))


def make_problem(kind, F: FunctionClass, *, kappa=DEFAULT_KAPPA, N, sigma=None, profile=None,
                 phi=None, phi_xi=None, n_mc=2000, seed=0) -> FixedPointProblem:
    """Assemble the defining inequality of ``kind`` for the class ``F``.

    ``profile`` (Gaussian), ``phi`` and ``phi_xi`` (Rademacher) are
    :class:`SupProfile` objects over ``F - F``; the Gaussian one is built on
    demand.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown fixed-point kind {kind!r}", kind=kind)
    if kappa <= 0 or N < 1:
        raise ConfigError("kappa > 0 and N >= 1 are required", kappa=kappa, N=N)
    if kind in ("rM", "lambda", "r_tilde") and not (sigma and sigma > 0):
        raise ConfigError(f"{kind} needs sigma > 0", kind=kind, sigma=sigma)
    d_f = F.diameter
    if len(F) == 1 or d_f == 0:
        zero = lambda r: (np.zeros(np.size(r)), np.zeros(np.size(r)))  # noqa: E731
        return FixedPointProblem(kind, zero, lambda r: np.full(np.size(r), np.inf), max(d_f, 1.0))
    root_n = math.sqrt(N)
    if kind in ("rQ", "rM", "r_tilde") and profile is None:
        profile = gaussian_profile(difference_class(F), F.cov, n_mc, seed)
    if kind == "rQ":
        return FixedPointProblem(kind, profile, lambda r: kappa * root_n * r, d_f)
    if kind == "rM":
        return FixedPointProblem(kind, profile, lambda r: kappa * root_n * r ** 2 / sigma, d_f)
    if kind == "r_tilde":
        return FixedPointProblem(
            kind, profile,
            lambda r: kappa * root_n * theta(r, d_f) * r * np.minimum(1.0, r / sigma), d_f)
    if kind == "lambda":
        def lhs(r):
            v = log_packing(F, r)
            return v, np.zeros_like(v)
        return FixedPointProblem(kind, lhs,
                                 lambda r: kappa * N * np.minimum(1.0, (r / sigma) ** 2), d_f)
    source = phi if kind == "rQ_rad" else phi_xi
    if source is None:
        raise ConfigError(f"{kind} needs a Rademacher profile (pass a sampler)", kind=kind)
    if kind == "rQ_rad":
        return FixedPointProblem(kind, source, lambda r: kappa * root_n * r, d_f)
    return FixedPointProblem(kind, source, lambda r: kappa * root_n * r ** 2, d_f)


def solve_fixed_point(kind, F, params, r_grid=None) -> FixedPoint:
    """Smallest grid radius from which the defining inequality of ``kind`` holds.

    ``params`` carries ``kappa``, ``N`` and, as needed, ``sigma``,
    ``profile``/``phi``/``phi_xi`` or ``sampler``/``xi_sampler``.
    """
    p = dict(params)
    sampler, xi_sampler = p.pop("sampler", None), p.pop("xi_sampler", None)
    if kind in ("rQ_rad", "rM_rad") and p.get("phi") is None and len(F) > 1:
        if sampler is None:
            raise ConfigError(f"{kind} needs a sampler", kind=kind)
        phi, phi_xi = rademacher_profiles(difference_class(F), F.cov, sampler, p["N"],
                                          p.get("n_mc", 500), p.get("seed", 0), xi_sampler)
        p.setdefault("phi", phi)
        p.setdefault("phi_xi", phi_xi)
    return make_problem(kind, F, **p).solve(r_grid)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass
class ComplexityReport:
    kappa: float
    N: int
    sigma: float | None
    d_f: float
    radii: np.ndarray
    esup: np.ndarray
    esup_se: np.ndarray
    log_m: np.ndarray
    gaussian_sup: tuple
    gamma2: float
    critical_dim: float
    fixed_points: dict
    phi_n: np.ndarray | None = None
    phi_n_se: np.ndarray | None = None
    phi_xi: np.ndarray | None = None
    phi_xi_se: np.ndarray | None = None
    entropy: dict | None = None
    meta: dict = field(default_factory=dict)

    @property
    def r_star(self):
        return max(self.fixed_points["rQ"].value, self.fixed_points["rM"].value)

    def to_dict(self):
        fps = {k: {"value": v.value, "at_floor": v.at_floor, "saturated": v.saturated}
               for k, v in self.fixed_points.items()}
        out = {
            "kappa": self.kappa, "N": self.N, "sigma": self.sigma, "d_F": self.d_f,
            "gaussian_sup": list(self.gaussian_sup), "gamma2": self.gamma2,
            "critical_dim": self.critical_dim, "fixed_points": fps,
            "r_star": self.r_star if {"rQ", "rM"} <= fps.keys() else None,
            "meta": self.meta,
        }
        if self.entropy is not None:
            out["entropy"] = {k: np.asarray(v).tolist() for k, v in self.entropy.items()}
        return out

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    def to_csv(self, path):
        def col(a, i):
            return "" if a is None else repr(float(a[i]))

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "EsupG", "stderr", "phiN", "phiNxi", "logM"])
            for i, r in enumerate(self.radii):
                w.writerow([repr(float(r)), repr(float(self.esup[i])), repr(float(self.esup_se[i])),
                            col(self.phi_n, i), col(self.phi_xi, i), repr(float(self.log_m[i]))])


def complexity_report(F: FunctionClass, *, kappa=DEFAULT_KAPPA, N, sigma=None, n_mc=2000, seed=0,
                      sampler=None, xi_sampler=None, n_mc_rad=300, r_grid=None,
                      with_entropy=False) -> ComplexityReport:
    """Solve every available fixed point of ``F`` and tabulate the profiles."""
    H = difference_class(F)
    d_f = F.diameter
    grid = default_grid(max(d_f, 1e-12)) if r_grid is None else np.asarray(r_grid)
    profile = gaussian_profile(H, F.cov, n_mc, seed)
    esup, esup_se = profile(grid)
    phi = phi_xi = None
    if sampler is not None:
        phi, phi_xi = rademacher_profiles(H, F.cov, sampler, N, n_mc_rad, seed + 1, xi_sampler)
    kinds = ["rQ"]
    if sigma:
        kinds += ["rM", "lambda", "r_tilde"]
    if phi is not None:
        kinds.append("rQ_rad")
    if phi_xi is not None:
        kinds.append("rM_rad")
    fps = {}
    for kind in kinds:
        prob = make_problem(kind, F, kappa=kappa, N=N, sigma=sigma, profile=profile, phi=phi,
                            phi_xi=phi_xi)
        fps[kind] = prob.solve(grid)
    seq = build_admissible_sequence(H, DistanceOracle(F.cov, "true"))
    full = gaussian_sup_mc(H, F.cov, n_mc, seed)
    r_h = float(H.norms.max())
    report = ComplexityReport(
        kappa=kappa, N=N, sigma=sigma, d_f=d_f, radii=grid, esup=esup, esup_se=esup_se,
        log_m=log_packing(F, grid), gaussian_sup=full, gamma2=gamma2(seq),
        critical_dim=(full[0] / r_h) ** 2 if r_h > 0 else 0.0, fixed_points=fps,
        meta={"n_mc": n_mc, "seed": seed, "class_size": len(F), "backend": backend_name()},
    )
    if phi is not None:
        report.phi_n, report.phi_n_se = phi(grid)
    if phi_xi is not None:
        report.phi_xi, report.phi_xi_se = phi_xi(grid)
    if with_entropy:
        coarse = np.geomspace(max(d_f, 1e-12) / 50, 2 * d_f, 12)
        report.entropy = entropy_bounds(F, coarse, profile)
        if sigma:
            report.meta["lambda_le_r_tilde"] = fps["lambda"].value <= fps["r_tilde"].value
    return report


def profile_for(L: LocalizedSet | FunctionClass, cov, n_mc=2000, seed=0):
    """Gaussian profile over an explicit set (convenience for tests)."""
    return gaussian_profile(L, cov, n_mc, seed)


__all__ = [
    "AdmissibleSequence", "ComplexityReport", "FixedPoint", "FixedPointProblem", "SupProfile",
    "build_admissible_sequence", "chain_lengths", "complexity_report", "default_grid",
    "entropy_bounds", "gamma2", "gaussian_profile", "gaussian_sup_mc",
    "level_size", "log_packing", "make_problem", "rademacher_phi", "rademacher_profiles",
    "saturation_level", "sequence_from_order", "solve_fixed_point", "theta",
]
