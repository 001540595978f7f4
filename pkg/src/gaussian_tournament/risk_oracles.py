"""Risk oracles: the crude oracle with its noise estimate and admissible set,
the chained multiplier and product estimators, and the fine oracle built from
the mixture decomposition ``u(w + 2(v - Y)) = uw + 2u(v - v_j) + 2u(v_j - Y)``.

Sample usage follows the learner: the crude oracle sees the first half of the
sample, everything chained sees the second half.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chaining import AdmissibleSequence, build_admissible_sequence, level_size
from .errors import (BudgetExceededError, ConfigError, DimensionError, EntropyConditionError,
                     InadmissibleDeltaError, PartitionError)
from .function_class import (DistanceOracle, FunctionClass, LocalizedSet, difference_class,
                             greedy_packing, localize)
from .mean_estimators import C0_DEFAULT, block_count, mom_matrix


@dataclass(frozen=True)
class OracleConstants:
    """Calibrated constants; see the README for how they were chosen.

    ``theta_crude``  sets the crude confidence, ``ln(2/delta) = theta^2 N``.
    ``gamma``        crude packing scale factor, ``eta gamma r``.
    ``alpha``        chaining confidence, ``delta_s = 2 exp(-alpha 2^s)``.
    ``mixture_budget`` is ``c1 theta^2`` in ``2^s0 <= c1 theta^2 N min(1, r^2/sigma*^2)``.
    """

    theta_crude: float = 0.1
    gamma: float | None = None
    alpha: float = 2.0
    mixture_budget: float = 0.05
    c0: float = C0_DEFAULT
    grid_depth: int = 8
    close_chain: bool = True

    def gamma_for(self, eta):
        # 10 (eta^2 gamma)^2 <= 1/9
        return self.gamma if self.gamma is not None else 1.0 / (eta ** 2 * math.sqrt(90.0))

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _values(X, vectors):
    return np.asarray(X, dtype=np.float64) @ np.atleast_2d(vectors).T


def _check_sample(F, X, Y=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != F.dim:
        raise DimensionError("sample does not match the class dimension", shape=X.shape, dim=F.dim)
    if Y is not None and np.shape(Y) != (X.shape[0],):
        raise DimensionError("X and Y lengths differ", x=X.shape[0], y=np.shape(Y))
    return X


# ---------------------------------------------------------------------------
# crude oracle
# ---------------------------------------------------------------------------


@dataclass
class CrudeOracleOutput:
    centers: np.ndarray        # positions in F of the u_j
    assignment: np.ndarray     # for each f, position in ``centers`` of its cell
    psi_c: np.ndarray          # Psi_C(f) for every f in F
    center_values: np.ndarray  # Psi_C at each centre
    sigma_hat2: float
    sigma_star2: float
    v_hat: np.ndarray          # positions in F, ascending
    r: float
    sep: float
    blocks: int

    @property
    def sigma_hat(self):
        return math.sqrt(self.sigma_hat2)

    @property
    def sigma_star(self):
        return math.sqrt(self.sigma_star2)


def crude_oracle(F: FunctionClass, X, Y, r, oracle: DistanceOracle,
                 consts: OracleConstants = OracleConstants()) -> CrudeOracleOutput:
    """``Psi_C(f) = psi_delta((u_j(X_i) - Y_i)^2)`` with ``u_j`` the centre of ``f``'s cell.

    Cells come from a maximal ``eta gamma r`` separated subset under the
    oracle metric; ``ln(2/delta) = theta^2 N``.
    """
    X = _check_sample(F, X, Y)
    Y = np.asarray(Y, dtype=np.float64)
    n = X.shape[0]
    eta = F.cov.eta
    log_term = consts.theta_crude ** 2 * n
    if log_term > consts.c0 * n * (1 + 1e-12):
        raise InadmissibleDeltaError("theta^2 exceeds the admissibility constant c0",
                                     theta=consts.theta_crude, c0=consts.c0)
    sep = eta * consts.gamma_for(eta) * r
    centers, assign = greedy_packing(F, sep, oracle)
    budget = log_term / 2
    if math.log(centers.size) > budget:
        raise EntropyConditionError(
            f"{centers.size} crude centres exceed exp(theta^2 N / 2); increase r",
            count=int(centers.size), log_count=math.log(centers.size), budget=budget, r=r)
    k = block_count(None, log_term=log_term)
    resid = _values(X, F.points[centers]) - Y[:, None]
    cvals = mom_matrix(resid ** 2, k)
    psi = cvals[assign]
    s_hat2 = float(cvals.min())
    s_star2 = max(s_hat2, r * r)
    v_hat = np.flatnonzero(psi <= 4 * s_star2)
    return CrudeOracleOutput(centers, assign, psi, cvals, s_hat2, s_star2, v_hat, float(r), sep, k)


def noise_estimate(out: CrudeOracleOutput, r=None):
    """``(sigma_hat, sigma_star)`` with ``sigma_star = max(sigma_hat, r)``."""
    r = out.r if r is None else r
    s_hat = math.sqrt(out.sigma_hat2)
    return s_hat, max(s_hat, r)


# ---------------------------------------------------------------------------
# chained estimators
# ---------------------------------------------------------------------------


def last_level(alpha, n, c0=C0_DEFAULT):
    """Largest ``s`` with ``alpha 2^s <= c0 n``."""
    cap = c0 * n / alpha
    if cap < 1:
        raise InadmissibleDeltaError("sample too small for the chaining confidence",
                                     n=n, alpha=alpha, c0=c0)
    return int(math.floor(math.log2(cap) + 1e-12))


@dataclass
class ChainEngine:
    """Telescoped median-of-means estimates along an admissible sequence.

    Links run over levels ``s0 .. s1`` with ``delta_s = 2 exp(-alpha 2^s)``.
    When ``close`` is set a final link ``psi_{delta_s1}(a - pi_s1 a)`` carries
    the part of a vector not captured by the last level.
    """

    seq: AdmissibleSequence
    X: np.ndarray
    s0: int
    s1: int
    alpha: float
    close: bool = True
    chunk: int = 2048

    def __post_init__(self):
        if not 0 <= self.s0 <= self.s1:
            raise ConfigError("need 0 <= s0 <= s1", s0=self.s0, s1=self.s1)
        n = self.X.shape[0]
        self.blocks = [block_count(None, log_term=self.alpha * 2.0 ** s)
                       for s in range(self.s0, self.s1 + 1)]
        if self.blocks[-1] > n:
            raise InadmissibleDeltaError("too few samples for the last chaining level",
                                         n=n, blocks=self.blocks[-1], s1=self.s1)
        self._cache = {}

    @property
    def levels(self):
        return list(range(self.s0, self.s1 + 1))

    def project(self, vectors):
        return self.seq.project(vectors, self.levels)

    def _carrier_values(self, idx):
        """Sample values of carrier points, cached by carrier index."""
        flat = np.unique(idx)
        missing = [i for i in flat.tolist() if i not in self._cache]
        if missing:
            vals = _values(self.X, self.seq.carrier[missing])
            for j, i in enumerate(missing):
                self._cache[i] = vals[:, j]
        table = np.stack([self._cache[i] for i in flat.tolist()], axis=1)
        return table, np.searchsorted(flat, idx)

    def _links(self, U, W=None, xi=None):
        """Yield ``(blocks, column matrix)`` for each link of the chain.

        Products ``a b`` when ``W`` is given, multipliers ``xi a`` otherwise.
        """
        PU = self.project(U)
        PW = self.project(W) if W is not None else None
        allidx = PU if PW is None else np.concatenate([PU, PW], axis=1)
        table, pos = self._carrier_values(allidx)
        m = PU.shape[1]
        pu = pos[:, :m]
        pw = pos[:, m:] if PW is not None else None

        def term(t):
            a = table[:, pu[:, t]]
            return a * table[:, pw[:, t]] if pw is not None else a * xi

        prev = term(0)
        yield self.blocks[0], prev
        for t in range(1, m):
            cur = term(t)
            yield self.blocks[t - 1], cur - prev
            prev = cur
        if self.close:
            raw_u = _values(self.X, U)
            full = raw_u * _values(self.X, W) if W is not None else raw_u * xi
            rest = full - prev
            if np.any(rest):
                yield self.blocks[-1], rest

    def _estimate(self, U, W=None, xi=None):
        U = np.atleast_2d(U)
        out = np.zeros(U.shape[0])
        for lo in range(0, U.shape[0], self.chunk):
            sl = slice(lo, lo + self.chunk)
            sub_xi = None if xi is None else xi[:, sl]
            sub_w = None if W is None else W[sl]
            for k, cols in self._links(U[sl], sub_w, sub_xi):
                out[sl] += mom_matrix(cols, k)
        return out

    def product(self, U, W):
        """``Psi_Q(u_i, w_i)`` for paired rows of ``U`` and ``W``."""
        U, W = np.atleast_2d(U), np.atleast_2d(W)
        if U.shape != W.shape:
            raise DimensionError("paired inputs differ in shape", u=U.shape, w=W.shape)
        return self._estimate(U, W=W)

    def multiplier(self, U, xi):
        """``Phi_M(u_i, xi_i)``; ``xi`` has one column (of length N) per row of ``U``."""
        U = np.atleast_2d(U)
        xi = np.asarray(xi, dtype=np.float64)
        if xi.ndim == 1:
            xi = np.repeat(xi[:, None], U.shape[0], axis=1)
        if xi.shape != (self.X.shape[0], U.shape[0]):
            raise DimensionError("xi must be (N, n_vectors)", shape=xi.shape)
        return self._estimate(U, xi=xi)


def _members(H):
    if isinstance(H, LocalizedSet):
        return H.members
    if isinstance(H, FunctionClass):
        return H.points
    return np.atleast_2d(np.asarray(H, dtype=np.float64))


def multiplier_estimator(H, X, xi_samples, seq: AdmissibleSequence, s0, s1, alpha=2.0,
                         close=True, targets=None):
    """``Phi_M(h, xi_j)`` for every ``h`` (rows) and multiplier ``j`` (columns).

    ``xi_samples`` is ``(N, J)``; ``targets`` defaults to the members of ``H``.
    The number of multipliers must not exceed ``2 exp(2^(s0-1))``.
    """
    xi = np.asarray(xi_samples, dtype=np.float64)
    if xi.ndim == 1:
        xi = xi[:, None]
    J = xi.shape[1]
    if J > 2 * math.exp(2.0 ** (s0 - 1)):
        raise BudgetExceededError("too many multipliers for the confidence budget",
                                  multipliers=J, budget=2 * math.exp(2.0 ** (s0 - 1)), s0=s0)
    eng = ChainEngine(seq, np.asarray(X, dtype=np.float64), s0, s1, alpha, close)
    T = _members(H) if targets is None else np.atleast_2d(targets)
    n = T.shape[0]
    U = np.repeat(T, J, axis=0)
    cols = np.tile(xi, (1, n))
    return eng.multiplier(U, cols).reshape(n, J)


def product_estimator(H1, H2, X, seqs, s0, s1, alpha=2.0, close=True, pairs=None):
    """``Psi_Q(f, h)`` for ``f`` in ``H1`` and ``h`` in ``H2``.

    Both classes must share one admissible sequence (``seqs`` may be a single
    sequence or a pair of identical ones) built on a carrier containing them.
    Returns the full ``(|H1|, |H2|)`` matrix, or one value per pair.
    """
    seq = seqs[0] if isinstance(seqs, (tuple, list)) else seqs
    if isinstance(seqs, (tuple, list)) and seqs[0] is not seqs[1]:
        raise ConfigError("product_estimator expects a shared admissible sequence")
    eng = ChainEngine(seq, np.asarray(X, dtype=np.float64), s0, s1, alpha, close)
    A, B = _members(H1), _members(H2)
    if pairs is not None:
        pairs = np.asarray(pairs, dtype=np.int64)
        return eng.product(A[pairs[:, 0]], B[pairs[:, 1]])
    ia, ib = np.meshgrid(np.arange(A.shape[0]), np.arange(B.shape[0]), indexing="ij")
    return eng.product(A[ia.ravel()], B[ib.ravel()]).reshape(A.shape[0], B.shape[0])


# ---------------------------------------------------------------------------
# fine oracle
# ---------------------------------------------------------------------------


_CARRIERS: dict = {}


def _fine_carrier(F: FunctionClass, radius: float, grid_depth: int):
    """``localize(F - F, radius)`` in the oracle metric and its admissible sequence.

    Data independent, so it is cached across trials.  The zero vector is member
    0 and, the set being symmetric, the minimax root ``H_0``.
    """
    key = (id(F), radius, grid_depth)
    hit = _CARRIERS.get(key)
    if hit is not None and hit[0] is F:
        return hit[1]
    H = difference_class(F)
    carrier = localize(H, radius, grid_depth=grid_depth, kind="oracle")
    seq = build_admissible_sequence(carrier, DistanceOracle(F.cov, "oracle"), root=0)
    if len(_CARRIERS) >= 8:
        _CARRIERS.pop(next(iter(_CARRIERS)))
    _CARRIERS[key] = (F, (carrier, seq))
    return carrier, seq


def mixture_levels(n, r, sigma_star, consts: OracleConstants, saturation):
    """``(s0, s1)`` for the mixture estimator.

    ``s1`` is the largest level with ``alpha 2^s1 <= c0 n``, capped where the
    sequence saturates; ``s0`` is the largest integer with
    ``2^s0 <= budget n min(1, r^2/sigma*^2)``, kept below ``s1``.
    """
    s1 = min(last_level(consts.alpha, n, consts.c0), max(saturation, 1))
    cap = consts.mixture_budget * n * min(1.0, (r / sigma_star) ** 2)
    s0 = int(math.floor(math.log2(cap) + 1e-12)) if cap >= 1 else 0
    return max(0, min(s0, s1 - 1)), s1


@dataclass
class FineOracleState:
    """Everything the fine oracle needs, bound to the second half of the sample."""

    F: FunctionClass
    X: np.ndarray
    Y: np.ndarray
    r: float
    oracle: DistanceOracle
    carrier: LocalizedSet
    engine: ChainEngine
    partition_centers: np.ndarray   # positions in F of the v_j
    cell_of: dict                   # F position -> F position of its centre
    sigma_star: float
    consts: OracleConstants
    meta: dict = field(default_factory=dict)

    @property
    def r0(self):
        return self.F.cov.eta ** 2 * self.r

    @property
    def s0(self):
        return self.engine.s0

    @property
    def s1(self):
        return self.engine.s1

    @classmethod
    def build(cls, F: FunctionClass, X, Y, r, oracle: DistanceOracle, members, sigma_star,
              consts: OracleConstants = OracleConstants()):
        """Partition ``members`` (positions in F) and set up the chained estimators.

        Cells are a maximal ``eta r`` separated subset under the oracle, so
        ``||v - v_j|| <= eta^2 r``; their number must stay within
        ``exp(2^(s0-1))``.
        """
        X = _check_sample(F, X, Y)
        Y = np.asarray(Y, dtype=np.float64)
        members = np.asarray(members, dtype=np.int64)
        if members.size == 0:
            raise PartitionError("cannot build a fine oracle over an empty set")
        eta = F.cov.eta
        carrier, seq = _fine_carrier(F, float(eta * r), consts.grid_depth)
        s0, s1 = mixture_levels(X.shape[0], r, sigma_star, consts, seq.saturation)
        local, assign = greedy_packing(F.points[members], eta * r, oracle)
        centers = members[local]
        budget = math.exp(2.0 ** (s0 - 1))
        if centers.size > budget:
            raise EntropyConditionError(
                f"{centers.size} partition cells exceed exp(2^(s0-1)) = {budget:.3g}; increase r",
                count=int(centers.size), budget=budget, s0=s0, r=r)
        cell_of = {int(m): int(members[local[a]]) for m, a in zip(members, assign)}
        # radius check in the true metric (eta^2 r), asserted post hoc
        diffs = F.points[members] - F.points[[cell_of[int(m)] for m in members]]
        worst = float(F.cov.norms(diffs, "true").max())
        if worst > eta ** 2 * r * (1 + 1e-9):
            raise PartitionError("partition radius exceeds eta^2 r", radius=worst, bound=eta**2*r)
        engine = ChainEngine(seq, X, s0, s1, consts.alpha, consts.close_chain)
        meta = {"s0": s0, "s1": s1, "cells": int(centers.size), "carrier": len(carrier),
                "blocks": engine.blocks, "partition_radius": worst}
        return cls(F, X, Y, float(r), oracle, carrier, engine, np.sort(centers), cell_of,
                   float(sigma_star), consts, meta)

    # -- scaling -----------------------------------------------------------

    def alpha_of(self, vectors):
        """``alpha(u) = max(r, d(u, 0))`` row-wise."""
        return np.maximum(self.r, self.oracle.norms(np.atleast_2d(vectors)))

    def center_of(self, v_index):
        try:
            return self.cell_of[int(v_index)]
        except KeyError:
            raise PartitionError("function is not covered by the fine-oracle partition",
                                 index=int(v_index)) from None

    # -- the three pieces --------------------------------------------------

    def psi_terms(self, u_tilde, w_tilde, v_index):
        """``(Psi_1, Psi_2, Psi_3)`` row-wise for arrays of inputs."""
        Ut = np.atleast_2d(np.asarray(u_tilde, dtype=np.float64))
        Wt = np.atleast_2d(np.asarray(w_tilde, dtype=np.float64))
        v_index = np.atleast_1d(v_index)
        au, aw = self.alpha_of(Ut), self.alpha_of(Wt)
        U = self.r * Ut / au[:, None]
        W = self.r * Wt / aw[:, None]
        cj = np.array([self.center_of(v) for v in v_index])
        V = self.F.points[v_index]
        Vj = self.F.points[cj]
        psi1 = (au / self.r) * (aw / self.r) * self.engine.product(U, W)
        psi2 = (au / self.r) * self.engine.product(U, V - Vj)
        xi = _values(self.X, Vj) - self.Y[:, None]
        psi3 = (au / self.r) * self.engine.multiplier(U, xi)
        return psi1, psi2, psi3


def mixture_estimator(u_tilde, w_tilde, v, state: FineOracleState):
    """``Psi_*(u~, w~, v) = Psi_1 + 2 Psi_2 + 2 Psi_3``; ``v`` is a position in F."""
    p1, p2, p3 = state.psi_terms(u_tilde, w_tilde, v)
    out = p1 + 2 * p2 + 2 * p3
    return float(out[0]) if np.ndim(v) == 0 else out


def fine_oracle(f, h, state: FineOracleState):
    """``Psi_L(f, h) = Psi_*(f - h, f - h, h)`` for positions ``f``, ``h`` in F."""
    f_arr, h_arr = np.atleast_1d(f), np.atleast_1d(h)
    out = np.zeros(f_arr.shape[0])
    live = f_arr != h_arr
    if np.any(live):
        D = state.F.points[f_arr[live]] - state.F.points[h_arr[live]]
        out[live] = mixture_estimator(D, D, h_arr[live], state)
    return float(out[0]) if np.ndim(f) == 0 else out


def fine_matrix(members, state: FineOracleState):
    """``M[a, b] = Psi_L(members[a], members[b])`` with a zero diagonal."""
    members = np.asarray(members, dtype=np.int64)
    n = members.size
    fa, hb = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mask = fa != hb
    M = np.zeros((n, n))
    if n > 1:
        M[mask] = fine_oracle(members[fa[mask]], members[hb[mask]], state)
    return M


def level_budget(s):
    """``|H_s|`` bound used in the union bounds (exposed for diagnostics)."""
    return level_size(s, 2 ** 64)
