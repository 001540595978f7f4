"""Home-match tournament over the crude admissible set and the end-to-end learner."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .function_class import DistanceOracle, FunctionClass
from .risk_oracles import (CrudeOracleOutput, FineOracleState, OracleConstants, crude_oracle,
                           fine_matrix, noise_estimate)


@dataclass
class MatchResult:
    """``wins[b, a]``: member ``b`` (home) beats visitor ``a``; ``psi[a, b] = Psi_L(a, b)``."""

    members: np.ndarray
    psi: np.ndarray
    wins: np.ndarray
    distances: np.ndarray

    @property
    def size(self):
        return self.members.size


def play_matches(v_hat, state: FineOracleState, oracle: DistanceOracle, r, eta) -> MatchResult:
    """Play every home match among ``v_hat`` (positions in F).

    Home ``h`` beats visitor ``f`` when ``Psi_L(f, h) >= 0`` if ``d(f, h) >= eta r``
    and when ``Psi_L(f, h) >= -eta^4 r^2 / 2`` otherwise.
    """
    members = np.asarray(v_hat, dtype=np.int64)
    n = members.size
    psi = fine_matrix(members, state)
    Y = oracle.coords(state.F.points[members])
    dist = np.linalg.norm(Y[:, None, :] - Y[None, :, :], axis=2)
    threshold = np.where(dist >= eta * r, 0.0, -(eta ** 4) * r * r / 2)
    beats = psi >= threshold          # [a, b]: home b beats visitor a
    wins = beats.T.copy()
    np.fill_diagonal(wins, True)
    return MatchResult(members, psi, wins, dist if n else np.zeros((0, 0)))


def select_winner(matches: MatchResult, labels=None):
    """``(V*, f_hat)``: members winning every home match and the smallest-label one.

    ``f_hat`` is ``None`` when ``V*`` is empty.
    """
    if matches.size == 0:
        return np.zeros(0, dtype=np.int64), None
    all_home = matches.wins.all(axis=1)
    v_star = matches.members[all_home]
    if v_star.size == 0:
        return v_star, None
    if labels is None:
        return v_star, int(v_star.min())
    lab = np.asarray(labels)[v_star]
    return v_star, int(v_star[np.argmin(lab)])


@dataclass
class TournamentOutcome:
    crude: CrudeOracleOutput
    sigma_hat: float
    sigma_star: float
    matches: MatchResult
    v_star: np.ndarray
    selected: int | None
    r: float
    eta: float
    fine_meta: dict = field(default_factory=dict)
    error_l2: float | None = None
    excess_risk: float | None = None
    crude_event: bool | None = None
    fine_event: bool | None = None
    preflight: dict = field(default_factory=dict)

    @property
    def v_hat(self):
        return self.crude.v_hat

    @property
    def failed(self):
        return self.selected is None

    @property
    def success(self):
        """``||f_hat - f*|| <= r`` and excess risk ``<= eta^4 r^2`` (needs the truth)."""
        if self.failed or self.error_l2 is None:
            return False
        return self.error_l2 <= self.r and self.excess_risk <= self.eta ** 4 * self.r ** 2


@dataclass(frozen=True)
class Truth:
    """Ground truth for closed-form risks: ``E(f_t - Y)^2 = ||t - z0||^2_Sigma + noise_var``."""

    z0: np.ndarray
    noise_var: float

    def risks(self, F: FunctionClass, idx=None):
        P = F.points if idx is None else F.points[idx]
        return F.cov.norms(P - self.z0, "true") ** 2 + self.noise_var

    def f_star(self, F: FunctionClass):
        return int(np.argmin(self.risks(F)))


def crude_event(F, crude: CrudeOracleOutput, truth: Truth, r):
    """``|Psi_C(f) - E(f-Y)^2| <= max(r^2, E(f-Y)^2) / 2`` for every f."""
    risk = truth.risks(F)
    return bool(np.all(np.abs(crude.psi_c - risk) <= 0.5 * np.maximum(r * r, risk)))


def fine_event(F, matches: MatchResult, truth: Truth, r):
    """``|Psi_L(f,h) - (R(f) - R(h))| <= max(r^2, ||f-h||^2) / 2`` over all pairs of V-hat."""
    m = matches.members
    if m.size < 2:
        return True
    risk = truth.risks(F, m)
    gap = risk[:, None] - risk[None, :]
    P = F.cov.coords(F.points[m], "true")
    d2 = np.sum((P[:, None, :] - P[None, :, :]) ** 2, axis=2)
    err = np.abs(matches.psi - gap)
    return bool(np.all(err <= 0.5 * np.maximum(r * r, d2) + 1e-12))


def preflight(r, fixed_points=None, c0=4.0):
    """Compare ``r`` with ``c0 max(r*, lambda*)``; warns instead of failing."""
    if not fixed_points:
        return {}
    need = c0 * max(fixed_points.get("r_star", 0.0), fixed_points.get("lambda", 0.0))
    info = {"required": need, "ok": r >= need}
    if r < need:
        warnings.warn(f"r={r:.4g} is below c0 max(r*, lambda*) = {need:.4g}", stacklevel=3)
    return info


def learn(F: FunctionClass, X, Y, r, consts: OracleConstants = OracleConstants(), *,
          split=0.5, truth: Truth | None = None, fixed_points=None, oracle=None):
    """Run the two-stage procedure on a sample of ``2N`` points.

    The first part of the sample drives the crude oracle, the rest the fine
    oracle and the tournament.  ``truth`` enables the per-trial diagnostics.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    pre = preflight(r, fixed_points)
    eta = F.cov.eta
    oracle = oracle or DistanceOracle(F.cov, "oracle")
    n1 = int(round(split * X.shape[0]))
    X1, Y1, X2, Y2 = X[:n1], Y[:n1], X[n1:], Y[n1:]
    crude = crude_oracle(F, X1, Y1, r, oracle, consts)
    s_hat, s_star = noise_estimate(crude, r)
    if len(F) == 1 or crude.v_hat.size == 1:
        state_meta = {}
        matches = MatchResult(crude.v_hat, np.zeros((crude.v_hat.size,) * 2),
                              np.ones((crude.v_hat.size,) * 2, dtype=bool),
                              np.zeros((crude.v_hat.size,) * 2))
    else:
        state = FineOracleState.build(F, X2, Y2, r, oracle, crude.v_hat, s_star, consts)
        state_meta = state.meta
        matches = play_matches(crude.v_hat, state, oracle, r, eta)
    v_star, selected = select_winner(matches, F.labels)
    out = TournamentOutcome(crude, s_hat, s_star, matches, v_star, selected, float(r), eta,
                            state_meta, preflight=pre)
    if truth is not None:
        diagnose(out, F, truth)
    return out


def diagnose(out: TournamentOutcome, F: FunctionClass, truth: Truth):
    star = truth.f_star(F)
    out.crude_event = crude_event(F, out.crude, truth, out.r)
    out.fine_event = fine_event(F, out.matches, truth, out.r)
    if out.selected is not None:
        out.error_l2 = float(F.cov.norms(F.points[out.selected] - F.points[star], "true")[0])
        risk = truth.risks(F, [out.selected, star])
        out.excess_risk = float(risk[0] - risk[1])
    else:
        out.error_l2 = math.inf
        out.excess_risk = math.inf
    return out
