import json
import math

import numpy as np
import pytest
from scipy import integrate, stats

from gaussian_tournament.chaining import (FixedPointProblem, build_admissible_sequence,
                                          chain_lengths, complexity_report, default_grid,
                                          entropy_bounds, gamma2, gaussian_profile,
                                          gaussian_sup_mc, level_size, log_packing, make_problem,
                                          rademacher_phi, sequence_from_order, solve_fixed_point,
                                          theta)
from gaussian_tournament.errors import ConfigError
from gaussian_tournament.function_class import (CovarianceStructure, DistanceOracle, FunctionClass,
                                                difference_class, l1_ball_lattice,
                                                l1_ball_vertices, localize)

from conftest import segment_class


def _expected_max_abs_gaussian(d):
    """E max_j |g_j| for d i.i.d. standard normals, by quadrature of the tail."""
    f = lambda t: 1.0 - (2 * stats.norm.cdf(t) - 1) ** d  # noqa: E731
    val, _ = integrate.quad(f, 0, 40, limit=400)
    return val


class TestAdmissibleSequence:
    def test_singleton(self):
        cov = CovarianceStructure.identity(3)
        seq = build_admissible_sequence(FunctionClass([[1.0, 2, 3]], cov), DistanceOracle(cov, "true"))
        assert all(lev.tolist() == [0] for lev in seq.levels)
        assert gamma2(seq) == 0.0
        assert np.allclose(seq.increments(0), 0)

    def test_two_points(self):
        cov = CovarianceStructure.identity(2)
        F = FunctionClass([[0, 0], [0.3, 0.4]], cov)
        seq = build_admissible_sequence(F, DistanceOracle(cov, "true"))
        assert seq.level(0).size == 1 and seq.level(1).size == 2
        # enumeration: either point as H_0 gives the same single link of length 0.5
        assert gamma2(seq) == pytest.approx(0.5)
        for root in (0, 1):
            alt = sequence_from_order(F, DistanceOracle(cov, "true"), [root, 1 - root])
            assert gamma2(alt) == pytest.approx(0.5)

    def test_duplicated_center(self):
        cov = CovarianceStructure.identity(2)
        P = np.tile([[0.2, -0.1]], (6, 1))
        seq = build_admissible_sequence(P, DistanceOracle(cov, "true"))
        assert gamma2(seq) == 0.0

    def test_invariants(self, rng):
        cov = CovarianceStructure.with_distortion(np.eye(5), 1.2, seed=3)
        metric = DistanceOracle(cov, "oracle")
        P = rng.standard_normal((300, 5))
        seq = build_admissible_sequence(P, metric)
        assert seq.level(0).size == 1
        Y = metric.coords(P)
        for s in range(seq.s_max + 1):
            lev = seq.level(s)
            assert lev.size <= level_size(s, 10 ** 9) or s == 0
            assert lev.size <= 2 ** (2 ** s)
            if s:
                assert set(seq.level(s - 1).tolist()) <= set(lev.tolist())
            d_all = np.linalg.norm(Y[:, None] - Y[lev][None], axis=2).min(axis=1)
            d_proj = np.linalg.norm(Y - Y[seq.pi(s)], axis=1)
            assert np.allclose(d_all, d_proj)
        assert seq.level(seq.saturation).size == 300

    def test_greedy_close_to_restart_oracle(self):
        rng = np.random.default_rng(99)
        cov = CovarianceStructure.identity(8)
        metric = DistanceOracle(cov, "true")
        P = rng.standard_normal((50, 8))
        greedy = gamma2(build_admissible_sequence(P, metric))
        best = min(gamma2(sequence_from_order(P, metric, rng.permutation(50)))
                   for _ in range(200))
        best = min(best, gamma2(build_admissible_sequence(P, metric, restarts=200, seed=1)))
        assert greedy <= 4 * best

    def test_chain_lengths_bound_gamma2(self, rng):
        cov = CovarianceStructure.identity(3)
        P = rng.standard_normal((40, 3))
        seq = build_admissible_sequence(P, DistanceOracle(cov, "true"))
        assert chain_lengths(seq).max() == gamma2(seq)


class TestGaussianSup:
    def test_zero(self):
        cov = CovarianceStructure.identity(2)
        assert gaussian_sup_mc(np.zeros((1, 2)), cov, 100, 0) == (0.0, 0.0)

    def test_symmetric_pair(self):
        cov = CovarianceStructure(np.diag([4.0, 1.0]), np.diag([4.0, 1.0]))
        h = np.array([0.5, 0.0])  # unit L2 norm under Sigma
        m, se = gaussian_sup_mc(np.array([[0, 0], h, -h]), cov, 100_000, 1)
        assert abs(m - math.sqrt(2 / math.pi)) <= 3 * se

    def test_l1_vertices_against_quadrature(self):
        d = 100
        cov = CovarianceStructure.identity(d)
        m, se = gaussian_sup_mc(l1_ball_vertices(d), cov, 100_000, 2)
        assert abs(m - _expected_max_abs_gaussian(d)) <= 3 * se

    def test_sqrt_log_scaling(self):
        ratios = []
        for d in (10, 100, 1000):
            m, _ = gaussian_sup_mc(l1_ball_vertices(d), CovarianceStructure.identity(d), 4000, d)
            ratios.append(m / math.sqrt(math.log(d)))
        assert max(ratios) / min(ratios) < 1.5

    def test_seeded_and_worker_split(self):
        cov = CovarianceStructure.identity(6)
        P = l1_ball_vertices(6)
        a = gaussian_sup_mc(P, cov, 20_000, 5, workers=1)
        assert a == gaussian_sup_mc(P, cov, 20_000, 5, workers=1)
        b = gaussian_sup_mc(P, cov, 20_000, 5, workers=3)
        assert b == gaussian_sup_mc(P, cov, 20_000, 5, workers=3)
        assert abs(a[0] - b[0]) <= 4 * math.hypot(a[1], b[1])

    def test_needs_two_draws(self):
        with pytest.raises(ConfigError):
            gaussian_sup_mc(np.zeros((1, 1)), CovarianceStructure.identity(1), 1)

    def test_profile_matches_explicit_localisation(self, rng):
        cov = CovarianceStructure.identity(3)
        H = difference_class(FunctionClass(rng.standard_normal((6, 3)), cov))
        prof = gaussian_profile(H, cov, 3000, 4)
        for r in (0.2, 0.9, 3.0):
            L = localize(H, r, grid_depth=6)
            direct, _ = gaussian_sup_mc(L.members, cov, 3000, 4)
            got, _ = prof(r)
            assert got[0] == pytest.approx(direct, rel=1e-9)

    def test_gamma2_dominance(self, calibration):
        c_up, c_dn = calibration["gamma2_dominance_c_up"], calibration["gamma2_dominance_c_dn"]
        cov = CovarianceStructure.identity(4)
        metric = DistanceOracle(cov, "true")
        for i in range(5):
            P = np.random.default_rng([21, i]).standard_normal((30, 4)) * (i + 1) / 3
            P[0] = 0
            g2 = gamma2(build_admissible_sequence(P, metric))
            m, _ = gaussian_sup_mc(P, cov, 20_000, i)
            assert m <= c_up * g2 and g2 <= c_dn * m


class TestRademacher:
    def test_zero_set(self):
        cov = CovarianceStructure.identity(2)
        H = FunctionClass(np.zeros((1, 2)), cov)
        (m, se), _ = rademacher_phi(H, 1.0, lambda rng, n: rng.standard_normal((n, 2)), 10, 50)
        assert m == 0.0 and se == 0.0

    def test_two_point_distribution(self):
        cov = CovarianceStructure(np.diag([1.0, 0.25]), np.diag([1.0, 0.25]))
        h = np.array([1.0, 2.0])
        H = FunctionClass(np.array([[0, 0], h, -h]), cov)
        atoms = np.array([[1.0, 0.0], [0.5, -1.0]])

        def sampler(rng, n):
            return atoms[(rng.random(n) >= 0.3).astype(int)]

        exact = 0.3 * abs(atoms[0] @ h) + 0.7 * abs(atoms[1] @ h)
        (m, se), _ = rademacher_phi(H, 100.0, sampler, 1, 40_000, seed=3)
        assert abs(m - exact) <= 3 * se

    def test_multiplier_requires_source(self):
        H = FunctionClass(np.zeros((1, 1)), CovarianceStructure.identity(1))
        with pytest.raises(ConfigError):
            rademacher_phi(H, 1.0, lambda rng, n: rng.standard_normal((n, 1)), 4, 10,
                           with_multiplier=True)

    def test_multiplier_scales_with_noise(self):
        cov = CovarianceStructure.identity(3)
        H = difference_class(FunctionClass(l1_ball_vertices(3), cov))
        sampler = lambda rng, n: rng.standard_normal((n, 3))  # noqa: E731
        xi = lambda rng, n: 3.0 * rng.choice((-1.0, 1.0), n)  # noqa: E731
        (p, _), (px, _) = rademacher_phi(H, 10.0, sampler, 50, 2000, True, xi, seed=1)
        # |xi| = 3 and eps xi is again a sign: the multiplier version is exactly 3x in law
        assert px / p == pytest.approx(3.0, rel=0.08)


class TestFixedPoints:
    def test_singleton_at_floor(self):
        F = FunctionClass([[0.3, 0.3]], CovarianceStructure.identity(2))
        for kind in ("rQ", "rM", "lambda", "r_tilde"):
            fp = solve_fixed_point(kind, F, {"kappa": 0.25, "N": 100, "sigma": 1.0})
            assert fp.at_floor

    def test_saturated_localisation(self):
        cov = CovarianceStructure.identity(1)
        F = FunctionClass([[0.0], [2.0]], cov)
        # E sup over {0, ±2} localised at r >= 2 is A = 2 E|g|, so r_Q = A / kappa
        prob = make_problem("rQ", F, kappa=0.5, N=1, n_mc=200_000, seed=3)
        fp = prob.solve()
        assert fp.value == pytest.approx(2 * math.sqrt(2 / math.pi) / 0.5, rel=0.02)

    def test_segment_at_floor(self):
        F = segment_class(41)
        assert solve_fixed_point("rQ", F, {"kappa": 0.25, "N": 16, "n_mc": 4000}).at_floor
        # below the threshold the segment is never small enough
        fp = solve_fixed_point("rQ", F, {"kappa": 0.25, "N": 4, "n_mc": 4000})
        assert not fp.at_floor

    def test_defining_property(self):
        F = FunctionClass(l1_ball_lattice(3, 2), CovarianceStructure.identity(3))
        for kind in ("rQ", "rM", "lambda", "r_tilde"):
            prob = make_problem(kind, F, kappa=0.25, N=40, sigma=0.6, n_mc=3000, seed=1)
            fp = prob.solve()
            assert not fp.saturated
            assert prob.holds(2 * fp.value, slack=3)[0]
            if not fp.at_floor:
                assert not prob.holds(fp.value / 2, slack=-3)[0]

    def test_sigma_above_rq_implies_above_rm(self):
        grid_step = 10 ** (1 / 200)
        for res in (1, 2, 3):
            F = FunctionClass(l1_ball_lattice(3, res), CovarianceStructure.identity(3))
            prof = gaussian_profile(difference_class(F), F.cov, 2000, 0)
            r_q = make_problem("rQ", F, kappa=0.25, N=20, profile=prof).solve().value
            for sigma in (r_q, 1.5 * r_q, 4 * r_q):
                r_m = make_problem("rM", F, kappa=0.25, N=20, sigma=sigma, profile=prof).solve()
                assert r_m.value <= sigma * grid_step

    def test_unknown_kind(self):
        F = segment_class(5)
        with pytest.raises(ConfigError):
            make_problem("rX", F, N=10)
        with pytest.raises(ConfigError):
            make_problem("rM", F, N=10)

    def test_grid_and_theta(self):
        g = default_grid(2.0)
        assert g[0] == pytest.approx(2e-6) and g[-1] == pytest.approx(4.0)
        assert theta(4.0, 2.0) == 1.0
        assert theta(1e-3, 2.0) == pytest.approx(1 / math.sqrt(math.log(4000)))

    def test_problem_holds_slack(self):
        prob = FixedPointProblem("rQ", lambda r: (np.ones_like(r), np.full_like(r, 0.1)),
                                 lambda r: r, 1.0)
        assert not prob.holds(0.9)[0] and prob.holds(0.9, slack=3)[0]


class TestEntropyAndReport:
    def test_log_packing_trivial(self):
        F = FunctionClass([[0.0, 0.0], [1.0, 0.0]], CovarianceStructure.identity(2))
        assert log_packing(F, [2.0, 5.0]).tolist() == [0.0, 0.0]
        assert log_packing(F, [0.5])[0] == pytest.approx(math.log(2))

    def test_sudakov(self, calibration):
        rng = np.random.default_rng(31)
        F = FunctionClass(rng.standard_normal((100, 3)), CovarianceStructure.identity(3))
        grid = np.geomspace(F.diameter / 30, F.diameter, 8)
        tab = entropy_bounds(F, grid, n_mc=4000, seed=2)
        assert np.all(tab["log_m"] <= calibration["sudakov_slack"] * tab["sudakov"])

    def test_report_roundtrip(self, tmp_path):
        F = FunctionClass(l1_ball_lattice(2, 3), CovarianceStructure.identity(2))
        sampler = lambda rng, n: rng.standard_normal((n, 2))  # noqa: E731
        xi = lambda rng, n: rng.standard_normal(n)  # noqa: E731
        rep = complexity_report(F, N=30, sigma=0.5, n_mc=500, sampler=sampler, xi_sampler=xi,
                                n_mc_rad=100, with_entropy=True)
        assert set(rep.fixed_points) == {"rQ", "rM", "lambda", "r_tilde", "rQ_rad", "rM_rad"}
        assert all(fp.value > 0 for fp in rep.fixed_points.values())
        assert rep.critical_dim > 0 and rep.gamma2 > 0
        data = json.loads(rep.to_json(tmp_path / "c.json"))
        assert data["r_star"] == max(data["fixed_points"]["rQ"]["value"],
                                     data["fixed_points"]["rM"]["value"])
        rep.to_csv(tmp_path / "c.csv")
        header = (tmp_path / "c.csv").read_text().splitlines()[0]
        assert header == "r,EsupG,stderr,phiN,phiNxi,logM"
        assert "lambda_le_r_tilde" in rep.meta
