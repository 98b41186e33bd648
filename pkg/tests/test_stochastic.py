"""Distribution checks for the samplers: the three mobility/fading laws
plus reproducibility.  Monte Carlo tolerances are 3-sigma bands unless a
distribution-free bound is stated.
"""

import math

import numpy as np
import pytest

from udnee.errors import NumericDomainError
from udnee.params import ChannelParams, MobilityParams
from udnee.stochastic import (FadingState, brownian_step_std, csr_quadrat_statistic,
                              equivalent_bs_density, fading_marginal,
                              fading_transition_exact, homogeneity_check,
                              movement_ccdf, sample_ppp, step_brownian, step_fading)


class TestSamplePPP:
    def test_zero_density_empty(self):
        rng = np.random.default_rng(0)
        assert sample_ppp(0.0, 10.0, rng).shape == (0, 2)

    def test_points_inside_window(self):
        rng = np.random.default_rng(1)
        pts = sample_ppp(20.0, 10.0, rng)
        assert np.all(pts >= 0.0) and np.all(pts <= 10.0)

    def test_poisson_mean_count(self):
        # density 20 on a 10x10 window: mean count 2000 within 3 SE
        rng = np.random.default_rng(2)
        n_draws = 10_000
        counts = [sample_ppp(20.0, 10.0, rng).shape[0] for _ in range(n_draws)]
        mean = np.mean(counts)
        se = math.sqrt(2000.0 / n_draws)
        assert abs(mean - 2000.0) < 3.0 * se

    def test_reproducible(self):
        a = sample_ppp(5.0, 4.0, np.random.default_rng(7))
        b = sample_ppp(5.0, 4.0, np.random.default_rng(7))
        assert np.array_equal(a, b)

    def test_negative_density_rejected(self):
        with pytest.raises(NumericDomainError):
            sample_ppp(-1.0, 10.0, np.random.default_rng(0))


def walk_to_time(n_walkers, v, t, dt, seed):
    rng = np.random.default_rng(seed)
    mob = MobilityParams(v=v, dt=dt)
    pos = np.zeros((n_walkers, 2))
    steps = int(round(t / dt))
    for _ in range(steps):
        pos = step_brownian(pos, mob, rng)
    return pos


class TestBrownianMotion:
    def test_zero_velocity_fixed(self):
        rng = np.random.default_rng(0)
        pos = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = step_brownian(pos, MobilityParams(v=0.0, dt=0.1), rng)
        assert np.array_equal(out, pos)

    def test_coordinate_variance(self):
        # per-coordinate displacement variance at t=1, v=1 is 2/pi
        pos = walk_to_time(100_000, 1.0, 1.0, 0.02, seed=3)
        var = pos.var(axis=0)
        target = 2.0 / math.pi
        se = target * math.sqrt(2.0 / pos.shape[0])
        assert abs(var[0] - target) < 3.0 * se
        assert abs(var[1] - target) < 3.0 * se

    def test_movement_ccdf_matches_walkers(self):
        # empirical CCDF of |displacement| vs exp(-pi u^2 / (4 t v^2))
        v, t = 1.0, 1.0
        pos = walk_to_time(100_000, v, t, 0.01, seed=4)
        dist = np.hypot(pos[:, 0], pos[:, 1])
        us = np.linspace(0.0, 4.0, 200)
        empirical = np.array([(dist > u).mean() for u in us])
        theory = movement_ccdf(us, t, v)
        assert np.max(np.abs(empirical - theory)) < 0.01

    def test_step_std_formula(self):
        assert brownian_step_std(2.0, 0.25) == pytest.approx(
            math.sqrt(2.0 * 4.0 * 0.25 / math.pi))


class TestMovementCCDF:
    def test_zero_distance(self):
        assert movement_ccdf(0.0, 1.0, 1.0) == 1.0

    def test_infinite_distance(self):
        assert movement_ccdf(1e9, 1.0, 1.0) == pytest.approx(0.0, abs=1e-300)

    def test_reference_point(self):
        # u = 2/sqrt(pi), t = v = 1 makes the exponent exactly -1
        u = 2.0 / math.sqrt(math.pi)
        assert movement_ccdf(u, 1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_domain(self):
        with pytest.raises(NumericDomainError):
            movement_ccdf(1.0, 0.0, 1.0)
        with pytest.raises(NumericDomainError):
            movement_ccdf(1.0, 1.0, 0.0)


class TestEquivalentDensity:
    def test_unit_values(self):
        assert equivalent_bs_density(1.0, 1.0) == 0.25
        assert equivalent_bs_density(0.25, 1.0) == 1.0

    def test_ccdf_identity_on_grid(self):
        # exp(-lambda pi d^2) with lambda = 1/(4 t v^2) equals the movement CCDF
        for t in (0.3, 1.0, 2.5):
            for v in (0.5, 1.0, 3.0):
                lam = equivalent_bs_density(t, v)
                for d in np.linspace(0.0, 3.0, 13):
                    assert math.exp(-lam * math.pi * d * d) == pytest.approx(
                        movement_ccdf(float(d), t, v), rel=1e-12)

    def test_domain(self):
        with pytest.raises(NumericDomainError):
            equivalent_bs_density(-1.0, 1.0)


class TestFading:
    def test_fixed_point_no_noise(self):
        ch = ChannelParams(eta=0.0, mu_x=0.4, mu_y=0.2)
        state = FadingState(g=np.array([0.4, 0.2]))
        out = step_fading(state, ch, 0.05, np.random.default_rng(0))
        assert np.allclose(out.g, state.g)

    def test_deterministic_decay_rate(self):
        # eta = 0: g(t) = mu + (g0 - mu) e^{-t/2}
        ch = ChannelParams(eta=0.0, mu_x=1.0, mu_y=0.0)
        g0 = np.array([3.0, 2.0])
        state = FadingState(g=g0.copy())
        rng = np.random.default_rng(0)
        dt, t_end = 0.001, 2.0
        for _ in range(int(t_end / dt)):
            state = step_fading(state, ch, dt, rng)
        mu = np.array([1.0, 0.0])
        expected = mu + (g0 - mu) * math.exp(-t_end / 2.0)
        assert np.allclose(state.g, expected, rtol=1e-3)

    def test_stationary_variance(self):
        # long-run component variance of the OU law is eta^2
        ch = ChannelParams(eta=0.3, mu_x=0.5, mu_y=0.5)
        rng = np.random.default_rng(5)
        n = 20_000
        g = np.zeros((n, 2))
        state = FadingState(g=g)
        dt = 0.01
        for _ in range(int(12.0 / dt)):
            state = step_fading(state, ch, dt, rng)
        var = state.g.var(axis=0)
        target = ch.eta ** 2
        se = target * math.sqrt(2.0 / n)
        assert abs(var[0] - target) < 3.0 * se + 0.01 * target  # EM step bias allowance

    def test_em_matches_exact_transition_moments(self):
        ch = ChannelParams(eta=0.4, mu_x=0.3, mu_y=0.6)
        rng = np.random.default_rng(6)
        n = 40_000
        state = FadingState(g=np.zeros((n, 2)))
        dt, t_end = 0.01, 1.0
        for _ in range(int(t_end / dt)):
            state = step_fading(state, ch, dt, rng)
        exact = fading_transition_exact(np.zeros((n, 2)), ch, t_end,
                                        np.random.default_rng(7))
        for axis in (0, 1):
            m_em, m_ex = state.g[:, axis].mean(), exact[:, axis].mean()
            v_em, v_ex = state.g[:, axis].var(), exact[:, axis].var()
            se_m = ch.eta / math.sqrt(n)
            assert abs(m_em - m_ex) < 4.0 * se_m
            assert abs(v_em - v_ex) < 4.0 * v_ex * math.sqrt(2.0 / n) + 0.01 * v_ex

    def test_mean_converges_to_drift(self):
        ch = ChannelParams(eta=0.2, mu_x=0.7, mu_y=0.1)
        rng = np.random.default_rng(8)
        sample = fading_marginal(ch, 40.0, rng, size=20_000)
        se = ch.eta / math.sqrt(20_000)
        assert abs(sample[:, 0].mean() - 0.7) < 3.0 * se
        assert abs(sample[:, 1].mean() - 0.1) < 3.0 * se

    def test_marginal_variance_matches_transition(self):
        ch = ChannelParams(eta=0.5, mu_x=0.0, mu_y=0.0)
        rng = np.random.default_rng(9)
        t = 0.7
        sample = fading_marginal(ch, t, rng, size=50_000)
        target = ch.eta ** 2 * (1.0 - math.exp(-t))
        assert sample[:, 0].var() == pytest.approx(target, rel=0.03)


class TestHomogeneity:
    def test_uniform_points_pass(self):
        rng = np.random.default_rng(10)
        pts = sample_ppp(2.0, 10.0, rng)
        res = homogeneity_check(pts, pts, 10.0)
        assert res.passed

    def test_displaced_ppp_passes(self):
        # Brownian displacement on the torus preserves homogeneity
        failures = 0
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            pts = sample_ppp(2.0, 10.0, rng)
            moved = pts.copy()
            mob = MobilityParams(v=2.0, dt=0.05)
            for _ in range(40):
                moved = step_brownian(moved, mob, rng)
            moved %= 10.0
            if not homogeneity_check(pts, moved, 10.0).passed:
                failures += 1
        assert failures <= 1

    def test_clustered_points_rejected(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(0.0, 1.5, size=(200, 2))  # everything in one corner
        res = homogeneity_check(pts, pts, 10.0)
        assert not res.passed

    def test_empty_rejected(self):
        with pytest.raises(NumericDomainError):
            homogeneity_check(np.empty((0, 2)), np.empty((0, 2)), 10.0)

    def test_statistic_dof(self):
        rng = np.random.default_rng(12)
        pts = sample_ppp(3.0, 10.0, rng)
        _, dof = csr_quadrat_statistic(pts, 10.0, quadrats=5)
        assert dof == 24
