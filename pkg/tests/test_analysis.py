import math

import numpy as np
import pytest

from varexp import (ExponentSpec, ModelSpec, SimConfig, diffusion_range,
                    simulate_batch, simulate_coupled, simulate_coupled_stats,
                    strong_error, strong_error_from_stats, sup_second_moment,
                    terminal_stats)


@pytest.fixture(scope="module")
def coupled_pair(gbm_model, p1_model):
    cfg = SimConfig(t_horizon=1.0, dt=0.005, n_base_paths=500, seed=71)
    return simulate_coupled([gbm_model, p1_model], cfg, ["gbm", "p1"])


class TestStrongError:
    def test_identical_batches_zero(self, coupled_pair):
        a = coupled_pair[0]
        rep = strong_error(a, a)
        assert rep.strong_error == 0.0
        assert rep.ci_half_width == 0.0

    def test_symmetry(self, coupled_pair):
        a, b = coupled_pair
        assert strong_error(a, b).strong_error == strong_error(b, a).strong_error

    def test_report_fields(self, coupled_pair):
        a, b = coupled_pair
        rep = strong_error(a, b)
        assert rep.strong_error > 0
        assert rep.lambda_obs <= rep.r_obs
        assert rep.lambda_obs == min(a.values.min(), b.values.min())
        assert rep.r_obs == max(a.values.max(), b.values.max())
        assert rep.n_paths == a.values.shape[0]

    def test_shape_mismatch(self, coupled_pair, gbm_model):
        other = simulate_batch(gbm_model, SimConfig(t_horizon=1.0, dt=0.01,
                                                    n_base_paths=10, seed=71))
        with pytest.raises(ValueError):
            strong_error(coupled_pair[0], other)

    def test_uncoupled_batches_rejected(self, coupled_pair, gbm_model):
        cfg = SimConfig(t_horizon=1.0, dt=0.005, n_base_paths=500, seed=72)
        other = simulate_batch(gbm_model, cfg)
        with pytest.raises(ValueError):
            strong_error(coupled_pair[0], other)

    def test_stats_path_matches_dense(self, gbm_model, p1_model):
        cfg = SimConfig(t_horizon=0.5, dt=0.01, n_base_paths=100, seed=13)
        dense = simulate_coupled([gbm_model, p1_model], cfg)
        stats = simulate_coupled_stats([gbm_model, p1_model], cfg)
        r1 = strong_error(dense[1], dense[0])
        r2 = strong_error_from_stats(stats, 1)
        assert r1.strong_error == r2.strong_error
        assert r1.ci_half_width == r2.ci_half_width
        assert r1.lambda_obs == r2.lambda_obs
        assert r1.r_obs == r2.r_obs

    def test_error_shrinks_with_deviation(self, gbm_model):
        # scaling the rational-decay coefficient down shrinks the coupled
        # error monotonically on matched seeds
        cfg = SimConfig(t_horizon=1.0, dt=0.01, n_base_paths=200, seed=55)
        errors = []
        for c in (1e-3, 1e-4, 1e-5):
            m = ModelSpec(mu=0.05, sigma=0.2, exponent=ExponentSpec.rational_decay(c))
            batches = simulate_coupled([gbm_model, m], cfg)
            errors.append(strong_error(batches[1], batches[0]).strong_error)
        assert errors[0] > errors[1] > errors[2]


class TestSupSecondMoment:
    def test_deterministic_growth(self):
        m = ModelSpec(mu=0.05, sigma=0.0, exponent=ExponentSpec.constant(1.0))
        cfg = SimConfig(t_horizon=1.0, dt=0.01, n_base_paths=4, seed=3)
        b = simulate_batch(m, cfg)
        assert sup_second_moment(b) == pytest.approx(math.exp(0.1), rel=1e-10)

    def test_constant_path(self):
        m = ModelSpec(mu=0.0, sigma=0.0, exponent=ExponentSpec.constant(1.0))
        cfg = SimConfig(t_horizon=1.0, dt=0.01, n_base_paths=4, seed=3)
        assert sup_second_moment(simulate_batch(m, cfg)) == pytest.approx(1.0, rel=1e-12)

    def test_dominates_terminal_square(self, coupled_pair):
        b = coupled_pair[0]
        assert sup_second_moment(b) >= float(np.mean(b.terminal**2))


class TestTerminalStats:
    def test_gbm_moments(self, gbm_model):
        cfg = SimConfig(t_horizon=1.0, dt=0.005, n_base_paths=10000, seed=77)
        ts = terminal_stats(simulate_batch(gbm_model, cfg))
        se = math.sqrt(ts.variance / 20000)
        assert abs(ts.mean - math.exp(0.05)) < 3 * se
        # lognormal variance e^{2 mu}(e^{sigma^2}-1), frozen: 0.0451029
        assert ts.variance == pytest.approx(0.0451029, rel=0.10)

    def test_histogram_shape(self, coupled_pair):
        ts = terminal_stats(coupled_pair[0])
        assert ts.counts.sum() == coupled_pair[0].values.shape[0]
        assert len(ts.bin_edges) == 65
        assert ts.bin_edges[0] == ts.min and ts.bin_edges[-1] == ts.max

    def test_point_mass(self):
        m = ModelSpec(mu=0.0, sigma=0.0, exponent=ExponentSpec.constant(1.0))
        cfg = SimConfig(t_horizon=1.0, dt=0.1, n_base_paths=8, seed=3)
        ts = terminal_stats(simulate_batch(m, cfg))
        assert ts.variance == 0.0
        assert ts.counts.sum() == 16


class TestDiffusionRange:
    def test_identity_map(self, gbm_model, coupled_pair):
        lo, hi = diffusion_range(coupled_pair[0], gbm_model)
        assert lo == coupled_pair[0].values.min()
        assert hi == coupled_pair[0].values.max()

    def test_unit_constant_path(self, p1_model):
        m = ModelSpec(mu=0.0, sigma=0.0, exponent=p1_model.exponent)
        cfg = SimConfig(t_horizon=1.0, dt=0.1, n_base_paths=2, seed=3)
        lo, hi = diffusion_range(simulate_batch(m, cfg), m)
        assert lo == pytest.approx(1.0, abs=1e-12)
        assert hi == pytest.approx(1.0, abs=1e-12)

    def test_finite_and_ordered(self, coupled_pair, p1_model):
        lo, hi = diffusion_range(coupled_pair[1], p1_model)
        assert 0 < lo < hi < math.inf
