import math

import numpy as np
import pytest
from scipy import integrate, stats

from reslevy.errors import ConfigurationError, DomainError
from reslevy.levy_models import make_model, tail_neg
from reslevy.path_engine import (
    SimParams,
    auto_relative_cutoff,
    first_passage_below,
    killed_batch,
    sample_grid,
    sample_path,
)


class TestSimParams:
    def test_defaults(self):
        sim = SimParams()
        assert sim.time_budget == pytest.approx(1e3)
        assert sim.creep_tol == pytest.approx(1e-3)

    @pytest.mark.parametrize("kwargs", [dict(grid_dt=0.0), dict(truncation_delta=-1.0), dict(relative_truncation=1.5), dict(budget=0.0)])
    def test_validation(self, kwargs):
        with pytest.raises(ConfigurationError):
            SimParams(**kwargs)

    def test_auto_cutoff(self, stable_sub, cp_symmetric):
        assert auto_relative_cutoff(stable_sub) == pytest.approx(1e-6)
        assert auto_relative_cutoff(cp_symmetric) is None


class TestKilledBatch:
    def test_rejects_bad_inputs(self, cp_symmetric):
        rng = np.random.default_rng(0)
        with pytest.raises(DomainError):
            killed_batch(cp_symmetric, [1.0, 0.0], 1.0, SimParams(), rng)
        with pytest.raises(ConfigurationError):
            killed_batch(cp_symmetric, [1.0], np.inf, SimParams(), rng)
        with pytest.raises(ConfigurationError):
            killed_batch(cp_symmetric, [1.0, 2.0], 1.0, SimParams(), rng, record=[])

    def test_relative_cutoff_rejected_with_gaussian_part(self):
        m = make_model("stable", alpha=1.5, rhobar=0.5)
        with pytest.raises(ConfigurationError):
            killed_batch(m, [1.0], 1.0, SimParams(relative_truncation=1e-3), np.random.default_rng(0))

    def test_deterministic_creep(self):
        m = make_model("cp", b=-2.0)
        pb = killed_batch(m, [1.0, 3.0], 10.0, SimParams(), np.random.default_rng(0))
        np.testing.assert_allclose(pb.tau, [0.5, 1.5])
        assert pb.crept.all() and np.all(pb.pre == 0) and np.all(pb.post == 0)

    def test_timeout_state(self):
        m = make_model("cp", b=1.0)
        pb = killed_batch(m, [1.0], 2.5, SimParams(), np.random.default_rng(0))
        assert not pb.hit[0] and pb.x_end[0] == pytest.approx(3.5)

    def test_exponential_undershoot(self, cp_symmetric):
        # memorylessness: the overshoot below 0 is Exp(mu_down)
        pb = killed_batch(cp_symmetric, np.full(10_000, 1.0), 1e5, SimParams(), np.random.default_rng(1))
        assert pb.hit.mean() > 0.99
        assert stats.ks_1samp(-pb.post[pb.hit], stats.expon.cdf).pvalue > 0.01
        assert np.all(pb.pre[pb.hit] > 0)

    def test_stable_subordinator_passage_time(self, stable_sub):
        # tau <= t iff S_t > x, and S_t = t^2 S_1 with S_1 Lévy(scale 1/2)
        sim = SimParams(relative_truncation=auto_relative_cutoff(stable_sub))
        pb = killed_batch(stable_sub, np.full(10_000, 1.0), 1e6, sim, np.random.default_rng(2))
        cdf = lambda t: stats.levy(scale=0.5).sf(1.0 / np.maximum(t, 1e-300) ** 2)
        assert stats.ks_1samp(pb.tau, cdf).pvalue > 0.01

    def test_brownian_passage_probability(self):
        m = make_model("bcp", sigma=1.0)
        pb = killed_batch(m, np.full(20_000, 1.0), 1.0, SimParams(grid_dt=1e-2), np.random.default_rng(3))
        p = pb.hit.mean()
        ref = 2 * stats.norm.sf(1.0)
        assert abs(p - ref) < 4 * math.sqrt(ref * (1 - ref) / 20_000)
        assert np.all(pb.crept[pb.hit])

    def test_integral_matches_quadrature_of_recorded_path(self):
        m = make_model("cp", b=0.5, lam_up=1.0, lam_down=3.0, mu_down=1.5)
        rec = []
        pb = killed_batch(m, [2.0], 50.0, SimParams(), np.random.default_rng(4), integrate=True, record=rec)
        assert len(rec) > 2
        total, t_prev, y_prev = 0.0, 0.0, 2.0
        for node in rec:
            h = node.t - t_prev
            total += integrate.quad(lambda s: tail_neg(m, y_prev + 0.5 * s), 0, h)[0]
            t_prev, y_prev = node.t, node.right
        assert pb.integral[0] == pytest.approx(total, rel=1e-10)

    def test_reproducible(self, cp_symmetric):
        a = killed_batch(cp_symmetric, np.full(100, 1.0), 50.0, SimParams(), np.random.default_rng(7), integrate=True)
        b = killed_batch(cp_symmetric, np.full(100, 1.0), 50.0, SimParams(), np.random.default_rng(7), integrate=True)
        np.testing.assert_array_equal(a.tau, b.tau)
        np.testing.assert_array_equal(a.integral, b.integral)


class TestFirstPassage:
    def test_level_shift(self):
        m = make_model("cp", b=-1.0)
        fp = first_passage_below(m, 3.0, np.random.default_rng(0), level=1.0)
        assert fp.tau == pytest.approx(2.0) and fp.crept and fp.post == pytest.approx(1.0)

    def test_start_must_exceed_level(self, cp_symmetric):
        with pytest.raises(DomainError):
            first_passage_below(cp_symmetric, 1.0, np.random.default_rng(0), level=1.0)


class TestSamplePath:
    def test_skeleton_consistency(self, cp_symmetric):
        path = sample_path(cp_symmetric, 1.0, 5.0, np.random.default_rng(0), grid_dt=0.1)
        assert path.times[0] == 0 and path.times[-1] == 5.0
        assert np.all(np.diff(path.times) > 0)
        jumps = path.values - path.left_values
        np.testing.assert_allclose(jumps[path.jump_indices], [j.size for j in path.jumps])

    def test_grid_marginal_gamma(self, gamma_sub):
        g = sample_grid(gamma_sub, 0.0, 1.0, 5_000, np.random.default_rng(1), grid_dt=0.05, truncation_delta=1e-8)
        assert g.shape == (5_000, 21)
        # -X_1 is Gamma(1, 1) up to jumps below 1e-8
        assert stats.ks_1samp(-g[:, -1], stats.expon.cdf).pvalue > 0.01


class TestRefinement:
    """Halving a discretisation knob must not move estimates beyond their noise."""

    def test_relative_cutoff_halving(self, stable_sub):
        eta = auto_relative_cutoff(stable_sub)
        probs = []
        for k, cut in enumerate((eta, eta / 2)):
            pb = killed_batch(stable_sub, np.full(20_000, 1.0), 1.0, SimParams(relative_truncation=cut), np.random.default_rng(10 + k))
            probs.append(pb.hit.mean())
        p = 0.5 * (probs[0] + probs[1])
        se = math.sqrt(2 * p * (1 - p) / 20_000)
        assert abs(probs[0] - probs[1]) < 4 * se
        ref = stats.levy(scale=0.5).sf(1.0)  # P(S_1 > 1)
        assert abs(probs[1] - ref) < 4 * se

    def test_grid_step_halving_moves_towards_exact(self):
        m = make_model("bcp", sigma=1.0)
        ref = 2 * stats.norm.sf(1.0)
        errs = []
        for k, dt in enumerate((4e-2, 1e-2, 2.5e-3)):
            pb = killed_batch(m, np.full(40_000, 1.0), 1.0, SimParams(grid_dt=dt), np.random.default_rng(20 + k))
            errs.append(abs(pb.hit.mean() - ref))
        se = math.sqrt(ref * (1 - ref) / 40_000)
        assert errs[2] < errs[0] + 2 * se
        assert errs[2] < 4 * se + 0.6 * math.sqrt(2.5e-3) * stats.norm.pdf(1.0) * 2
