import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigengeo import (
    ExperimentConfig,
    bias_majorization_check,
    figure4_experiment,
    figure5_experiment,
    figure6_experiment,
    kl_risk,
    lbar,
    replication_rng,
    sample_product_sum,
)
from eigengeo.wishart_sim import (
    _sample_batch,
    figure4_config,
    figure5_config,
    figure6_config,
    kl_loss_diag,
    worker_count,
)


class TestSampling:
    def test_seed_determinism(self):
        sigma = np.diag([2.0, 1.0])
        a = sample_product_sum(sigma, 5, replication_rng(9, "s", 0)).matrix
        b = sample_product_sum(sigma, 5, replication_rng(9, "s", 0)).matrix
        assert np.array_equal(a, b)

    def test_distinct_replications_differ(self):
        sigma = np.eye(2)
        a = sample_product_sum(sigma, 5, replication_rng(9, "s", 0)).matrix
        b = sample_product_sum(sigma, 5, replication_rng(9, "s", 1)).matrix
        assert not np.array_equal(a, b)

    def test_mean_matches_population(self):
        sigma = np.diag([2.0, 1.0])
        S_batch = _sample_batch(sigma, 10, 100_000, 21, "test-mean")
        means = S_batch.mean(axis=0) / 10
        stderr = S_batch.std(axis=0, ddof=1) / 10 / np.sqrt(S_batch.shape[0])
        assert np.all(np.abs(means - sigma) < 3 * stderr + 1e-12)

    def test_minimal_n_is_spd_with_distinct_eigs(self):
        S = sample_product_sum(np.eye(2), 2, replication_rng(3, "s", 5))
        eigs = np.linalg.eigvalsh(S.matrix)
        assert eigs[0] > 0
        assert eigs[1] - eigs[0] > 1e-8

    def test_requires_enough_observations(self):
        with pytest.raises(ValueError):
            sample_product_sum(np.eye(3), 2, replication_rng(0, "s", 0))


class TestKlRisk:
    def test_oracle_estimator_has_zero_risk(self):
        sigma = np.diag([2.0, 1.0])
        res = kl_risk(lambda S, n: np.array([2.0, 1.0]), sigma, 10, 200, 0)
        assert res.mean == 0.0
        assert res.failures == 0

    def test_frame_estimator_beats_eigenvalues_at_identity(self):
        sigma = np.eye(2)
        res_lbar = kl_risk(lambda S, n: lbar(S, n), sigma, 10, 4000, 0)
        res_frame = kl_risk(
            lambda S, n: np.einsum("ii->i", np.asarray(S.matrix)) / n, sigma, 10, 4000, 0
        )
        assert res_lbar.mean > 1.2 * res_frame.mean

    def test_scale_invariance(self):
        # Identical substreams color into proportional samples, so the risk
        # of a scale-equivariant estimator is exactly scale-free.
        base = kl_risk(lambda S, n: lbar(S, n), np.diag([2.0, 1.0]), 10, 500, 8)
        for c in (0.5, 2.0):
            scaled = kl_risk(
                lambda S, n: lbar(S, n), c * np.diag([2.0, 1.0]), 10, 500, 8
            )
            assert_allclose(scaled.mean, base.mean, rtol=1e-12)

    def test_stderr_scales_with_reps(self):
        small = kl_risk(lambda S, n: lbar(S, n), np.eye(2), 10, 1000, 4)
        large = kl_risk(lambda S, n: lbar(S, n), np.eye(2), 10, 4000, 4)
        assert abs(large.stderr / small.stderr - 0.5) < 0.2 * 0.5

    def test_failures_counted(self):
        calls = {"n": 0}

        def flaky(S, n):
            calls["n"] += 1
            if calls["n"] % 3 == 0:
                from eigengeo.errors import NearDegenerateSpectrum

                raise NearDegenerateSpectrum("synthetic")
            return np.array([1.0, 1.0])

        res = kl_risk(flaky, np.eye(2), 10, 30, 0)
        assert res.failures == 10
        assert res.reps == 20


class TestKlLossDiag:
    def test_zero_at_truth(self):
        assert kl_loss_diag(np.array([2.0, 1.0]), np.array([2.0, 1.0])) == 0.0

    def test_matches_direct_formula(self):
        est = np.array([1.3, 0.6])
        lam = np.array([1.0, 0.8])
        ratio = est / lam
        want = ratio.sum() - np.log(ratio).sum() - 2
        assert_allclose(kl_loss_diag(est, lam), want)


class TestMajorization:
    def test_identity_p2(self):
        report = bias_majorization_check(np.eye(2), 10, 20_000, 3)
        assert report.holds_3sigma.all()
        assert report.margins[0] > 0.3
        assert report.trace_max_rel_dev < 1e-10

    def test_diag_p3(self):
        report = bias_majorization_check(np.diag([3.0, 2.0, 1.0]), 10, 20_000, 3)
        assert report.holds_3sigma.all()
        assert report.trace_max_rel_dev < 1e-10


class TestExperiments:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(p=2, n=1, reps=10, seed=0, grid=(1.0,), methods=("lbar",))
        with pytest.raises(ValueError):
            ExperimentConfig(p=2, n=10, reps=10, seed=0, grid=(), methods=("lbar",))

    def test_figure4_reference_shape(self):
        cfg = figure4_config(reps=400, seed=5)
        assert len(cfg.grid) == 50
        assert cfg.grid[0] == 1.0
        assert cfg.grid[-1] == 0.02
        report = figure4_experiment(cfg)
        assert report.param_name == "c"
        assert set(report.risks) == {"lbar", "gamma-frame"}
        frame_risks = np.array([r.mean for r in report.risks["gamma-frame"]])
        # Shared substreams make the frame-diagonal risk exactly flat in c.
        assert np.ptp(frame_risks) < 1e-12

    def test_figure4_determinism(self):
        cfg = figure4_config(reps=300, seed=11)
        a = figure4_experiment(cfg)
        b = figure4_experiment(cfg)
        for tag in a.methods:
            assert [r.mean for r in a.risks[tag]] == [r.mean for r in b.risks[tag]]

    def test_figure5_shape(self):
        cfg = figure5_config(reps=400, seed=5)
        report = figure5_experiment(cfg)
        assert report.param_name == "theta"
        assert report.param_values[0] == 0.0
        assert report.param_values[-1] == pytest.approx(np.pi / 2)
        lbar_risks = np.array([r.mean for r in report.risks["lbar"]])
        stderrs = np.array([r.stderr for r in report.risks["lbar"]])
        assert np.ptp(lbar_risks) < 6 * stderrs.max()

    def test_figure6_star_beats_lbar_when_close(self):
        cfg = figure6_config(reps=400, seed=5)
        report = figure6_experiment(cfg)
        last = report.diff[-1]  # c = 1.0, eigenvalues as close as possible
        assert last.mean > 2 * last.stderr

    def test_thread_cap_does_not_change_results(self, monkeypatch):
        cfg = figure6_config(reps=200, seed=2)
        monkeypatch.setenv("EIGENGEO_THREADS", "1")
        assert worker_count() == 1
        serial = figure6_experiment(cfg)
        monkeypatch.setenv("EIGENGEO_THREADS", "4")
        threaded = figure6_experiment(cfg)
        for tag in cfg.methods:
            assert [r.mean for r in serial.risks[tag]] == [
                r.mean for r in threaded.risks[tag]
            ]
