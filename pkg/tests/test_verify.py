import math

import numpy as np
import pytest

from pacbound import KernelSpec
from pacbound.bounds import concentration_radius
from pacbound.verify import (BoundedMeanMap, StabilityProbe, VerifyError,
                             check_vector_mcdiarmid, check_weight_concentration,
                             estimate_beta, two_cluster_dataset,
                             two_cluster_sample)


class TestSyntheticGenerator:
    def test_shapes_and_labels(self):
        ds = two_cluster_dataset(0, 100, d=4, separation=2.0)
        assert ds.features.shape == (100, 4)
        assert set(np.unique(ds.labels)) == {-1.0, 1.0}

    def test_deterministic(self):
        a = two_cluster_dataset(3, 50)
        b = two_cluster_dataset(3, 50)
        assert np.array_equal(a.features, b.features)

    def test_separation_moves_clusters(self):
        rng = np.random.default_rng(0)
        x, y = two_cluster_sample(rng, 4000, d=4, separation=3.0)
        mu_plus = x[y == 1].mean(axis=0)
        mu_minus = x[y == -1].mean(axis=0)
        assert np.linalg.norm(mu_plus - mu_minus) == pytest.approx(3.0, abs=0.15)


class TestEstimateBeta:
    def test_identical_replacement_gives_zero(self):
        # replacing an example by an identical copy: the union-Gram
        # quadratic form of the coefficient difference is exactly zero
        from pacbound.kernel import gram
        from pacbound.svm import span_norm_sq
        rng = np.random.default_rng(1)
        x = rng.standard_normal((6, 3))
        pts = np.vstack([x, x[2]])   # x_2 duplicated as its own replacement
        a = rng.standard_normal(6)
        coeffs = np.concatenate([a - a, [0.0]])
        coeffs[2] = a[2]
        coeffs[6] = -a[2]
        assert abs(span_norm_sq(coeffs, gram(KernelSpec(1.0), pts))) < 1e-12

    def test_inequality_small_run(self):
        probe = StabilityProbe(n=20, trials=30, seed=5)
        rep = estimate_beta(probe, lam=1.0, kernel=KernelSpec(2.0))
        assert rep.passed and rep.measured <= rep.bound
        assert rep.bound == 2.0 / (1.0 * 20)

    def test_bound_scales_inversely_with_lambda(self):
        probe = StabilityProbe(n=20, trials=10, seed=6)
        r1 = estimate_beta(probe, lam=1.0, kernel=KernelSpec(2.0))
        r10 = estimate_beta(probe, lam=10.0, kernel=KernelSpec(2.0))
        assert r10.bound == pytest.approx(r1.bound / 10.0, rel=1e-12)
        assert r10.measured <= r10.bound

    def test_probe_validation(self):
        with pytest.raises(VerifyError):
            StabilityProbe(n=1, trials=10)
        with pytest.raises(VerifyError):
            StabilityProbe(n=10, trials=10, replacements=2)


class TestWeightConcentration:
    def test_insufficient_trials_rejected(self):
        with pytest.raises(VerifyError):
            check_weight_concentration(StabilityProbe(n=20, trials=10), 1.0, 0.1)

    def test_small_run_within_radius(self):
        rep = check_weight_concentration(StabilityProbe(n=30, trials=200, seed=2),
                                         lam=1.0, delta=0.1)
        assert rep.passed
        assert rep.bound == pytest.approx(concentration_radius(30, 1.0, 1.0, 0.1))

    def test_huge_lambda_degenerates(self):
        rep = check_weight_concentration(StabilityProbe(n=30, trials=200, seed=3),
                                         lam=1e6, delta=0.1)
        assert rep.measured < 1e-4
        assert rep.passed

    def test_report_dict_schema(self):
        rep = check_weight_concentration(StabilityProbe(n=30, trials=200, seed=4),
                                         lam=1.0, delta=0.1)
        d = rep.to_dict()
        for key in ("quantity", "measured", "bound", "trials", "seed", "pass"):
            assert key in d


class TestVectorMcdiarmid:
    def test_constant_map_zero_deviation(self):
        class ConstantMap(BoundedMeanMap):
            def weights(self):
                w, b = super().weights()
                return np.zeros_like(w), np.zeros_like(b)

        rep = check_vector_mcdiarmid(StabilityProbe(n=25, trials=50, seed=0),
                                     delta=0.05, f_spec=ConstantMap())
        assert rep.measured == 0.0 and rep.passed

    def test_pinned_bound_value(self):
        rep = check_vector_mcdiarmid(StabilityProbe(n=100, trials=300, seed=1),
                                     delta=0.05)
        assert rep.bound == pytest.approx(0.4447747, abs=1e-6)
        assert rep.passed

    def test_mean_deviation_under_mean_bound(self):
        rep = check_vector_mcdiarmid(StabilityProbe(n=100, trials=300, seed=2),
                                     delta=0.05)
        assert rep.details["mean_deviation"] <= rep.details["mean_bound"]
        assert rep.details["mean_bound"] == pytest.approx(0.2, abs=1e-12)

    def test_exact_mean_is_correct(self):
        # Monte Carlo cross-check of the closed-form mean of the testbed map
        spec = BoundedMeanMap(d=4)
        rng = np.random.default_rng(9)
        x, _ = two_cluster_sample(rng, 200_000, d=4, separation=2.0)
        mc = spec.feature(x).mean(axis=0)
        assert np.max(np.abs(mc - spec.exact_mean(2.0))) < 5e-3


def test_sqrt_n_trend_of_concentration():
    small = check_weight_concentration(StabilityProbe(n=100, trials=200, seed=7),
                                       lam=1.0, delta=0.1)
    large = check_weight_concentration(StabilityProbe(n=400, trials=200, seed=8),
                                       lam=1.0, delta=0.1)
    # 1/sqrt(n) trend, with slack for the quantile's sampling noise
    slack = 3.0 * small.measured / math.sqrt(2 * 200)
    assert large.measured <= small.measured + slack
