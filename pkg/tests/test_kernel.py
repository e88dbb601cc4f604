import math

import numpy as np
import pytest

from pacbound.kernel import (KernelError, KernelSpec, c0_heuristic, gram,
                             median_heuristic, rbf_eval)


class TestEval:
    def test_zero_distance(self):
        spec = KernelSpec(1.7)
        x = np.array([0.3, -2.0, 5.0])
        assert rbf_eval(spec, x, x) == 1.0

    def test_closed_form_at_characteristic_distance(self):
        # ||x - y||^2 = 2 sigma^2  ->  exp(-1)
        spec = KernelSpec(2.0)
        x, y = np.array([0.0]), np.array([math.sqrt(8.0)])
        assert rbf_eval(spec, x, y) == pytest.approx(math.exp(-1.0), abs=1e-15)

    def test_wide_kernel_limit(self):
        spec = KernelSpec(1e8)
        assert abs(rbf_eval(spec, np.array([1.0, 2.0]), np.array([3.0, -1.0])) - 1.0) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(KernelError):
            rbf_eval(KernelSpec(1.0), np.array([1.0]), np.array([1.0, 2.0]))

    def test_symmetry(self):
        spec = KernelSpec(0.7)
        x, y = np.array([1.0, 2.0]), np.array([-0.5, 0.3])
        assert rbf_eval(spec, x, y) == rbf_eval(spec, y, x)


class TestGram:
    def test_single_row(self):
        g = gram(KernelSpec(1.0), np.array([[2.0, 3.0]]))
        assert g.tolist() == [[1.0]]

    def test_duplicate_rows(self):
        g = gram(KernelSpec(1.0), np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]]))
        assert g[0, 1] == 1.0 and g[1, 0] == 1.0

    def test_matches_eval_exactly(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((3, 4))
        spec = KernelSpec(1.3)
        g = gram(spec, x)
        for i in range(3):
            for j in range(3):
                assert g[i, j] == rbf_eval(spec, x[i], x[j])  # 0 ulp

    def test_symmetric_unit_diagonal_psd(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((12, 3))
        g = gram(KernelSpec(0.9), x)
        assert np.array_equal(g, g.T)
        assert np.all(np.diag(g) == 1.0)
        assert np.all(g > 0.0) and np.all(g <= 1.0)
        assert np.linalg.eigvalsh(g)[0] >= -1e-8


class TestMedianHeuristic:
    def test_three_points_on_line(self):
        x = np.array([[0.0], [1.0], [3.0]])
        assert median_heuristic(x) == 2.0

    def test_two_points(self):
        assert median_heuristic(np.array([[0.0, 0.0], [3.0, 4.0]])) == 5.0

    def test_lower_median_for_even_pair_count(self):
        # 4 points on a line -> 6 pairwise distances, lower median = 3rd smallest
        x = np.array([[0.0], [1.0], [2.0], [10.0]])
        d = sorted([1, 2, 10, 1, 9, 8])
        assert median_heuristic(x) == d[2]

    def test_identical_points_error(self):
        with pytest.raises(KernelError):
            median_heuristic(np.ones((5, 2)))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((20, 3))
        perm = rng.permutation(20)
        assert median_heuristic(x) == median_heuristic(x[perm])

    def test_gaussian_concentration(self):
        # pairwise distances of standard normals concentrate near sqrt(2 d)
        target = math.sqrt(2 * 8)
        for seed in range(50):
            x = np.random.default_rng(seed).standard_normal((100, 8))
            assert abs(median_heuristic(x) - target) < 0.15 * target

    def test_subsampling_kicks_in(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((150, 2))
        full = median_heuristic(x)
        sub = median_heuristic(x, max_rows=50, seed=3)
        assert abs(sub - full) < 0.3 * full


class TestC0Heuristic:
    def test_identical_points_error(self):
        with pytest.raises(KernelError):
            c0_heuristic(KernelSpec(1.0), np.ones((4, 2)))

    def test_two_point_closed_form(self):
        x = np.array([[0.0], [2.0]])
        spec = KernelSpec(1.5)
        g = rbf_eval(spec, x[0], x[1])
        assert c0_heuristic(spec, x) == pytest.approx(2.0 / (1.0 - g), rel=1e-12)

    def test_far_apart_limit(self):
        n = 6
        x = np.arange(n, dtype=float)[:, None] * 1e4
        c0 = c0_heuristic(KernelSpec(1.0), x)
        assert c0 == pytest.approx(n / (n - 1), rel=1e-9)

    def test_always_at_least_one(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((15, 3))
        assert c0_heuristic(KernelSpec(2.0), x) > 1.0

    def test_monotone_in_spread(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((25, 3))
        centered = x - x.mean(axis=0)
        spec = KernelSpec(1.0)
        shrunk = x.mean(axis=0) + 0.5 * centered
        assert c0_heuristic(spec, shrunk) > c0_heuristic(spec, x)


def test_kernel_spec_validation():
    with pytest.raises(KernelError):
        KernelSpec(0.0)
    with pytest.raises(KernelError):
        KernelSpec(-1.0)
