"""Kernel evaluation and centering against closed forms and a feature-map oracle."""

import numpy as np
import pytest

from rkcca import (
    DegenerateSampleError,
    GramMatrix,
    KernelSpec,
    ValidationError,
    center_test,
    center_uniform,
    center_weighted,
    cross_gram,
    gram,
    median_bandwidth,
    uniform_weights,
)


def poly2_features(x):
    """Exact finite feature map of the kernel (x.y + 1)^2: vec(z z^T) with z = [x, 1]."""
    z = np.hstack([x, np.ones((x.shape[0], 1))])
    return np.einsum("ni,nj->nij", z, z).reshape(x.shape[0], -1)


def poly2_gram(x, y=None):
    y = x if y is None else y
    return (x @ y.T + 1.0) ** 2


def random_weights(rng, n):
    w = rng.uniform(0.1, 1.0, n)
    return w / w.sum()


class TestMedianBandwidth:
    def test_three_points(self):
        # pairwise distances {1, 2, 3} -> median 2
        x = np.array([[0.0], [1.0], [3.0]])
        assert median_bandwidth(x) == 2.0

    def test_identical_points_degenerate(self):
        x = np.ones((4, 2))
        with pytest.raises(DegenerateSampleError, match="zero median distance"):
            median_bandwidth(x)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((100, 5))
        dists = [
            np.sqrt(np.sum((x[i] - x[j]) ** 2))
            for i in range(100)
            for j in range(i + 1, 100)
        ]
        assert median_bandwidth(x) == pytest.approx(np.median(dists), rel=1e-12)

    def test_even_count_takes_midpoint(self):
        # 4 points -> 6 distances; median = mean of the two central values
        x = np.array([[0.0], [1.0], [2.0], [10.0]])
        d = sorted([1, 2, 10, 1, 9, 8])
        assert median_bandwidth(x) == pytest.approx((d[2] + d[3]) / 2)


class TestGram:
    def test_gaussian_unit_diagonal(self):
        rng = np.random.default_rng(1)
        g = gram(rng.standard_normal((30, 4)), KernelSpec("gaussian"))
        assert np.all(np.diag(g.values) == 1.0)
        assert g.centering == "raw"
        assert np.all(g.values > 0) and np.all(g.values <= 1.0)

    def test_gaussian_closed_form_offdiagonal(self):
        sigma = 0.7
        x = np.array([[0.0], [sigma * np.sqrt(2.0)]])
        g = gram(x, KernelSpec("gaussian", bandwidth=sigma))
        assert g.values[0, 1] == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_linear_kernel_is_dot_product(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((10, 3))
        g = gram(x, KernelSpec("linear"))
        assert np.allclose(g.values, x @ x.T, atol=1e-12)

    def test_rejects_non_finite(self):
        x = np.array([[0.0, 1.0], [np.nan, 2.0]])
        with pytest.raises(ValidationError):
            gram(x, KernelSpec("gaussian", bandwidth=1.0))

    def test_rejects_single_row(self):
        with pytest.raises(ValidationError):
            gram(np.ones((1, 3)), KernelSpec("linear"))

    def test_bandwidth_must_be_positive(self):
        with pytest.raises(ValidationError):
            KernelSpec("gaussian", bandwidth=0.0)

    def test_psd_up_to_tolerance(self):
        rng = np.random.default_rng(3)
        g = gram(rng.standard_normal((40, 6)), KernelSpec("gaussian"))
        eig = np.linalg.eigvalsh(g.values)
        assert eig.min() >= -1e-8 * g.n


class TestCentering:
    def test_single_point_centers_to_zero(self):
        g = GramMatrix(np.array([[5.0]]))
        assert center_uniform(g).values == pytest.approx(np.zeros((1, 1)))

    def test_uniform_row_sums_vanish(self):
        rng = np.random.default_rng(4)
        g = gram(rng.standard_normal((25, 3)), KernelSpec("gaussian"))
        c = center_uniform(g)
        assert np.max(np.abs(c.values.sum(axis=0))) < 1e-10 * g.n
        assert np.max(np.abs(c.values.sum(axis=1))) < 1e-10 * g.n

    def test_weighted_with_uniform_equals_uniform(self):
        rng = np.random.default_rng(5)
        g = gram(rng.standard_normal((20, 4)), KernelSpec("gaussian"))
        cu = center_uniform(g).values
        cw = center_weighted(g, uniform_weights(20)).values
        assert np.max(np.abs(cu - cw)) < 1e-12

    def test_point_mass_zeroes_first_row_and_column(self):
        rng = np.random.default_rng(6)
        g = gram(rng.standard_normal((8, 2)), KernelSpec("gaussian"))
        w = np.zeros(8)
        w[0] = 1.0
        c = center_weighted(g, w).values
        assert np.max(np.abs(c[0])) < 1e-12
        assert np.max(np.abs(c[:, 0])) < 1e-12

    def test_weighted_annihilates_weights(self):
        rng = np.random.default_rng(7)
        g = gram(rng.standard_normal((20, 3)), KernelSpec("gaussian"))
        w = random_weights(rng, 20)
        assert np.max(np.abs(center_weighted(g, w).values @ w)) < 1e-10

    def test_weighted_matches_feature_map_oracle(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((20, 3))
        w = random_weights(rng, 20)
        g = GramMatrix(poly2_gram(x))
        phi = poly2_features(x)
        phi_c = phi - w @ phi
        oracle = phi_c @ phi_c.T
        assert np.max(np.abs(center_weighted(g, w).values - oracle)) < 1e-10

    def test_centering_preserves_psd(self):
        rng = np.random.default_rng(9)
        g = gram(rng.standard_normal((30, 5)), KernelSpec("gaussian"))
        w = random_weights(rng, 30)
        eig = np.linalg.eigvalsh(center_weighted(g, w).values)
        assert eig.min() >= -1e-8 * g.n

    def test_rejects_wrong_weight_length(self):
        g = gram(np.eye(5), KernelSpec("linear"))
        with pytest.raises(ValidationError):
            center_weighted(g, np.full(4, 0.25))

    def test_rejects_already_centered(self):
        g = gram(np.eye(5), KernelSpec("linear"))
        with pytest.raises(ValidationError):
            center_uniform(center_uniform(g))


class TestCenterTest:
    def test_training_set_reproduces_uniform_centering(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((15, 3))
        spec = KernelSpec("gaussian", bandwidth=1.3)
        g = gram(x, spec)
        kt = cross_gram(x, x, spec)
        out = center_test(kt, g, uniform_weights(15))
        assert np.max(np.abs(out - center_uniform(g).values)) < 1e-12

    def test_single_training_point_matches_weighted_row(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((12, 2))
        spec = KernelSpec("gaussian", bandwidth=0.9)
        g = gram(x, spec)
        w = random_weights(rng, 12)
        j = 7
        out = center_test(cross_gram(x[j : j + 1], x, spec), g, w)
        assert np.max(np.abs(out[0] - center_weighted(g, w).values[j])) < 1e-12

    def test_matches_feature_map_oracle(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((20, 3))
        t = rng.standard_normal((7, 3))
        w = random_weights(rng, 20)
        g = GramMatrix(poly2_gram(x))
        out = center_test(poly2_gram(t, x), g, w)
        phi, phi_t = poly2_features(x), poly2_features(t)
        mean = w @ phi
        oracle = (phi_t - mean) @ (phi - mean).T
        assert np.max(np.abs(out - oracle)) < 1e-10

    def test_dimension_mismatch_rejected(self):
        g = gram(np.eye(5), KernelSpec("linear"))
        with pytest.raises(ValidationError):
            center_test(np.ones((2, 4)), g, uniform_weights(5))


class TestGramMatrixInvariants:
    def test_rejects_asymmetric(self):
        v = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ValidationError):
            GramMatrix(v)

    def test_rejects_non_square(self):
        with pytest.raises(ValidationError):
            GramMatrix(np.ones((2, 3)))
