"""Influence values, Fisher-z variance, bootstrap baseline, and sensitivity measures."""

import numpy as np
import pytest

from rkcca import (
    KccaConfig,
    KccaModel,
    KernelSpec,
    NumericalError,
    ValidationError,
    bootstrap_var_z,
    eif_fisher,
    eif_rho,
    fisher_z,
    fit,
    gram,
    index_plot_data,
    sensitivity,
    uniform_weights,
)
from rkcca.influence import VAR_Z_FLOOR


def make_model(fx, fy, rho, n_extra=0):
    fx = np.asarray(fx, dtype=float)
    n = fx.size
    return KccaModel(
        rho=np.array([rho]),
        coef_x=np.zeros((1, n)), coef_y=np.zeros((1, n)),
        variates_x=fx[None, :], variates_y=np.asarray(fy, dtype=float)[None, :],
        weights=uniform_weights(n), kappa=1e-5,
    )


def bivariate_model(n, corr, seed, kappa=1e-6):
    rng = np.random.default_rng(seed)
    cov = np.array([[1.0, corr], [corr, 1.0]])
    z = rng.multivariate_normal([0.0, 0.0], cov, size=n)
    gx = gram(z[:, :1], KernelSpec("linear"))
    gy = gram(z[:, 1:], KernelSpec("linear"))
    return fit(gx, gy, KccaConfig(kappa=kappa)), z


class TestEifRho:
    def test_hand_computed_values(self):
        # rho = 0.5, variates in {-1, +1}: eif_i = -0.5 + fx_i fy_i
        fx = np.array([1.0, -1.0, 1.0, -1.0])
        fy = np.array([1.0, 1.0, -1.0, -1.0])
        model = make_model(fx, fy, rho=0.5)
        expected = np.array([0.5, -1.5, -1.5, 0.5])
        assert np.allclose(eif_rho(model), expected, atol=1e-12)

    def test_zero_rho_gives_zero_influence(self):
        rng = np.random.default_rng(0)
        model = make_model(rng.standard_normal(6), rng.standard_normal(6), rho=0.0)
        assert np.all(eif_rho(model) == 0.0)

    def test_perfect_match_at_rho_one_gives_zero(self):
        v = np.array([1.0, -1.0, 0.5, -0.5])
        model = make_model(v, v, rho=1.0)
        assert np.allclose(eif_rho(model), 0.0, atol=1e-12)


class TestEifFisher:
    def test_identical_variates_floor(self):
        v = np.array([1.0, -1.0, 2.0, -2.0, 0.5, -0.5])
        v = (v - v.mean()) / v.std()
        rec = eif_fisher(make_model(v, v, rho=1.0 - 1e-12))
        assert np.all(rec.eif_z == 0.0)
        assert rec.floored
        assert rec.var_z == VAR_Z_FLOOR

    def test_eif_z_is_uv_product(self):
        model, _ = bivariate_model(200, 0.4, seed=1)
        rec = eif_fisher(model)
        assert np.array_equal(rec.eif_z, rec.u * rec.v)

    def test_var_z_positive_and_floored(self):
        model, _ = bivariate_model(100, 0.3, seed=2)
        assert eif_fisher(model).var_z >= VAR_Z_FLOOR

    def test_var_z_near_classical_fisher_variance(self):
        n = 500
        vals = [eif_fisher(bivariate_model(n, 0.5, seed=s)[0]).var_z for s in range(20)]
        med = np.median(vals)
        assert 0.5 / (n - 3) <= med <= 2.0 / (n - 3)

    def test_var_z_shrinks_with_n(self):
        meds = []
        for n in (100, 200, 400):
            vals = [eif_fisher(bivariate_model(n, 0.4, seed=100 * n + s)[0]).var_z
                    for s in range(15)]
            meds.append(np.median(vals))
        assert meds[0] > meds[1] > meds[2]


class TestBootstrap:
    def test_identical_views_have_zero_variance(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((40, 2))
        v = bootstrap_var_z(x, x, KccaConfig(), b=25, seed=7)
        assert v == 0.0

    def test_two_equal_values_give_zero(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((30, 2))
        assert bootstrap_var_z(x, x, KccaConfig(), b=2, seed=8) == 0.0

    def test_deterministic_and_seed_sensitive(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((35, 2))
        y = x + 0.5 * rng.standard_normal((35, 2))
        a = bootstrap_var_z(x, y, KccaConfig(), b=30, seed=11)
        b = bootstrap_var_z(x, y, KccaConfig(), b=30, seed=11)
        c = bootstrap_var_z(x, y, KccaConfig(), b=30, seed=12)
        assert a == b
        assert a != c
        assert a > 0.0

    def test_matches_naive_refit(self):
        # the deduplicated fast path must agree with building each resample's
        # Gram from scratch and refitting (same estimator, different numerics:
        # the duplicated system is more rank-deficient, so rho can move by
        # solver noise ~1e-9)
        rng = np.random.default_rng(6)
        x = rng.standard_normal((25, 3))
        y = x + rng.standard_normal((25, 3))
        cfg = KccaConfig(kappa=0.1)
        fast = bootstrap_var_z(x, y, cfg, b=12, seed=13)
        zs = []
        children = np.random.SeedSequence(13).spawn(12)
        from rkcca import first_kcc
        for r in range(12):
            rng_r = np.random.default_rng(children[r])
            idx = rng_r.integers(0, 25, 25)
            m = fit(gram(x[idx], KernelSpec("gaussian")),
                    gram(y[idx], KernelSpec("gaussian")), cfg)
            zs.append(fisher_z(first_kcc(m)))
        assert fast == pytest.approx(np.var(zs, ddof=1), rel=1e-4)

    def test_b_below_two_rejected(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((20, 2))
        with pytest.raises(ValidationError):
            bootstrap_var_z(x, x, KccaConfig(), b=1, seed=0)


class TestFisherZ:
    def test_zero(self):
        assert fisher_z(0.0) == 0.0

    def test_half(self):
        assert fisher_z(0.5) == pytest.approx(0.5 * np.log(3.0), abs=1e-12)

    def test_tanh_inverse(self):
        assert fisher_z(np.tanh(1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValidationError):
            fisher_z(1.0)
        with pytest.raises(ValidationError):
            fisher_z(-0.2)


class TestSensitivity:
    def test_same_model_gives_zero(self):
        model, _ = bivariate_model(80, 0.5, seed=9)
        pair = sensitivity(model, model)
        assert pair.eta_rho == 0.0
        assert pair.eta_f == 0.0

    def test_doubled_norms_give_half(self):
        fx = np.array([1.0, -1.0, 0.5, -0.5])
        fy = np.array([0.5, -1.0, 1.0, -0.5])
        m_id = make_model(fx, fy, rho=0.5)
        m_cd = make_model(np.sqrt(2.0) * fx, np.sqrt(2.0) * fy, rho=0.5)
        pair = sensitivity(m_id, m_cd)
        assert pair.eta_rho == pytest.approx(0.5, abs=1e-12)
        assert pair.eta_f == pytest.approx(1.0 - 1.0 / np.sqrt(2.0), abs=1e-12)

    def test_zero_denominator_with_zero_numerator(self):
        z = np.zeros(4)
        m = make_model(z, z, rho=0.0)
        pair = sensitivity(m, m)
        assert pair.eta_rho == 0.0

    def test_zero_denominator_with_nonzero_numerator_raises(self):
        fx = np.array([1.0, -1.0, 0.5, -0.5])
        m_id = make_model(fx, -fx, rho=0.5)
        m_cd = make_model(np.zeros(4), np.zeros(4), rho=0.0)
        with pytest.raises(NumericalError):
            sensitivity(m_id, m_cd)

    def test_size_mismatch_rejected(self):
        m1 = make_model(np.ones(4), np.ones(4), 0.5)
        m2 = make_model(np.ones(5), np.ones(5), 0.5)
        with pytest.raises(ValidationError):
            sensitivity(m1, m2)


class TestIndexPlot:
    def test_pairs_in_index_order(self):
        model = make_model([1.0, -1.0, 0.5], [0.5, -0.5, 1.0], rho=0.5)
        pairs = index_plot_data(model)
        assert [p[0] for p in pairs] == [0, 1, 2]
        assert np.allclose([p[1] for p in pairs], eif_rho(model))
