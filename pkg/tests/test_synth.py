"""Generators: shapes, determinism, contamination bookkeeping, and the latent structure."""

import numpy as np
import pytest

from rkcca import (
    KccaConfig,
    KernelSpec,
    SynthSpec,
    ValidationError,
    first_kcc,
    fit,
    gen_mgs,
    gen_scs,
    gen_sms,
    gram,
    plant_case_control,
)
from rkcca.synth import contaminated_indices


class TestSpecValidation:
    def test_unknown_design(self):
        with pytest.raises(ValidationError):
            SynthSpec("foo", 50)

    def test_small_n(self):
        with pytest.raises(ValidationError):
            SynthSpec("scs", 5)

    def test_contamination_rate_range(self):
        with pytest.raises(ValidationError):
            SynthSpec("scs", 50, contamination_rate=1.0)


class TestContamination:
    def test_id_variant_has_no_contamination(self):
        assert contaminated_indices(SynthSpec("sms", 100, "id", seed=1)).size == 0

    def test_cd_variant_size_is_ceiling(self):
        idx = contaminated_indices(SynthSpec("sms", 110, "cd", seed=1))
        assert idx.size == 6  # ceil(0.05 * 110)
        assert np.all(idx[:-1] < idx[1:])

    def test_custom_rate(self):
        idx = contaminated_indices(SynthSpec("scs", 100, "cd", seed=2, contamination_rate=0.1))
        assert idx.size == 10


class TestScs:
    def test_shapes(self):
        x, y, _ = gen_scs(SynthSpec("scs", 40, "id", seed=3))
        assert x.shape == (40, 100) and y.shape == (40, 100)

    def test_zero_noise_hook_lies_on_circle(self):
        x, y, _ = gen_scs(SynthSpec("scs", 25, "id", seed=4, scs_noise_sd=0.0))
        assert np.allclose(x[:, 0] ** 2 + y[:, 0] ** 2, 1.0, atol=1e-12)

    def test_deterministic(self):
        a = gen_scs(SynthSpec("scs", 30, "cd", seed=5))
        b = gen_scs(SynthSpec("scs", 30, "cd", seed=5))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert np.array_equal(a[2], b[2])

    def test_rows_stable_under_growing_n(self):
        x1, _, _ = gen_scs(SynthSpec("scs", 20, "id", seed=6))
        x2, _, _ = gen_scs(SynthSpec("scs", 40, "id", seed=6))
        assert np.array_equal(x1, x2[:20])

    def test_cd_shifts_contaminated_rows(self):
        sid = SynthSpec("scs", 40, "id", seed=7)
        scd = SynthSpec("scs", 40, "cd", seed=7)
        xi, _, _ = gen_scs(sid)
        xc, _, idx = gen_scs(scd)
        clean = np.setdiff1d(np.arange(40), idx)
        assert np.array_equal(xi[clean], xc[clean])
        assert np.allclose(xc[idx] - xi[idx], 1.0, atol=1e-12)


class TestMgs:
    def test_shapes_and_finiteness(self):
        x, y, _ = gen_mgs(SynthSpec("mgs", 50, "cd", seed=8))
        assert x.shape == (50, 6) and y.shape == (50, 6)
        assert np.all(np.isfinite(x)) and np.all(np.isfinite(y))

    def test_sample_covariance_approaches_toeplitz(self):
        x, _, _ = gen_mgs(SynthSpec("mgs", 5000, "id", seed=9))
        target = 0.9 ** np.abs(np.subtract.outer(np.arange(6), np.arange(6)))
        cov = np.cov(x.T)
        assert np.max(np.abs(cov - target)) < 0.05

    def test_deterministic(self):
        a = gen_mgs(SynthSpec("mgs", 30, "id", seed=10))
        b = gen_mgs(SynthSpec("mgs", 30, "id", seed=10))
        assert np.array_equal(a[0], b[0])


class TestSms:
    def test_shapes(self):
        x, y, _ = gen_sms(SynthSpec("sms", 20, "id", seed=11))
        assert x.shape == (20, 1000) and y.shape == (20, 1000)

    def test_noise_free_hook_shares_latent(self):
        x, y, _ = gen_sms(SynthSpec("sms", 15, "id", seed=12, sms_base_noise=0.0))
        assert np.array_equal(x[:, 0], y[:, 0])
        assert np.all(x[:, 500:] == 0.0)

    def test_id_beats_row_permuted_baseline(self):
        wins = 0
        k = KernelSpec("gaussian")
        cfg = KccaConfig(kappa=0.1)
        reps = 12
        for rep in range(reps):
            x, y, _ = gen_sms(SynthSpec("sms", 120, "id", seed=200 + rep))
            rng = np.random.default_rng(rep)
            yp = y[rng.permutation(120)]
            rho = first_kcc(fit(gram(x, k), gram(y, k), cfg))
            rho_perm = first_kcc(fit(gram(x, k), gram(yp, k), cfg))
            wins += rho > rho_perm
        assert wins >= reps - 1

    def test_contaminated_rows_have_larger_scale(self):
        x, _, idx = gen_sms(SynthSpec("sms", 60, "cd", seed=13))
        clean = np.setdiff1d(np.arange(60), idx)
        assert x[idx].std() > 5.0 * x[clean].std()


class TestPlantCaseControl:
    def test_label_counts_and_coding(self):
        data = plant_case_control(SynthSpec("sms", 60, "id", seed=14), 40, 20)
        assert int(np.sum(data.status == 1)) == 40
        assert int(np.sum(data.status == 0)) == 20
        assert set(np.unique(data.genotypes)) <= {0.0, 1.0, 2.0}

    def test_two_genes_of_25_snps(self):
        data = plant_case_control(SynthSpec("sms", 60, "id", seed=15), 30, 30)
        assert data.genes == ["GENE_A", "GENE_B"]
        assert data.snp_columns("GENE_A").size == 25
        assert data.snp_columns("GENE_B").size == 25

    def test_deterministic(self):
        a = plant_case_control(SynthSpec("sms", 60, "id", seed=16), 25, 25)
        b = plant_case_control(SynthSpec("sms", 60, "id", seed=16), 25, 25)
        assert np.array_equal(a.genotypes, b.genotypes)

    def test_requires_sms_design(self):
        with pytest.raises(ValidationError):
            plant_case_control(SynthSpec("scs", 60, "id", seed=17), 30, 30)
