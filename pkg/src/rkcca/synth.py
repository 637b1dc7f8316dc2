"""Seeded generators for the three synthetic designs (SCS, MGS, SMS).

Each design has an ideal (id) and a contaminated (cd) variant; contamination
touches ceil(rate * n) rows chosen by the seed. Rows are generated from
per-row counter-split streams, so row i is identical whatever n is, and the
id/cd variants of the same seed share their base draws (contamination is a
shift or rescale of the same noise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky

from .errors import ValidationError

_TAG_SCS = 1
_TAG_MGS = 2
_TAG_SMS = 3
_TAG_CONTAM = 17
_TAG_CASE = 23
_TAG_CONTROL = 29

SCS_COLS = 100
MGS_COLS = 6
SMS_COLS = 1000
SMS_SIGNAL_COLS = 50
SMS_LOADING = 0.5
PLANT_SNPS_PER_GENE = 25


@dataclass(frozen=True)
class SynthSpec:
    """One synthetic dataset: design, size, variant, seed, and noise knobs.

    sms_noise is the (x, y) noise scale applied to contaminated SMS rows;
    scs_noise_sd and sms_base_noise are test hooks for the noise-free checks.
    """

    design: str
    n: int
    variant: str = "id"
    seed: int = 0
    sms_noise: tuple = (10.0, 20.0)
    contamination_rate: float = 0.05
    scs_noise_sd: float = 0.1
    sms_base_noise: float = 1.0

    def __post_init__(self):
        if self.design not in ("scs", "mgs", "sms"):
            raise ValidationError(f"unknown design: {self.design!r}")
        if self.variant not in ("id", "cd"):
            raise ValidationError(f"unknown variant: {self.variant!r}")
        if self.n < 10:
            raise ValidationError("synthetic designs need n >= 10")
        if not 0.0 <= self.contamination_rate < 1.0:
            raise ValidationError("contamination_rate must lie in [0, 1)")
        if len(self.sms_noise) != 2 or any(s < 0 for s in self.sms_noise):
            raise ValidationError("sms_noise must be two nonnegative scales")
        if self.scs_noise_sd < 0 or self.sms_base_noise < 0:
            raise ValidationError("noise scales must be nonnegative")


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def contaminated_indices(spec: SynthSpec) -> np.ndarray:
    """Rows receiving contamination: empty for id, ceil(rate * n) for cd."""
    if spec.variant == "id":
        return np.array([], dtype=int)
    k = math.ceil(spec.contamination_rate * spec.n)
    rng = _stream(spec.seed, _TAG_CONTAM, _design_tag(spec.design))
    return np.sort(rng.choice(spec.n, size=k, replace=False))


def _design_tag(design: str) -> int:
    return {"scs": _TAG_SCS, "mgs": _TAG_MGS, "sms": _TAG_SMS}[design]


def gen_scs(spec: SynthSpec):
    """Sine/cosine structural data: X_ij = sin(j Z_i) + noise, Y_ij = cos(j Z_i) + noise.

    Z_i ~ U[-3pi, 3pi], noise ~ N(0, sd^2) per entry; contaminated rows get
    noise mean 1 in both views.
    """
    if spec.design != "scs":
        raise ValidationError("spec.design must be 'scs'")
    n = spec.n
    contam = contaminated_indices(spec)
    shift = np.zeros(n)
    shift[contam] = 1.0
    j = np.arange(1, SCS_COLS + 1, dtype=float)
    x = np.empty((n, SCS_COLS))
    y = np.empty((n, SCS_COLS))
    for i in range(n):
        rng = _stream(spec.seed, _TAG_SCS, i)
        z = rng.uniform(-3.0 * math.pi, 3.0 * math.pi)
        ex = rng.normal(0.0, spec.scs_noise_sd, SCS_COLS) if spec.scs_noise_sd > 0 else 0.0
        ey = rng.normal(0.0, spec.scs_noise_sd, SCS_COLS) if spec.scs_noise_sd > 0 else 0.0
        x[i] = np.sin(j * z) + ex + shift[i]
        y[i] = np.cos(j * z) + ey + shift[i]
    return x, y, contam


_MGS_SIGMA = 0.9 ** np.abs(np.subtract.outer(np.arange(12), np.arange(12)))
_MGS_CHOL = cholesky(_MGS_SIGMA, lower=True)


def gen_mgs(spec: SynthSpec):
    """Multivariate Gaussian structural data: Z in R^12 with Sigma_ij = 0.9^|i-j|.

    X is the first six coordinates, Y the elementwise log of the absolute
    value of the last six; contaminated rows have mean shifted to all ones.
    """
    if spec.design != "mgs":
        raise ValidationError("spec.design must be 'mgs'")
    n = spec.n
    contam = contaminated_indices(spec)
    shift = np.zeros(n)
    shift[contam] = 1.0
    x = np.empty((n, MGS_COLS))
    y = np.empty((n, MGS_COLS))
    for i in range(n):
        rng = _stream(spec.seed, _TAG_MGS, i)
        z = _MGS_CHOL @ rng.standard_normal(12) + shift[i]
        while np.any(z[6:] == 0.0):  # log singularity guard, measure zero
            z = _MGS_CHOL @ rng.standard_normal(12) + shift[i]
        x[i] = z[:6]
        y[i] = np.log(np.abs(z[6:]))
    return x, y, contam


def gen_sms(spec: SynthSpec):
    """SNP/fMRI structural data: a shared latent loads 0.5 on the first 50 columns.

    Ideal rows carry N(0, base^2) noise on every column of both views;
    contaminated rows use the sms_noise scales instead.
    """
    if spec.design != "sms":
        raise ValidationError("spec.design must be 'sms'")
    n = spec.n
    contam = contaminated_indices(spec)
    is_cd = np.zeros(n, dtype=bool)
    is_cd[contam] = True
    x = np.empty((n, SMS_COLS))
    y = np.empty((n, SMS_COLS))
    for i in range(n):
        rng = _stream(spec.seed, _TAG_SMS, i)
        h = rng.standard_normal()
        sx, sy = (spec.sms_noise if is_cd[i] else (spec.sms_base_noise, spec.sms_base_noise))
        x[i] = rng.standard_normal(SMS_COLS) * sx
        y[i] = rng.standard_normal(SMS_COLS) * sy
        x[i, :SMS_SIGNAL_COLS] += SMS_LOADING * h
        y[i, :SMS_SIGNAL_COLS] += SMS_LOADING * h
    return x, y, contam


def generate(spec: SynthSpec):
    """Dispatch to the generator matching spec.design."""
    return {"scs": gen_scs, "mgs": gen_mgs, "sms": gen_sms}[spec.design](spec)


def plant_case_control(spec: SynthSpec, n_case: int, n_control: int):
    """Labeled dataset with a latent association present only in cases.

    Two synthetic genes of 25 SNP-like columns each; case rows share one
    latent factor across both genes, control rows use independent latents.
    Columns are discretized to {0, 1, 2} by per-column tercile binning.
    Returns a CaseControlDataset.
    """
    from .assoc import CaseControlDataset  # local import to avoid a cycle

    if spec.design != "sms":
        raise ValidationError("plant_case_control requires spec.design 'sms'")
    if n_case < 2 or n_control < 2:
        raise ValidationError("need at least two cases and two controls")
    p = PLANT_SNPS_PER_GENE
    raw = np.empty((n_case + n_control, 2 * p))
    for i in range(n_case):
        rng = _stream(spec.seed, _TAG_CASE, i)
        h = rng.standard_normal()
        raw[i, :p] = SMS_LOADING * h + rng.standard_normal(p)
        raw[i, p:] = SMS_LOADING * h + rng.standard_normal(p)
    for i in range(n_control):
        rng = _stream(spec.seed, _TAG_CONTROL, i)
        h1 = rng.standard_normal()
        h2 = rng.standard_normal()
        raw[n_case + i, :p] = SMS_LOADING * h1 + rng.standard_normal(p)
        raw[n_case + i, p:] = SMS_LOADING * h2 + rng.standard_normal(p)

    geno = np.empty_like(raw)
    for c in range(raw.shape[1]):
        lo, hi = np.quantile(raw[:, c], [1.0 / 3.0, 2.0 / 3.0])
        geno[:, c] = np.digitize(raw[:, c], [lo, hi], right=True)

    snp_ids = tuple(f"SNP_{c:03d}" for c in range(2 * p))
    gene_map = {s: ("GENE_A" if c < p else "GENE_B") for c, s in enumerate(snp_ids)}
    subject_ids = tuple(
        [f"CASE_{i:04d}" for i in range(n_case)] + [f"CTRL_{i:04d}" for i in range(n_control)]
    )
    status = np.concatenate([np.ones(n_case, dtype=int), np.zeros(n_control, dtype=int)])
    return CaseControlDataset(
        genotypes=geno,
        status=status,
        snp_ids=snp_ids,
        gene_map=gene_map,
        subject_ids=subject_ids,
        min_group=2,
    )
