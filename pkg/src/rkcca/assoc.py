"""Case-control gene-gene association testing via kernel CCA.

Per gene pair, kernel CCA is fitted separately on the case and control
subsets; the leading canonical correlations are Fisher-transformed and
compared with

    T = (z_case - z_control) / sqrt(var_case + var_control),

which is referred to N(0, 1) two-sided. Variances come from the influence
function of Fisher's z. The pairwise scan applies Benjamini-Hochberg
adjustment across all pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Mapping

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm

from .cca import KccaConfig, first_kcc, fit_values
from .errors import DegenerateSampleError, NumericalError, PairSkip, ValidationError
from .influence import eif_fisher, fisher_z
from .kernels import KernelSpec, gram

_P_FLOOR = float(np.finfo(float).tiny)


@dataclass(frozen=True)
class CaseControlDataset:
    """Genotypes (additive 0/1/2 coding), case/control status, and a SNP-to-gene map."""

    genotypes: np.ndarray
    status: np.ndarray
    snp_ids: tuple
    gene_map: Mapping[str, str]
    subject_ids: tuple
    min_group: int = 10

    def __post_init__(self):
        g = self.genotypes
        if g.ndim != 2:
            raise ValidationError("genotypes must be a 2-D matrix (subjects x SNPs)")
        n, p = g.shape
        if len(self.subject_ids) != n:
            raise ValidationError("subject_ids length does not match genotype rows")
        if len(self.snp_ids) != p:
            raise ValidationError("snp_ids length does not match genotype columns")
        if not np.all(np.isfinite(g)):
            raise ValidationError("genotypes contain missing or non-finite values")
        if self.status.shape != (n,) or not np.all(np.isin(self.status, (0, 1))):
            raise ValidationError("status must be one 0/1 value per subject")
        unmapped = [s for s in self.snp_ids if s not in self.gene_map]
        if unmapped:
            raise ValidationError(f"SNPs without a gene mapping: {', '.join(unmapped)}")
        n_case = int(np.sum(self.status == 1))
        n_control = n - n_case
        if n_case < self.min_group or n_control < self.min_group:
            raise ValidationError(
                f"need at least {self.min_group} cases and controls, "
                f"got {n_case} cases / {n_control} controls"
            )

    @property
    def genes(self) -> list[str]:
        return sorted({self.gene_map[s] for s in self.snp_ids})

    def snp_columns(self, gene: str) -> np.ndarray:
        cols = [i for i, s in enumerate(self.snp_ids) if self.gene_map[s] == gene]
        if not cols:
            raise ValidationError(f"gene {gene!r} has no SNPs in this dataset")
        return np.asarray(cols, dtype=int)


@dataclass(frozen=True)
class TestResult:
    """One gene pair: correlations, Fisher z values, variances, T, and p-values."""

    gene1: str
    gene2: str
    r_case: float
    r_control: float
    z_case: float
    z_control: float
    var_case: float
    var_control: float
    t_stat: float
    p_value: float
    p_bh: float | None = None
    flags: tuple = ()


def kccu_statistic(z_case: float, z_control: float, var_case: float, var_control: float):
    """T statistic and two-sided normal p-value for a case/control z difference."""
    if not (var_case > 0 and var_control > 0):
        raise ValidationError("variances must be positive")
    t = (z_case - z_control) / math.sqrt(var_case + var_control)
    p = max(2.0 * float(norm.sf(abs(t))), _P_FLOOR)
    return t, p


def bh_adjust(p) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values, in the input order."""
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        return p.copy()
    if np.any(~np.isfinite(p)) or np.any(p <= 0) or np.any(p > 1):
        raise ValidationError("p-values must lie in (0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order] * m / np.arange(1, m + 1)
    q = np.minimum(1.0, np.minimum.accumulate(ranked[::-1])[::-1])
    out = np.empty(m)
    out[order] = q
    return out


def _subset_features(data: CaseControlDataset, mask: np.ndarray, gene: str, label: str):
    x = data.genotypes[mask][:, data.snp_columns(gene)]
    keep = x.std(axis=0) > 0  # constant columns carry no kernel geometry
    x = x[:, keep]
    if x.shape[1] == 0:
        raise PairSkip(f"gene {gene} has no variable SNPs in the {label} subset")
    return x


def gene_pair_test(
    data: CaseControlDataset,
    g1: str,
    g2: str,
    cfg: KccaConfig,
    kernel: KernelSpec = KernelSpec(),
) -> TestResult:
    """KCCU test of one gene pair: separate case/control fits, then T."""
    flags: list[str] = []
    arms = {}
    for label, mask in (("case", data.status == 1), ("control", data.status == 0)):
        x1 = _subset_features(data, mask, g1, label)
        x2 = _subset_features(data, mask, g2, label)
        try:
            model = fit_values(gram(x1, kernel).values, gram(x2, kernel).values, cfg)
        except (DegenerateSampleError, NumericalError) as exc:
            raise PairSkip(f"{label} subset of ({g1}, {g2}): {exc}") from exc
        r = first_kcc(model)
        rec = eif_fisher(model)
        if rec.floored:
            flags.append(f"var_floor_{label}")
        arms[label] = (r, fisher_z(r), rec.var_z)

    r_case, z_case, var_case = arms["case"]
    r_control, z_control, var_control = arms["control"]
    if "var_floor_case" in flags and "var_floor_control" in flags:
        # both variances at the floor: the statistic is not interpretable
        t, p = 0.0, 1.0
        flags.append("t_zeroed")
    else:
        t, p = kccu_statistic(z_case, z_control, var_case, var_control)
    return TestResult(
        gene1=g1,
        gene2=g2,
        r_case=r_case,
        r_control=r_control,
        z_case=z_case,
        z_control=z_control,
        var_case=var_case,
        var_control=var_control,
        t_stat=t,
        p_value=p,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class ScanOutcome:
    """All pair results (tested and skipped) plus the scan summary."""

    results: list
    skipped: list
    summary: dict
    pairs: list = field(default_factory=list)


def pairwise_scan(
    data: CaseControlDataset,
    cfg: KccaConfig,
    alpha: float = 0.05,
    kernel: KernelSpec = KernelSpec(),
    n_workers: int = 1,
) -> ScanOutcome:
    """Test every gene pair, BH-adjust, and summarize significant pairs.

    Per-pair failures are recorded and skipped, never abort the scan. The
    merge order is the sorted (gene1, gene2) pair order whatever the worker
    count, so outputs are deterministic.
    """
    genes = data.genes
    if len(genes) < 2:
        raise ValidationError("pairwise scan needs at least two genes")
    pairs = list(combinations(genes, 2))

    def one(pair):
        try:
            return gene_pair_test(data, pair[0], pair[1], cfg, kernel)
        except PairSkip as exc:
            return (pair[0], pair[1], str(exc))

    if n_workers > 1:
        outcomes = Parallel(n_jobs=n_workers)(delayed(one)(p) for p in pairs)
    else:
        outcomes = [one(p) for p in pairs]

    results = [o for o in outcomes if isinstance(o, TestResult)]
    skipped = [o for o in outcomes if not isinstance(o, TestResult)]
    if results:
        qs = bh_adjust([r.p_value for r in results])
        results = [replace(r, p_bh=float(q)) for r, q in zip(results, qs)]

    sig_raw = [r for r in results if r.p_value <= alpha]
    sig_bh = [r for r in results if r.p_bh is not None and r.p_bh <= alpha]
    summary = {
        "n_genes": len(genes),
        "n_pairs": len(pairs),
        "n_tested": len(results),
        "n_skipped": len(skipped),
        "alpha": alpha,
        "n_significant_raw": len(sig_raw),
        "n_significant_bh": len(sig_bh),
        "isolated_genes_raw": _isolated(sig_raw),
        "isolated_genes_bh": _isolated(sig_bh),
        "n_isolated_raw": len(_isolated(sig_raw)),
        "n_isolated_bh": len(_isolated(sig_bh)),
        "skipped_pairs": [list(s) for s in skipped],
    }
    return ScanOutcome(results=results, skipped=skipped, summary=summary, pairs=pairs)


def _isolated(results) -> list[str]:
    """Distinct genes appearing in at least one significant pair."""
    return sorted({g for r in results for g in (r.gene1, r.gene2)})


def overlap_report(outcomes: Mapping[str, ScanOutcome], level: str = "bh") -> dict:
    """Set-overlap of significant genes across scan configurations."""
    key = "isolated_genes_bh" if level == "bh" else "isolated_genes_raw"
    sets = {name: set(o.summary[key]) for name, o in outcomes.items()}
    names = sorted(sets)
    report = {
        "level": level,
        "genes_per_method": {m: sorted(sets[m]) for m in names},
        "common_to_all": sorted(set.intersection(*sets.values())) if sets else [],
        "pairwise_common": {
            f"{a}&{b}": sorted(sets[a] & sets[b]) for a, b in combinations(names, 2)
        },
        "exclusive": {
            m: sorted(sets[m] - set.union(set(), *(sets[o] for o in names if o != m)))
            for m in names
        },
    }
    return report
