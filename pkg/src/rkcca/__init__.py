"""Robust kernel CCA and influence-function-based gene-gene association testing."""

from .assoc import (
    CaseControlDataset,
    ScanOutcome,
    TestResult,
    bh_adjust,
    gene_pair_test,
    kccu_statistic,
    overlap_report,
    pairwise_scan,
)
from .cca import KccaConfig, KccaModel, first_kcc, fit, fit_values
from .errors import (
    DegenerateSampleError,
    NumericalError,
    PairSkip,
    RkccaError,
    ValidationError,
)
from .influence import (
    EifRecord,
    SensitivityPair,
    bootstrap_var_z,
    eif_fisher,
    eif_rho,
    fisher_z,
    index_plot_data,
    sensitivity,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    center_test,
    center_uniform,
    center_weighted,
    cross_gram,
    gram,
    median_bandwidth,
    uniform_weights,
)
from .robust import (
    KirwlsConfig,
    LossSpec,
    RobustWeights,
    loss_value,
    loss_weight,
    robust_cco_weights,
    robust_mean_weights,
)
from .synth import SynthSpec, gen_mgs, gen_scs, gen_sms, generate, plant_case_control

__version__ = "0.1.0"

__all__ = [
    "CaseControlDataset",
    "DegenerateSampleError",
    "EifRecord",
    "GramMatrix",
    "KccaConfig",
    "KccaModel",
    "KernelSpec",
    "KirwlsConfig",
    "LossSpec",
    "NumericalError",
    "PairSkip",
    "RkccaError",
    "RobustWeights",
    "ScanOutcome",
    "SensitivityPair",
    "SynthSpec",
    "TestResult",
    "ValidationError",
    "bh_adjust",
    "bootstrap_var_z",
    "center_test",
    "center_uniform",
    "center_weighted",
    "cross_gram",
    "eif_fisher",
    "eif_rho",
    "first_kcc",
    "fisher_z",
    "fit",
    "fit_values",
    "gen_mgs",
    "gen_scs",
    "gen_sms",
    "gene_pair_test",
    "generate",
    "gram",
    "index_plot_data",
    "kccu_statistic",
    "loss_value",
    "loss_weight",
    "median_bandwidth",
    "overlap_report",
    "pairwise_scan",
    "plant_case_control",
    "robust_cco_weights",
    "robust_mean_weights",
    "sensitivity",
    "uniform_weights",
    "__version__",
]
