"""Benchmark studies: bootstrap-vs-influence efficiency and contamination sensitivity.

The efficiency study generates fresh sine/cosine data per replication,
estimates the variance of Fisher's z both ways, and scores each estimator by
its mean squared error against the Monte-Carlo variance of z across the
replications: ARE = MSE(bootstrap) / MSE(influence). The sensitivity study
fits paired ideal/contaminated replicates and reports the eta measures.
"""

from __future__ import annotations

from time import perf_counter

import numpy as np
from joblib import Parallel, delayed

from .cca import KccaConfig, first_kcc, fit
from .errors import ValidationError
from .influence import bootstrap_var_z, eif_fisher, fisher_z, sensitivity
from .kernels import KernelSpec, gram
from .robust import KirwlsConfig, LossSpec
from .synth import SynthSpec, generate

METHOD_KERNELS = {"lcca": KernelSpec("linear"), "kcca": KernelSpec("gaussian")}

ARE_COLUMNS = (
    "method", "n", "are", "boot_var_mean", "boot_var_sd", "if_var_mean",
    "if_var_sd", "truth_var", "boot_seconds", "if_seconds",
)
SENSITIVITY_COLUMNS = (
    "design", "n", "method", "eta_rho_mean", "eta_rho_sd", "eta_f_mean", "eta_f_sd",
)


def rep_seed(master: int, *key: int) -> int:
    """Deterministic 64-bit child seed for one replication."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])


def loss_from_name(name: str, constants=()) -> LossSpec:
    """Loss from its CLI name, with optional explicit tuning constants."""
    constants = tuple(float(c) for c in constants)
    if name == "quadratic":
        if constants:
            raise ValidationError("quadratic loss takes no constants")
        return LossSpec.quadratic()
    if name == "huber":
        if constants and len(constants) != 1:
            raise ValidationError("huber loss takes one constant")
        return LossSpec("huber", constants)
    if name == "hampel":
        if constants and len(constants) != 3:
            raise ValidationError("hampel loss takes three constants (c1,c2,c3)")
        return LossSpec("hampel", constants)
    raise ValidationError(f"unknown loss: {name!r}")


def _are_rep(method: str, n: int, b_boot: int, kappa: float, seed: int, z_only: bool):
    kernel = METHOD_KERNELS[method]
    cfg = KccaConfig(kappa=kappa)
    x, y, _ = generate(SynthSpec("scs", n, "id", seed=seed))
    t0 = perf_counter()
    model = fit(gram(x, kernel), gram(y, kernel), cfg)
    z = fisher_z(first_kcc(model))
    if_var = eif_fisher(model).var_z
    if_seconds = perf_counter() - t0
    if z_only:
        return z
    t0 = perf_counter()
    boot_var = bootstrap_var_z(x, y, cfg, b_boot, seed=rep_seed(seed, 1), kernel_x=kernel)
    boot_seconds = perf_counter() - t0
    return z, if_var, boot_var, if_seconds, boot_seconds


def run_are_bench(
    n_list,
    reps: int = 100,
    b_boot: int = 500,
    seed: int = 0,
    methods=("lcca", "kcca"),
    kappa: float = 0.1,
    fresh_truth: bool = False,
    n_workers: int = 1,
) -> list[dict]:
    if reps < 2:
        raise ValidationError("the efficiency study needs reps >= 2")
    for m in methods:
        if m not in METHOD_KERNELS:
            raise ValidationError(f"unknown method for the efficiency study: {m!r}")
    rows = []
    for mi, method in enumerate(methods):
        for n in n_list:
            tasks = [rep_seed(seed, 11, mi, n, r) for r in range(reps)]
            if n_workers > 1:
                out = Parallel(n_jobs=n_workers)(
                    delayed(_are_rep)(method, n, b_boot, kappa, s, False) for s in tasks
                )
            else:
                out = [_are_rep(method, n, b_boot, kappa, s, False) for s in tasks]
            zs, if_vars, boot_vars, if_secs, boot_secs = map(np.asarray, zip(*out))
            if fresh_truth:
                extra = [rep_seed(seed, 12, mi, n, r) for r in range(2 * reps)]
                truth_zs = np.asarray(
                    [_are_rep(method, n, b_boot, kappa, s, True) for s in extra]
                )
            else:
                truth_zs = zs
            truth = float(np.var(truth_zs, ddof=1))
            mse_boot = float(np.mean((boot_vars - truth) ** 2))
            mse_if = float(np.mean((if_vars - truth) ** 2))
            rows.append({
                "method": method,
                "n": n,
                "are": mse_boot / mse_if if mse_if > 0 else float("inf"),
                "boot_var_mean": float(boot_vars.mean()),
                "boot_var_sd": float(boot_vars.std(ddof=1)),
                "if_var_mean": float(if_vars.mean()),
                "if_var_sd": float(if_vars.std(ddof=1)),
                "truth_var": truth,
                "boot_seconds": float(boot_secs.sum()),
                "if_seconds": float(if_secs.sum()),
            })
    return rows


_DESIGN_ALIASES = {
    "scs": "scs", "mgs": "mgs", "sms": "sms",
    "scsd": "scs", "mgsd": "mgs", "smsd": "sms",
}


def _sensitivity_rep(design: str, n: int, kappa: float, loss: LossSpec, seed: int):
    xi, yi, _ = generate(SynthSpec(design, n, "id", seed=seed))
    xc, yc, _ = generate(SynthSpec(design, n, "cd", seed=seed))
    kernel = KernelSpec("gaussian")
    grams = [
        (gram(xi, kernel), gram(yi, kernel)),
        (gram(xc, kernel), gram(yc, kernel)),
    ]
    out = []
    for cfg in (
        KccaConfig(kappa=kappa),
        KccaConfig(kappa=kappa, mode="robust", kirwls=KirwlsConfig(loss=loss)),
    ):
        m_id = fit(*grams[0], cfg)
        m_cd = fit(*grams[1], cfg)
        pair = sensitivity(m_id, m_cd)
        out.extend([pair.eta_rho, pair.eta_f])
    return out


def run_sensitivity_bench(
    designs,
    n_list,
    reps: int = 100,
    loss: str = "hampel",
    seed: int = 0,
    kappa: float = 0.1,
    loss_constants=(),
    n_workers: int = 1,
) -> list[dict]:
    if reps < 2:
        raise ValidationError("the sensitivity study needs reps >= 2")
    loss_spec = loss_from_name(loss, loss_constants)
    rows = []
    for dname in designs:
        design = _DESIGN_ALIASES.get(dname.lower())
        if design is None:
            raise ValidationError(f"unknown design: {dname!r}")
        for ni, n in enumerate(n_list):
            tasks = [rep_seed(seed, 21, ni, r) for r in range(reps)]
            if n_workers > 1:
                out = Parallel(n_jobs=n_workers)(
                    delayed(_sensitivity_rep)(design, n, kappa, loss_spec, s) for s in tasks
                )
            else:
                out = [_sensitivity_rep(design, n, kappa, loss_spec, s) for s in tasks]
            vals = np.asarray(out)  # columns: classical rho/f, robust rho/f
            for method, j in (("classical", 0), ("robust", 2)):
                rows.append({
                    "design": dname,
                    "n": n,
                    "method": method,
                    "eta_rho_mean": float(vals[:, j].mean()),
                    "eta_rho_sd": float(vals[:, j].std(ddof=1)),
                    "eta_f_mean": float(vals[:, j + 1].mean()),
                    "eta_f_sd": float(vals[:, j + 1].std(ddof=1)),
                })
    return rows
