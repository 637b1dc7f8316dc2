"""Command-line front end: scan, are-bench, sensitivity-bench, simulate, index-plot.

Every flag can also be supplied through a JSON config file (--config); flags
override the file. The seed falls back to the RKCCA_SEED environment
variable, then 0. Exit codes: 0 success, 2 input validation, 3 numerical
failure.

All commands default to kappa = 0.1 rather than the library default of
1e-5: near-zero regularization drives the leading kernel canonical
correlation into saturation at 1 on flexible kernels, which miscalibrates
the association test and reduces the influence measures to rounding noise.
Pass --kappa to override.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import io
from .assoc import overlap_report, pairwise_scan
from .bench import (
    ARE_COLUMNS,
    SENSITIVITY_COLUMNS,
    loss_from_name,
    run_are_bench,
    run_sensitivity_bench,
)
from .cca import KccaConfig, fit
from .errors import NumericalError, RkccaError, ValidationError
from .influence import index_plot_data
from .kernels import KernelSpec, gram
from .robust import KirwlsConfig
from .synth import SynthSpec, contaminated_indices, generate, plant_case_control

DEFAULT_KAPPA = 0.1

_METHODS = ("lcca", "kcca", "rkcca-huber", "rkcca-hampel")


def method_setup(method: str, kappa: float, kernel_override: str | None = None,
                 loss_constants=()):
    """Resolve a method name into a kernel spec and solver config."""
    if method not in _METHODS:
        raise ValidationError(f"unknown method {method!r} (choose from {', '.join(_METHODS)})")
    family = "linear" if method == "lcca" else "gaussian"
    if kernel_override:
        family = kernel_override
    if method.startswith("rkcca"):
        loss = loss_from_name(method.split("-", 1)[1], loss_constants)
        cfg = KccaConfig(kappa=kappa, mode="robust", kirwls=KirwlsConfig(loss=loss))
    else:
        cfg = KccaConfig(kappa=kappa)
    return KernelSpec(family), cfg


class _Options:
    """Flag values merged with the JSON config file; flags win."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        path = self.args.get("config")
        self.file = {}
        if path:
            try:
                with open(path) as fh:
                    self.file = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ValidationError(f"cannot read config file {path}: {exc}") from exc
            if not isinstance(self.file, dict):
                raise ValidationError(f"config file {path} must hold a JSON object")

    def get(self, key, default=None):
        v = self.args.get(key)
        if v is not None:
            return v
        if key in self.file:
            return self.file[key]
        return default

    def seed(self) -> int:
        v = self.get("seed")
        if v is None:
            v = os.environ.get("RKCCA_SEED")
        return int(v) if v is not None else 0


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated integer list, got {text!r}") from exc


def _str_list(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v for v in str(text).split(",") if v]


def _float_list(text) -> tuple[float, ...]:
    if text is None:
        return ()
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    try:
        return tuple(float(v) for v in str(text).split(",") if v != "")
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated float list, got {text!r}") from exc


def cmd_scan(args) -> int:
    opt = _Options(args)
    for key in ("genotypes", "phenotypes", "gene_map", "out"):
        if opt.get(key) is None:
            raise ValidationError(f"scan requires --{key.replace('_', '-')}")
    seed = opt.seed()
    kappa = float(opt.get("kappa", DEFAULT_KAPPA))
    alpha = float(opt.get("alpha", 0.05))
    workers = int(opt.get("workers", 1))
    methods = _str_list(opt.get("method", "kcca"))
    kernel_override = opt.get("kernel")
    loss_constants = _float_list(opt.get("loss_constants"))
    min_group = int(opt.get("min_group", 10))

    data = io.load_case_control(
        opt.get("genotypes"), opt.get("phenotypes"), opt.get("gene_map"), min_group=min_group
    )
    out = opt.get("out")
    outcomes = {}
    for method in methods:
        kernel, cfg = method_setup(method, kappa, kernel_override, loss_constants)
        provenance = {
            "command": "scan",
            "kernel": kernel.family,
            "mode": cfg.mode,
            "loss": cfg.kirwls.loss.kind if cfg.kirwls else "quadratic",
            "loss_constants": list(loss_constants),
            "kappa": kappa,
            "alpha": alpha,
            "seed": seed,
            "min_group": min_group,
        }
        outcome = pairwise_scan(data, cfg, alpha=alpha, kernel=kernel, n_workers=workers)
        tag = f"_{method}" if len(methods) > 1 else ""
        io.write_scan_results(f"{out}{tag}_results.tsv", outcome, provenance)
        io.write_json(f"{out}{tag}_summary.json", {"provenance": provenance, **outcome.summary})
        outcomes[method] = outcome
    if len(methods) > 1:
        io.write_json(f"{out}_overlap.json", {
            "bh": overlap_report(outcomes, "bh"),
            "raw": overlap_report(outcomes, "raw"),
        })
    return 0


def cmd_are_bench(args) -> int:
    opt = _Options(args)
    if opt.get("out") is None:
        raise ValidationError("are-bench requires --out")
    seed = opt.seed()
    n_list = _int_list(opt.get("n_list", "100,300,500"))
    reps = int(opt.get("reps", 100))
    b_boot = int(opt.get("b_boot", 500))
    methods = _str_list(opt.get("methods", "lcca,kcca"))
    kappa = float(opt.get("kappa", DEFAULT_KAPPA))
    fresh = bool(opt.get("fresh_truth", False))
    workers = int(opt.get("workers", 1))
    rows = run_are_bench(
        n_list, reps=reps, b_boot=b_boot, seed=seed, methods=methods,
        kappa=kappa, fresh_truth=fresh, n_workers=workers,
    )
    provenance = {
        "command": "are-bench", "n_list": n_list, "reps": reps, "b_boot": b_boot,
        "methods": methods, "kappa": kappa, "fresh_truth": fresh, "seed": seed,
    }
    io.write_table(opt.get("out"), ARE_COLUMNS, [[r[c] for c in ARE_COLUMNS] for r in rows], provenance)
    return 0


def cmd_sensitivity_bench(args) -> int:
    opt = _Options(args)
    if opt.get("out") is None:
        raise ValidationError("sensitivity-bench requires --out")
    seed = opt.seed()
    designs = _str_list(opt.get("designs", "mgsd,scsd,smsd"))
    n_list = _int_list(opt.get("n_list", "100,500,1000"))
    reps = int(opt.get("reps", 100))
    loss = opt.get("loss", "hampel")
    loss_constants = _float_list(opt.get("loss_constants"))
    kappa = float(opt.get("kappa", DEFAULT_KAPPA))
    workers = int(opt.get("workers", 1))
    rows = run_sensitivity_bench(
        designs, n_list, reps=reps, loss=loss, seed=seed, kappa=kappa,
        loss_constants=loss_constants, n_workers=workers,
    )
    provenance = {
        "command": "sensitivity-bench", "designs": designs, "n_list": n_list,
        "reps": reps, "loss": loss, "loss_constants": list(loss_constants),
        "kappa": kappa, "seed": seed,
    }
    io.write_table(
        opt.get("out"), SENSITIVITY_COLUMNS,
        [[r[c] for c in SENSITIVITY_COLUMNS] for r in rows], provenance,
    )
    return 0


def _synth_spec(opt) -> SynthSpec:
    return SynthSpec(
        design=opt.get("design"),
        n=int(opt.get("n", 100)),
        variant=opt.get("variant", "id"),
        seed=opt.seed(),
        contamination_rate=float(opt.get("contamination_rate", 0.05)),
    )


def cmd_simulate(args) -> int:
    opt = _Options(args)
    if opt.get("design") is None or opt.get("out_prefix") is None:
        raise ValidationError("simulate requires --design and --out-prefix")
    n_case, n_control = opt.get("n_case"), opt.get("n_control")
    prefix = opt.get("out_prefix")
    if (n_case is None) != (n_control is None):
        raise ValidationError("--n-case and --n-control must be given together")

    if n_case is not None:
        n_case, n_control = int(n_case), int(n_control)
        spec = SynthSpec(
            design=opt.get("design"), n=max(n_case + n_control, 10),
            variant=opt.get("variant", "id"), seed=opt.seed(),
        )
        data = plant_case_control(spec, n_case, n_control)
        provenance = {"command": "simulate", "spec": asdict(spec),
                      "n_case": n_case, "n_control": n_control}
        files = {
            "genotypes": f"{prefix}_genotypes.tsv",
            "phenotypes": f"{prefix}_phenotypes.tsv",
            "gene_map": f"{prefix}_genemap.tsv",
        }
        io.write_genotypes(files["genotypes"], data.subject_ids, data.snp_ids,
                           data.genotypes, provenance)
        io.write_phenotypes(files["phenotypes"], data.subject_ids, data.status, provenance)
        io.write_genemap(files["gene_map"], data.gene_map, provenance)
        io.write_manifest(f"{prefix}_manifest.json", provenance["spec"], files,
                          {"n_case": n_case, "n_control": n_control})
        return 0

    spec = _synth_spec(opt)
    x, y, contam = generate(spec)
    provenance = {"command": "simulate", "spec": asdict(spec)}
    ids = tuple(f"S{i:06d}" for i in range(spec.n))
    files = {"x": f"{prefix}_x.tsv", "y": f"{prefix}_y.tsv"}
    io.write_matrix(files["x"], ids, x, provenance, col_prefix="x")
    io.write_matrix(files["y"], ids, y, provenance, col_prefix="y")
    io.write_manifest(f"{prefix}_manifest.json", asdict(spec), files,
                      {"contaminated_indices": [int(i) for i in contam]})
    return 0


def cmd_index_plot(args) -> int:
    opt = _Options(args)
    if opt.get("design") is None or opt.get("out") is None:
        raise ValidationError("index-plot requires --design and --out")
    spec = _synth_spec(opt)
    method = opt.get("method", "kcca")
    kappa = float(opt.get("kappa", DEFAULT_KAPPA))
    kernel, cfg = method_setup(method, kappa, opt.get("kernel"),
                               _float_list(opt.get("loss_constants")))
    x, y, contam = generate(spec)
    model = fit(gram(x, kernel), gram(y, kernel), cfg)
    provenance = {
        "command": "index-plot", "spec": asdict(spec), "method": method,
        "kernel": kernel.family, "kappa": kappa,
        "contaminated_indices": [int(i) for i in contam],
    }
    io.write_index_plot(opt.get("out"), index_plot_data(model), provenance)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkcca",
        description="Robust kernel CCA association scans and synthetic benchmarks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file of flag defaults (flags override)")
        p.add_argument("--seed", type=int, help="master seed (default: $RKCCA_SEED or 0)")
        p.add_argument("--workers", type=int, help="worker count (never changes results)")

    p = sub.add_parser("scan", help="pairwise gene-gene association scan")
    common(p)
    p.add_argument("--genotypes", help="genotype TSV (subject_id + SNP columns, values 0/1/2)")
    p.add_argument("--phenotypes", help="phenotype TSV (subject_id, status 0/1)")
    p.add_argument("--gene-map", dest="gene_map", help="gene-map TSV (snp_id, gene_id)")
    p.add_argument("--method", help=f"comma list from {{{','.join(_METHODS)}}} (default kcca)")
    p.add_argument("--kernel", choices=("gaussian", "linear"), help="kernel family override")
    p.add_argument("--loss-constants", dest="loss_constants",
                   help="robust loss tuning constants, e.g. 1.5 or 0.7,1.2,2.0 "
                        "(default: residual percentiles)")
    p.add_argument("--kappa", type=float, help=f"regularizer (default {DEFAULT_KAPPA})")
    p.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    p.add_argument("--min-group", dest="min_group", type=int, help="case/control size floor")
    p.add_argument("--out", help="output path prefix")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("are-bench", help="bootstrap vs influence-function efficiency study")
    common(p)
    p.add_argument("--n-list", dest="n_list", help="sample sizes, e.g. 100,300,500")
    p.add_argument("--reps", type=int, help="replications per size (default 100)")
    p.add_argument("--b-boot", dest="b_boot", type=int, help="bootstrap resamples (default 500)")
    p.add_argument("--methods", help="comma list from {lcca,kcca}")
    p.add_argument("--kappa", type=float, help=f"regularizer (default {DEFAULT_KAPPA})")
    p.add_argument("--fresh-truth", dest="fresh_truth", action="store_const", const=True,
                   help="estimate the reference variance from a fresh batch of replications")
    p.add_argument("--out", help="output TSV path")
    p.set_defaults(func=cmd_are_bench)

    p = sub.add_parser("sensitivity-bench", help="contamination sensitivity study")
    common(p)
    p.add_argument("--designs", help="comma list from {mgsd,scsd,smsd}")
    p.add_argument("--n-list", dest="n_list", help="sample sizes, e.g. 100,500,1000")
    p.add_argument("--reps", type=int, help="replications (default 100)")
    p.add_argument("--loss", choices=("quadratic", "huber", "hampel"), help="robust loss")
    p.add_argument("--loss-constants", dest="loss_constants",
                   help="robust loss tuning constants (default: residual percentiles)")
    p.add_argument("--kappa", type=float, help=f"regularizer (default {DEFAULT_KAPPA})")
    p.add_argument("--out", help="output TSV path")
    p.set_defaults(func=cmd_sensitivity_bench)

    p = sub.add_parser("simulate", help="write synthetic data files")
    common(p)
    p.add_argument("--design", choices=("scs", "mgs", "sms"))
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--variant", choices=("id", "cd"), help="ideal or contaminated")
    p.add_argument("--contamination-rate", dest="contamination_rate", type=float)
    p.add_argument("--n-case", dest="n_case", type=int,
                   help="write a labeled case/control dataset (sms only)")
    p.add_argument("--n-control", dest="n_control", type=int)
    p.add_argument("--out-prefix", dest="out_prefix", help="output path prefix")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("index-plot", help="per-observation influence values of one fit")
    common(p)
    p.add_argument("--design", choices=("scs", "mgs", "sms"))
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--variant", choices=("id", "cd"), help="ideal or contaminated")
    p.add_argument("--method", help=f"one of {{{','.join(_METHODS)}}} (default kcca)")
    p.add_argument("--kernel", choices=("gaussian", "linear"), help="kernel family override")
    p.add_argument("--loss-constants", dest="loss_constants",
                   help="robust loss tuning constants (default: residual percentiles)")
    p.add_argument("--kappa", type=float, help=f"regularizer (default {DEFAULT_KAPPA})")
    p.add_argument("--out", help="output TSV path")
    p.set_defaults(func=cmd_index_plot)

    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"rkcca: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"rkcca: numerical failure: {exc}", file=sys.stderr)
        return 3
    except RkccaError as exc:
        print(f"rkcca: error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
