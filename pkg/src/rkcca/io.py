"""TSV and JSON input/output with provenance headers.

Every output file begins with comment lines carrying the artifact version
and the resolved run configuration, so any row can be reproduced from its
header alone. Numbers are written with a fixed %.10g format to keep files
byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .assoc import CaseControlDataset, ScanOutcome
from .errors import ValidationError
from .version import __version__

SCAN_COLUMNS = (
    "gene1", "gene2", "r_case", "r_control", "z_case", "z_control",
    "var_case", "var_control", "T", "p", "p_bh", "flags",
)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.10g}"


def provenance_lines(provenance: dict) -> list[str]:
    payload = json.dumps(provenance, sort_keys=True, separators=(",", ":"))
    return [f"# rkcca v{__version__}", f"# provenance: {payload}"]


def write_table(path, columns, rows, provenance: dict):
    lines = provenance_lines(provenance)
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_table(path):
    """Read a provenance-headed TSV: (columns, string rows, header lines)."""
    header_lines, columns, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\r\n")
            if line.startswith("#"):
                header_lines.append(line)
            elif columns is None:
                columns = line.split("\t")
            elif line:
                rows.append(line.split("\t"))
    if columns is None:
        raise ValidationError(f"{path}: no column header found")
    return columns, rows, header_lines


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# scanner input files


def _data_lines(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if line.startswith("#") or not line:
                continue
            yield lineno, line.split("\t")


def read_genotypes(path):
    """Genotype TSV: header `subject_id <snp ids...>`, values in {0, 1, 2}."""
    it = _data_lines(path)
    try:
        _, header = next(it)
    except StopIteration:
        raise ValidationError(f"{path}: empty genotype file") from None
    if header[0] != "subject_id" or len(header) < 2:
        raise ValidationError(f"{path}: genotype header must be 'subject_id' plus SNP ids")
    snp_ids = tuple(header[1:])
    subjects, rows = [], []
    for lineno, parts in it:
        if len(parts) != len(header):
            raise ValidationError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        subjects.append(parts[0])
        row = []
        for snp, v in zip(snp_ids, parts[1:]):
            if v not in ("0", "1", "2"):
                raise ValidationError(
                    f"{path}: line {lineno}: invalid genotype value {v!r} for {snp} "
                    "(expected 0, 1 or 2)"
                )
            row.append(int(v))
        rows.append(row)
    if len(set(subjects)) != len(subjects):
        raise ValidationError(f"{path}: duplicate subject ids")
    return tuple(subjects), snp_ids, np.asarray(rows, dtype=float)


def read_phenotypes(path):
    """Phenotype TSV: header `subject_id status`, status 1 = case, 0 = control."""
    it = _data_lines(path)
    try:
        _, header = next(it)
    except StopIteration:
        raise ValidationError(f"{path}: empty phenotype file") from None
    if header[:2] != ["subject_id", "status"]:
        raise ValidationError(f"{path}: phenotype header must be 'subject_id\\tstatus'")
    status = {}
    for lineno, parts in it:
        if len(parts) != 2:
            raise ValidationError(f"{path}: line {lineno}: expected 2 fields")
        if parts[1] not in ("0", "1"):
            raise ValidationError(
                f"{path}: line {lineno}: invalid status {parts[1]!r} (expected 0 or 1)"
            )
        if parts[0] in status:
            raise ValidationError(f"{path}: line {lineno}: duplicate subject {parts[0]!r}")
        status[parts[0]] = int(parts[1])
    return status


def read_genemap(path):
    """Gene-map TSV: header `snp_id gene_id`."""
    it = _data_lines(path)
    try:
        _, header = next(it)
    except StopIteration:
        raise ValidationError(f"{path}: empty gene-map file") from None
    if header[:2] != ["snp_id", "gene_id"]:
        raise ValidationError(f"{path}: gene-map header must be 'snp_id\\tgene_id'")
    mapping = {}
    for lineno, parts in it:
        if len(parts) != 2:
            raise ValidationError(f"{path}: line {lineno}: expected 2 fields")
        if parts[0] in mapping:
            raise ValidationError(f"{path}: line {lineno}: SNP {parts[0]!r} mapped twice")
        mapping[parts[0]] = parts[1]
    return mapping


def load_case_control(genotype_path, phenotype_path, genemap_path, min_group=10) -> CaseControlDataset:
    subjects, snp_ids, geno = read_genotypes(genotype_path)
    status_by_id = read_phenotypes(phenotype_path)
    mapping = read_genemap(genemap_path)
    geno_set, pheno_set = set(subjects), set(status_by_id)
    if geno_set != pheno_set:
        missing = sorted(geno_set - pheno_set)[:5]
        extra = sorted(pheno_set - geno_set)[:5]
        raise ValidationError(
            "subject-id mismatch between genotype and phenotype files "
            f"(missing from phenotypes: {missing}; missing from genotypes: {extra})"
        )
    unmapped = [s for s in snp_ids if s not in mapping]
    if unmapped:
        raise ValidationError(f"SNPs without a gene mapping: {', '.join(unmapped)}")
    status = np.asarray([status_by_id[s] for s in subjects], dtype=int)
    return CaseControlDataset(
        genotypes=geno,
        status=status,
        snp_ids=snp_ids,
        gene_map={s: mapping[s] for s in snp_ids},
        subject_ids=subjects,
        min_group=min_group,
    )


def write_genotypes(path, subject_ids, snp_ids, genotypes, provenance: dict):
    rows = [[sid] + [str(int(v)) for v in row] for sid, row in zip(subject_ids, genotypes)]
    write_table(path, ["subject_id", *snp_ids], rows, provenance)


def write_phenotypes(path, subject_ids, status, provenance: dict):
    rows = [[sid, str(int(s))] for sid, s in zip(subject_ids, status)]
    write_table(path, ["subject_id", "status"], rows, provenance)


def write_genemap(path, gene_map, provenance: dict):
    rows = [[snp, gene] for snp, gene in gene_map.items()]
    write_table(path, ["snp_id", "gene_id"], rows, provenance)


def write_matrix(path, subject_ids, matrix, provenance: dict, col_prefix="v"):
    cols = [f"{col_prefix}{j + 1:04d}" for j in range(matrix.shape[1])]
    rows = [[sid, *row] for sid, row in zip(subject_ids, matrix)]
    write_table(path, ["subject_id", *cols], rows, provenance)


# ---------------------------------------------------------------------------
# scanner / bench outputs


def write_scan_results(path, outcome: ScanOutcome, provenance: dict):
    """One row per scheduled pair; skipped pairs keep nan fields and a flag."""
    by_pair = {(r.gene1, r.gene2): r for r in outcome.results}
    skip_reason = {(g1, g2): reason for g1, g2, reason in outcome.skipped}
    rows = []
    for g1, g2 in outcome.pairs:
        r = by_pair.get((g1, g2))
        if r is not None:
            rows.append([
                r.gene1, r.gene2, r.r_case, r.r_control, r.z_case, r.z_control,
                r.var_case, r.var_control, r.t_stat, r.p_value, r.p_bh,
                ",".join(r.flags) if r.flags else "-",
            ])
        else:
            rows.append([g1, g2] + ["nan"] * 9 + [f"skipped:{skip_reason[(g1, g2)]}"])
    write_table(path, SCAN_COLUMNS, rows, provenance)


def write_index_plot(path, pairs, provenance: dict):
    write_table(path, ["index", "eif_rho"], [[i, e] for i, e in pairs], provenance)


def write_manifest(path, spec: dict, files: dict, extra: dict | None = None):
    payload = {
        "artifact_version": __version__,
        "spec": spec,
        "files": {name: sha256_file(p) for name, p in files.items()},
    }
    if extra:
        payload.update(extra)
    write_json(path, payload)
