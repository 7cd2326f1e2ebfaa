"""End-to-end analysis: filter, test, q-values, sensitivity, empirical null,
double shrinkage with bootstrap intervals, and the top-k effect report."""

from __future__ import annotations

import sys
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import dataio, fdr, sensitivity, shrinkage
from .empirical_null import fit_empirical_null, local_fdr
from .sensitivity import SensitivityParams
from .stats_core import unpooled_t_tests, variance_filter

OUTPUT_FILES = (
    "qvalues.csv",
    "sensitivity.csv",
    "empirical_null.csv",
    "local_fdr.csv",
    "cis.csv",
    "topk.csv",
    "summary.json",
)


def _package_version() -> str:
    try:
        return metadata.version("confoundfdr")
    except metadata.PackageNotFoundError:
        return "unknown"


def run_pipeline(config: dataio.RunConfig) -> dict:
    """Run every stage on the configured input and write the output files.

    All results are computed before anything is written, so a failed stage
    leaves no partial outputs behind.  Returns the summary dict that is also
    serialized as summary.json.
    """
    if config.input_path is None:
        raise ValueError("config.input_path is required")

    matrix = dataio.load_matrix(config.input_path, config.labels_spec)
    filtered = variance_filter(matrix, config.variance_threshold)
    results = unpooled_t_tests(filtered)

    gene_ids = tuple(r.gene_id for r in results)
    pvals = np.array([r.p for r in results])
    tstats = np.array([r.t for r in results])
    ses = np.array([r.se for r in results])

    pi0_est = fdr.estimate_pi0(pvals, config.lambda_grid)
    qset = fdr.qvalues(pvals, pi0_est.pi0)
    n_significant = int(np.count_nonzero(qset.q <= config.q_threshold))

    grid = [SensitivityParams(g, m) for g, m in config.sensitivity_grid]
    sweep = sensitivity.sensitivity_sweep(
        results, grid, config.q_threshold, config.lambda_grid, threads=config.threads
    )

    null = fit_empirical_null(
        tstats,
        center_window=config.window,
        n_bins=config.n_bins,
        poly_degree=config.poly_degree,
    )
    lfdr = local_fdr(tstats, null)

    shrunk = shrinkage.double_shrink(tstats, null)
    cis = shrinkage.bootstrap_cis(
        tstats,
        shrunk,
        null,
        B=config.bootstrap_b,
        level=config.level,
        ses=ses,
        seed=config.seed,
        gene_ids=gene_ids,
        threads=config.threads,
    )
    topk = shrinkage.top_k_report(cis, qset, min(config.top_k, len(cis)))

    summary = {
        "config": config.to_dict(),
        "seed": config.seed,
        "n_genes_input": matrix.n_genes,
        "n_genes_tested": filtered.n_genes,
        "pi0_theoretical_null": pi0_est.pi0,
        "pi0_empirical_null": null.pi0,
        "empirical_null": {"delta0": null.delta0, "sigma0": null.sigma0},
        "n_significant_qvalues": n_significant,
        "versions": {
            "confoundfdr": _package_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, writer in (
            ("qvalues.csv", lambda p: dataio.write_qvalues(p, gene_ids, pvals, qset.q)),
            ("sensitivity.csv", lambda p: dataio.write_sensitivity(p, sweep)),
            ("empirical_null.csv", lambda p: dataio.write_empirical_null(p, null)),
            ("local_fdr.csv", lambda p: dataio.write_local_fdr(p, gene_ids, tstats, lfdr)),
            ("cis.csv", lambda p: dataio.write_ci_table(p, cis)),
            ("topk.csv", lambda p: dataio.write_ci_table(p, topk)),
            ("summary.json", lambda p: dataio.write_summary(p, summary)),
        ):
            target = out_dir / name
            written.append(target)
            writer(target)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return summary
