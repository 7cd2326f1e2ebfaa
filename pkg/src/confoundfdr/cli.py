"""Command-line interface.

Subcommands mirror the analysis stages: ``test`` (variance filter plus
unpooled t-tests), ``qvalue``, ``bh``, ``sensitivity``, ``enull``, ``shrink``,
``simulate``, and ``pipeline`` for the whole sequence.  Every subcommand reads
CSV from ``--input`` (default stdin) where applicable and writes CSV to
``--out`` (default stdout), so stages compose with shell pipes.  Exit codes:
0 success, 1 validation or runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dataio, fdr, sensitivity, shrinkage
from .dataio import RunConfig
from .empirical_null import fit_empirical_null, local_fdr
from .pipeline import run_pipeline
from .sensitivity import SensitivityParams
from .simulation import NULL_MODELS, SimConfig, simulate
from .stats_core import TestResult, normal_two_sided_p, unpooled_t_tests, variance_filter


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _parse_pair_grid(text: str) -> tuple[tuple[float, float], ...]:
    """Parse 'gamma:mu,gamma:mu,...' into parameter pairs."""
    pairs = []
    for chunk in text.split(","):
        try:
            a, b = chunk.split(":")
            pairs.append((float(a), float(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"expected GAMMA:MU pairs separated by commas, got {chunk!r}"
            )
    return tuple(pairs)


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}")
    return float(parts[0]), float(parts[1])


def _floats(column: list[str], name: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in column])
    except ValueError as exc:
        raise ValueError(f"column {name!r}: {exc}") from None


def _pvalues_from(columns: dict[str, list[str]]) -> np.ndarray:
    if "p" in columns:
        return _floats(columns["p"], "p")
    for name in ("stat", "t"):
        if name in columns:
            return normal_two_sided_p(_floats(columns[name], name))
    raise ValueError("input needs a 'p' column, or a 'stat'/'t' column to convert")


def _stats_from(columns: dict[str, list[str]]) -> np.ndarray:
    for name in ("stat", "t"):
        if name in columns:
            return _floats(columns[name], name)
    raise ValueError("input needs a 'stat' or 't' column")


def _gene_ids_from(columns: dict[str, list[str]], n: int) -> tuple[str, ...]:
    if "gene_id" in columns:
        return tuple(columns["gene_id"])
    return dataio.synth_ids(n)


def _test_results_from(columns: dict[str, list[str]]) -> list[TestResult]:
    for required in ("beta", "se"):
        if required not in columns:
            raise ValueError("input needs test-result columns gene_id,beta,se,t,p")
    beta = _floats(columns["beta"], "beta")
    se = _floats(columns["se"], "se")
    t = _floats(columns["t"], "t") if "t" in columns else beta / se
    p = _floats(columns["p"], "p") if "p" in columns else normal_two_sided_p(t)
    ids = _gene_ids_from(columns, beta.size)
    return [
        TestResult(gene_id=g, beta_star=float(b), se=float(s), t=float(tt), p=float(pp))
        for g, b, s, tt, pp in zip(ids, beta, se, t, p)
    ]


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_test(args) -> int:
    matrix = dataio.load_matrix(args.input, args.labels)
    filtered = variance_filter(matrix, args.variance_threshold)
    dataio.write_test_results(args.out, unpooled_t_tests(filtered))
    return 0


def _cmd_qvalue(args) -> int:
    columns = dataio.read_columns(args.input)
    pvals = _pvalues_from(columns)
    if args.pi0 is not None:
        pi0 = args.pi0
    else:
        pi0 = fdr.estimate_pi0(pvals, args.lambda_grid).pi0
    qset = fdr.qvalues(pvals, pi0)
    print(f"pi0={pi0!r}", file=sys.stderr)
    dataio.write_qvalues(args.out, _gene_ids_from(columns, pvals.size), pvals, qset.q)
    return 0


def _cmd_bh(args) -> int:
    columns = dataio.read_columns(args.input)
    pvals = _pvalues_from(columns)
    rejection = fdr.bh_procedure(pvals, args.alpha)
    print(f"k_hat={rejection.k_hat}", file=sys.stderr)
    ids = _gene_ids_from(columns, pvals.size)
    rejected = [i in rejection.rejected for i in range(pvals.size)]
    dataio._write_rows(args.out, ["gene_id", "p", "rejected"], zip(ids, pvals, rejected))
    return 0


def _cmd_sensitivity(args) -> int:
    results = _test_results_from(dataio.read_columns(args.input))
    grid = [SensitivityParams(g, m) for g, m in args.grid]
    rows = sensitivity.sensitivity_sweep(
        results, grid, args.q_threshold, args.lambda_grid, threads=args.threads
    )
    dataio.write_sensitivity(args.out, rows)
    return 0


def _cmd_enull(args) -> int:
    stats = _stats_from(dataio.read_columns(args.input))
    null = fit_empirical_null(
        stats, center_window=args.window, n_bins=args.n_bins, poly_degree=args.poly_degree
    )
    print(
        json.dumps({"delta0": null.delta0, "sigma0": null.sigma0, "pi0": null.pi0}),
        file=sys.stderr,
    )
    dataio.write_empirical_null(args.out, null)
    if args.local_fdr_out:
        dataio.write_local_fdr(
            args.local_fdr_out, dataio.synth_ids(stats.size), stats, local_fdr(stats, null)
        )
    return 0


def _cmd_shrink(args) -> int:
    columns = dataio.read_columns(args.input)
    results = _test_results_from(columns)
    tstats = np.array([r.t for r in results])
    ses = np.array([r.se for r in results])
    null = fit_empirical_null(
        tstats, center_window=args.window, n_bins=args.n_bins, poly_degree=args.poly_degree
    )
    shrunk = shrinkage.double_shrink(tstats, null)
    table = shrinkage.bootstrap_cis(
        tstats,
        shrunk,
        null,
        B=args.bootstrap_b,
        level=args.level,
        ses=ses,
        seed=args.seed,
        gene_ids=tuple(r.gene_id for r in results),
        threads=args.threads,
    )
    dataio.write_ci_table(args.out, table)
    return 0


def _cmd_simulate(args) -> int:
    config = SimConfig(
        G=args.g,
        pi0=args.pi0,
        null_model=args.null_model,
        alt_mean=args.alt_mean,
        alt_sd=args.alt_sd,
        sigma=args.sigma,
        theta=args.theta,
        delta0=args.delta0,
        sigma0=args.sigma0,
        n_strata=args.n_strata,
        seed=args.seed,
    )
    dataio.write_simulated(args.out, simulate(config))
    return 0


def _cmd_pipeline(args) -> int:
    if args.config:
        with open(args.config) as fh:
            config = RunConfig.from_dict(json.load(fh))
    else:
        config = RunConfig()
    overrides = {
        "input_path": args.input,
        "labels_spec": args.labels,
        "variance_threshold": args.variance_threshold,
        "lambda_grid": args.lambda_grid,
        "q_threshold": args.q_threshold,
        "sensitivity_grid": args.grid,
        "n_bins": args.n_bins,
        "poly_degree": args.poly_degree,
        "window": args.window,
        "bootstrap_b": args.bootstrap_b,
        "level": args.level,
        "seed": args.seed,
        "top_k": args.top_k,
        "output_dir": args.output_dir,
        "threads": args.threads,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    summary = run_pipeline(config)
    print(json.dumps({"output_dir": config.output_dir,
                      "pi0_theoretical_null": summary["pi0_theoretical_null"],
                      "pi0_empirical_null": summary["pi0_empirical_null"]}),
          file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confoundfdr",
        description="Multiple hypothesis testing when the theoretical null may be confounded.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_io(p, input_help="input CSV ('-' for stdin)"):
        p.add_argument("--input", default="-", help=input_help)
        p.add_argument("--out", default="-", help="output CSV ('-' for stdout)")

    p = sub.add_parser("test", help="variance filter plus unpooled two-sample t-tests")
    p.add_argument("--input", required=True, help="measurement matrix CSV")
    p.add_argument("--labels", default="inline",
                   help="'inline' for ::0/::1 header suffixes, or a labels CSV path")
    p.add_argument("--variance-threshold", type=float, default=0.05)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("qvalue", help="estimate pi0 and compute q-values")
    add_io(p, "CSV with a 'p' column (or 'stat'/'t' to convert)")
    p.add_argument("--lambda-grid", type=_parse_float_list, default=fdr.DEFAULT_LAMBDA_GRID)
    p.add_argument("--pi0", type=float, default=None, help="fix pi0 instead of estimating it")
    p.set_defaults(func=_cmd_qvalue)

    p = sub.add_parser("bh", help="Benjamini-Hochberg step-up rejection")
    add_io(p, "CSV with a 'p' column (or 'stat'/'t' to convert)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_bh)

    p = sub.add_parser("sensitivity", help="mean-shift sensitivity sweep")
    add_io(p, "test-results CSV (gene_id,beta,se,t,p)")
    p.add_argument("--grid", type=_parse_pair_grid,
                   default=dataio.DEFAULT_SENSITIVITY_GRID, metavar="G:M,G:M,...")
    p.add_argument("--q-threshold", type=float, default=0.05)
    p.add_argument("--lambda-grid", type=_parse_float_list, default=fdr.DEFAULT_LAMBDA_GRID)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("enull", help="fit the empirical null and optional local fdr")
    add_io(p, "CSV with a 'stat' or 't' column")
    p.add_argument("--n-bins", type=int, default=120)
    p.add_argument("--poly-degree", type=int, default=7)
    p.add_argument("--window", type=_parse_window, default=None, metavar="LOW,HIGH")
    p.add_argument("--local-fdr-out", default=None, help="also write per-statistic local fdr CSV")
    p.set_defaults(func=_cmd_enull)

    p = sub.add_parser("shrink", help="double-shrinkage estimates with bootstrap CIs")
    add_io(p, "test-results CSV (gene_id,beta,se,t,p)")
    p.add_argument("--n-bins", type=int, default=120)
    p.add_argument("--poly-degree", type=int, default=7)
    p.add_argument("--window", type=_parse_window, default=None, metavar="LOW,HIGH")
    p.add_argument("-B", "--bootstrap-b", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=dataio.DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_shrink)

    p = sub.add_parser("simulate", help="draw statistics from a known-truth mixture")
    p.add_argument("--g", type=int, required=True, help="number of hypotheses")
    p.add_argument("--pi0", type=float, required=True)
    p.add_argument("--null-model", choices=NULL_MODELS, default="theoretical")
    p.add_argument("--alt-mean", type=float, default=3.0)
    p.add_argument("--alt-sd", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--delta0", type=float, default=0.0)
    p.add_argument("--sigma0", type=float, default=1.0)
    p.add_argument("--n-strata", type=int, default=2)
    p.add_argument("--seed", type=int, default=dataio.DEFAULT_SEED)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pipeline", help="run every stage and write all output files")
    p.add_argument("--config", default=None, help="JSON file with RunConfig keys")
    p.add_argument("--input", default=None, help="measurement matrix CSV")
    p.add_argument("--labels", default=None)
    p.add_argument("--variance-threshold", type=float, default=None)
    p.add_argument("--lambda-grid", type=_parse_float_list, default=None)
    p.add_argument("--q-threshold", type=float, default=None)
    p.add_argument("--grid", type=_parse_pair_grid, default=None, metavar="G:M,G:M,...")
    p.add_argument("--n-bins", type=int, default=None)
    p.add_argument("--poly-degree", type=int, default=None)
    p.add_argument("--window", type=_parse_window, default=None, metavar="LOW,HIGH")
    p.add_argument("-B", "--bootstrap-b", type=int, default=None)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--output-dir", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"confoundfdr: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
