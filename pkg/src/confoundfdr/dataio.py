"""Data ingestion, run configuration, and CSV/JSON serialization.

All numeric output uses shortest-round-trip float formatting, so re-parsing
an emitted file reproduces the in-memory values bit for bit.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .empirical_null import EmpiricalNull
from .errors import MatrixError
from .fdr import DEFAULT_LAMBDA_GRID
from .sensitivity import SensitivityRow
from .shrinkage import CiTable
from .simulation import SimulatedData
from .stats_core import ExpressionMatrix, TestResult

__all__ = [
    "DEFAULT_SEED",
    "DEFAULT_SENSITIVITY_GRID",
    "RunConfig",
    "load_matrix",
    "synth_ids",
    "read_columns",
]

DEFAULT_SEED = 1729

# identity point first, then two confounder strengths swept over mean gaps
DEFAULT_SENSITIVITY_GRID = (
    (0.0, 0.0),
    (1.5, 0.01),
    (1.5, 0.1),
    (1.5, 0.3),
    (1.5, 0.5),
    (1.5, 1.0),
    (0.1, 0.01),
    (0.1, 0.1),
    (0.1, 0.3),
    (0.1, 0.5),
    (0.1, 1.0),
)


@dataclass
class RunConfig:
    """Everything the end-to-end pipeline needs; defaults are valid downstream."""

    input_path: str | None = None
    labels_spec: str = "inline"
    variance_threshold: float = 0.05
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    q_threshold: float = 0.05
    sensitivity_grid: tuple[tuple[float, float], ...] = DEFAULT_SENSITIVITY_GRID
    n_bins: int = 120
    poly_degree: int = 7
    window: tuple[float, float] | None = None
    bootstrap_b: int = 1000
    level: float = 0.95
    seed: int = DEFAULT_SEED
    top_k: int = 20
    output_dir: str = "."
    threads: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        coerced = dict(data)
        if "lambda_grid" in coerced and coerced["lambda_grid"] is not None:
            coerced["lambda_grid"] = tuple(float(x) for x in coerced["lambda_grid"])
        if "sensitivity_grid" in coerced and coerced["sensitivity_grid"] is not None:
            coerced["sensitivity_grid"] = tuple(
                (float(a), float(b)) for a, b in coerced["sensitivity_grid"]
            )
        if "window" in coerced and coerced["window"] is not None:
            lo, hi = coerced["window"]
            coerced["window"] = (float(lo), float(hi))
        return cls(**coerced)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["lambda_grid"] = list(self.lambda_grid)
        out["sensitivity_grid"] = [list(pair) for pair in self.sensitivity_grid]
        out["window"] = list(self.window) if self.window is not None else None
        return out


def synth_ids(n: int) -> tuple[str, ...]:
    """Deterministic placeholder hypothesis ids for inputs without names."""
    return tuple(f"h{i + 1:06d}" for i in range(n))


# ---------------------------------------------------------------------------
# matrix ingestion


def _parse_labels_file(path: str) -> dict[str, int]:
    labels: dict[str, int] = {}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise MatrixError(f"cannot open labels file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["sample_id", "label"]:
            raise MatrixError(f"{path}:1: labels header must be 'sample_id,label'")
        for row in reader:
            if len(row) != 2:
                raise MatrixError(f"{path}:{reader.line_num}: expected 2 cells, got {len(row)}")
            sample, value = row[0].strip(), row[1].strip()
            if value not in ("0", "1"):
                raise MatrixError(
                    f"{path}:{reader.line_num}: label for {sample!r} must be 0 or 1, got {value!r}"
                )
            if sample in labels:
                raise MatrixError(f"{path}:{reader.line_num}: duplicate sample id {sample!r}")
            labels[sample] = int(value)
    return labels


def load_matrix(path: str, labels_spec: str = "inline") -> ExpressionMatrix:
    """Parse a measurement matrix CSV plus phenotype labels.

    The matrix file has a header ``gene_id,<sample ids...>`` and one row of
    numeric cells per gene.  Labels either come inline as ``::0`` / ``::1``
    suffixes on the header sample ids (``labels_spec="inline"``), or from a
    separate CSV with header ``sample_id,label`` whose path is passed as
    ``labels_spec``.  Every format problem raises MatrixError with the file
    position of the offending cell.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise MatrixError(f"cannot open matrix file {path}: {exc}") from exc

    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise MatrixError(f"{path}:1: header must be 'gene_id,<sample ids...>'")
        if header[0].strip() != "gene_id":
            raise MatrixError(f"{path}:1: first header column must be 'gene_id', got {header[0]!r}")
        raw_samples = [c.strip() for c in header[1:]]
        n = len(raw_samples)

        if labels_spec == "inline":
            sample_ids, labels = [], []
            for j, cell in enumerate(raw_samples):
                if cell.endswith("::0") or cell.endswith("::1"):
                    sample_ids.append(cell[:-3])
                    labels.append(int(cell[-1]))
                else:
                    raise MatrixError(
                        f"{path}:1: sample column {j + 2} ({cell!r}) lacks a ::0/::1 label suffix"
                    )
        else:
            label_map = _parse_labels_file(labels_spec)
            sample_ids = raw_samples
            missing = [s for s in sample_ids if s not in label_map]
            if missing:
                raise MatrixError(f"labels file is missing sample(s): {', '.join(missing)}")
            extra = sorted(set(label_map) - set(sample_ids))
            if extra:
                raise MatrixError(f"labels file names unknown sample(s): {', '.join(extra)}")
            labels = [label_map[s] for s in sample_ids]

        gene_ids: list[str] = []
        rows: list[list[float]] = []
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != n + 1:
                raise MatrixError(f"{path}:{line}: expected {n + 1} cells, got {len(row)}")
            gene_ids.append(row[0].strip())
            values = []
            for j, cell in enumerate(row[1:], start=2):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise MatrixError(
                        f"{path}:{line}: column {j}: non-numeric cell {cell.strip()!r}"
                    ) from None
            rows.append(values)

    if not rows:
        raise MatrixError(f"{path}: no data rows")
    values = np.array(rows, dtype=float)
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise MatrixError(
            f"{path}: non-finite value for gene {gene_ids[bad[0]]!r}, sample {sample_ids[bad[1]]!r}"
        )
    return ExpressionMatrix(values=values, gene_ids=tuple(gene_ids), labels=np.array(labels))


# ---------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    """Shortest string that round-trips the value exactly."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _open_out(path_or_dash: str | Path) -> IO[str]:
    if str(path_or_dash) == "-":
        return sys.stdout
    return open(path_or_dash, "w", newline="")


def _write_rows(out, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    own = isinstance(out, (str, Path))
    fh = _open_out(out) if own else out
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else _fmt(c) for c in row])
    finally:
        if own and fh is not sys.stdout:
            fh.close()


def write_test_results(out, results: list[TestResult]) -> None:
    _write_rows(out, ["gene_id", "beta", "se", "t", "p"],
                ((r.gene_id, r.beta_star, r.se, r.t, r.p) for r in results))


def write_qvalues(out, gene_ids: Sequence[str], pvalues, qvalues) -> None:
    _write_rows(out, ["gene_id", "p", "q"], zip(gene_ids, pvalues, qvalues))


def write_sensitivity(out, rows: list[SensitivityRow]) -> None:
    _write_rows(
        out,
        ["gamma", "mu_diff", "pi0_hat", "n_significant", "error"],
        (
            (r.params.gamma, r.params.mu_diff, r.pi0_hat, r.n_significant, r.error or "")
            for r in rows
        ),
    )


def write_empirical_null(out, null: EmpiricalNull) -> None:
    f0_scaled = null.pi0 * null.f0.f
    f1_scaled = (1.0 - null.pi0) * null.f1.f
    _write_rows(out, ["grid", "f", "f0_scaled", "f1_scaled"],
                zip(null.f.grid, null.f.f, f0_scaled, f1_scaled))


def write_local_fdr(out, gene_ids: Sequence[str], t_values, fdr_values) -> None:
    _write_rows(out, ["gene_id", "t", "local_fdr"], zip(gene_ids, t_values, fdr_values))


def write_ci_table(out, table: CiTable) -> None:
    if table.q is not None:
        header = ["gene_id", "statistic", "effect", "ci_low", "ci_high", "q"]
        rows = zip(table.gene_ids, table.t_stat, table.effect_hat,
                   table.ci_low, table.ci_high, table.q)
    else:
        header = ["gene_id", "statistic", "effect", "ci_low", "ci_high", "flagged"]
        rows = zip(table.gene_ids, table.t_stat, table.effect_hat,
                   table.ci_low, table.ci_high, table.flagged)
    _write_rows(out, header, rows)


def write_simulated(out, data: SimulatedData) -> None:
    if data.strata is not None:
        _write_rows(out, ["stat", "truth", "true_mean", "stratum"],
                    zip(data.stats, data.truth, data.true_means, data.strata))
    else:
        _write_rows(out, ["stat", "truth", "true_mean"],
                    zip(data.stats, data.truth, data.true_means))


def write_summary(out, summary: dict) -> None:
    own = isinstance(out, (str, Path))
    fh = _open_out(out) if own else out
    try:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    finally:
        if own and fh is not sys.stdout:
            fh.close()


def read_columns(path_or_dash: str) -> dict[str, list[str]]:
    """Read a CSV (or stdin for '-') into a column-name -> string-values map."""
    fh = sys.stdin if path_or_dash == "-" else open(path_or_dash, newline="")
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("input has no header row")
        columns: dict[str, list[str]] = {name.strip(): [] for name in header}
        names = [name.strip() for name in header]
        for row in reader:
            if not row:
                continue
            if len(row) != len(names):
                raise ValueError(f"line {reader.line_num}: expected {len(names)} cells, got {len(row)}")
            for name, cell in zip(names, row):
                columns[name].append(cell)
        return columns
    finally:
        if fh is not sys.stdin:
            fh.close()
