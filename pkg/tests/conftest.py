import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from confoundfdr.stats_core import ExpressionMatrix


def make_matrix(g=50, n0=10, n1=10, effect_rows=0, effect=0.0, seed=0, base_sd=1.0):
    """Random expression matrix; the first effect_rows genes get a class-1 shift."""
    rng = np.random.default_rng(seed)
    labels = np.array([0] * n0 + [1] * n1)
    values = rng.normal(0.0, base_sd, size=(g, n0 + n1))
    if effect_rows:
        values[:effect_rows, labels == 1] += effect
    ids = tuple(f"g{i:04d}" for i in range(g))
    return ExpressionMatrix(values=values, gene_ids=ids, labels=labels)


@pytest.fixture
def small_matrix():
    return make_matrix(g=20, n0=5, n1=5, seed=1)


def write_matrix_csv(path, matrix, inline_labels=True):
    """Serialize an ExpressionMatrix the way load_matrix expects to read it."""
    lines = []
    if inline_labels:
        header = ["gene_id"] + [
            f"s{j}::{int(lab)}" for j, lab in enumerate(matrix.labels)
        ]
    else:
        header = ["gene_id"] + [f"s{j}" for j in range(matrix.n_samples)]
    lines.append(",".join(header))
    for gid, row in zip(matrix.gene_ids, matrix.values):
        lines.append(",".join([gid] + [repr(float(v)) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")
    return path
