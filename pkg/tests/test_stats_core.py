import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from confoundfdr.errors import DegenerateDataError, MatrixError
from confoundfdr.stats_core import (
    ExpressionMatrix,
    normal_two_sided_p,
    unpooled_t_tests,
    variance_filter,
)

from conftest import make_matrix
from oracles import scalar_unpooled, two_sided_normal_p


def matrix_from_rows(rows, labels, ids=None):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    ids = ids or tuple(f"g{i}" for i in range(rows.shape[0]))
    return ExpressionMatrix(values=rows, gene_ids=ids, labels=np.asarray(labels))


class TestNormalTwoSidedP:
    def test_zero_statistic_gives_one(self):
        assert normal_two_sided_p(0.0) == 1.0

    def test_critical_value(self):
        # frozen from the mpmath oracle: 2*(1 - Phi(1.959964))
        assert normal_two_sided_p(1.959964) == pytest.approx(0.04999999819288481, abs=1e-14)
        assert normal_two_sided_p(1.959964) == pytest.approx(0.05, abs=1e-6)

    def test_symmetry(self):
        assert normal_two_sided_p(-3.0) == normal_two_sided_p(3.0)

    def test_accuracy_against_high_precision_oracle(self):
        for t in np.linspace(-6.0, 6.0, 41):
            assert normal_two_sided_p(float(t)) == pytest.approx(
                two_sided_normal_p(float(t)), abs=1e-12
            )

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            normal_two_sided_p(float("nan"))
        with pytest.raises(ValueError):
            normal_two_sided_p(np.array([1.0, np.inf]))


class TestExpressionMatrix:
    def test_rejects_duplicate_gene_ids(self):
        with pytest.raises(MatrixError, match="duplicate gene ids: dup"):
            matrix_from_rows([[1, 2, 3, 4]] * 2, [0, 0, 1, 1], ids=("dup", "dup"))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(MatrixError):
            matrix_from_rows([[1, 2, 3, 4]], [0, 1, 1], ids=("a",))

    def test_rejects_missing_values(self):
        with pytest.raises(MatrixError, match="non-finite"):
            matrix_from_rows([[1, np.nan, 3, 4]], [0, 0, 1, 1])

    def test_rejects_single_class(self):
        with pytest.raises(MatrixError, match="both phenotype classes"):
            matrix_from_rows([[1, 2, 3, 4]], [1, 1, 1, 1])

    def test_rejects_bad_labels(self):
        with pytest.raises(MatrixError, match="labels must be 0 or 1"):
            matrix_from_rows([[1, 2, 3, 4]], [0, 1, 2, 1])


class TestVarianceFilter:
    def test_constant_row_removed(self):
        m = matrix_from_rows([[5, 5, 5, 5], [1, 2, 3, 4]], [0, 0, 1, 1])
        out = variance_filter(m, 0.05)
        assert out.gene_ids == ("g1",)

    def test_zero_threshold_rejected(self):
        m = matrix_from_rows([[1, 2, 3, 4]], [0, 0, 1, 1])
        with pytest.raises(ValueError, match="positive"):
            variance_filter(m, 0.0)

    def test_tiny_threshold_keeps_small_variance_row(self):
        # variance of {0, 0.01, 0.02, 0.01} (ddof=1) is ~6.7e-5 >= 1e-12
        m = matrix_from_rows([[0.0, 0.01, 0.02, 0.01]], [0, 0, 1, 1])
        assert variance_filter(m, 1e-12).n_genes == 1

    def test_all_rows_filtered_is_an_error(self):
        m = matrix_from_rows([[1, 1, 1, 1]], [0, 0, 1, 1])
        with pytest.raises(DegenerateDataError, match="no hypotheses remain"):
            variance_filter(m, 0.05)

    def test_idempotent_and_order_preserving(self):
        m = make_matrix(g=60, seed=3)
        once = variance_filter(m, 0.8)
        twice = variance_filter(once, 0.8)
        assert once.gene_ids == twice.gene_ids
        assert_array_equal(once.values, twice.values)
        original_order = {gid: i for i, gid in enumerate(m.gene_ids)}
        positions = [original_order[gid] for gid in once.gene_ids]
        assert positions == sorted(positions)


class TestUnpooledTTests:
    def test_hand_worked_example(self):
        m = matrix_from_rows([[1, 2, 3, 4, 5, 6]], [0, 0, 0, 1, 1, 1])
        r = unpooled_t_tests(m)[0]
        # frozen from the scalar oracle: beta 3, se sqrt(2/3), t 3/se
        assert r.beta_star == pytest.approx(3.0, abs=1e-15)
        assert r.se == pytest.approx(0.816496580927726, abs=1e-15)
        assert r.t == pytest.approx(3.6742346141747673, abs=1e-14)
        assert r.p == pytest.approx(0.00023856345402870977, rel=1e-12)
        beta, se, t = scalar_unpooled([1, 2, 3], [4, 5, 6])
        assert r.beta_star == pytest.approx(beta) and r.se == pytest.approx(se)
        assert r.t == pytest.approx(t)

    def test_identical_classes_give_null_result(self):
        m = matrix_from_rows([[1, 2, 3, 1, 2, 3]], [0, 0, 0, 1, 1, 1])
        r = unpooled_t_tests(m)[0]
        assert r.beta_star == 0.0 and r.t == 0.0 and r.p == 1.0

    def test_label_flip_antisymmetry(self):
        m = make_matrix(g=40, seed=7, effect_rows=10, effect=1.5)
        flipped = ExpressionMatrix(
            values=m.values, gene_ids=m.gene_ids, labels=1 - m.labels
        )
        for a, b in zip(unpooled_t_tests(m), unpooled_t_tests(flipped)):
            assert b.beta_star == -a.beta_star
            assert b.t == -a.t
            assert b.se == a.se
            assert b.p == a.p

    def test_t_times_se_recovers_beta(self):
        for r in unpooled_t_tests(make_matrix(g=80, seed=11)):
            assert r.t * r.se == pytest.approx(r.beta_star, rel=1e-12)

    def test_shift_and_scale_invariance(self):
        m = make_matrix(g=10, seed=13)
        base = unpooled_t_tests(m)
        shifted = matrix_from_rows(m.values + 7.25, m.labels, ids=m.gene_ids)
        for a, b in zip(base, unpooled_t_tests(shifted)):
            assert b.t == pytest.approx(a.t, rel=1e-9)
        scaled = matrix_from_rows(m.values * 3.5, m.labels, ids=m.gene_ids)
        for a, b in zip(base, unpooled_t_tests(scaled)):
            assert b.beta_star == pytest.approx(3.5 * a.beta_star, rel=1e-12)
            assert b.se == pytest.approx(3.5 * a.se, rel=1e-12)
            assert b.t == pytest.approx(a.t, rel=1e-12)

    def test_zero_se_raises_naming_gene(self):
        m = matrix_from_rows(
            [[1, 1, 2, 2], [1, 2, 3, 4]], [0, 0, 1, 1], ids=("flat", "ok")
        )
        with pytest.raises(DegenerateDataError, match="flat"):
            unpooled_t_tests(m)

    def test_requires_two_samples_per_class(self):
        m = matrix_from_rows([[1, 2, 3]], [0, 1, 1])
        with pytest.raises(MatrixError, match="at least 2 samples per class"):
            unpooled_t_tests(m)

    def test_output_order_matches_input(self):
        m = make_matrix(g=25, seed=5)
        assert tuple(r.gene_id for r in unpooled_t_tests(m)) == m.gene_ids
