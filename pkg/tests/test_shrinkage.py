import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from confoundfdr.empirical_null import DensityEstimate, EmpiricalNull, fit_empirical_null
from confoundfdr.fdr import QValueSet, estimate_pi0, qvalues
from confoundfdr.shrinkage import bootstrap_cis, double_shrink, top_k_report
from confoundfdr.simulation import SimConfig, simulate
from confoundfdr.stats_core import normal_two_sided_p

Z_975 = 1.959963984540054  # frozen normal 0.975 quantile


def point_mass_null(center=1.5, half_width=0.005):
    """EmpiricalNull whose fitted mixture is (nearly) a point mass at center."""
    grid = np.linspace(center - half_width, center + half_width, 11)
    f = np.full(11, 1.0 / (2 * half_width))
    d = DensityEstimate(grid=grid, f=f, bin_width=grid[1] - grid[0])
    return EmpiricalNull(delta0=center, sigma0=1.0, pi0=1.0, f0=d, f1=d, f=d)


@pytest.fixture(scope="module")
def fitted():
    sim = simulate(SimConfig(G=4000, pi0=0.9, alt_mean=3.0, alt_sd=1.0, seed=70))
    null = fit_empirical_null(sim.stats)
    return sim, null, double_shrink(sim.stats, null)


class TestDoubleShrink:
    def test_convex_combination_identity_exact(self, fitted):
        _, _, shr = fitted
        assert_array_equal(shr.t_js, shr.w0 * shr.t0_js + (1 - shr.w0) * shr.t1_js)

    def test_estimate_between_components(self, fitted):
        _, _, shr = fitted
        lo = np.minimum(shr.t0_js, shr.t1_js)
        hi = np.maximum(shr.t0_js, shr.t1_js)
        assert np.all((shr.t_js >= lo - 1e-12) & (shr.t_js <= hi + 1e-12))

    def test_weights_in_unit_interval(self, fitted):
        _, _, shr = fitted
        assert np.all((shr.w0 >= 0) & (shr.w0 <= 1))

    def test_weight_formula_on_grid(self, fitted):
        _, null, _ = fitted
        shr = double_shrink(null.f.grid, null)
        denom = null.pi0 * null.f0.f + (1 - null.pi0) * null.f1.f
        ok = denom > 0
        assert_allclose((shr.w0 * denom)[ok], (null.pi0 * null.f0.f)[ok], rtol=1e-12)

    def test_positive_part_saturation(self):
        null = point_mass_null(center=0.0)
        stats = np.array([1e-7, -2e-7, 3e-7, 5e-8, 0.0])
        shr = double_shrink(stats, null)
        assert shr.shrink_factor0 == 1.0
        assert_allclose(shr.t0_js, shr.mu0_hat, atol=1e-12)

    def test_pure_null_direct_computation(self):
        sim = simulate(SimConfig(G=10000, pi0=1.0, seed=71))
        null = fit_empirical_null(sim.stats)
        shr = double_shrink(sim.stats, null)
        # independent scalar recomputation of the same display formulas
        mu0 = np.trapezoid(null.f0.grid * null.f0.f, null.f0.grid)
        factor = min(1.0, (10000 - 2) / float(np.sum((sim.stats - mu0) ** 2)))
        expected = sim.stats - factor * (sim.stats - mu0)
        assert_allclose(shr.t0_js, expected, rtol=1e-12, atol=1e-15)
        # ~ (1 - (G-2)/sum T^2) * T, essentially zero
        assert np.max(np.abs(shr.t0_js)) < 0.2
        assert factor == pytest.approx(1.0, abs=0.05)

    def test_zero_spread_gives_full_shrink_not_error(self):
        null = point_mass_null(center=0.5)
        mu0 = np.trapezoid(null.f0.grid * null.f0.f, null.f0.grid)
        shr = double_shrink(np.full(5, mu0), null)
        assert shr.shrink_factor0 == 1.0

    def test_needs_three_statistics(self):
        null = point_mass_null()
        with pytest.raises(ValueError, match="at least 3"):
            double_shrink([1.0, 2.0], null)


class TestBootstrapCis:
    def test_reproducible_and_thread_invariant(self, fitted):
        sim, null, shr = fitted
        ses = np.ones(sim.stats.size)
        kwargs = dict(B=150, level=0.95, ses=ses, seed=99)
        a = bootstrap_cis(sim.stats, shr, null, **kwargs)
        b = bootstrap_cis(sim.stats, shr, null, **kwargs)
        c = bootstrap_cis(sim.stats, shr, null, threads=4, **kwargs)
        for x in (b, c):
            assert_array_equal(a.ci_low, x.ci_low)
            assert_array_equal(a.ci_high, x.ci_high)

    def test_interval_orientation_and_effect_scale(self, fitted):
        sim, null, shr = fitted
        rng = np.random.default_rng(72)
        ses = rng.random(sim.stats.size) + 0.5
        table = bootstrap_cis(sim.stats, shr, null, B=150, level=0.95, ses=ses, seed=1)
        assert np.all(table.ci_low < table.ci_high)
        assert_allclose(table.effect_hat, shr.t_js * ses, rtol=1e-15)

    def test_degenerate_mixture_gives_normal_quantiles(self):
        null = point_mass_null(center=1.5)
        stats = np.linspace(-2, 2, 50)
        shr = double_shrink(stats, null)
        ses = np.full(50, 0.8)
        table = bootstrap_cis(stats, shr, null, B=10000, level=0.95, ses=ses, seed=3)
        assert_allclose(table.ci_low, (shr.t_js - Z_975) * ses, atol=0.05 * 0.8)
        assert_allclose(table.ci_high, (shr.t_js + Z_975) * ses, atol=0.05 * 0.8)

    def test_width_stable_in_replicate_count(self, fitted):
        sim, null, shr = fitted
        stats = sim.stats[:200]
        sub = double_shrink(stats, null)
        ses = np.ones(200)
        w = {}
        for b in (400, 10000):
            t = bootstrap_cis(stats, sub, null, B=b, level=0.95, ses=ses, seed=4)
            w[b] = t.ci_high - t.ci_low
        assert np.median(np.abs(w[400] - w[10000]) / w[10000]) <= 0.10

    def test_validation(self, fitted):
        sim, null, shr = fitted
        ses = np.ones(sim.stats.size)
        with pytest.raises(ValueError, match="replicates"):
            bootstrap_cis(sim.stats, shr, null, B=50, level=0.95, ses=ses, seed=0)
        with pytest.raises(ValueError, match="level"):
            bootstrap_cis(sim.stats, shr, null, B=100, level=0.3, ses=ses, seed=0)
        with pytest.raises(ValueError, match="positive"):
            bootstrap_cis(sim.stats, shr, null, B=100, level=0.95, ses=0 * ses, seed=0)


class TestTopKReport:
    def make_table(self, stats, seed=0):
        null = point_mass_null(center=0.0)
        shr = double_shrink(stats, null)
        return bootstrap_cis(
            stats, shr, null, B=100, level=0.95, ses=np.ones(stats.size), seed=seed
        )

    def test_k_equals_g_reorders_whole_table(self):
        stats = np.array([0.2, 3.0, -1.0, 0.5])
        table = self.make_table(stats)
        qset = qvalues(normal_two_sided_p(stats), 1.0)
        top = top_k_report(table, qset, 4)
        assert sorted(top.gene_ids) == sorted(table.gene_ids)
        assert np.all(np.diff(top.q) >= 0)

    def test_k_one_gives_minimum_q(self):
        stats = np.array([0.2, 3.0, -1.0, 0.5])
        table = self.make_table(stats)
        qset = qvalues(normal_two_sided_p(stats), 1.0)
        top = top_k_report(table, qset, 1)
        assert top.q[0] == qset.q.min()
        assert top.gene_ids[0] == table.gene_ids[int(np.argmin(qset.q))]

    def test_ties_broken_by_abs_statistic_then_index(self):
        stats = np.array([1.0, -2.0, 1.5, 2.0])
        table = self.make_table(stats)
        qset = QValueSet(q=np.array([0.5, 0.5, 0.5, 0.5]), pi0_used=1.0)
        top = top_k_report(table, qset, 3)
        # |t| = 1, 2, 1.5, 2 -> order: index 1 (|t|=2, earlier), index 3, index 2
        assert top.gene_ids == (table.gene_ids[1], table.gene_ids[3], table.gene_ids[2])

    def test_bounds_checked(self):
        stats = np.array([0.2, 3.0, -1.0, 0.5])
        table = self.make_table(stats)
        qset = qvalues(normal_two_sided_p(stats), 1.0)
        with pytest.raises(ValueError):
            top_k_report(table, qset, 5)

    @pytest.mark.slow
    def test_planted_signals_dominate_top_twenty(self):
        hits = []
        for rep in range(200):
            rng = np.random.default_rng(1000 + rep)
            g = 800
            truth = np.zeros(g, dtype=bool)
            truth[:50] = True
            stats = np.where(truth, rng.normal(5.0, 1.0, g), rng.standard_normal(g))
            pvals = normal_two_sided_p(stats)
            qset = qvalues(pvals, estimate_pi0(pvals).pi0)
            null = fit_empirical_null(stats, n_bins=60)
            shr = double_shrink(stats, null)
            table = bootstrap_cis(
                stats, shr, null, B=100, level=0.95, ses=np.ones(g), seed=rep
            )
            top = top_k_report(table, qset, 20)
            index_of = {gid: i for i, gid in enumerate(table.gene_ids)}
            hits.append(int(np.sum(truth[[index_of[gid] for gid in top.gene_ids]])))
        assert np.median(hits) >= 18
