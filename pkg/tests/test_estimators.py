import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.isotonic import IsotonicRegression

from dpcdf import estimators
from dpcdf.core import RawDataset, RngSeed
from dpcdf.errors import ConfigError, DataError, EmptyDataset, KTooLarge
from dpcdf.estimators import (
    AqParams,
    CdfEstimate,
    HqParams,
    adaptive_quantiles,
    aq_estimate,
    hq_cdf_from_counts,
    hq_estimate,
    isotonic_project,
    postprocess_cdf,
    pp_estimate,
    release_moments,
    series_on_grid,
)
from dpcdf.legendre import basis_table, coefficient_matrix
from dpcdf.mechanisms import PrivacyParams
from dpcdf.metrics import DistributionSpec, true_cdf
from dpcdf.sampling import sample_distribution
from oracles import brute_force_isotonic, ecdf_projection_coeffs, series_values

P = PrivacyParams(1.0, 1e-5)
finite = st.floats(-1e3, 1e3, allow_nan=False)


class TestIsotonic:
    @pytest.mark.parametrize(
        "y, want",
        [([0.1, 0.2, 0.3], [0.1, 0.2, 0.3]), ([0.2, 0.1, 0.3], [0.15, 0.15, 0.3]), ([3, 2, 1], [2, 2, 2])],
    )
    def test_examples(self, y, want):
        np.testing.assert_allclose(isotonic_project(y), want, atol=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            isotonic_project([])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(finite, min_size=1, max_size=8))
    def test_matches_exhaustive_oracle(self, y):
        np.testing.assert_allclose(isotonic_project(y), brute_force_isotonic(y), atol=1e-10 * (1 + max(map(abs, y))))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(finite, min_size=1, max_size=60))
    def test_monotone_idempotent_and_matches_sklearn(self, y):
        fit = isotonic_project(y)
        assert np.all(np.diff(fit) >= -1e-12)
        np.testing.assert_array_equal(isotonic_project(fit), fit)
        ref = IsotonicRegression().fit_transform(np.arange(len(y)), y)
        np.testing.assert_allclose(fit, ref, atol=1e-9 * (1 + max(map(abs, y))))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(finite, min_size=1, max_size=40))
    def test_preserves_mean(self, y):
        assert isotonic_project(y).sum() == pytest.approx(sum(y), abs=1e-8 * (1 + sum(map(abs, y))))


class TestPostprocess:
    @pytest.mark.parametrize(
        "y, want", [([-0.1, 0.5, 1.2], [0, 0.5, 1]), ([0, 0, 0], [0, 0, 0]), ([1.5, 0.5], [1, 1])]
    )
    def test_examples(self, y, want):
        np.testing.assert_allclose(postprocess_cdf(y), want, atol=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-2, 3), min_size=2, max_size=50), st.lists(st.floats(0, 1), min_size=2, max_size=50))
    def test_contraction_towards_monotone_target(self, noisy, target):
        m = min(len(noisy), len(target))
        f_true = np.sort(np.array(target[:m]))
        f_noisy = np.array(noisy[:m])
        before = np.max(np.abs(f_noisy - f_true))
        after = np.max(np.abs(postprocess_cdf(f_noisy) - f_true))
        assert after <= before + 1e-12


class TestCdfEstimate:
    def test_rejects_decreasing(self):
        with pytest.raises(DataError):
            CdfEstimate([0, 1], [0.6, 0.4])

    def test_rejects_bad_grid(self):
        with pytest.raises(DataError):
            CdfEstimate([0, 0], [0, 1])

    def test_csv_round_trip(self, tmp_path):
        est = CdfEstimate(np.linspace(0, 1, 5), [0, 0.1, 0.1, 0.7, 1])
        est.to_csv(tmp_path / "f.csv")
        back = CdfEstimate.from_csv(tmp_path / "f.csv")
        np.testing.assert_array_equal(back.xs, est.xs)
        np.testing.assert_array_equal(back.values, est.values)


class TestHistogram:
    def test_even_split_two_bins(self):
        data = RawDataset([-0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9], (-1, 1))
        est = hq_estimate(data, P, HqParams(2), grid_size=5, sigma_override=0.0)
        # grid -1, -0.5, 0, 0.5, 1; first right edge is 0
        np.testing.assert_allclose(est.values, [0, 0, 0.5, 0.5, 1.0])

    def test_all_in_last_bin(self):
        data = RawDataset([0.9, 0.95], (0, 1))
        est = hq_estimate(data, P, HqParams(10), grid_size=11, sigma_override=0.0)
        assert np.all(est.values[:-1] == 0) and est.values[-1] == 1

    def test_negative_counts_clamped(self):
        out = hq_cdf_from_counts([-1, 3], (0, 2), np.array([0.0, 0.5, 1.0, 1.5, 2.0]))
        np.testing.assert_array_equal(out, [0, 0, 0, 0, 1])

    def test_all_negative_falls_back_to_uniform_mass(self):
        out = hq_cdf_from_counts([-1, -3], (0, 2), np.array([0.0, 1.0, 2.0]))
        np.testing.assert_array_equal(out, [0, 0.5, 1])

    def test_bins_validated(self):
        with pytest.raises(ConfigError):
            HqParams(0)


class TestAdaptiveQuantiles:
    def test_first_candidate_is_midpoint(self):
        data = RawDataset(np.linspace(0, 1, 101), (0, 1))
        est = aq_estimate(data, P, AqParams(1), grid_size=3, sigma_override=0.0)
        assert est.values[1] == pytest.approx(0.5, abs=0.01)

    def test_forty_below_midpoint(self):
        values = np.concatenate([np.full(40, -0.5), np.full(60, 0.5)])
        data = RawDataset(values, (-1, 1))
        est = aq_estimate(data, P, AqParams(1), grid_size=3, sigma_override=0.0)
        assert est.values[1] == pytest.approx(0.4)

    def test_reorder_pairs_ascending(self):
        # x=0 gets q=0.6, then x=-0.5 gets 0.1
        script = iter([(60.0, 40.0), (10.0, 90.0)])
        knots = adaptive_quantiles(lambda x: next(script), (-1.0, 1.0), 2)
        np.testing.assert_array_equal(knots.xs, [-1, -0.5, 0, 1])
        np.testing.assert_array_equal(knots.qs, [0, 0.1, 0.6, 1])

    def test_crossing_is_repaired(self):
        # x=0 gets q=0.7, x=-0.5 gets 0.2 and x=0.5 gets 0.6 < 0.7: a crossing
        script = iter([(70.0, 30.0), (20.0, 80.0), (60.0, 40.0)])
        knots = adaptive_quantiles(lambda x: next(script), (-1.0, 1.0), 3)
        np.testing.assert_array_equal(knots.xs, [-1, -0.5, 0, 0.5, 1])
        np.testing.assert_array_equal(knots.qs, [0, 0.2, 0.6, 0.7, 1])

    def test_nonpositive_total_falls_back(self):
        knots = adaptive_quantiles(lambda x: (-1.0, 0.5), (0.0, 1.0), 1)
        assert knots.fallbacks == 1
        np.testing.assert_array_equal(knots.qs, [0, 0.5, 1])

    def test_iterations_validated(self):
        with pytest.raises(ConfigError):
            AqParams(0)


class TestPolynomialProjection:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-3, 5), min_size=1, max_size=40), st.integers(0, 8))
    def test_noiseless_matches_quadrature_oracle(self, values, k):
        bounds = (-3.0, 5.0)
        data = RawDataset(values, bounds)
        est = pp_estimate(data, P, k, grid_size=200, sigma_override=0.0)
        u = (np.linspace(*bounds, 200) - 1.0) / 4.0
        scaled = (np.asarray(values) - 1.0) / 4.0
        want = postprocess_cdf(series_values(ecdf_projection_coeffs(scaled, k), u))
        np.testing.assert_allclose(est.values, want, atol=1e-10)

    def test_point_at_lower_bound(self):
        data = RawDataset([-2.0], (-2.0, 2.0))
        est = pp_estimate(data, P, 6, sigma_override=0.0)
        np.testing.assert_allclose(est.values, 1.0, atol=1e-10)

    def test_pure_noise_bound_per_run(self):
        # the raw noise term is z . (A^T e(x)), so |diff| <= sup_x sum_i |g_i(x)| * max|z|
        data = sample_distribution(DistributionSpec("normal", (0, 1)), 1000, RngSeed(5))
        A = coefficient_matrix(6)
        u = np.linspace(-1, 1, 1000)
        lip = np.abs(A.T @ basis_table(6, u)).sum(axis=0).max()
        for run in range(20):
            rel = release_moments(data, P, 6, RngSeed(5, run))
            _, noisy = series_on_grid(rel.moments, data.bounds)
            clean = release_moments(data, P, 6, RngSeed(5, run), sigma_override=0.0)
            _, exact = series_on_grid(clean.moments, data.bounds)
            assert np.max(np.abs(noisy - exact)) <= lip * np.max(np.abs(rel.noise)) + 1e-9

    def test_sup_sum_constant_exceeds_half_square(self):
        # documents why the (K+1)^2/2 constant cannot hold at K=6: the
        # triangle-inequality constant itself is larger
        A = coefficient_matrix(6)
        lip = np.abs(A.T @ basis_table(6, np.linspace(-1, 1, 20001))).sum(axis=0).max()
        assert lip > 49 / 2
        assert lip == pytest.approx(66.34, abs=0.01)

    def test_k_limits(self):
        data = RawDataset([0.0], (-1, 1))
        with pytest.raises(KTooLarge):
            pp_estimate(data, P, 17)
        with pytest.raises(KTooLarge):
            pp_estimate(data, P, -1)

    def test_empty_rejected(self):
        with pytest.raises(EmptyDataset):
            RawDataset([], (0, 1))


@pytest.fixture(scope="module")
def normal_data():
    return sample_distribution(DistributionSpec("normal", (0, 1)), 500, RngSeed(77))


@pytest.mark.parametrize("method", ["pp", "hq", "aq"])
@pytest.mark.parametrize("eps", [0.01, 0.1, 1.0, 10.0])
@pytest.mark.parametrize("run", range(3))
def test_invariants_hold_for_all_methods(normal_data, method, eps, run):
    params = PrivacyParams(eps, 500**-1.5)
    fn = {"pp": pp_estimate, "hq": hq_estimate, "aq": aq_estimate}[method]
    est = fn(normal_data, params, seed=RngSeed(int(eps * 100), run))
    assert np.all(np.diff(est.xs) > 0)
    assert np.all(np.diff(est.values) >= 0)
    assert est.values.min() >= 0 and est.values.max() <= 1
    assert est.meta["method"] == method


class TestAccounting:
    @pytest.fixture
    def counter(self, monkeypatch):
        calls = []
        real = estimators.calibrate_analytic_gaussian

        def counted(params, sensitivity, *a, **kw):
            calls.append((params.epsilon, params.delta, sensitivity))
            return real(params, sensitivity, *a, **kw)

        monkeypatch.setattr(estimators, "calibrate_analytic_gaussian", counted)
        return calls

    def test_pp_single_query(self, counter, normal_data):
        pp_estimate(normal_data, P, seed=RngSeed(1))
        assert len(counter) == 1
        assert counter[0][:2] == (P.epsilon, P.delta)

    def test_hq_single_query(self, counter, normal_data):
        hq_estimate(normal_data, P, seed=RngSeed(1))
        assert counter == [(P.epsilon, P.delta, math.sqrt(2))]

    def test_aq_t_queries(self, counter, normal_data):
        est = aq_estimate(normal_data, P, AqParams(25), seed=RngSeed(1))
        assert len(counter) == 25 == est.meta["queries"]
        for eps, delta, sens in counter:
            assert eps == pytest.approx(P.epsilon / 25) and delta == pytest.approx(P.delta / 25)
            assert sens == math.sqrt(2)
        assert sum(c[0] for c in counter) == pytest.approx(P.epsilon)


@pytest.mark.parametrize("fn", [pp_estimate, hq_estimate, aq_estimate])
def test_deterministic(fn, normal_data):
    a = fn(normal_data, P, seed=RngSeed(3, 1))
    b = fn(normal_data, P, seed=RngSeed(3, 1))
    np.testing.assert_array_equal(a.values, b.values)
    c = fn(normal_data, P, seed=RngSeed(3, 2))
    assert not np.array_equal(a.values, c.values)


def test_pp_error_shrinks_with_budget():
    spec = DistributionSpec("normal", (0, 1))
    data = sample_distribution(spec, 10_000, RngSeed(8))
    errs = []
    for eps in (0.05, 5.0):
        est = pp_estimate(data, PrivacyParams(eps, 1e-6), seed=RngSeed(8, 1))
        errs.append(np.max(np.abs(est.values - true_cdf(spec, est.xs))))
    assert errs[1] < errs[0]
