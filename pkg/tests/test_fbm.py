import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import ldl

from fouest.errors import CholeskyFailed, CirculantEmbeddingFailed, DomainError
from fouest.fbm import (
    SamplePath,
    TimeGrid,
    circulant_size,
    fbm_covariance,
    fgn_autocovariance,
    generate_fbm,
    indicator_cells,
    inner_product_h,
)

mp.mp.dps = 30


class TestCovariance:
    @pytest.mark.parametrize("t", [0.3, 1.0, 7.5])
    @pytest.mark.parametrize("h", [0.3, 0.5, 0.6, 0.75, 0.9])
    def test_diagonal_is_t_power_2h(self, t, h):
        assert fbm_covariance(t, t, h) == pytest.approx(t ** (2 * h), rel=1e-14)

    @pytest.mark.parametrize("s,t", [(0.5, 2.0), (1.0, 1.0), (3.0, 0.25)])
    def test_half_recovers_brownian(self, s, t):
        assert fbm_covariance(s, t, 0.5) == pytest.approx(min(s, t), rel=1e-14)

    def test_direct_substitution_value(self):
        # (1, 2, H=0.75): (2^1.5 + 1 - 1) / 2 = sqrt(2)
        expected = float(mp.mpf(2) ** mp.mpf("0.5"))
        assert fbm_covariance(1.0, 2.0, 0.75) == pytest.approx(expected, abs=1e-15)

    def test_valid_for_negative_times(self):
        h = 0.7
        expected = 0.5 * (1 + 1 - 2 ** (2 * h))
        assert fbm_covariance(-1.0, 1.0, h) == pytest.approx(expected, rel=1e-14)

    def test_hurst_out_of_range(self):
        with pytest.raises(DomainError):
            fbm_covariance(1.0, 2.0, 1.0)
        with pytest.raises(DomainError):
            fbm_covariance(1.0, 2.0, 0.0)

    @pytest.mark.parametrize("h", [0.55, 0.6, 0.75])
    def test_grid_matrix_positive_semidefinite(self, h):
        times = TimeGrid(5.0, 24).times()[1:]
        cov = fbm_covariance(times[:, None], times[None, :], h)
        assert np.allclose(cov, cov.T)
        _, d, _ = ldl(cov)
        pivots = np.diag(d)
        assert pivots.min() >= -1e-10 * pivots.max()


class TestFgnAutocovariance:
    @pytest.mark.parametrize("delta,h", [(0.5, 0.3), (1.0, 0.6), (0.01, 0.75)])
    def test_lag_zero_is_increment_variance(self, delta, h):
        assert fgn_autocovariance(0, delta, h) == pytest.approx(delta ** (2 * h), rel=1e-14)

    @pytest.mark.parametrize("k", [1, 2, 10])
    def test_brownian_increments_uncorrelated(self, k):
        assert fgn_autocovariance(k, 0.25, 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_lag_one_reference_value(self):
        expected = float(mp.mpf("0.5") * (2 ** mp.mpf("1.5") - 2))
        assert fgn_autocovariance(1, 1.0, 0.75) == pytest.approx(expected, abs=1e-15)

    @given(
        n=st.integers(min_value=0, max_value=40),
        delta=st.floats(min_value=0.01, max_value=10.0),
        h=st.floats(min_value=0.05, max_value=0.95),
    )
    @settings(max_examples=50, deadline=None)
    def test_telescoping_sum_matches_covariance(self, n, delta, h):
        # sum_{k=-n..n} autocov(k) = Cov(B_d - B_0, B_{(n+1)d} - B_{-nd}),
        # computable directly from the two-slot covariance.
        lags = np.arange(-n, n + 1)
        total = fgn_autocovariance(np.abs(lags), delta, h).sum()
        a, b = -n * delta, (n + 1) * delta
        c, d = 0.0, delta
        direct = (
            fbm_covariance(b, d, h) - fbm_covariance(b, c, h)
            - fbm_covariance(a, d, h) + fbm_covariance(a, c, h)
        )
        assert total == pytest.approx(direct, rel=1e-9, abs=1e-10)


class TestGenerateFbm:
    @pytest.mark.parametrize("method", ["circulant", "cholesky"])
    def test_deterministic_per_seed(self, method):
        grid = TimeGrid(2.0, 64)
        a = generate_fbm(grid, 0.7, seed=123, method=method)
        b = generate_fbm(grid, 0.7, seed=123, method=method)
        assert np.array_equal(a.values, b.values)
        assert a.values[0] == 0.0
        assert a.label == "fbm" and a.hurst == 0.7 and a.seed == 123

    def test_different_seeds_differ(self):
        grid = TimeGrid(2.0, 64)
        a = generate_fbm(grid, 0.7, seed=1)
        b = generate_fbm(grid, 0.7, seed=2)
        assert not np.array_equal(a.values, b.values)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            generate_fbm(TimeGrid(1.0, 4), 0.5, seed=0, method="hosking")

    @pytest.mark.parametrize("n,expected", [(1, 2), (2, 4), (3, 8), (32, 64), (33, 128)])
    def test_circulant_size(self, n, expected):
        assert circulant_size(n) == expected

    def test_terminal_variance_scaling(self):
        # Var(B_T / T^H) = 1; sample variance over 10k seeds within 5%.
        grid = TimeGrid(4.0, 16)
        h = 0.7
        endpoints = np.array([
            generate_fbm(grid, h, seed=s).values[-1] for s in range(10_000)
        ])
        sample_var = endpoints.var(ddof=1) / grid.t_max ** (2 * h)
        assert abs(sample_var - 1.0) < 0.05, f"relative error {sample_var - 1.0:+.3%}"

    def test_lag_one_increment_covariance(self):
        # pooled products of consecutive unit-step increments at H = 0.75
        grid = TimeGrid(16.0, 16)
        h = 0.75
        target = fgn_autocovariance(1, 1.0, h)
        products = []
        for s in range(10_000):
            inc = np.diff(generate_fbm(grid, h, seed=s).values)
            products.append(inc[:-1] * inc[1:])
        products = np.concatenate(products)
        se = products.std(ddof=1) / np.sqrt(products.size)
        assert abs(products.mean() - target) < 3 * se, (
            f"lag-1 covariance {products.mean():.5f} vs {target:.5f} (3se={3*se:.5f})"
        )

    @pytest.mark.parametrize("method", ["circulant", "cholesky"])
    @pytest.mark.parametrize("h", [0.5, 0.7])
    def test_empirical_covariance_small_grid(self, method, h):
        # both samplers reproduce R_H entrywise within 5 MC standard errors
        grid = TimeGrid(1.0, 8)
        n_paths = 20_000
        paths = np.empty((n_paths, grid.n_steps))
        for s in range(n_paths):
            paths[s] = generate_fbm(grid, h, seed=s, method=method).values[1:]
        emp = paths.T @ paths / n_paths
        times = grid.times()[1:]
        cov = fbm_covariance(times[:, None], times[None, :], h)
        se = np.sqrt((np.outer(np.diag(cov), np.diag(cov)) + cov**2) / n_paths)
        worst = np.max(np.abs(emp - cov) / se)
        assert worst < 5.0, f"worst entry deviates {worst:.2f} MC standard errors"

    def test_circulant_failure_surfaced(self, monkeypatch):
        import fouest.fbm as fbm_mod

        def bad_autocov(lag_k, delta, h):
            k = np.asarray(lag_k, dtype=float)
            return np.where(k == 0, 0.0, -np.ones_like(k))

        monkeypatch.setattr(fbm_mod, "fgn_autocovariance", bad_autocov)
        fbm_mod._circulant_sqrt_eigenvalues.cache_clear()
        with pytest.raises(CirculantEmbeddingFailed):
            generate_fbm(TimeGrid(1.0, 8), 0.612345, seed=0)
        fbm_mod._circulant_sqrt_eigenvalues.cache_clear()

    def test_cholesky_failure_surfaced(self, monkeypatch):
        import fouest.fbm as fbm_mod

        def indefinite_autocov(lag_k, delta, h):
            k = np.asarray(lag_k, dtype=float)
            return np.select([k == 0, k == 1], [1.0, 0.9], default=-0.9)

        monkeypatch.setattr(fbm_mod, "fgn_autocovariance", indefinite_autocov)
        with pytest.raises(CholeskyFailed):
            generate_fbm(TimeGrid(1.0, 8), 0.6, seed=0, method="cholesky")


class TestInnerProduct:
    @pytest.mark.parametrize("h", [0.55, 0.6, 0.65, 0.7, 0.75, 0.9])
    def test_indicator_reproduces_covariance(self, h):
        grid = TimeGrid(2.0, 40)
        for s_t, t_t in [(0.5, 0.5), (0.5, 1.5), (2.0, 1.0)]:
            got = inner_product_h(
                indicator_cells(grid, s_t), indicator_cells(grid, t_t), grid, h
            )
            assert got == pytest.approx(fbm_covariance(s_t, t_t, h), rel=1e-12)

    def test_domain_error_at_half(self):
        grid = TimeGrid(1.0, 4)
        ones = np.ones(4)
        with pytest.raises(DomainError):
            inner_product_h(ones, ones, grid, 0.5)

    @given(
        phi=st.lists(st.floats(-5, 5), min_size=6, max_size=6),
        psi=st.lists(st.floats(-5, 5), min_size=6, max_size=6),
    )
    @settings(max_examples=30, deadline=None)
    def test_symmetric_in_arguments(self, phi, psi):
        grid = TimeGrid(3.0, 6)
        a = inner_product_h(np.array(phi), np.array(psi), grid, 0.65)
        b = inner_product_h(np.array(psi), np.array(phi), grid, 0.65)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    def test_shape_mismatch_rejected(self):
        grid = TimeGrid(1.0, 4)
        with pytest.raises(ValueError):
            inner_product_h(np.ones(3), np.ones(4), grid, 0.6)


class TestSamplePathValidation:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SamplePath(TimeGrid(1.0, 4), np.zeros(4), label="fbm")

    def test_bad_label_rejected(self):
        with pytest.raises(ValueError):
            SamplePath(TimeGrid(1.0, 4), np.zeros(5), label="brownian")

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 4)
        with pytest.raises(ValueError):
            TimeGrid(1.0, 0)
        grid = TimeGrid(1.0, 4)
        assert grid.times()[0] == 0.0
        assert grid.delta == 0.25
