"""Tests for the copula layer.

The closed form used by ``dirichlet_bivariate_cdf`` is re-derived here from
first principles, since the sampler's correctness rests on it.

Let d ~ Dirichlet(1_n), i.e. uniform on the (n-1)-simplex.  Any single
coordinate is Beta(1, n-1):

    P(d_i <= a) = 1 - (1 - a)^(n-1).

For a pair of coordinates, the event {d_i > a, d_j > b} requires mass
a + b to be set aside, and the remaining coordinates again form a scaled
uniform simplex, so

    P(d_i > a, d_j > b) = max(0, 1 - a - b)^(n-1).

Inclusion-exclusion turns the joint survival function into the joint CDF:

    P(d_i <= a, d_j <= b)
        = 1 - P(d_i > a) - P(d_j > b) + P(d_i > a, d_j > b)
        = 1 - (1-a)^(n-1) - (1-b)^(n-1) + max(0, 1 - a - b)^(n-1).

The copula coordinate is the probability integral transform
u_i = 1 - (1 - d_i)^(n-1), which is strictly increasing in d_i, so with
a = 1 - (1-p)^(1/(n-1)) (the d-value mapping to u = p):

    Phi(p, q) = P(u_i <= p, u_j <= q)
              = p + q - 1 + max(0, (1-p)^(1/(n-1)) + (1-q)^(1/(n-1)) - 1)^(n-1).

At n = 2 the exponents vanish and Phi(p, q) = max(p + q - 1, 0), the
lower Frechet-Hoeffding bound, i.e. the exact antithetic pair (u, 1-u).
The Monte Carlo consistency test below checks the sampled construction
against this closed form on a grid, which validates both at once.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from carms.copula import (
    CLAMP_EPS,
    DIRICHLET,
    GAUSSIAN,
    CopulaDraw,
    CopulaKind,
    _sample_dirichlet_copula_batch,
    _sample_gaussian_copula_batch,
    bernoulli_pair_correlation,
    dirichlet_bivariate_cdf,
    sample_copula_batch,
    sample_dirichlet_copula,
    sample_gaussian_copula,
)


class _FakeRng:
    """Stands in for a Generator; returns constant exponentials."""

    def standard_exponential(self, shape):
        return np.ones(shape)


# ---------------------------------------------------------------------------
# dirichlet_bivariate_cdf


def test_cdf_frozen_values():
    # n=2 closed form max(p+q-1, 0)
    assert dirichlet_bivariate_cdf(0.6, 0.3, 2) == 0.0
    assert dirichlet_bivariate_cdf(0.7, 0.5, 2) == pytest.approx(0.2, abs=1e-15)
    # general n against the derivation evaluated by hand
    p, q, n = 0.4, 0.5, 4
    expected = p + q - 1 + max(0.0, 0.6 ** (1 / 3) + 0.5 ** (1 / 3) - 1) ** 3
    assert dirichlet_bivariate_cdf(p, q, n) == pytest.approx(expected, abs=1e-15)


@given(
    p=st.floats(0.0, 1.0),
    n=st.integers(2, 12),
)
def test_cdf_boundary_identities(p, n):
    assert dirichlet_bivariate_cdf(p, 1.0, n) == pytest.approx(p, abs=1e-15)
    assert dirichlet_bivariate_cdf(1.0, p, n) == pytest.approx(p, abs=1e-15)
    assert dirichlet_bivariate_cdf(p, 0.0, n) == 0.0
    assert dirichlet_bivariate_cdf(0.0, p, n) == 0.0


@given(
    p=st.floats(0.0, 1.0),
    q=st.floats(0.0, 1.0),
    n=st.integers(2, 12),
)
def test_cdf_symmetry_and_frechet_bounds(p, q, n):
    val = dirichlet_bivariate_cdf(p, q, n)
    assert val == dirichlet_bivariate_cdf(q, p, n)
    # Frechet-Hoeffding envelope; the lower bound is attained exactly at n=2
    assert val >= max(p + q - 1.0, 0.0)
    assert val <= min(p, q) + 1e-15
    if n == 2:
        assert val == max(p + q - 1.0, 0.0)


def test_cdf_monotone_in_each_argument():
    grid = np.linspace(0.0, 1.0, 41)
    for n in (2, 3, 7):
        surface = dirichlet_bivariate_cdf(grid[:, None], grid[None, :], n)
        assert np.all(np.diff(surface, axis=0) >= -1e-15)
        assert np.all(np.diff(surface, axis=1) >= -1e-15)


def test_cdf_rejects_bad_arguments():
    with pytest.raises(ValueError):
        dirichlet_bivariate_cdf(-0.1, 0.5, 2)
    with pytest.raises(ValueError):
        dirichlet_bivariate_cdf(0.5, 1.1, 2)
    with pytest.raises(ValueError):
        dirichlet_bivariate_cdf(0.5, np.nan, 2)
    with pytest.raises(ValueError):
        dirichlet_bivariate_cdf(0.5, 0.5, 1)


def test_cdf_scalar_in_scalar_out():
    out = dirichlet_bivariate_cdf(0.3, 0.4, 3)
    assert isinstance(out, float)
    out = dirichlet_bivariate_cdf(np.full(4, 0.3), 0.4, 3)
    assert out.shape == (4,)


# ---------------------------------------------------------------------------
# sampling


def test_dirichlet_simplex_center_maps_to_five_ninths():
    # equal exponentials normalize to d = 1/n; at n=3 the transform gives
    # u = 1 - (2/3)^2 = 5/9
    u = _sample_dirichlet_copula_batch(2, 3, _FakeRng())
    assert np.allclose(u, 5.0 / 9.0, atol=1e-15)


def test_dirichlet_n2_is_exact_antithetic_pair():
    rng = np.random.default_rng(0)
    u = _sample_dirichlet_copula_batch(10_000, 2, rng)
    assert np.max(np.abs(u[:, 0] + u[:, 1] - 1.0)) <= 1e-12


def test_gaussian_n2_full_anticorrelation_is_exact_pair():
    rng = np.random.default_rng(0)
    u = _sample_gaussian_copula_batch(10_000, 2, -1.0, rng)
    assert np.max(np.abs(u[:, 0] + u[:, 1] - 1.0)) <= 1e-12


def test_draws_are_clamped_strictly_inside_unit_interval():
    rng = np.random.default_rng(1)
    for kind in (DIRICHLET, GAUSSIAN):
        u = sample_copula_batch(kind, 50_000, 3, rng)
        assert u.min() >= CLAMP_EPS
        assert u.max() <= 1.0 - CLAMP_EPS


def test_unit_samplers_validate_n():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_dirichlet_copula(1, rng)
    with pytest.raises(ValueError):
        sample_gaussian_copula(1, -0.5, rng)


def test_unit_samplers_return_copula_draws():
    rng = np.random.default_rng(0)
    d = sample_dirichlet_copula(4, rng)
    g = sample_gaussian_copula(3, -0.25, rng)
    assert isinstance(d, CopulaDraw) and d.values.shape == (4,)
    assert isinstance(g, CopulaDraw) and g.values.shape == (3,)


@pytest.mark.parametrize("kind", [DIRICHLET, GAUSSIAN], ids=["dirichlet", "gaussian"])
@pytest.mark.parametrize("n", [2, 3, 5, 10])
def test_marginal_uniformity_ks(kind, n):
    # KS at the 1% level over 1e5 draws, every coordinate
    rng = np.random.default_rng(1234 + n)
    u = sample_copula_batch(kind, 100_000, n, rng)
    for coord in range(n):
        assert stats.kstest(u[:, coord], "uniform").pvalue > 0.01


@pytest.mark.parametrize("n", [2, 3])
def test_cdf_consistency_on_grid(n):
    # empirical frequency of {u1 < p, u2 < q} within 4 SE of the closed form
    rng = np.random.default_rng(7)
    draws = 100_000
    u = _sample_dirichlet_copula_batch(draws, n, rng)
    grid = np.arange(0.1, 0.95, 0.1)
    analytic = dirichlet_bivariate_cdf(grid[:, None], grid[None, :], n)
    empirical = np.mean(
        (u[:, 0, None, None] < grid[:, None]) & (u[:, 1, None, None] < grid[None, :]),
        axis=0,
    )
    se = np.sqrt(np.maximum(analytic * (1 - analytic), 1e-12) / draws)
    # structurally-zero cells must stay empty; elsewhere a 4 SE band applies
    zero = analytic == 0.0
    assert np.all(empirical[zero] == 0.0)
    assert np.all(np.abs(empirical - analytic)[~zero] <= 4.0 * se[~zero])


def test_exchangeability_across_coordinate_pairs():
    # the bivariate law must not depend on which coordinate pair is read
    rng = np.random.default_rng(11)
    draws = 100_000
    u = _sample_dirichlet_copula_batch(draws, 4, rng)
    points = [(0.3, 0.3), (0.5, 0.7), (0.8, 0.2)]
    pairs = [(0, 1), (2, 3), (1, 3)]
    for p, q in points:
        freqs = [np.mean((u[:, i] < p) & (u[:, j] < q)) for i, j in pairs]
        ref = dirichlet_bivariate_cdf(p, q, 4)
        se = np.sqrt(ref * (1 - ref) / draws)
        assert max(freqs) - min(freqs) <= 8.0 * se


def test_gaussian_equicorrelation_value():
    # corr(u1, u2) for a Gaussian copula with normal correlation rho is
    # (6/pi) asin(rho/2); check at rho = -0.5 within 3 SE
    rng = np.random.default_rng(3)
    draws = 100_000
    u = _sample_gaussian_copula_batch(draws, 3, -0.5, rng)
    r = np.corrcoef(u[:, 0], u[:, 1])[0, 1]
    expected = (6.0 / np.pi) * np.arcsin(-0.25)
    se = (1 - expected**2) / np.sqrt(draws)
    assert r < 0
    assert abs(r - expected) <= 3.0 * se


def test_gaussian_zero_correlation_is_independent():
    rng = np.random.default_rng(4)
    draws = 100_000
    u = _sample_gaussian_copula_batch(draws, 2, 0.0, rng)
    r = np.corrcoef(u[:, 0], u[:, 1])[0, 1]
    assert abs(r) <= 3.0 / np.sqrt(draws)


# ---------------------------------------------------------------------------
# CopulaKind / CopulaDraw validation


def test_copula_kind_band_validation():
    # the feasible equicorrelation band is [-1/(n-1), 0]
    kind = CopulaKind("gaussian", rho=-0.6)
    assert kind.resolve_rho(2) == -0.6
    with pytest.raises(ValueError):
        kind.resolve_rho(3)  # band is [-0.5, 0]
    with pytest.raises(ValueError):
        CopulaKind("gaussian", rho=0.1).resolve_rho(3)  # positive side excluded


def test_copula_kind_defaults_and_errors():
    assert GAUSSIAN.resolve_rho(5) == pytest.approx(-0.25)
    assert DIRICHLET.rho is None
    with pytest.raises(ValueError):
        CopulaKind("dirichlet", rho=-0.5)
    with pytest.raises(ValueError):
        CopulaKind("logistic")


def test_copula_draw_validation():
    with pytest.raises(ValueError):
        CopulaDraw(np.array([0.5]))  # too short
    with pytest.raises(ValueError):
        CopulaDraw(np.array([0.0, 0.5]))  # boundary value
    with pytest.raises(ValueError):
        CopulaDraw(np.array([[0.3, 0.7]]))  # not 1-D


# ---------------------------------------------------------------------------
# bernoulli_pair_correlation


def test_bernoulli_pair_correlation_frozen_values():
    assert bernoulli_pair_correlation(0.5, 2) == pytest.approx(-1.0, abs=1e-12)
    assert bernoulli_pair_correlation(0.9, 2) == pytest.approx(-1.0 / 9.0, abs=1e-12)


def test_bernoulli_pair_correlation_range_and_errors():
    for n in (2, 3, 5, 8):
        for p in np.linspace(0.02, 0.98, 25):
            rho = bernoulli_pair_correlation(float(p), n)
            assert -1.0 - 1e-12 <= rho <= 0.0
    for bad in (0.0, 1.0, -0.2, np.nan):
        with pytest.raises(ValueError):
            bernoulli_pair_correlation(bad, 2)


# ---------------------------------------------------------------------------
# determinism


def test_same_seed_same_draws():
    for kind in (DIRICHLET, GAUSSIAN):
        a = sample_copula_batch(kind, 100, 4, np.random.default_rng(99))
        b = sample_copula_batch(kind, 100, 4, np.random.default_rng(99))
        assert np.array_equal(a, b)
