"""Experiment drivers: a linear toy benchmark and pair-correlation scans.

The toy problem draws per-dimension category probabilities from a Dirichlet
prior, fixes the linear objective f(z) = sum_d d * c_d (both indices
1-based), and measures each estimator's per-coordinate gradient variance over
an inner Monte Carlo loop.  Trials are paired: every method at a given
(alpha, trial) sees the same probability draw and the same estimator seed.

Correlation scans report the C x C matrix corr(z_i, z'_j) between indicator
coordinates of the first two samples of a joint draw, which is the quickest
way to see how strongly a sampling path anticorrelates its samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copula import DIRICHLET, CopulaKind
from .oracle import TabulatedObjective
from .sampling import (
    UnsupportedPathError,
    _categorize_batch,
    _gumbel_categories_batch,
    _inverse_cdf_categories_batch,
    as_probs,
    bivariate_pmf_averaged,
    sample_antithetic_inverse_cdf,
)

TOY_METHODS = ("carms-i", "carms-g", "loorf", "reinforce")
CORRELATION_METHODS = ("inverse-cdf", "gumbel", "independent")


def toy_objective(n_categories: int, dims: int) -> TabulatedObjective:
    """f(z) = sum_d d * c_d with 1-based dimension and category indices."""
    grids = np.meshgrid(*[np.arange(n_categories)] * dims, indexing="ij")
    assignments = np.stack(grids, axis=-1).reshape(-1, dims)
    values = ((assignments + 1) * (np.arange(dims) + 1)).sum(axis=1).astype(float)
    return TabulatedObjective(values.reshape((n_categories,) * dims))


def _iid_categories(k: int, n: int, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(p)
    return _categorize_batch(rng.random((k, n)), cum)


def _analytic_ratio_matrix(p: np.ndarray, n_samples: int, clip: float | None):
    """Fixed importance ratios from the full ordering-averaged PMF.

    Returns (ratios, exceed) where exceed marks off-diagonal pairs whose raw
    ratio tops the clip ceiling, i.e. where clipping engages when realized.
    Zero-probability pairs can never be realized and get the inert 1.
    """
    pbar = bivariate_pmf_averaged(p, n_samples)
    pouter = np.outer(p, p)
    live = pbar > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(live, pouter / pbar, 1.0)
    offdiag = ~np.eye(p.size, dtype=bool)
    if clip is None:
        return raw, np.zeros_like(live)
    exceed = live & offdiag & (raw > clip)
    return np.where(live, np.minimum(raw, clip), 1.0), exceed


def _carms_estimates(
    f: np.ndarray, cats: np.ndarray, ratios: np.ndarray, p_row: np.ndarray
) -> np.ndarray:
    """Matrix-form carms for a batch of draws in one dimension.

    f and cats have shape (k, N); ratios is (C, C) shared or (k, C, C)
    per draw; returns (k, C).
    """
    k, n = cats.shape
    if ratios.ndim == 2:
        rsel = ratios[cats[:, :, None], cats[:, None, :]]
    else:
        rsel = ratios[np.arange(k)[:, None, None], cats[:, :, None], cats[:, None, :]]
    off = ~np.eye(n, dtype=bool)
    o = np.where(off, rsel, 0.0) / (n - 1)
    w = f * o.sum(axis=-1) - np.einsum("kn,knm->km", f, o)
    z = np.eye(p_row.size)[cats]
    return np.einsum("kn,knc->kc", w, z - p_row) / n


def _empirical_joint_batch(counts: np.ndarray, n_samples: int) -> np.ndarray:
    """All-pairs joint PMF per draw from category counts (k, C)."""
    joint = np.einsum("ki,kj->kij", counts, counts)
    idx = np.arange(counts.shape[1])
    joint[:, idx, idx] -= counts
    return joint / (n_samples * (n_samples - 1))


def make_gradient_estimator(
    method: str,
    p,
    n_samples: int,
    objective: TabulatedObjective,
    *,
    copula: CopulaKind = DIRICHLET,
    clip: float | None = 10.0,
    ordering_budget=None,
):
    """Build fn(rng, k) -> (estimates (k, D, C), clipped flags (k,) or None).

    The returned callable vectorizes k independent runs of the chosen
    estimator on the joint objective, for Monte Carlo moment studies.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    for row in p:
        as_probs(row)
    dims, c = p.shape
    if objective.dims != dims or objective.n_categories != c:
        raise ValueError("objective table and probabilities disagree on (D, C)")
    n = int(n_samples)
    if n < 2 and method != "reinforce":
        raise ValueError("pair-based estimators need N >= 2")
    if n < 1:
        raise ValueError("need at least one sample")
    if method not in TOY_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {TOY_METHODS}")

    eye = np.eye(c)

    def score_weighted(rng, k, weight_fn):
        cats = np.stack([_iid_categories(k, n, p[d], rng) for d in range(dims)], axis=-1)
        f = objective.values_at(cats)
        w = weight_fn(f)
        g = np.empty((k, dims, c))
        for d in range(dims):
            g[:, d] = np.einsum("kn,knc->kc", w, eye[cats[:, :, d]] - p[d])
        return g, None

    if method == "loorf":
        return lambda rng, k: score_weighted(
            rng, k, lambda f: (f - f.mean(axis=1, keepdims=True)) / (n - 1)
        )
    if method == "reinforce":
        return lambda rng, k: score_weighted(rng, k, lambda f: f / n)

    if method == "carms-i":
        full_set = ordering_budget == "all" or (ordering_budget is None and c <= 8)
        if not full_set:
            # The budgeted analytic path needs per-draw ratio sets; keep it
            # simple and correct rather than vectorized.
            def estimate_slow(rng, k):
                g = np.empty((k, dims, c))
                flags = np.zeros(k, dtype=bool)
                for draw in range(k):
                    cats = np.empty((n, dims), dtype=np.int64)
                    ratio_rows = []
                    for d in range(dims):
                        z_d, r_d = sample_antithetic_inverse_cdf(
                            n, p[d], rng,
                            copula=copula, ordering_budget=ordering_budget, clip=clip,
                        )
                        cats[:, d] = np.argmax(z_d, axis=1)
                        ratio_rows.append(r_d)
                        flags[draw] |= r_d.clipped
                    f = objective.values_at(cats)[None, :]
                    for d in range(dims):
                        g[draw, d] = _carms_estimates(
                            f, cats[None, :, d], ratio_rows[d].ratios, p[d]
                        )[0]
                return g, flags

            return estimate_slow

        if copula.family != "dirichlet":
            raise UnsupportedPathError(
                "the analytic inverse-CDF path supports only the Dirichlet copula"
            )
        fixed = [_analytic_ratio_matrix(p[d], n, clip) for d in range(dims)]

        def estimate_inverse_cdf(rng, k):
            cats = np.stack(
                [_inverse_cdf_categories_batch(k, n, p[d], rng) for d in range(dims)],
                axis=-1,
            )
            f = objective.values_at(cats)
            g = np.empty((k, dims, c))
            flags = np.zeros(k, dtype=bool)
            for d in range(dims):
                ratios, exceed = fixed[d]
                g[:, d] = _carms_estimates(f, cats[:, :, d], ratios, p[d])
                if exceed.any():
                    present = eye[cats[:, :, d]].sum(axis=1) > 0
                    flags |= (
                        np.einsum("ij,ki,kj->k", exceed, present, present) > 0
                    )
            return g, flags

        return estimate_inverse_cdf

    def estimate_gumbel(rng, k):
        cats = np.stack(
            [_gumbel_categories_batch(k, n, p[d], rng, copula) for d in range(dims)],
            axis=-1,
        )
        f = objective.values_at(cats)
        g = np.empty((k, dims, c))
        flags = np.zeros(k, dtype=bool)
        offdiag = ~np.eye(c, dtype=bool)
        for d in range(dims):
            counts = eye[cats[:, :, d]].sum(axis=1)
            joint = _empirical_joint_batch(counts, n)
            live = joint > 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                raw = np.where(live, np.outer(p[d], p[d])[None] / joint, np.inf)
            if clip is None:
                ratios = np.where(live, raw, 1.0)
            else:
                flags |= ((raw > clip) & live & offdiag[None]).any(axis=(1, 2))
                ratios = np.minimum(raw, clip)
            g[:, d] = _carms_estimates(f, cats[:, :, d], ratios, p[d])
        return g, flags

    return estimate_gumbel


@dataclass(frozen=True)
class ToyConfig:
    """Sweep configuration for the linear toy benchmark."""

    methods: tuple = TOY_METHODS
    alphas: tuple = (1.0, 10.0, 100.0, 1000.0)
    categories: int = 10
    dims: int = 10
    samples: int = 4
    trials: int = 10
    inner: int = 10_000
    seed: int = 0
    clip: float | None = 10.0
    ordering_budget: int | str | None = None
    copula: CopulaKind = DIRICHLET

    def __post_init__(self):
        if not self.methods or any(m not in TOY_METHODS for m in self.methods):
            raise ValueError(f"methods must be drawn from {TOY_METHODS}")
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ValueError("alphas must be positive")
        if self.categories < 2 or self.dims < 1:
            raise ValueError("need C >= 2 categories and D >= 1 dimensions")
        if self.samples < 2:
            raise ValueError("pair-based methods need N >= 2 samples")
        if self.trials < 1 or self.inner < 2:
            raise ValueError("need trials >= 1 and inner >= 2")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def budget_label(ordering_budget) -> str:
    if ordering_budget is None:
        return "auto"
    if ordering_budget == "all":
        return "all"
    return str(int(ordering_budget))


def run_toy(config: ToyConfig):
    """Yield one record per (alpha, trial, method), deterministically ordered.

    The probability draw at (alpha, trial) is shared by every method, and all
    methods reseed their estimator stream identically, so cross-method
    comparisons at a fixed trial are paired.
    """
    objective = toy_objective(config.categories, config.dims)
    for a_idx, alpha in enumerate(config.alphas):
        for trial in range(config.trials):
            probs_rng = np.random.default_rng(
                np.random.SeedSequence([config.seed, a_idx, trial, 0])
            )
            p = probs_rng.dirichlet(
                np.full(config.categories, float(alpha)), size=config.dims
            )
            for method in config.methods:
                estimate = make_gradient_estimator(
                    method,
                    p,
                    config.samples,
                    objective,
                    copula=config.copula,
                    clip=config.clip,
                    ordering_budget=config.ordering_budget,
                )
                est_rng = np.random.default_rng(
                    np.random.SeedSequence([config.seed, a_idx, trial, 1])
                )
                g, flags = estimate(est_rng, config.inner)
                var = g.var(axis=0, ddof=1)
                var_sum = float(var.sum())
                with np.errstate(divide="ignore"):
                    log_var_sum = float(np.log(var_sum))
                    log_var_mean = float(np.log(var_sum / var.size))
                yield {
                    "method": method,
                    "copula": config.copula.family,
                    "categories": config.categories,
                    "dims": config.dims,
                    "samples": config.samples,
                    "alpha": float(alpha),
                    "trials": config.trials,
                    "trial": trial,
                    "inner": config.inner,
                    "seed": config.seed,
                    "clip": config.clip,
                    "ordering_budget": budget_label(config.ordering_budget),
                    "probs": p,
                    "var": var,
                    "var_sum": var_sum,
                    "log_var_sum": log_var_sum,
                    "log_var_mean": log_var_mean,
                    "clip_fraction": float(np.mean(flags)) if flags is not None else 0.0,
                }


@dataclass(frozen=True)
class CorrelationConfig:
    """Configuration for one pair-correlation scan at uniform probabilities."""

    method: str = "inverse-cdf"
    copula: CopulaKind = DIRICHLET
    categories: int = 3
    samples: int = 2
    draws: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.method not in CORRELATION_METHODS:
            raise ValueError(f"method must be one of {CORRELATION_METHODS}")
        if self.categories < 2:
            raise ValueError("need C >= 2 categories")
        if self.samples < 2:
            raise ValueError("a pair needs N >= 2 samples")
        if self.draws < 100:
            raise ValueError("need at least 100 draws for a usable correlation")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def _pearson_matrix(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """corr(x_i, y_j) over the leading axis; nan where a column is constant."""
    k = x.shape[0]
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    cov = xc.T @ yc / k
    denom = np.outer(x.std(axis=0), y.std(axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(denom > 0.0, cov / denom, np.nan)
    # rounding can push a perfect (anti)correlation an ulp past +-1
    return np.clip(corr, -1.0, 1.0)


def run_correlation(config: CorrelationConfig) -> dict:
    """Correlation matrix of the first two samples' indicators at uniform p."""
    c = config.categories
    p = np.full(c, 1.0 / c)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed]))
    if config.method == "inverse-cdf":
        if config.copula.family != "dirichlet":
            raise UnsupportedPathError(
                "the inverse-CDF path supports only the Dirichlet copula"
            )
        cats = _inverse_cdf_categories_batch(config.draws, config.samples, p, rng)
    elif config.method == "gumbel":
        cats = _gumbel_categories_batch(
            config.draws, config.samples, p, rng, config.copula
        )
    else:
        cats = _iid_categories(config.draws, config.samples, p, rng)
    eye = np.eye(c)
    corr = _pearson_matrix(eye[cats[:, 0]], eye[cats[:, 1]])
    return {
        "method": config.method,
        "copula": config.copula.family,
        "categories": c,
        "samples": config.samples,
        "draws": config.draws,
        "seed": config.seed,
        "corr": corr,
    }
