"""Built-in consistency checks runnable from the CLI.

Fast checks are pure algebra and enumeration (a few seconds); the full level
adds statistical checks on the samplers and estimators.  Every check derives
its stream from the given seed, so a report is reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .copula import (
    DIRICHLET,
    _sample_dirichlet_copula_batch,
    _sample_gaussian_copula_batch,
)
from .estimators import carms, carms_pair_sum, loorf, loorf_matrix_form
from .experiments import make_gradient_estimator
from .oracle import (
    TabulatedObjective,
    exact_carms_expectation,
    exact_gradient,
    mc_estimator_moments,
)
from .sampling import (
    _gumbel_categories_batch,
    _inverse_cdf_categories_batch,
    bivariate_pmf_averaged,
    bivariate_pmf_one_ordering,
    make_ordering,
    onehot,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel_gap(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def _random_onehot(rng, n, c):
    return onehot(rng.integers(0, c, size=n), c)


def _check_loorf_matrix_equivalence(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        c = int(rng.integers(2, 7))
        f = rng.normal(size=n)
        z = _random_onehot(rng, n, c)
        p = rng.dirichlet(np.ones(c))
        worst = max(worst, _rel_gap(loorf(f, z, p), loorf_matrix_form(f, z, p)))
        worst = max(worst, _rel_gap(loorf(f, z, p), carms(f, z, np.ones((c, c)), p)))
    return CheckResult(
        "loorf-matrix-equivalence", worst <= 1e-13, f"max relative gap {worst:.3e}"
    )


def _check_carms_pair_identity(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 8))
        c = int(rng.integers(2, 6))
        f = rng.normal(size=n)
        z = _random_onehot(rng, n, c)
        p = rng.dirichlet(np.ones(c))
        base = rng.uniform(0.1, 3.0, size=(c, c))
        ratios = (base + base.T) / 2
        worst = max(worst, _rel_gap(carms(f, z, ratios, p), carms_pair_sum(f, z, ratios)))
    return CheckResult(
        "carms-pair-identity", worst <= 1e-12, f"max relative gap {worst:.3e}"
    )


def _check_pmf_validity(rng, cases=30) -> CheckResult:
    worst_mass = 0.0
    worst_row = 0.0
    anchored_ok = True
    for _ in range(cases):
        c = int(rng.integers(2, 7))
        n = int(rng.integers(2, 11))
        p = rng.dirichlet(np.ones(c))
        pmf = bivariate_pmf_averaged(p, n)
        if np.any(pmf < 0.0):
            return CheckResult("pmf-validity", False, "negative entry")
        worst_mass = max(worst_mass, abs(float(pmf.sum()) - 1.0))
        worst_row = max(worst_row, float(np.max(np.abs(pmf.sum(axis=1) - p))))
        off = pmf[~np.eye(c, dtype=bool)]
        anchored_ok &= bool(np.all(off > 0.0))
    ok = worst_mass <= 1e-10 and worst_row <= 1e-10 and anchored_ok
    return CheckResult(
        "pmf-validity",
        ok,
        f"mass gap {worst_mass:.3e}, row gap {worst_row:.3e}, "
        f"off-diagonals positive: {anchored_ok}",
    )


def _check_unbiasedness_enumeration(rng, cases=20, max_c=4) -> CheckResult:
    worst = 0.0
    for _ in range(cases):
        c = int(rng.integers(2, max_c + 1))
        d = int(rng.integers(1, 3))
        n = int(rng.choice([2, 3, 5]))
        phi = rng.normal(scale=1.0, size=(d, c))
        f = TabulatedObjective(rng.normal(size=(c,) * d))
        p = np.exp(phi - phi.max(axis=1, keepdims=True))
        p /= p.sum(axis=1, keepdims=True)
        pmf = np.stack([bivariate_pmf_averaged(p[dim], n) for dim in range(d)])
        moments = exact_carms_expectation(f, phi, pmf)
        worst = max(worst, float(np.max(np.abs(moments.mean - exact_gradient(f, phi)))))
    return CheckResult(
        "unbiasedness-enumeration", worst <= 1e-9, f"max coordinate gap {worst:.3e}"
    )


# Hand-built pair PMF for p = (0.6, 0.3, 0.1) whose off-diagonals all dominate
# the independent products p_i p_j; diagonals follow from the marginals.
WORKED_P = np.array([0.6, 0.3, 0.1])
WORKED_ANTITHETIC_PMF = np.array(
    [
        [0.30, 0.24, 0.06],
        [0.24, 0.02, 0.04],
        [0.06, 0.04, 0.00],
    ]
)


def _check_antithetic_variance_dominance(_rng) -> CheckResult:
    f = TabulatedObjective(np.array([1.0, 2.0, 4.0]))
    phi = np.log(WORKED_P)[None, :]
    grad = exact_gradient(f, phi)
    anti = exact_carms_expectation(f, phi, WORKED_ANTITHETIC_PMF)
    indep = exact_carms_expectation(f, phi, np.outer(WORKED_P, WORKED_P))
    mean_gap = max(
        float(np.max(np.abs(anti.mean - grad))), float(np.max(np.abs(indep.mean - grad)))
    )
    dominated = bool(np.all(anti.variance <= indep.variance + 1e-12))
    strict = bool(np.any(anti.variance < indep.variance - 1e-12))
    return CheckResult(
        "antithetic-variance-dominance",
        mean_gap <= 1e-10 and dominated and strict,
        f"mean gap {mean_gap:.3e}, dominated={dominated}, strict={strict}",
    )


def _check_impossible_pair(_rng) -> CheckResult:
    p = np.array([0.1, 0.2, 0.7])
    val = bivariate_pmf_one_ordering(p, make_ordering(0, 2, 3), 0, 1, 2)
    return CheckResult(
        "impossible-pair", val == 0.0, f"P(1, 2) under the identity ordering = {val!r}"
    )


def _check_copula_uniformity(rng) -> CheckResult:
    worst_p = 1.0
    for n in (2, 5):
        u_d = _sample_dirichlet_copula_batch(50_000, n, rng)
        u_g = _sample_gaussian_copula_batch(50_000, n, -1.0 / (n - 1), rng)
        for u in (u_d, u_g):
            for coord in range(n):
                worst_p = min(worst_p, stats.kstest(u[:, coord], "uniform").pvalue)
    return CheckResult(
        "copula-uniformity", worst_p > 0.01, f"min KS p-value {worst_p:.4f}"
    )


def _check_sampler_marginals(rng) -> CheckResult:
    worst = 0.0
    draws = 20_000
    for c, n in ((3, 3), (5, 5)):
        p = rng.dirichlet(np.full(c, 5.0))
        for path in ("inverse-cdf", "gumbel"):
            if path == "inverse-cdf":
                cats = _inverse_cdf_categories_batch(draws, n, p, rng)
            else:
                cats = _gumbel_categories_batch(draws, n, p, rng, DIRICHLET)
            freq = np.bincount(cats[:, 0], minlength=c) / draws
            se = np.sqrt(p * (1 - p) / draws)
            worst = max(worst, float(np.max(np.abs(freq - p) / se)))
    return CheckResult(
        "sampler-marginals", worst <= 4.0, f"max marginal deviation {worst:.2f} SE"
    )


def _check_estimator_unbiasedness_mc(rng) -> CheckResult:
    # carms-i is exactly unbiased, so it gets a skewed p and many trials.
    # carms-g carries a structural bias of order P(some category pair absent
    # from the batch): the empirical-ratio estimator equals the exact gradient
    # on every draw whose batch realizes all pairs, so over T trials the mean
    # drifts by about sqrt(q*T) standard errors.  Keep T small enough that
    # this sits well inside the band.
    f = TabulatedObjective(np.array([0.5, -1.0, 2.0]))
    worst = 0.0
    cases = (
        ("carms-i", np.array([[0.5, 0.3, 0.2]]), 5, 20_000),
        ("carms-g", np.array([[0.35, 0.33, 0.32]]), 10, 2_000),
    )
    for method, p, n, trials in cases:
        grad = exact_gradient(f, np.log(p))
        est = make_gradient_estimator(method, p, n, f, clip=10.0)
        moments = mc_estimator_moments(est, trials, rng)
        worst = max(worst, float(np.max(np.abs(moments.mean - grad) / moments.stderr)))
    return CheckResult(
        "estimator-unbiasedness-mc", worst <= 4.0, f"max mean deviation {worst:.2f} SE"
    )


_FAST_CHECKS = (
    _check_loorf_matrix_equivalence,
    _check_carms_pair_identity,
    _check_pmf_validity,
    _check_unbiasedness_enumeration,
    _check_antithetic_variance_dominance,
    _check_impossible_pair,
)

_FULL_EXTRA_CHECKS = (
    _check_copula_uniformity,
    _check_sampler_marginals,
    _check_estimator_unbiasedness_mc,
)


def run_selfcheck(level: str = "fast", seed: int = 0) -> list[CheckResult]:
    """Run the named check suite; 'full' includes the statistical checks."""
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    checks = _FAST_CHECKS + (_FULL_EXTRA_CHECKS if level == "full" else ())
    results = []
    for index, check in enumerate(checks):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), index]))
        results.append(check(rng))
    if level == "full":
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), len(checks)]))
        wide = _check_unbiasedness_enumeration(rng, cases=60, max_c=5)
        results.append(
            CheckResult("unbiasedness-enumeration-wide", wide.passed, wide.detail)
        )
    return results
