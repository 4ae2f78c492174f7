"""Copulas with strongly negative pairwise dependence.

Both families produce an exchangeable vector of n uniform marginals whose
coordinates are pushed apart as hard as the joint law allows.

The Dirichlet copula rescales a flat Dirichlet vector coordinatewise,

    u_i = 1 - (1 - d_i)^(n-1),        d ~ Dir(1_n),

which makes each u_i exactly uniform on (0, 1).  Its bivariate CDF has the
closed form

    C(p, q) = p + q - 1 + max(0, (1-p)^(1/(n-1)) + (1-q)^(1/(n-1)) - 1)^(n-1),

obtained by inclusion-exclusion from the pair survival function of the flat
Dirichlet (see the derivation recorded in the copula test suite).  At n = 2
the expression collapses to max(p + q - 1, 0), the lower Frechet-Hoeffding
bound, i.e. the exact antithetic pair (u, 1 - u).

The Gaussian copula maps an equicorrelated normal vector through the standard
normal CDF.  The most negative feasible equicorrelation is -1/(n-1); no
analytic bivariate CDF is exposed for it, so it is only meant for sampling
paths that estimate the pair law empirically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

# Copula outputs are clamped into [CLAMP_EPS, 1 - CLAMP_EPS] so downstream
# log/log-log transforms never see an exact endpoint.
CLAMP_EPS = 1e-12


def _validate_n(n) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"sample count must be an integer, got {n!r}")
    if n < 2:
        raise ValueError(f"copulas need n >= 2 coordinates, got n={n}")
    return int(n)


@dataclass(frozen=True)
class CopulaKind:
    """Which copula family to draw from.

    rho is the Gaussian equicorrelation; None means the strongest feasible
    value -1/(n-1), resolved once n is known.  Dirichlet takes no parameter.
    """

    family: str
    rho: float | None = None

    def __post_init__(self):
        if self.family not in ("dirichlet", "gaussian"):
            raise ValueError(f"unknown copula family {self.family!r}")
        if self.family == "dirichlet" and self.rho is not None:
            raise ValueError("the Dirichlet copula takes no correlation parameter")

    def resolve_rho(self, n: int) -> float:
        if self.family != "gaussian":
            raise ValueError("rho is only defined for the Gaussian family")
        n = _validate_n(n)
        rho = -1.0 / (n - 1) if self.rho is None else float(self.rho)
        lo = -1.0 / (n - 1)
        if rho < lo - 1e-12 or rho > 0.0:
            raise ValueError(
                f"equicorrelation {rho} outside the feasible band [{lo}, 0] for n={n}"
            )
        return max(rho, lo)


DIRICHLET = CopulaKind("dirichlet")
GAUSSIAN = CopulaKind("gaussian")


@dataclass(frozen=True)
class CopulaDraw:
    """One joint draw of n dependent uniforms."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a copula draw is a vector of at least two uniforms")
        if not np.all((vals > 0.0) & (vals < 1.0)):
            raise ValueError("copula draw coordinates must lie strictly inside (0, 1)")
        object.__setattr__(self, "values", vals)

    @property
    def n_samples(self) -> int:
        return self.values.size


def _sample_dirichlet_copula_batch(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """k independent Dirichlet-copula draws, shape (k, n)."""
    n = _validate_n(n)
    e = rng.standard_exponential((k, n))
    d = e / e.sum(axis=1, keepdims=True)
    u = 1.0 - np.power(1.0 - d, n - 1)
    return np.clip(u, CLAMP_EPS, 1.0 - CLAMP_EPS)


def sample_dirichlet_copula(n: int, rng: np.random.Generator) -> CopulaDraw:
    """Draw n uniforms coupled through the flat Dirichlet."""
    return CopulaDraw(_sample_dirichlet_copula_batch(1, n, rng)[0])


def _sample_gaussian_copula_batch(
    k: int, n: int, rho: float, rng: np.random.Generator
) -> np.ndarray:
    """k equicorrelated Gaussian-copula draws, shape (k, n).

    An equicorrelated normal vector with unit variances decomposes into a
    centered part scaled by sqrt(1 - rho) and a mean part scaled by
    sqrt(1 + (n-1) rho); this stays exact at the singular edge rho = -1/(n-1).
    """
    n = _validate_n(n)
    rho = GAUSSIAN.resolve_rho(n) if rho is None else CopulaKind("gaussian", rho).resolve_rho(n)
    a = np.sqrt(1.0 - rho)
    b = np.sqrt(max(1.0 + (n - 1) * rho, 0.0))
    w = rng.standard_normal((k, n))
    m = w.mean(axis=1, keepdims=True)
    x = a * (w - m) + b * m
    return np.clip(ndtr(x), CLAMP_EPS, 1.0 - CLAMP_EPS)


def sample_gaussian_copula(n: int, rho: float | None, rng: np.random.Generator) -> CopulaDraw:
    """Draw n uniforms from the equicorrelated Gaussian copula.

    rho=None selects the strongest feasible anticorrelation -1/(n-1).
    """
    return CopulaDraw(_sample_gaussian_copula_batch(1, n, rho, rng)[0])


def sample_copula_batch(
    kind: CopulaKind, k: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    if kind.family == "dirichlet":
        return _sample_dirichlet_copula_batch(k, n, rng)
    return _sample_gaussian_copula_batch(k, n, kind.resolve_rho(n), rng)


def dirichlet_bivariate_cdf(p, q, n: int):
    """P(u_i < p, u_j < q) for any two coordinates of the Dirichlet copula.

    Accepts scalars or broadcastable arrays for p and q.  The result is
    clamped into the Frechet-Hoeffding envelope [max(p+q-1, 0), min(p, q)]
    to keep the analytic identities exact at the boundaries; at n = 2 the
    lower envelope is the value.
    """
    n = _validate_n(n)
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any(~np.isfinite(p_arr)) or np.any(~np.isfinite(q_arr)):
        raise ValueError("CDF arguments must be finite")
    if np.any((p_arr < 0.0) | (p_arr > 1.0)) or np.any((q_arr < 0.0) | (q_arr > 1.0)):
        raise ValueError("CDF arguments must lie in [0, 1]")
    scalar = p_arr.ndim == 0 and q_arr.ndim == 0

    if n == 2:
        out = np.maximum(p_arr + q_arr - 1.0, 0.0)
    else:
        inv = 1.0 / (n - 1)
        t = np.power(1.0 - p_arr, inv) + np.power(1.0 - q_arr, inv) - 1.0
        raw = p_arr + q_arr - 1.0 + np.power(np.maximum(t, 0.0), n - 1)
        lo = np.maximum(p_arr + q_arr - 1.0, 0.0)
        hi = np.minimum(p_arr, q_arr)
        out = np.minimum(np.maximum(raw, lo), hi)
    # Boundary rows and columns of a copula CDF are exact.
    out = np.where(q_arr >= 1.0, p_arr, out)
    out = np.where(p_arr >= 1.0, np.where(q_arr >= 1.0, 1.0, q_arr), out)
    out = np.where((p_arr <= 0.0) | (q_arr <= 0.0), 0.0, out)
    return float(out) if scalar else out


def bernoulli_pair_correlation(p, n: int):
    """Correlation of the pair (1{u_i < p}, 1{u_j < p}) under the Dirichlet copula.

    This is the effective antithetic strength seen by a two-category split at
    threshold p: (C(p, p) - p^2) / (p (1 - p)).  At n = 2 it is -min(p, 1-p)/max(p, 1-p),
    e.g. exactly -1 at p = 1/2.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
        raise ValueError("the threshold must lie strictly inside (0, 1)")
    joint = dirichlet_bivariate_cdf(p_arr, p_arr, n)
    out = (joint - p_arr * p_arr) / (p_arr * (1.0 - p_arr))
    return float(out) if p_arr.ndim == 0 else out
