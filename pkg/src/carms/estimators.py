"""Score-function gradient estimators on one-hot categorical samples.

All estimators take probabilities (not logits) and return the gradient with
respect to the softmax logits phi, using d p_i / d phi_c = p_i (1{i=c} - p_c).

loorf          (1/(N-1)) sum_n (f_n - fbar) (z_n - p)
carts          (1/2) (f - f') (z - z') * (z^T R z'), one debiased pair
carms          (1/N) f^T (D - O) (Z - 1 p^T), the all-pairs average of carts
arms_binary    coordinatewise leave-one-out with antithetic correction 1/(1 - rho)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import RatioMatrix, as_probs


def _as_values(f) -> np.ndarray:
    arr = np.asarray(f, dtype=float)
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ValueError("function values must be a finite 1-D vector")
    return arr


def _as_onehot_matrix(z, n_rows=None) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if arr.ndim != 2:
        raise ValueError("samples must form an N x C matrix")
    if not np.all((arr == 0.0) | (arr == 1.0)) or not np.all(arr.sum(axis=1) == 1.0):
        raise ValueError("sample rows must be one-hot")
    if n_rows is not None and arr.shape[0] != n_rows:
        raise ValueError("sample count does not match function values")
    return arr


def _as_onehot_row(z) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if arr.ndim != 1 or not np.all((arr == 0.0) | (arr == 1.0)) or arr.sum() != 1.0:
        raise ValueError("sample must be a one-hot vector")
    return arr


def _ratio_array(ratios) -> np.ndarray:
    if isinstance(ratios, RatioMatrix):
        return ratios.ratios
    return np.asarray(ratios, dtype=float)


def loorf(f, z, p) -> np.ndarray:
    """Leave-one-out score estimator over N independent-or-coupled samples."""
    f = _as_values(f)
    z = _as_onehot_matrix(z, f.size)
    p = as_probs(p)
    n = f.size
    if n < 2:
        raise ValueError("loorf needs N >= 2 samples")
    centered = f - f.mean()
    return centered @ (z - p) / (n - 1)


def loorf_matrix_form(f, z, p) -> np.ndarray:
    """(1/N) f^T [I - (1/(N-1)) (1 - I)] (Z - 1 p^T); equals loorf algebraically."""
    f = _as_values(f)
    z = _as_onehot_matrix(z, f.size)
    p = as_probs(p)
    n = f.size
    m = np.eye(n) - (np.ones((n, n)) - np.eye(n)) / (n - 1)
    return f @ m @ (z - p) / n


def two_sample_loorf(f_z: float, f_zp: float, z, zp) -> np.ndarray:
    """N = 2 leave-one-out: (1/2) (f(z) - f(z')) (z - z'). The baseline cancels p."""
    return 0.5 * (float(f_z) - float(f_zp)) * (_as_onehot_row(z) - _as_onehot_row(zp))


def carts(f_z: float, f_zp: float, z, zp, ratios) -> np.ndarray:
    """One antithetic pair debiased by its importance ratio z^T R z'."""
    z = _as_onehot_row(z)
    zp = _as_onehot_row(zp)
    r = float(z @ _ratio_array(ratios) @ zp)
    return two_sample_loorf(f_z, f_zp, z, zp) * r


def carms(f, z, ratios, p) -> np.ndarray:
    """All-pairs average of carts over N coupled samples, in matrix form.

    O = (1/(N-1)) (1 - I) o (Z R Z^T), D = diag(O 1), and the estimate is
    (1/N) f^T (D - O) (Z - 1 p^T).
    """
    f = _as_values(f)
    z = _as_onehot_matrix(z, f.size)
    p = as_probs(p)
    r = _ratio_array(ratios)
    n = f.size
    if n < 2:
        raise ValueError("carms needs N >= 2 samples")
    if r.shape != (p.size, p.size):
        raise ValueError("ratio matrix shape does not match the category count")
    # index rather than multiply out Z R Z^T: entries at categories absent
    # from the batch must stay unread (0 * inf would leak a nan)
    cats = np.argmax(z, axis=1)
    zrz = r[cats[:, None], cats[None, :]]
    off = ~np.eye(n, dtype=bool)
    if not np.all(np.isfinite(zrz[off])):
        raise ValueError("nonfinite importance ratio at a realized sample pair")
    o = np.where(off, zrz, 0.0) / (n - 1)
    d = o.sum(axis=1)
    w = f * d - f @ o
    return w @ (z - p) / n


def carms_pair_sum(f, z, ratios) -> np.ndarray:
    """Explicit (1/(N(N-1))) sum over ordered pairs of carts; the slow oracle."""
    f = _as_values(f)
    z = _as_onehot_matrix(z, f.size)
    n = f.size
    if n < 2:
        raise ValueError("carms needs N >= 2 samples")
    total = np.zeros(z.shape[1])
    for a in range(n):
        for b in range(n):
            if a != b:
                total += carts(f[a], f[b], z[a], z[b], ratios)
    return total / (n * (n - 1))


@dataclass(frozen=True)
class SampleTensor:
    """Per-dimension coupled samples sharing one vector of function values.

    z has shape (D, N, C), ratios (D, C, C), f (N,).
    """

    z: np.ndarray
    ratios: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        ratios = np.asarray(self.ratios, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if z.ndim != 3:
            raise ValueError("z must have shape (D, N, C)")
        d, n, c = z.shape
        if ratios.shape != (d, c, c):
            raise ValueError("ratios must have shape (D, C, C)")
        if f.shape != (n,):
            raise ValueError("f must hold one value per joint sample")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "f", f)

    @property
    def dims(self) -> int:
        return self.z.shape[0]


def carms_multivariate(batch: SampleTensor, p) -> np.ndarray:
    """Per-dimension carms sharing the joint function values; returns (D, C)."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    if p.shape[0] != batch.dims or p.shape[1] != batch.z.shape[2]:
        raise ValueError("probability rows must match the sample tensor")
    return np.stack(
        [carms(batch.f, batch.z[d], batch.ratios[d], p[d]) for d in range(batch.dims)]
    )


def arms_binary(f, b, p, rho) -> np.ndarray:
    """Leave-one-out estimator for D antithetic Bernoulli coordinates.

    g_d = (1/(N-1)) sum_n (f_n - fbar) (b_nd - p_d) / (1 - rho_d), the
    gradient with respect to the Bernoulli logits.
    """
    f = _as_values(f)
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != f.size:
        raise ValueError("b must be an N x D binary matrix")
    if not np.all((b == 0.0) | (b == 1.0)):
        raise ValueError("b entries must be 0 or 1")
    p = np.atleast_1d(np.asarray(p, dtype=float))
    rho = np.broadcast_to(np.asarray(rho, dtype=float), p.shape).astype(float)
    if p.shape != (b.shape[1],):
        raise ValueError("need one success probability per coordinate")
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("success probabilities must lie strictly inside (0, 1)")
    if np.any(rho >= 1.0):
        raise ValueError("antithetic correction requires rho < 1")
    n = f.size
    if n < 2:
        raise ValueError("arms needs N >= 2 samples")
    centered = f - f.mean()
    return (centered @ (b - p)) / (1.0 - rho) / (n - 1)


def reinforce_single(f_z: float, z, p) -> np.ndarray:
    """Single-sample score estimator f(z) (z - p); unbiased but high variance."""
    return float(f_z) * (_as_onehot_row(z) - as_probs(p))
