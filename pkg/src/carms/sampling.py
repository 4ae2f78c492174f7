"""Antithetic categorical sampling through a copula, plus the pair PMFs.

Inverse-CDF path: the unit interval is cut into cells of widths p, the
category order is shuffled by a uniformly drawn anchored ordering, and each
coordinate of one copula draw is pushed through the shared inverse CDF.  The
analytic probability that two coordinates land in cells i and j follows from
the copula's bivariate CDF by inclusion-exclusion over the cell rectangle,
averaged over the ordering set.

Gumbel-max path: each category owns an independent copula draw across the N
samples, the uniforms become Gumbels, and each sample takes the argmax of
Gumbel + log p.  The pair law has no closed form here, so it is estimated
from the realized samples themselves.

Both samplers return the one-hot sample matrix together with the importance
ratios p_i p_j / P(i, j) that debias estimators built on sample pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .copula import (
    DIRICHLET,
    CopulaKind,
    _sample_dirichlet_copula_batch,
    dirichlet_bivariate_cdf,
    sample_copula_batch,
)


class UnsupportedPathError(ValueError):
    """A copula family was asked for on a path that cannot honor it."""


class DegeneratePmfError(ValueError):
    """A requested pair has zero averaged probability (infinite ratio)."""


def as_probs(p) -> np.ndarray:
    """Validate and return a probability vector over at least two categories."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need a 1-D probability vector with at least two categories")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("probabilities must be finite and nonnegative")
    if abs(arr.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities must sum to 1, got {arr.sum()!r}")
    return arr


def onehot(categories, n_categories: int) -> np.ndarray:
    """Map integer categories (any shape) to one-hot float rows."""
    cats = np.asarray(categories)
    if np.any((cats < 0) | (cats >= n_categories)):
        raise ValueError("category index out of range")
    return np.eye(n_categories)[cats]


@dataclass(frozen=True)
class Boundaries:
    """Consecutive half-open cells [left_j, right_j) partitioning [0, 1]."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left, dtype=float)
        right = np.asarray(self.right, dtype=float)
        if left.shape != right.shape or left.ndim != 1:
            raise ValueError("left and right boundaries must be matching vectors")
        if left[0] != 0.0 or abs(right[-1] - 1.0) > 1e-12:
            raise ValueError("cells must start at 0 and end at 1")
        if not np.array_equal(left[1:], right[:-1]):
            raise ValueError("cells must be adjacent")
        if np.any(right - left < 0.0):
            raise ValueError("cells must have nonnegative width")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def n_categories(self) -> int:
        return self.left.size


def compute_boundaries(p) -> Boundaries:
    p = as_probs(p)
    # cumsum may overshoot 1.0 by an ulp; edges must stay inside [0, 1] for
    # the copula CDF, and the last edge is 1.0 by convention.
    cum = np.minimum(np.cumsum(p), 1.0)
    cum[-1] = 1.0
    return Boundaries(np.concatenate(([0.0], cum[:-1])), cum)


def _categorize_batch(u: np.ndarray, right: np.ndarray) -> np.ndarray:
    # side="right" puts a u exactly on a boundary into the upper cell; the
    # final cell absorbs u at (or within roundoff above) the last edge.
    return np.minimum(np.searchsorted(right, u, side="right"), right.size - 1)


def categorize(u: float, boundaries: Boundaries) -> int:
    """Cell index of u under the half-open convention (last cell closed at 1)."""
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie strictly inside (0, 1), got {u}")
    return int(_categorize_batch(np.asarray(u), boundaries.right))


@dataclass(frozen=True)
class Ordering:
    """A category-to-position permutation anchored at a pair (i, j).

    perm[k] is the position of category k; the anchor's first member sits at
    position 0 and its second at the last position, which maximally separates
    the two cells for an antithetic copula draw.
    """

    perm: np.ndarray
    anchor: tuple[int, int]

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        c = perm.size
        if c < 2 or not np.array_equal(np.sort(perm), np.arange(c)):
            raise ValueError("perm must be a permutation of 0..C-1 with C >= 2")
        i, j = self.anchor
        if i == j:
            raise ValueError("anchor categories must be distinct")
        if perm[i] != 0 or perm[j] != c - 1:
            raise ValueError("anchor must map to the first and last positions")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "anchor", (int(i), int(j)))

    @property
    def n_categories(self) -> int:
        return self.perm.size

    @property
    def inverse(self) -> np.ndarray:
        """inverse[position] = category."""
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv

    def permuted(self, p: np.ndarray) -> np.ndarray:
        """Probabilities rearranged into position order."""
        q = np.empty_like(np.asarray(p, dtype=float))
        q[self.perm] = p
        return q


def make_ordering(i: int, j: int, n_categories: int) -> Ordering:
    """Rotate category i to the front, then swap j into the last position."""
    c = int(n_categories)
    if c < 2:
        raise ValueError("need at least two categories")
    if not (0 <= i < c and 0 <= j < c):
        raise ValueError("anchor categories out of range")
    if i == j:
        raise ValueError("anchor categories must be distinct")
    pos = (np.arange(c) - i) % c
    last_cat = (i - 1) % c
    pj = pos[j]
    pos[j] = c - 1
    pos[last_cat] = pj
    return Ordering(pos, (i, j))


def all_orderings(n_categories: int) -> list[Ordering]:
    """The C(C-1)/2 anchored orderings, one per unordered category pair."""
    return [
        make_ordering(i, j, n_categories)
        for i in range(n_categories)
        for j in range(i + 1, n_categories)
    ]


def bivariate_pmf_one_ordering(p, ordering: Ordering, i: int, j: int, n: int) -> float:
    """P(z = i, z' = j) for two coordinates of one copula draw under an ordering.

    Inclusion-exclusion of the copula CDF over the rectangle
    cell(i) x cell(j) in permuted position space.
    """
    p = as_probs(p)
    if ordering.n_categories != p.size:
        raise ValueError("ordering and probability vector disagree on C")
    if not (0 <= i < p.size and 0 <= j < p.size):
        raise ValueError("category index out of range")
    b = compute_boundaries(ordering.permuted(p))
    ip, jp = int(ordering.perm[i]), int(ordering.perm[j])
    val = (
        dirichlet_bivariate_cdf(b.right[ip], b.right[jp], n)
        - dirichlet_bivariate_cdf(b.right[ip], b.left[jp], n)
        - dirichlet_bivariate_cdf(b.left[ip], b.right[jp], n)
        + dirichlet_bivariate_cdf(b.left[ip], b.left[jp], n)
    )
    return max(float(val), 0.0)


def bivariate_pmf_matrix(p, ordering: Ordering, n: int) -> np.ndarray:
    """Full C x C pair PMF under one fixed ordering."""
    p = as_probs(p)
    if ordering.n_categories != p.size:
        raise ValueError("ordering and probability vector disagree on C")
    b = compute_boundaries(ordering.permuted(p))
    r, l = b.right, b.left
    w = (
        dirichlet_bivariate_cdf(r[:, None], r[None, :], n)
        - dirichlet_bivariate_cdf(r[:, None], l[None, :], n)
        - dirichlet_bivariate_cdf(l[:, None], r[None, :], n)
        + dirichlet_bivariate_cdf(l[:, None], l[None, :], n)
    )
    w = np.maximum(w, 0.0)
    return w[np.ix_(ordering.perm, ordering.perm)]


def bivariate_pmf_averaged(p, n: int, orderings=None) -> np.ndarray:
    """Uniform mixture of the single-ordering pair PMFs (default: all of them)."""
    p = as_probs(p)
    if orderings is None:
        orderings = all_orderings(p.size)
    orderings = list(orderings)
    if not orderings:
        raise ValueError("need at least one ordering")
    total = np.zeros((p.size, p.size))
    for o in orderings:
        total += bivariate_pmf_matrix(p, o, n)
    return total / len(orderings)


def bivariate_pmf_entries(p, n: int, pairs, orderings) -> np.ndarray:
    """Averaged pair probabilities for selected (i, j) pairs only.

    Raises DegeneratePmfError if a requested off-diagonal pair of two
    positive-probability categories averages to zero, which happens exactly
    when no ordering in the set anchors that pair.
    """
    p = as_probs(p)
    orderings = list(orderings)
    if not orderings:
        raise ValueError("need at least one ordering")
    pairs = [(int(i), int(j)) for i, j in pairs]
    vals = np.zeros(len(pairs))
    for o in orderings:
        b = compute_boundaries(o.permuted(p))
        for idx, (i, j) in enumerate(pairs):
            ip, jp = int(o.perm[i]), int(o.perm[j])
            vals[idx] += max(
                dirichlet_bivariate_cdf(b.right[ip], b.right[jp], n)
                - dirichlet_bivariate_cdf(b.right[ip], b.left[jp], n)
                - dirichlet_bivariate_cdf(b.left[ip], b.right[jp], n)
                + dirichlet_bivariate_cdf(b.left[ip], b.left[jp], n),
                0.0,
            )
    vals /= len(orderings)
    for idx, (i, j) in enumerate(pairs):
        if i != j and vals[idx] == 0.0 and p[i] > 0.0 and p[j] > 0.0:
            raise DegeneratePmfError(
                f"pair ({i}, {j}) has zero averaged probability; no ordering in "
                "the set anchors it, so its importance ratio would be infinite"
            )
    return vals


@dataclass(frozen=True)
class RatioMatrix:
    """Importance ratios p_i p_j / P(i, j) for sample pairs.

    clip is the ceiling applied to every computed entry (None disables it);
    clipped records whether a ratio at a pair actually present in the sample
    exceeded the ceiling, i.e. whether clipping changed the estimate.
    Entries at pairs the estimator can never read are inert placeholders.
    """

    ratios: np.ndarray
    clip: float | None
    clipped: bool

    def __post_init__(self):
        ratios = np.asarray(self.ratios, dtype=float)
        if ratios.ndim != 2 or ratios.shape[0] != ratios.shape[1]:
            raise ValueError("ratios must be a square matrix")
        if not np.all(np.isfinite(ratios)):
            raise ValueError("ratios must be finite")
        if np.any(ratios < 0.0):
            raise ValueError("ratios must be nonnegative")
        # the ceiling binds computed entries only; placeholders at pairs the
        # estimator never reads may sit above it, so no entry-wise check here
        if self.clip is not None and not self.clip > 0.0:
            raise ValueError("clip ceiling must be positive")
        object.__setattr__(self, "ratios", ratios)


def _validate_sample_count(n_samples) -> int:
    if not isinstance(n_samples, (int, np.integer)) or isinstance(n_samples, bool):
        raise ValueError("sample count must be an integer")
    if n_samples < 2:
        raise ValueError("pair-based sampling needs N >= 2")
    return int(n_samples)


def _resolve_ordering_set(p, realized_offdiag, ordering_budget, rng):
    """Ordering set for the analytic PMF average.

    "all" (the default for C <= 8) uses every anchored ordering.  A budgeted
    set always contains the anchored ordering of each realized pair plus up
    to `budget` additional distinct anchored orderings drawn at random; the
    automatic budget doubles the realized count.
    """
    c = p.size
    n_all = c * (c - 1) // 2
    if ordering_budget == "all" or (ordering_budget is None and c <= 8):
        return all_orderings(c)
    if ordering_budget is None:
        budget = len(realized_offdiag)
    else:
        budget = int(ordering_budget)
        if budget < 0:
            raise ValueError("ordering budget must be nonnegative or 'all'")
    realized = sorted({(min(i, j), max(i, j)) for i, j in realized_offdiag})
    pool = [
        (i, j)
        for i in range(c)
        for j in range(i + 1, c)
        if (i, j) not in set(realized)
    ]
    n_extra = min(budget, len(pool))
    if n_extra > 0:
        chosen = rng.choice(len(pool), size=n_extra, replace=False)
        extras = [pool[k] for k in sorted(chosen)]
    else:
        extras = []
    anchors = realized + extras
    if not anchors:  # no pairs realized (all samples identical): any anchor works
        anchors = [(0, 1)]
    assert len(anchors) <= n_all
    return [make_ordering(i, j, c) for i, j in anchors]


def _inverse_cdf_categories_batch(
    k: int, n_samples: int, p: np.ndarray, rng: np.random.Generator, ordering=None
) -> np.ndarray:
    """k joint draws of N categories each, shape (k, N).

    ordering=None redraws a uniform anchored ordering per joint draw, which
    is what makes the averaged PMF the exact pair law; a fixed ordering is
    for inspecting the single-ordering law.
    """
    c = p.size
    if ordering is None:
        candidates = all_orderings(c)
        idx = rng.integers(0, len(candidates), size=k)
    else:
        candidates = [ordering]
        idx = np.zeros(k, dtype=np.int64)
    u = _sample_dirichlet_copula_batch(k, n_samples, rng)
    cats = np.empty((k, n_samples), dtype=np.int64)
    for o_idx in np.unique(idx):
        o = candidates[o_idx]
        rows = idx == o_idx
        cum = np.cumsum(o.permuted(p))
        pos = _categorize_batch(u[rows].ravel(), cum).reshape(-1, n_samples)
        cats[rows] = o.inverse[pos]
    return cats


def sample_antithetic_inverse_cdf(
    n_samples: int,
    p,
    rng: np.random.Generator,
    *,
    copula: CopulaKind = DIRICHLET,
    ordering_budget=None,
    clip: float | None = 10.0,
):
    """Draw N antithetically coupled categorical samples via the inverse CDF.

    Returns the one-hot sample matrix Z (N x C) and the RatioMatrix holding
    p_i p_j / P_avg(i, j) at pairs realized in Z, computed from the analytic
    ordering-averaged PMF.  Only the Dirichlet copula has that closed form;
    asking for the Gaussian raises UnsupportedPathError.
    """
    p = as_probs(p)
    n_samples = _validate_sample_count(n_samples)
    if copula.family != "dirichlet":
        raise UnsupportedPathError(
            "the inverse-CDF path needs the analytic pair CDF, which only the "
            "Dirichlet copula provides; use the Gumbel path for the Gaussian"
        )
    cats = _inverse_cdf_categories_batch(1, n_samples, p, rng)[0]
    c = p.size

    present = sorted(set(int(x) for x in cats))
    realized_offdiag = [(i, j) for i in present for j in present if i < j]
    realized_diag = [
        (i, i) for i in present if np.count_nonzero(cats == i) >= 2
    ]
    orderings = _resolve_ordering_set(p, realized_offdiag, ordering_budget, rng)

    ratios = np.ones((c, c))
    clipped = False
    if realized_offdiag:
        avg = bivariate_pmf_entries(p, n_samples, realized_offdiag, orderings)
        for (i, j), pij in zip(realized_offdiag, avg):
            raw = p[i] * p[j] / pij
            if clip is not None and raw > clip:
                clipped = True
                raw = clip
            ratios[i, j] = ratios[j, i] = raw
    for (i, _) in realized_diag:
        # Diagonal ratios never move the estimate (the pair difference is 0);
        # a zero averaged probability here would only mean duplicates of i are
        # impossible under some orderings, so fall back to the inert 1.
        pii = bivariate_pmf_entries(p, n_samples, [(i, i)], orderings)[0]
        if pii > 0.0:
            val = p[i] * p[i] / pii
            ratios[i, i] = min(val, clip) if clip is not None else val
    return onehot(cats, c), RatioMatrix(ratios, clip, clipped)


def empirical_bivariate_pmf(z: np.ndarray) -> np.ndarray:
    """All-ordered-pairs estimate Z^T (1 - I) Z / (N (N-1)) from one-hot Z."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[0] < 2:
        raise ValueError("need a one-hot sample matrix with N >= 2 rows")
    n = z.shape[0]
    counts = z.sum(axis=0)
    return (np.outer(counts, counts) - np.diag(counts)) / (n * (n - 1))


def _ratio_from_joint(p: np.ndarray, joint: np.ndarray, clip: float | None):
    """Importance ratios from a (possibly sparse) joint pair PMF.

    Pairs with zero joint probability are unreadable by a pair estimator, so
    their entries are placeholders: the clip ceiling when clipping is active
    (an absent pair is an infinitely surprising one), the inert 1 otherwise.
    """
    pouter = np.outer(p, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = pouter / joint
    raw[joint <= 0.0] = np.inf
    offdiag = ~np.eye(p.size, dtype=bool)
    readable = offdiag & (joint > 0.0)
    if clip is None:
        ratios = np.where(joint > 0.0, raw, 1.0)
        clipped = False
    else:
        clipped = bool(np.any(raw[readable] > clip))
        ratios = np.minimum(raw, clip)
    return ratios, clipped


def _gumbel_categories_batch(
    k: int, n_samples: int, p: np.ndarray, rng: np.random.Generator, copula: CopulaKind
) -> np.ndarray:
    """k joint Gumbel-max draws of N categories each, shape (k, N)."""
    c = p.size
    u = sample_copula_batch(copula, k * c, n_samples, rng).reshape(k, c, n_samples)
    g = -np.log(-np.log(u))
    with np.errstate(divide="ignore"):
        shift = np.log(p)
    scores = g + shift[None, :, None]
    # np.argmax takes the first maximum, i.e. ties break to the lowest index.
    return np.argmax(scores, axis=1)


def sample_antithetic_gumbel(
    n_samples: int,
    p,
    rng: np.random.Generator,
    *,
    copula: CopulaKind = DIRICHLET,
    clip: float | None = 10.0,
):
    """Draw N antithetically coupled categorical samples via Gumbel-max.

    Each category's Gumbel column comes from its own copula draw across the N
    samples (Dirichlet or Gaussian).  The importance ratios use the empirical
    all-pairs PMF of the realized samples, clipped at `clip`.
    """
    p = as_probs(p)
    n_samples = _validate_sample_count(n_samples)
    cats = _gumbel_categories_batch(1, n_samples, p, rng, copula)[0]
    z = onehot(cats, p.size)
    ratios, clipped = _ratio_from_joint(p, empirical_bivariate_pmf(z), clip)
    return z, RatioMatrix(ratios, clip, clipped)
