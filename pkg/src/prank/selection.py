"""Truncation-rank selection: manual, threshold-based and automated e15.

The e15 path fits a Marchenko-Pastur quantile curve to the tail of the
singular values, scores each mode's cleanliness against the fitted noise
floor, thresholds at a user fraction mu and subtracts the fitted noise
energy from the retained singular values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import EmptyError

# Composite-Simpson resolution of the integrated MP distribution.  8192
# panels keep |CDF(lam_plus) - 1| <= 1e-6 even for aspect ratios within
# 1e-3 of square, the worst case for the edge singularities.
_PANELS = 8192
_CDF_TOL = 1e-6

CORR_GRID = tuple(np.arange(1.0, 4.0 + 1e-9, 0.25))


class ThresholdMode(Enum):
    PER_VALUE = "per_value"
    CUMULATIVE = "cumulative"


@dataclass(frozen=True)
class FixedRank:
    r: int


@dataclass(frozen=True)
class AbsoluteThreshold:
    eps: float
    mode: ThresholdMode = ThresholdMode.PER_VALUE

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("threshold must be nonnegative")


@dataclass(frozen=True)
class RelativeThreshold:
    p: float
    mode: ThresholdMode = ThresholdMode.PER_VALUE

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("relative threshold must lie in (0, 1)")


@dataclass(frozen=True)
class E15:
    mu: float = 0.10
    tail_fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (0, 1)")
        if not 0.0 < self.tail_fraction < 1.0:
            raise ValueError("tail_fraction must lie in (0, 1)")


SelectionStrategy = Union[FixedRank, AbsoluteThreshold, RelativeThreshold, E15]


@dataclass(frozen=True)
class E15Model:
    """Fitted noise model and the resulting selection/reconstruction data."""

    sigma_n: float
    corr: float
    mp_curve: np.ndarray
    cleanliness: np.ndarray
    rank: int
    cleaned_s: np.ndarray


@lru_cache(maxsize=128)
def _unit_quantiles(m: int, n_eff: int):
    """Quantile grid of the MP singular-value law for a unit-variance matrix.

    Returns (lam_grid, cdf_grid, M, N) with the CDF integrated by composite
    Simpson on the substitution lam = lam- + (lam+ - lam-)*(1 - cos(pi s))/2,
    which regularises the square-root edges (and the 1/sqrt(lam) singularity
    of the square case).
    """
    big = max(m, n_eff)
    small = min(m, n_eff)
    beta = small / big
    lam_minus = (1.0 - np.sqrt(beta)) ** 2
    lam_plus = (1.0 + np.sqrt(beta)) ** 2
    s = np.linspace(0.0, 1.0, 2 * _PANELS + 1)
    t = 0.5 * (1.0 - np.cos(np.pi * s))
    lam = lam_minus + (lam_plus - lam_minus) * t
    # density * dlam/ds; sqrt((lam+ - lam)(lam - lam-)) = (lam+ - lam-) sin(pi s)/2
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (lam_plus - lam_minus) ** 2 * np.pi * np.sin(np.pi * s) ** 2 / (8.0 * np.pi * beta * lam)
    if lam[0] == 0.0:  # beta == 1: finite limit at s = 0
        g[0] = (lam_plus - lam_minus) * np.pi * 4.0 / (8.0 * np.pi * beta)
    h = s[1] - s[0]
    seg = (g[0:-1:2] + 4.0 * g[1::2] + g[2::2]) * h / 3.0
    cdf = np.concatenate([[0.0], np.cumsum(seg)])
    total = cdf[-1]
    if abs(total - 1.0) > _CDF_TOL:
        raise ArithmeticError(f"MP CDF integration off by {abs(total - 1.0):.2e}")
    lam_grid = lam[0::2]
    cdf_grid = cdf / total
    lam_grid.setflags(write=False)
    cdf_grid.setflags(write=False)
    return lam_grid, cdf_grid, big, small


@lru_cache(maxsize=256)
def _unit_curve(p: int, m: int, n_eff: int) -> np.ndarray:
    """Length-p unit-sigma quantile curve for an m x n_eff noise matrix."""
    lam_grid, cdf_grid, big, small = _unit_quantiles(m, n_eff)
    out = np.zeros(p)
    ks = np.arange(1, p + 1)
    valid = ks <= small
    q = (small - ks[valid] + 0.5) / small
    lo = np.full(q.shape, lam_grid[0])
    hi = np.full(q.shape, lam_grid[-1])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = np.interp(mid, lam_grid, cdf_grid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out[valid] = np.sqrt(big) * np.sqrt(0.5 * (lo + hi))
    out.setflags(write=False)
    return out


def mp_quantile_curve(shape: tuple, sigma: float, corr: float = 1.0) -> np.ndarray:
    """Predicted singular values of an i.i.d. complex Gaussian noise matrix.

    ``shape`` is the (rows, cols) of the data matrix; ``sigma`` the per-entry
    standard deviation; ``corr`` >= 1 reduces the effective column count to
    round(cols/corr).  The k-th value is sigma*sqrt(M)*sqrt(lam_k) with
    lam_k the (N - k + 1/2)/N quantile of the MP law, inverted by bisection
    on the numerically integrated CDF.  Indices past the effective rank are
    zero.  The result has length min(shape).
    """
    m, n = shape
    p = min(m, n)
    if sigma <= 0.0 or p == 0:
        return np.zeros(p)
    n_eff = max(1, round(n / corr))
    return sigma * _unit_curve(p, m, n_eff)


def mp_fit(S: np.ndarray, shape: tuple, tail_fraction: float = 0.5) -> tuple:
    """Estimate (sigma_n, corr) from the tail of a singular-value vector.

    Grid search over corr in {1.0, 1.25, ..., 4.0}; for each candidate the
    scale sigma follows from closed-form least squares of the tail (last
    ``tail_fraction`` of the indices, exact zeros excluded) against the
    unit-sigma quantile curve.  Smallest-residual pair wins; ties resolve
    to the smallest corr.  An all-zero tail yields (0.0, 1.0).
    """
    S = np.asarray(S, dtype=float)
    p = len(S)
    if p == 0:
        raise EmptyError("empty singular-value vector")
    start = int(p * (1.0 - tail_fraction))
    tail = np.arange(min(start, p - 1), p)
    tail = tail[S[tail] > 0.0]
    if tail.size == 0:
        return 0.0, 1.0
    best = None
    for corr in CORR_GRID:
        unit = mp_quantile_curve(shape, 1.0, corr)
        c = unit[tail]
        denom = float(np.sum(c * c))
        if denom == 0.0:
            continue
        sigma = float(np.sum(S[tail] * c)) / denom
        resid = float(np.sum((S[tail] - sigma * c) ** 2))
        if best is None or resid < best[0]:
            best = (resid, sigma, corr)
    if best is None:
        return 0.0, 1.0
    return best[1], best[2]


def e15(S: np.ndarray, shape: tuple, mu: float = 0.10, tail_fraction: float = 0.5) -> E15Model:
    """Fit the noise floor and derive rank + cleaned singular values.

    cleanliness[k] = clamp(1 - mp_curve[k]/S[k], 0, 1) runs from ~0 at the
    noise ceiling to ~1 for the cleanest dominant mode; the selected rank is
    the longest prefix with cleanliness >= mu.  Retained singular values are
    root-difference cleaned: sqrt(max(S^2 - mp_curve^2, 0)).  Degenerate
    inputs produce rank 0 rather than an error.
    """
    S = np.asarray(S, dtype=float)
    sigma_n, corr = mp_fit(S, shape, tail_fraction)
    curve = mp_quantile_curve(shape, sigma_n, corr)
    with np.errstate(divide="ignore", invalid="ignore"):
        cleanliness = np.where(S > 0.0, 1.0 - curve / np.where(S > 0.0, S, 1.0), 0.0)
    cleanliness = np.clip(cleanliness, 0.0, 1.0)
    above = cleanliness >= mu
    rank = len(S) if above.all() else int(np.argmin(above))
    cleaned = np.sqrt(np.maximum(S[:rank] ** 2 - curve[:rank] ** 2, 0.0))
    return E15Model(sigma_n, corr, curve, cleanliness, rank, cleaned)


def select_rank(S: np.ndarray, shape: tuple, strategy: SelectionStrategy) -> int:
    """Truncation rank for a nonincreasing singular-value vector.

    Selection is always a prefix: strict inequality against the threshold,
    first crossing wins.
    """
    rank, _ = evaluate(S, shape, strategy)
    return rank


def evaluate(S: np.ndarray, shape: tuple, strategy: SelectionStrategy):
    """Like select_rank but also returns the fitted E15Model (None otherwise)."""
    S = np.asarray(S, dtype=float)
    if len(S) == 0:
        raise EmptyError("empty singular-value vector")
    p = len(S)
    if isinstance(strategy, FixedRank):
        if strategy.r < 0:
            raise ValueError("rank must be nonnegative")
        return min(strategy.r, p), None
    if isinstance(strategy, AbsoluteThreshold):
        if strategy.mode is ThresholdMode.PER_VALUE:
            return int(np.sum(S > strategy.eps)), None
        tails = np.concatenate([np.cumsum(S[::-1])[::-1], [0.0]])  # tails[r] = sum S[r:]
        return int(np.argmax(tails <= strategy.eps)), None
    if isinstance(strategy, RelativeThreshold):
        if strategy.mode is ThresholdMode.PER_VALUE:
            if S[0] == 0.0:
                return 0, None
            return int(np.sum(S / S[0] > strategy.p)), None
        total = float(np.sum(S))
        if total == 0.0:
            return 0, None
        tails = np.concatenate([np.cumsum(S[::-1])[::-1], [0.0]]) / total
        return int(np.argmax(tails <= strategy.p)), None
    if isinstance(strategy, E15):
        model = e15(S, shape, strategy.mu, strategy.tail_fraction)
        return model.rank, model
    raise TypeError(f"unknown selection strategy {strategy!r}")
