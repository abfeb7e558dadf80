"""Dense SVD with a deterministic sign convention, rank-r reconstruction,
Hankel matrix construction and SSA (anti-diagonal averaging) inversion."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ConvergenceError, RankError, WindowError
from .report import StageRecord
from .selection import FixedRank, SelectionStrategy, evaluate


@dataclass(frozen=True)
class SVDFactorization:
    """A = U diag(S) V^H with orthonormal columns and nonincreasing S."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def shape(self) -> tuple:
        return (self.U.shape[0], self.V.shape[0])

    @property
    def p(self) -> int:
        return len(self.S)


@dataclass(frozen=True)
class HankelMatrix:
    matrix: np.ndarray
    series_len: int
    window: int


def svd(A: np.ndarray) -> SVDFactorization:
    """Economy SVD, deterministic up to the backend for a fixed input.

    Each left vector is phase-rotated so its largest-magnitude entry is real
    and positive; the matching right vector gets the same rotation, leaving
    the product U diag(S) V^H unchanged.
    """
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    try:
        U, S, Vh = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    V = Vh.conj().T if np.iscomplexobj(Vh) else Vh.T
    idx = np.argmax(np.abs(U), axis=0)
    pivots = U[idx, np.arange(U.shape[1])]
    mags = np.abs(pivots)
    with np.errstate(invalid="ignore", divide="ignore"):
        rot = np.where(mags > 0, np.conj(pivots) / np.where(mags > 0, mags, 1.0), 1.0)
    U = U * rot
    V = V * rot
    return SVDFactorization(U, S, V)


def truncate(f: SVDFactorization, r: int) -> np.ndarray:
    """Best rank-r reconstruction U_r diag(S_r) V_r^H; r = 0 gives zeros."""
    if not 0 <= r <= f.p:
        raise RankError(f"rank {r} outside [0, {f.p}]")
    if r == 0:
        return np.zeros(f.shape, dtype=f.U.dtype)
    Vr = f.V[:, :r]
    return (f.U[:, :r] * f.S[:r]) @ (Vr.conj().T if np.iscomplexobj(Vr) else Vr.T)


def truncate_cleaned(f: SVDFactorization, r: int, cleaned_s: np.ndarray) -> np.ndarray:
    """Rank-r reconstruction with replacement singular values (vectors kept)."""
    if not 0 <= r <= f.p:
        raise RankError(f"rank {r} outside [0, {f.p}]")
    cleaned_s = np.asarray(cleaned_s, dtype=float)
    if cleaned_s.shape != (r,):
        raise RankError(f"cleaned singular values have length {len(cleaned_s)}, expected {r}")
    if np.any(cleaned_s < 0):
        raise ValueError("cleaned singular values must be nonnegative")
    if r == 0:
        return np.zeros(f.shape, dtype=f.U.dtype)
    Vr = f.V[:, :r]
    return (f.U[:, :r] * cleaned_s) @ (Vr.conj().T if np.iscomplexobj(Vr) else Vr.T)


def auto_window(n: int) -> int:
    """Near-square default: maximizes min(L, K) to maximize separable rank."""
    return n // 2 + 1


def hankelize(series: np.ndarray, window: Optional[int] = None) -> HankelMatrix:
    """L x (n - L + 1) matrix with matrix[a, b] = series[a + b]."""
    series = np.asarray(series)
    n = len(series)
    if n < 2:
        raise WindowError(f"series too short ({n} samples)")
    L = auto_window(n) if window is None else int(window)
    if not 1 <= L <= n:
        raise WindowError(f"window {L} outside [1, {n}]")
    K = n - L + 1
    matrix = series[np.arange(L)[:, None] + np.arange(K)[None, :]]
    return HankelMatrix(matrix, n, L)


def dehankelize_ssa(M: np.ndarray) -> np.ndarray:
    """Average each anti-diagonal back into a series of length L + K - 1.

    Real and imaginary parts are averaged independently.  The mean is taken
    around each anti-diagonal's first element so a matrix that is exactly
    Hankel inverts bit-exactly (deviations are identically zero there).
    """
    M = np.asarray(M)
    L, K = M.shape
    n = L + K - 1
    idx = np.arange(L)[:, None] + np.arange(K)[None, :]
    flat_idx = idx.ravel()
    counts = np.bincount(flat_idx, minlength=n)
    # anchor: first element along each anti-diagonal
    anchor = np.concatenate([M[0, :], M[1:, K - 1]])
    dev = M - anchor[idx]
    real = np.bincount(flat_idx, weights=dev.real.ravel(), minlength=n)
    if np.iscomplexobj(M):
        imag = np.bincount(flat_idx, weights=dev.imag.ravel(), minlength=n)
        return anchor + (real + 1j * imag) / counts
    return anchor.real + real / counts


def hankel_tsvd_series(
    series: np.ndarray,
    window: Optional[int] = None,
    selector: Union[SelectionStrategy, None] = None,
    stage_name: str = "hankel",
):
    """Hankelize, truncate by the selector, SSA back to a same-length series.

    Returns (filtered_series, StageRecord).  e15 selectors use the cleaned
    singular values in the reconstruction.
    """
    series = np.asarray(series)
    if len(series) < 4:
        raise WindowError(f"series too short for Hankel filtering ({len(series)} samples)")
    if selector is None:
        selector = FixedRank(len(series))
    t0 = time.perf_counter()
    hm = hankelize(series, window)
    f = svd(hm.matrix)
    rank, model = evaluate(f.S, hm.matrix.shape, selector)
    if model is not None:
        filtered = truncate_cleaned(f, rank, model.cleaned_s)
    else:
        filtered = truncate(f, rank)
    out = dehankelize_ssa(filtered)
    record = StageRecord(
        name=stage_name,
        shape=hm.matrix.shape,
        singular_values=f.S,
        rank=rank,
        model=model,
        seconds=time.perf_counter() - t0,
    )
    return out, record
