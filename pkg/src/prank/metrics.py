"""Dataset agreement metrics and diagnostic curve extraction."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
import numpy as np

from .dataset import Domain, ResponseDataset
from .errors import DomainError, ShapeMismatch


@dataclass(frozen=True)
class CoherenceReport:
    overall: float
    per_entry: np.ndarray
    per_bin: np.ndarray


def coh(x: complex, y: complex) -> float:
    """|x + y|^2 / (2(|x|^2 + |y|^2)) in [0, 1]; two zeros agree (1.0)."""
    den = 2.0 * (abs(x) ** 2 + abs(y) ** 2)
    if den == 0.0:
        return 1.0
    return abs(x + y) ** 2 / den


def _coh_field(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    num = np.abs(a + b) ** 2
    den = 2.0 * (np.abs(a) ** 2 + np.abs(b) ** 2)
    return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 1.0)


def consist(ref: ResponseDataset, other: ResponseDataset) -> CoherenceReport:
    """Mean per-(o, i, k) coherence plus per-entry and per-bin marginals."""
    if ref.data.shape != other.data.shape:
        raise ShapeMismatch(f"shape {other.data.shape} != reference {ref.data.shape}")
    if ref.domain is not other.domain:
        raise ShapeMismatch("datasets live in different spectral domains")
    if ref.axis_start != other.axis_start or ref.axis_step != other.axis_step:
        raise ShapeMismatch("datasets have different spectral axes")
    field = _coh_field(ref.data, other.data)
    return CoherenceReport(float(field.mean()), field.mean(axis=2), field.mean(axis=(0, 1)))


def cmif(ds: ResponseDataset) -> np.ndarray:
    """Singular values of the n_o x n_i slice per frequency line.

    Returns an (n_k, min(n_o, n_i)) array, nonincreasing along each row.
    """
    if ds.domain is not Domain.FREQUENCY:
        raise DomainError("CMIF is defined on frequency-domain data")
    return np.linalg.svd(ds.data.transpose(2, 0, 1), compute_uv=False)


def zero_locations(ds: ResponseDataset, o: int, i: int, prominence: float = 0.9) -> np.ndarray:
    """Axis values of prominent magnitude minima (anti-resonances) of entry (o, i).

    A local minimum qualifies when it dips below 1 - prominence times the
    lower of the highest magnitudes on its two sides, i.e. its relative
    depth 1 - |Y_min|/|Y_side_max| exceeds ``prominence`` (a log-magnitude
    drop of at least -log10(1 - prominence) decades).  The default 0.9
    keeps only dips that fall below 10% of the surrounding maxima, which
    rejects noise-floor wiggles; prominence = 1 can never be exceeded, so
    it yields an empty list, as does any monotone curve.
    """
    if not (0 <= o < ds.n_outputs and 0 <= i < ds.n_inputs):
        raise IndexError(f"entry ({o}, {i}) outside {ds.n_outputs}x{ds.n_inputs} dataset")
    mag = np.abs(ds.data[o, i])
    hits = []
    for t in range(1, len(mag) - 1):
        if not (mag[t] < mag[t - 1] and mag[t] < mag[t + 1]):
            continue
        side = min(mag[:t].max(), mag[t + 1 :].max())
        if side > 0.0 and 1.0 - mag[t] / side > prominence:
            hits.append(t)
    return ds.axis[np.asarray(hits, dtype=int)] if hits else np.zeros(0)


def write_coherence_csv(report: CoherenceReport, path) -> None:
    """Flat CSV of the per-entry coherence matrix plus the overall mean."""
    path = Path(path)
    lines = ["output,input,coherence"]
    n_o, n_i = report.per_entry.shape
    for o in range(n_o):
        for i in range(n_i):
            lines.append(f"{o},{i},{float(report.per_entry[o, i])!r}")
    lines.append(f"overall,,{float(report.overall)!r}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_cmif_csv(curves: np.ndarray, axis: np.ndarray, path) -> None:
    path = Path(path)
    n_k, p = curves.shape
    lines = ["axis_value," + ",".join(f"sv{j}" for j in range(p))]
    for k in range(n_k):
        lines.append(f"{float(axis[k])!r}," + ",".join(repr(float(v)) for v in curves[k]))
    _atomic_write(path, "\n".join(lines) + "\n")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
