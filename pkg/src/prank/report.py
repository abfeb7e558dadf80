"""Per-stage filter records and their on-disk text/CSV serialization."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .selection import E15Model


@dataclass
class StageRecord:
    """One filtering stage: shape seen by the SVD, its spectrum, chosen rank.

    For stages that run many SVDs (per-entry or per-column Hankel passes)
    ``singular_values`` holds the first processed spectrum as a
    representative curve and ``extras`` carries the per-call ranks and the
    SVD call count.
    """

    name: str
    shape: tuple
    singular_values: np.ndarray
    rank: int
    model: Optional[E15Model] = None
    seconds: float = 0.0
    extras: dict = field(default_factory=dict)


@dataclass
class FilterReport:
    stages: list = field(default_factory=list)
    total_seconds: float = 0.0
    flags: list = field(default_factory=list)

    def stage(self, name: str) -> StageRecord:
        for rec in self.stages:
            if rec.name == name:
                return rec
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [f"total_seconds: {self.total_seconds:.6f}"]
        if self.flags:
            lines.append("flags: " + ", ".join(self.flags))
        for rec in self.stages:
            lines.append("")
            lines.append(f"stage: {rec.name}")
            lines.append(f"  shape: {rec.shape[0]} x {rec.shape[1]}")
            lines.append(f"  rank: {rec.rank}")
            lines.append(f"  seconds: {rec.seconds:.6f}")
            if rec.model is not None:
                lines.append(f"  e15_sigma_n: {rec.model.sigma_n:.6e}")
                lines.append(f"  e15_corr: {rec.model.corr}")
                misfit = _tail_misfit(rec.singular_values, rec.model.mp_curve)
                if misfit is not None:
                    # residual error of the noise-floor fit over its tail;
                    # large values mean the MP shape poorly matches this stage
                    lines.append(f"  e15_tail_misfit: {misfit:.4f}")
            for key, value in sorted(rec.extras.items()):
                lines.append(f"  {key}: {value}")
        return "\n".join(lines) + "\n"


def _tail_misfit(singular_values, mp_curve):
    S = np.asarray(singular_values, dtype=float)
    tail = np.arange(len(S) // 2, len(S))
    tail = tail[S[tail] > 0]
    if tail.size == 0:
        return None
    norm = float(np.linalg.norm(S[tail]))
    if norm == 0.0:
        return None
    return float(np.linalg.norm(S[tail] - np.asarray(mp_curve)[tail]) / norm)


def write_report(report: FilterReport, prefix) -> list:
    """Write ``<prefix>.report.txt`` plus one SV-curve CSV per stage."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    text_path = prefix.with_name(prefix.name + ".report.txt")
    _atomic_write(text_path, report.to_text())
    paths.append(text_path)
    for idx, rec in enumerate(report.stages):
        csv_path = prefix.with_name(f"{prefix.name}.sv_{idx}_{rec.name}.csv")
        rows = ["index,singular_value" + (",mp_curve,cleanliness" if rec.model is not None else "")]
        for k, s in enumerate(rec.singular_values):
            if rec.model is not None:
                rows.append(f"{k},{float(s)!r},{float(rec.model.mp_curve[k])!r},"
                            f"{float(rec.model.cleanliness[k])!r}")
            else:
                rows.append(f"{k},{float(s)!r}")
        _atomic_write(csv_path, "\n".join(rows) + "\n")
        paths.append(csv_path)
    return paths


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
