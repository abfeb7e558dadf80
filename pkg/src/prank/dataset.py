"""3-D response container, PRF flattening, time/frequency bridge and file I/O."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    AxisError,
    DimensionMismatch,
    DomainError,
    FormatError,
    LengthError,
)

MAGIC = b"PRNKDS01"


class Domain(Enum):
    TIME = 0
    FREQUENCY = 1


def _is_angular(unit_label: str) -> bool:
    # "rad/s" style labels get the 2*pi factor in the time bridge; anything
    # else is treated as a cyclic frequency (Hz).
    return "rad" in unit_label.lower()


@dataclass(frozen=True)
class ResponseDataset:
    """Immutable (n_o, n_i, n_k) complex response dataset.

    Axis bin k maps to ``axis_start + k * axis_step`` in the unit given by
    ``unit_label``.  Time-domain data must be exactly real.
    """

    data: np.ndarray
    domain: Domain
    axis_start: float = 0.0
    axis_step: float = 1.0
    unit_label: str = "Hz"

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.complex128)
        if data.ndim != 3:
            raise DimensionMismatch(f"expected 3-D data, got ndim={data.ndim}")
        n_o, n_i, n_k = data.shape
        if n_o < 1 or n_i < 1 or n_k < 2:
            raise DimensionMismatch(f"invalid shape {data.shape}: need n_o,n_i >= 1 and n_k >= 2")
        if not self.axis_step > 0:
            raise AxisError(f"axis_step must be positive, got {self.axis_step}")
        if self.domain is Domain.TIME and np.any(data.imag != 0.0):
            raise DomainError("time-domain data must have exactly zero imaginary part")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_outputs(self) -> int:
        return self.data.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.data.shape[1]

    @property
    def n_bins(self) -> int:
        return self.data.shape[2]

    @property
    def axis(self) -> np.ndarray:
        return self.axis_start + self.axis_step * np.arange(self.n_bins)

    def with_data(self, data: np.ndarray, domain: Domain | None = None) -> "ResponseDataset":
        """Same axis metadata, new values (and optionally a new domain tag)."""
        return ResponseDataset(
            data,
            self.domain if domain is None else domain,
            self.axis_start,
            self.axis_step,
            self.unit_label,
        )


@dataclass(frozen=True)
class FlatDataset:
    """Spectrally-unfolded 2-D view: n_k rows, one column per (o, i) entry.

    Column j holds entry (o, i) with o = j % n_o and i = j // n_o, so the
    output index varies fastest along the columns.
    """

    matrix: np.ndarray
    n_outputs: int
    n_inputs: int
    domain: Domain
    axis_start: float
    axis_step: float
    unit_label: str = field(default="Hz")


def flatten(ds: ResponseDataset) -> FlatDataset:
    """Unfold (n_o, n_i, n_k) data into an n_k x (n_o*n_i) matrix."""
    n_o, n_i, n_k = ds.data.shape
    # transpose to (k, i, o); C-order reshape gives column index j = i*n_o + o
    matrix = ds.data.transpose(2, 1, 0).reshape(n_k, n_o * n_i)
    return FlatDataset(matrix, n_o, n_i, ds.domain, ds.axis_start, ds.axis_step, ds.unit_label)


def unflatten(flat: FlatDataset, n_o: int, n_i: int) -> ResponseDataset:
    """Rebuild the 3-D dataset from a flattened matrix; exact inverse of flatten."""
    n_k, n_cols = flat.matrix.shape
    if n_cols != n_o * n_i:
        raise DimensionMismatch(f"matrix has {n_cols} columns, expected n_o*n_i = {n_o * n_i}")
    data = flat.matrix.reshape(n_k, n_i, n_o).transpose(2, 1, 0)
    return ResponseDataset(data, flat.domain, flat.axis_start, flat.axis_step, flat.unit_label)


def to_time(ds: ResponseDataset) -> ResponseDataset:
    """Inverse-transform a one-sided spectrum into a real time record.

    The n_k bins are read as the one-sided spectrum of a real signal of
    length N = 2*(n_k - 1); imaginary parts of the DC and Nyquist bins are
    forced to zero before the Hermitian extension.  The inverse DFT carries
    the 1/N factor.
    """
    if ds.domain is Domain.TIME:
        raise DomainError("dataset is already in the time domain")
    if ds.axis_start != 0.0:
        raise AxisError(f"time bridge requires axis_start = 0, got {ds.axis_start}")
    n_k = ds.n_bins
    n_samples = 2 * (n_k - 1)
    spectrum = np.array(ds.data)
    spectrum[..., 0] = spectrum[..., 0].real
    spectrum[..., -1] = spectrum[..., -1].real
    samples = np.fft.irfft(spectrum, n=n_samples, axis=-1)
    full_span = ds.axis_step * n_samples
    if _is_angular(ds.unit_label):
        dt = 2.0 * np.pi / full_span
    else:
        dt = 1.0 / full_span
    return ResponseDataset(samples.astype(np.complex128), Domain.TIME, 0.0, dt, "s")


def to_frequency(ds: ResponseDataset, unit_label: str = "Hz") -> ResponseDataset:
    """Forward-transform an even-length real time record to a one-sided spectrum.

    Keeps bins 0..N/2 inclusive.  ``unit_label`` selects the frequency unit
    of the output axis ("Hz" by default; a rad-style label applies the 2*pi
    factor so that to_time followed by to_frequency restores the axis).
    """
    if ds.domain is Domain.FREQUENCY:
        raise DomainError("dataset is already in the frequency domain")
    n_samples = ds.n_bins
    if n_samples % 2 != 0:
        raise LengthError(f"time record length must be even, got {n_samples}")
    spectrum = np.fft.rfft(ds.data.real, axis=-1)
    full_span = 1.0 / ds.axis_step
    if _is_angular(unit_label):
        df = 2.0 * np.pi * full_span / n_samples
    else:
        df = full_span / n_samples
    return ResponseDataset(spectrum, Domain.FREQUENCY, 0.0, df, unit_label)


def write_dataset(ds: ResponseDataset, path) -> None:
    """Write the little-endian binary container (atomic: temp file + rename)."""
    path = Path(path)
    label = ds.unit_label.encode("utf-8")
    header = MAGIC + struct.pack(
        "<IIIBddH",
        ds.n_outputs,
        ds.n_inputs,
        ds.n_bins,
        ds.domain.value,
        ds.axis_start,
        ds.axis_step,
        len(label),
    )
    payload = np.empty(ds.data.shape + (2,), dtype="<f8")
    payload[..., 0] = ds.data.real
    payload[..., 1] = ds.data.imag
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(label)
        fh.write(payload.tobytes())
    os.replace(tmp, path)


def read_dataset(path) -> ResponseDataset:
    """Read a dataset written by write_dataset; bit-exact round trip."""
    blob = Path(path).read_bytes()
    if blob[:8] != MAGIC:
        raise FormatError(f"bad magic {blob[:8]!r}, expected {MAGIC!r}")
    head_fmt = "<IIIBddH"
    head_size = struct.calcsize(head_fmt)
    if len(blob) < 8 + head_size:
        raise FormatError(f"truncated header at byte {len(blob)}")
    n_o, n_i, n_k, dom, start, step, label_len = struct.unpack_from(head_fmt, blob, 8)
    offset = 8 + head_size
    if len(blob) < offset + label_len:
        raise FormatError(f"truncated unit label at byte {len(blob)}")
    label = blob[offset : offset + label_len].decode("utf-8")
    offset += label_len
    count = n_o * n_i * n_k * 2
    expected = offset + count * 8
    if len(blob) < expected:
        raise FormatError(f"truncated payload at byte {len(blob)}, expected {expected}")
    values = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
    values = values.reshape(n_o, n_i, n_k, 2)
    data = values[..., 0] + 1j * values[..., 1]
    try:
        domain = Domain(dom)
    except ValueError as exc:
        raise FormatError(f"unknown domain tag {dom}") from exc
    return ResponseDataset(data, domain, start, step, label)


def export_csv(ds: ResponseDataset, o: int, i: int, path) -> None:
    """Write one (o, i) entry as CSV: axis_value, real, imag, magnitude, phase."""
    if not (0 <= o < ds.n_outputs and 0 <= i < ds.n_inputs):
        raise IndexError(f"entry ({o}, {i}) outside {ds.n_outputs}x{ds.n_inputs} dataset")
    y = ds.data[o, i]
    axis = ds.axis
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("axis_value,real,imag,magnitude,phase\n")
        for x, v in zip(axis, y):
            fields = (float(x), float(v.real), float(v.imag), float(abs(v)), float(np.angle(v)))
            fh.write(",".join(repr(f) for f in fields) + "\n")
    os.replace(tmp, path)


def export_all_csv(ds: ResponseDataset, directory) -> list:
    """Write one CSV per (o, i) entry into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for o in range(ds.n_outputs):
        for i in range(ds.n_inputs):
            path = directory / f"response_o{o}_i{i}.csv"
            export_csv(ds, o, i, path)
            paths.append(path)
    return paths
