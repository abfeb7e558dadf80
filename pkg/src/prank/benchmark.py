"""Lumped-parameter chain synthesis, modal superposition, noise and outliers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .dataset import Domain, ResponseDataset
from .errors import AxisError, DomainError

_RIGID_TOL = 1e-8


class Boundary(Enum):
    FIXED_FREE = "fixed-free"
    FREE_FREE = "free-free"


class Quantity(Enum):
    RECEPTANCE = "receptance"
    ACCELERANCE = "accelerance"


@dataclass(frozen=True)
class ChainSystem:
    """Mass-damper-stiffness chain; dampers sit parallel to the springs.

    Fixed-free chains carry n links (the first one to ground), free-free
    chains n - 1 inter-mass links.
    """

    masses: np.ndarray
    dampers: np.ndarray
    springs: np.ndarray
    boundary: Boundary = Boundary.FIXED_FREE

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        d = np.asarray(self.dampers, dtype=float)
        k = np.asarray(self.springs, dtype=float)
        n = len(m)
        links = n if self.boundary is Boundary.FIXED_FREE else n - 1
        if len(k) != links or len(d) != links:
            raise ValueError(f"{self.boundary.value} chain with {n} masses needs {links} links, "
                             f"got {len(k)} springs / {len(d)} dampers")
        if np.any(m <= 0) or np.any(k <= 0) or np.any(d < 0):
            raise ValueError("need masses > 0, springs > 0, dampers >= 0")
        for name, arr in (("masses", m), ("dampers", d), ("springs", k)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, n: int, mass: float = 1.0, damper: float = 0.002, spring: float = 1.0,
                boundary: Boundary = Boundary.FIXED_FREE) -> "ChainSystem":
        links = n if boundary is Boundary.FIXED_FREE else n - 1
        return cls(np.full(n, mass), np.full(links, damper), np.full(links, spring), boundary)

    @property
    def n_dofs(self) -> int:
        return len(self.masses)

    def matrices(self):
        """(M, D, K) with M diagonal and D, K tridiagonal from the topology."""
        n = self.n_dofs
        M = np.diag(self.masses)
        K = np.zeros((n, n))
        D = np.zeros((n, n))
        if self.boundary is Boundary.FIXED_FREE:
            K[0, 0] += self.springs[0]
            D[0, 0] += self.dampers[0]
            pairs = [(j - 1, j, j) for j in range(1, n)]
        else:
            pairs = [(j, j + 1, j) for j in range(n - 1)]
        for a, b, link in pairs:
            for mat, coef in ((K, self.springs[link]), (D, self.dampers[link])):
                mat[a, a] += coef
                mat[b, b] += coef
                mat[a, b] -= coef
                mat[b, a] -= coef
        return M, D, K


@dataclass(frozen=True)
class ModalModel:
    """Eigenfrequencies (rad/s, nondecreasing), mass-normalized shapes and
    per-mode viscous damping ratios."""

    frequencies: np.ndarray
    shapes: np.ndarray
    damping: np.ndarray
    quantity: Quantity = Quantity.RECEPTANCE

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float)
        if np.any(np.diff(w) < 0) or np.any(w < 0):
            raise ValueError("frequencies must be nonnegative and nondecreasing")

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    def with_damping(self, ratio: float) -> "ModalModel":
        return ModalModel(self.frequencies, self.shapes, np.full(self.n_modes, ratio), self.quantity)

    def with_quantity(self, quantity: Quantity) -> "ModalModel":
        return ModalModel(self.frequencies, self.shapes, self.damping, quantity)


@dataclass(frozen=True)
class NoiseModel:
    """Additive complex Gaussian noise with magnitude-proportional spread:
    sigma_real = a*|Y| + b, sigma_imag = c*|Y| + d, per entry and per bin."""

    a: float
    b: float
    c: float
    d: float
    seed: int = 0

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("noise coefficients must be nonnegative")


@dataclass(frozen=True)
class OffsetSpec:
    """Real constants added to whole output rows.

    ``entries`` is a sequence of (output_index, value) pairs.  A single
    entry for an output applies its value to every input; several entries
    for the same output assign values to successive inputs (first entry ->
    input 0, second -> input 1, ...) and must then cover all inputs.
    """

    entries: tuple

    def __init__(self, entries: Sequence):
        object.__setattr__(self, "entries", tuple((int(o), float(v)) for o, v in entries))


def _axis_checked(axis: np.ndarray) -> tuple:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or len(axis) < 2:
        raise AxisError("frequency grid needs at least 2 points")
    steps = np.diff(axis)
    if np.any(steps <= 0):
        raise AxisError("frequency grid must be strictly increasing")
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise AxisError("frequency grid must be uniform")
    return axis, float(axis[0]), float(steps[0])


def _select(indices: Optional[Sequence], n: int) -> np.ndarray:
    if indices is None:
        return np.arange(n)
    idx = np.asarray(indices, dtype=int)
    if np.any(idx < 0) or np.any(idx >= n):
        raise IndexError(f"DoF index outside [0, {n})")
    return idx


def synthesize_direct(sys: ChainSystem, axis: np.ndarray,
                      outputs: Optional[Sequence] = None,
                      inputs: Optional[Sequence] = None) -> ResponseDataset:
    """Receptance by direct inversion of the dynamic stiffness per bin.

    Bins where the dynamic stiffness is numerically singular (free-free
    chain at omega = 0) fall back to the pseudoinverse and raise a warning.
    """
    axis, start, step = _axis_checked(axis)
    M, D, K = sys.matrices()
    n = sys.n_dofs
    out_idx = _select(outputs, n)
    in_idx = _select(inputs, n)
    rhs = np.eye(n)[:, in_idx]
    A = (-axis[:, None, None] ** 2 * M
         + 1j * axis[:, None, None] * D
         + K)
    bad_bins = []
    try:
        X = np.linalg.solve(A, np.broadcast_to(rhs, (len(axis),) + rhs.shape))
        if not np.all(np.isfinite(X)):
            raise np.linalg.LinAlgError("non-finite solution")
    except np.linalg.LinAlgError:
        X = np.empty((len(axis), n, len(in_idx)), dtype=complex)
        for k in range(len(axis)):
            try:
                X[k] = np.linalg.solve(A[k], rhs)
                if not np.all(np.isfinite(X[k])):
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                X[k] = np.linalg.pinv(A[k]) @ rhs
                bad_bins.append(k)
    if bad_bins:
        warnings.warn(f"singular dynamic stiffness at {len(bad_bins)} bin(s) "
                      f"(first at index {bad_bins[0]}); pseudoinverse used", RuntimeWarning)
    data = X[:, out_idx, :].transpose(1, 2, 0)
    return ResponseDataset(data, Domain.FREQUENCY, start, step, "rad/s")


def eigen(sys: ChainSystem) -> ModalModel:
    """Undamped modes of the chain with equivalent modal damping ratios.

    Shapes are mass-normalized; damping ratios come from projecting the
    viscous damping matrix onto each mode (zero for rigid-body modes).
    """
    M, D, K = sys.matrices()
    vals, vecs = scipy.linalg.eigh(K, M)
    vals = np.clip(vals, 0.0, None)
    freqs = np.sqrt(vals)
    # deterministic shape signs: largest-magnitude entry positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs
    modal_damp = np.einsum("ij,ij->j", vecs, D @ vecs)
    flexible = freqs > _RIGID_TOL
    damping = np.zeros_like(freqs)
    damping[flexible] = modal_damp[flexible] / (2.0 * freqs[flexible])
    return ModalModel(freqs, vecs, damping)


def modal_frf(model: ModalModel, axis: np.ndarray,
              outputs: Optional[Sequence] = None,
              inputs: Optional[Sequence] = None) -> ResponseDataset:
    """Mode-superposition synthesis over the given frequency grid.

    Receptance: Y_oi = sum_j phi_oj phi_ij / (w_j^2 - w^2 + 2i*eps_j*w_j*w).
    Accelerance multiplies by -w^2; rigid-body modes contribute their finite
    mass-line limit at w = 0 (receptance drops them at exactly w = 0,
    matching the pseudoinverse convention of synthesize_direct).
    """
    axis, start, step = _axis_checked(axis)
    n = model.shapes.shape[0]
    out_idx = _select(outputs, n)
    in_idx = _select(inputs, n)
    wj = model.frequencies
    eps = model.damping
    w = axis[:, None]
    denom = wj[None, :] ** 2 - w ** 2 + 2j * eps[None, :] * wj[None, :] * w
    rigid = wj < _RIGID_TOL
    safe = np.where(denom != 0, denom, 1.0)
    if model.quantity is Quantity.ACCELERANCE:
        frac = np.where(denom != 0, -(w ** 2) / safe, 0.0)
        frac[:, rigid] = 1.0  # -w^2 / -w^2 for every w, including the w = 0 limit
    else:
        frac = np.where(denom != 0, 1.0 / safe, 0.0)
    data = np.einsum("om,im,km->oik", model.shapes[out_idx], model.shapes[in_idx], frac)
    return ResponseDataset(data, Domain.FREQUENCY, start, step, "rad/s")


def add_noise(ds: ResponseDataset, nm: NoiseModel) -> ResponseDataset:
    """Seeded complex Gaussian perturbation, independent per (o, i, k)."""
    if ds.domain is not Domain.FREQUENCY:
        raise DomainError("noise model is defined on frequency-domain data")
    mag = np.abs(ds.data)
    rng = np.random.default_rng(nm.seed)
    real = rng.normal(0.0, nm.a * mag + nm.b)
    imag = rng.normal(0.0, nm.c * mag + nm.d)
    return ds.with_data(ds.data + real + 1j * imag)


def add_offsets(ds: ResponseDataset, spec: OffsetSpec) -> ResponseDataset:
    """Add real constants to whole output rows (see OffsetSpec semantics)."""
    if ds.domain is not Domain.FREQUENCY:
        raise DomainError("offsets are defined on frequency-domain data")
    data = np.array(ds.data)
    n_o, n_i, _ = data.shape
    grouped: dict = {}
    for o, value in spec.entries:
        if not 0 <= o < n_o:
            raise IndexError(f"output index {o} outside [0, {n_o})")
        grouped.setdefault(o, []).append(value)
    for o, values in grouped.items():
        if len(values) == 1:
            data[o, :, :] += values[0]
        elif len(values) == n_i:
            data[o, :, :] += np.asarray(values)[:, None]
        else:
            raise IndexError(f"output {o}: got {len(values)} offsets, need 1 or {n_i}")
    return ds.with_data(data)
