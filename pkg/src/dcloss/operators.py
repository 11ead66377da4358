"""Linear forward operators with exactly matched adjoints.

All three operators are materialized as sparse matrices, so apply/adjoint
are exact transposes by construction and the sensitivity image (adjoint of
ones) is exact.  Entries are nonnegative, so nonnegative inputs map to
nonnegative data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse


@dataclass(frozen=True)
class Kernel1D:
    """Symmetric, normalized odd-length convolution kernel."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        object.__setattr__(self, "taps", taps)
        if taps.ndim != 1 or taps.size % 2 != 1:
            raise ValueError("kernel must be an odd-length vector")
        if np.any(taps < 0):
            raise ValueError("kernel taps must be nonnegative")
        if abs(taps.sum() - 1.0) > 1e-12:
            raise ValueError("kernel taps must sum to 1")
        if not np.allclose(taps, taps[::-1], rtol=0, atol=1e-15):
            raise ValueError("kernel must be symmetric")

    @property
    def halfwidth(self) -> int:
        return self.taps.size // 2


def gaussian_kernel(sigma_index_space: float, halfwidth: int) -> Kernel1D:
    """Normalized Gaussian taps exp(-k^2 / 2 sigma^2), k in [-halfwidth, halfwidth]."""
    if sigma_index_space <= 0:
        raise ValueError("sigma must be positive")
    if halfwidth < 1:
        raise ValueError("halfwidth must be >= 1")
    k = np.arange(-halfwidth, halfwidth + 1, dtype=float)
    taps = np.exp(-0.5 * (k / sigma_index_space) ** 2)
    return Kernel1D(taps=taps / taps.sum())


@dataclass(frozen=True)
class ProjectorGeometry:
    """Parallel-beam geometry: square image, uniform angles over [0, pi)."""

    n_side: int
    n_angles: int
    n_bins: int
    pixel_size: float = 1.0
    bin_size: float = 1.0

    def __post_init__(self):
        if self.n_side < 2:
            raise ValueError("n_side must be >= 2")
        if self.n_angles < 1:
            raise ValueError("n_angles must be >= 1")
        if self.n_bins * self.bin_size < self.n_side * self.pixel_size * np.sqrt(2.0):
            raise ValueError("detector must cover the image diagonal")
        if self.pixel_size <= 0 or self.bin_size <= 0:
            raise ValueError("sizes must be positive")


class ForwardOp:
    """Base: linear map with exact adjoint; subclasses fill in _matrix."""

    _matrix: sparse.csr_matrix
    n_param: int
    n_data: int

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n_param:
            raise ValueError(f"expected parameter vector of length {self.n_param}")
        return self._matrix @ x

    def adjoint(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        if v.size != self.n_data:
            raise ValueError(f"expected data vector of length {self.n_data}")
        return self._matrix.T @ v

    def sensitivity(self) -> np.ndarray:
        """Adjoint applied to an all-ones data vector."""
        return self.adjoint(np.ones(self.n_data))


class Identity(ForwardOp):
    def __init__(self, n: int):
        self.n_param = self.n_data = int(n)
        self._matrix = sparse.identity(n, format="csr")

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n_param:
            raise ValueError(f"expected parameter vector of length {self.n_param}")
        return x.copy()

    def adjoint(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        if v.size != self.n_data:
            raise ValueError(f"expected data vector of length {self.n_data}")
        return v.copy()


def _reflect_index(j: np.ndarray, n: int) -> np.ndarray:
    # half-sample symmetric reflection: ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
    j = np.asarray(j)
    period = 2 * n
    j = np.mod(j, period)
    return np.where(j >= n, period - 1 - j, j)


class Conv1D(ForwardOp):
    """1-D convolution with reflective boundary handling."""

    def __init__(self, kernel: Kernel1D, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.kernel = kernel
        self.n_param = self.n_data = int(n)
        hw = kernel.halfwidth
        rows = np.repeat(np.arange(n), kernel.taps.size)
        offsets = np.tile(np.arange(-hw, hw + 1), n)
        cols = _reflect_index(rows + offsets, n)
        vals = np.tile(kernel.taps, n)
        self._matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


class ParallelBeam(ForwardOp):
    """Parallel-beam line-integral projector with Siddon intersection lengths.

    Data layout: row index = angle * n_bins + bin.  The image is a row-major
    n_side x n_side grid centered on the origin; rays for angle theta run
    along (-sin theta, cos theta) offset by the bin center along
    (cos theta, sin theta).
    """

    def __init__(self, geometry: ProjectorGeometry):
        self.geometry = geometry
        self.n_param = geometry.n_side ** 2
        self.n_data = geometry.n_angles * geometry.n_bins
        self._matrix = _siddon_matrix(geometry)


class RowSubset(ForwardOp):
    """A forward operator restricted to a subset of its data rows."""

    def __init__(self, op: ForwardOp, keep: np.ndarray):
        keep = np.asarray(keep, dtype=bool).ravel()
        if keep.size != op.n_data:
            raise ValueError("keep mask must match the operator's data length")
        if not np.any(keep):
            raise ValueError("keep mask selects no rows")
        self.parent = op
        self.keep = keep
        self.n_param = op.n_param
        self.n_data = int(keep.sum())
        self._matrix = op._matrix[keep]


def restrict_rows(op: ForwardOp, keep: np.ndarray) -> RowSubset:
    return RowSubset(op, keep)


def _siddon_matrix(geom: ProjectorGeometry) -> sparse.csr_matrix:
    n = geom.n_side
    half = 0.5 * n * geom.pixel_size
    edges = -half + geom.pixel_size * np.arange(n + 1)
    angles = np.pi * np.arange(geom.n_angles) / geom.n_angles
    offsets = (np.arange(geom.n_bins) - (geom.n_bins - 1) / 2.0) * geom.bin_size
    reach = half * np.sqrt(2.0) + geom.pixel_size

    rows, cols, vals = [], [], []
    for ia, theta in enumerate(angles):
        ux, uy = np.cos(theta), np.sin(theta)
        dx, dy = -uy, ux
        for ib, t in enumerate(offsets):
            p0 = np.array([t * ux - reach * dx, t * uy - reach * dy])
            p1 = np.array([t * ux + reach * dx, t * uy + reach * dy])
            seg = p1 - p0
            length = np.hypot(*seg)
            alphas = [np.array([0.0, 1.0])]
            lo, hi = 0.0, 1.0
            for axis in range(2):
                if abs(seg[axis]) > 1e-12 * geom.pixel_size:
                    a = (edges - p0[axis]) / seg[axis]
                    alphas.append(a)
                    lo = max(lo, min(a[0], a[-1]))
                    hi = min(hi, max(a[0], a[-1]))
                else:
                    if not edges[0] <= p0[axis] <= edges[-1]:
                        lo, hi = 1.0, 0.0  # ray misses the slab entirely
            if hi <= lo:
                continue
            alpha = np.unique(np.concatenate(alphas))
            alpha = alpha[(alpha >= lo) & (alpha <= hi)]
            if alpha.size < 2:
                continue
            mid = 0.5 * (alpha[1:] + alpha[:-1])
            pts = p0[None, :] + mid[:, None] * seg[None, :]
            ix = np.floor((pts[:, 0] + half) / geom.pixel_size).astype(int)
            iy = np.floor((pts[:, 1] + half) / geom.pixel_size).astype(int)
            inside = (ix >= 0) & (ix < n) & (iy >= 0) & (iy < n)
            seg_len = np.diff(alpha) * length
            keep = inside & (seg_len > 1e-12 * geom.pixel_size)
            if not np.any(keep):
                continue
            # row-major image with row 0 at the top (y decreasing)
            pix = (n - 1 - iy[keep]) * n + ix[keep]
            rows.append(np.full(pix.size, ia * geom.n_bins + ib))
            cols.append(pix)
            vals.append(seg_len[keep])
    if rows:
        data = (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols)))
    else:
        data = ([], ([], []))
    mat = sparse.csr_matrix(data, shape=(geom.n_angles * geom.n_bins, n * n))
    mat.sum_duplicates()
    return mat
