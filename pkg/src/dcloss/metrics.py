"""Reconstruction-quality metrics and calibration diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def nrmse(xhat, xstar) -> float:
    """L2 error of xhat normalized by the L2 norm of xstar."""
    xhat = np.asarray(xhat, dtype=float).ravel()
    xstar = np.asarray(xstar, dtype=float).ravel()
    if xhat.shape != xstar.shape:
        raise ValueError("inputs must have equal length")
    denom = np.linalg.norm(xstar)
    if denom == 0:
        raise ValueError("ground truth must have nonzero norm")
    return float(np.linalg.norm(xhat - xstar) / denom)


def psnr(xhat, xstar, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf when the images are identical."""
    if peak <= 0:
        raise ValueError("peak must be positive")
    xhat = np.asarray(xhat, dtype=float).ravel()
    xstar = np.asarray(xstar, dtype=float).ravel()
    if xhat.shape != xstar.shape:
        raise ValueError("inputs must have equal length")
    mse = float(np.mean((xhat - xstar) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak ** 2 / mse)


@dataclass
class Histogram:
    """Counts of probability scores over uniform bins of [0, 1]."""

    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def cdf_histogram(s, n_bins: int) -> Histogram:
    """Histogram of scores in [0, 1] over n_bins uniform bins.

    Bins are half-open [lo, hi) with the last bin closed, so s = 1.0 lands in
    the top bin.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    s = np.asarray(s, dtype=float).ravel()
    if np.any((s < 0.0) | (s > 1.0)):
        raise ValueError("scores must lie in [0, 1]")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    counts, _ = np.histogram(s, bins=edges)
    return Histogram(edges=edges, counts=counts)
