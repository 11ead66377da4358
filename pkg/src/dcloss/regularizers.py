"""Total-variation penalties on 2-D images, with subgradients.

Both penalties use forward differences, clamped at the image edge (the last
row/column contributes zero difference), and are normalized by the pixel
count.  Subgradients use sign(0) = 0 so constant images are fixed points.
"""

from __future__ import annotations

import numpy as np


def _check_image(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.size < 2:
        raise ValueError("image must be 2-D with at least 2 pixels")
    return x


def _forward_diffs(x: np.ndarray):
    dh = np.zeros_like(x)
    dv = np.zeros_like(x)
    dh[:, :-1] = x[:, 1:] - x[:, :-1]
    dv[:-1, :] = x[1:, :] - x[:-1, :]
    return dh, dv


def _route_signs(gh: np.ndarray, gv: np.ndarray) -> np.ndarray:
    # each weighted sign w*sign(x_b - x_a) contributes +w at b and -w at a
    grad = -(gh + gv)
    grad[:, 1:] += gh[:, :-1]
    grad[1:, :] += gv[:-1, :]
    return grad


def tv(x):
    """Anisotropic total variation: (1/N) sum |dh| + |dv|.  Returns (value, grad)."""
    x = _check_image(x)
    n = x.size
    dh, dv = _forward_diffs(x)
    value = float((np.abs(dh).sum() + np.abs(dv).sum()) / n)
    grad = _route_signs(np.sign(dh), np.sign(dv)) / n
    return value, grad


def eptv(x, kappa: float = 0.1, eps: float = 1e-8, differentiate_weights: bool = False):
    """Edge-preserving TV: (1/N) sum w * (|dh| + |dv|) with
    w = 1 / (1 + (dh^2 + dv^2 + eps) / kappa^2).

    Weights are treated as detached constants in the gradient
    (half-quadratic convention) unless differentiate_weights is set.
    Returns (value, grad).
    """
    if kappa <= 0 or eps <= 0:
        raise ValueError("kappa and eps must be positive")
    x = _check_image(x)
    n = x.size
    dh, dv = _forward_diffs(x)
    w = 1.0 / (1.0 + (dh ** 2 + dv ** 2 + eps) / kappa ** 2)
    mag = np.abs(dh) + np.abs(dv)
    value = float((w * mag).sum() / n)
    grad = _route_signs(w * np.sign(dh), w * np.sign(dv)) / n
    if differentiate_weights:
        # dw/d(dh) = -2 dh w^2 / kappa^2, likewise for dv
        coeff = -2.0 * mag * w ** 2 / kappa ** 2
        grad += _route_signs(coeff * dh, coeff * dv) / n
    return value, grad
