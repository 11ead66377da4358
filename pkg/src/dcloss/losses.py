"""Data-fidelity losses: distributional consistency and pointwise baselines.

The distributional-consistency loss converts each measurement to a logit
probability score under its predicted noise distribution and penalizes the
Wasserstein-1 distance between the empirical score distribution and a
Logistic(0, 1) reference.  Gradients flow through the frozen sort
permutation (a.e. correct; ties have measure zero) and the analytic score
derivatives from the noise module.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from . import noise
from .noise import DEFAULT_POLICY, ClippedGaussian, NoiseModel, Poisson, TailPolicy
from .rng import RngStream
from .special import logit


class ReferenceMode(Enum):
    """How the Logistic(0, 1) reference sample is produced."""

    FRESH_SAMPLE = "fresh"      # stochastic: one seeded draw per evaluation
    FIXED_QUANTILES = "quantiles"  # deterministic: logit((i - 0.5) / N)


@dataclass
class LossEval:
    """A loss value together with its gradient w.r.t. the predicted signal."""

    value: float
    grad_yhat: np.ndarray


@dataclass
class ScoreVector:
    """Per-measurement probability scores s and logit scores r."""

    s: np.ndarray
    r: np.ndarray

    @property
    def n(self) -> int:
        return self.s.size


def wasserstein1_sorted(a, b):
    """W1 distance between two equal-size empirical distributions.

    Returns (value, subgrad_a) where value = mean |a_(i) - b_(i)| over the
    ascending sorts and subgrad_a is the subgradient w.r.t. a (sign of the
    matched difference, 0 at ties, routed back through a's sort order).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ValueError("inputs must be equal-length 1-D vectors")
    order = np.argsort(a, kind="stable")
    diff = a[order] - np.sort(b, kind="stable")
    value = float(np.mean(np.abs(diff)))
    sub = np.empty_like(a)
    sub[order] = np.sign(diff) / a.size
    return value, sub


def reference_scores(mode: ReferenceMode, n: int, stream: RngStream | None = None) -> np.ndarray:
    if mode is ReferenceMode.FRESH_SAMPLE:
        if stream is None:
            raise ValueError("FRESH_SAMPLE reference needs an RngStream")
        return stream.sample_logistic(n)
    ranks = (np.arange(1, n + 1) - 0.5) / n
    return logit(ranks)


def pit_scores(model: NoiseModel, m, yhat, policy: TailPolicy = DEFAULT_POLICY,
               stream: RngStream | None = None) -> ScoreVector:
    """Probability and logit scores of measurements under the model at yhat."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    if isinstance(model, ClippedGaussian) and stream is not None:
        m = noise.resample_endpoints(model, m, stream)
    s = noise.cdf(model, m, yhat)
    r = noise.logit_cdf(model, m, yhat, policy)
    return ScoreVector(s=np.atleast_1d(s), r=np.atleast_1d(r))


def dc_loss(model: NoiseModel, m, yhat,
            mode: ReferenceMode = ReferenceMode.FRESH_SAMPLE,
            policy: TailPolicy = DEFAULT_POLICY,
            stream: RngStream | None = None) -> LossEval:
    """Distributional-consistency loss and its gradient w.r.t. yhat.

    With FRESH_SAMPLE the loss is stochastic in the reference draw; the same
    stream state reproduces the same value.  For the clipped Gaussian the
    stream also resamples endpoint measurements (before the reference draw),
    and the gradient is evaluated at the identical resampled measurements.
    """
    m = np.atleast_1d(np.asarray(m, dtype=float))
    yhat = np.atleast_1d(np.asarray(yhat, dtype=float))
    if m.shape != yhat.shape:
        raise ValueError("measurements and predictions must have equal length")
    if isinstance(model, ClippedGaussian):
        if stream is None:
            raise ValueError("clipped-Gaussian scoring needs an RngStream")
        m = noise.resample_endpoints(model, m, stream)
    r = noise.logit_cdf(model, m, yhat, policy)
    u = reference_scores(mode, m.size, stream)
    value, sub_r = wasserstein1_sorted(r, u)
    grad = sub_r * noise.dlogit_dyhat(model, m, yhat, policy)
    return LossEval(value=value, grad_yhat=grad)


def mse_loss(yhat, m) -> LossEval:
    """Mean squared error (1/N) sum (yhat - m)^2 and gradient 2(yhat - m)/N."""
    yhat = np.atleast_1d(np.asarray(yhat, dtype=float))
    m = np.atleast_1d(np.asarray(m, dtype=float))
    if m.shape != yhat.shape:
        raise ValueError("measurements and predictions must have equal length")
    resid = yhat - m
    return LossEval(value=float(np.mean(resid ** 2)), grad_yhat=2.0 * resid / m.size)


def poisson_nll(yhat, m, background=0.0) -> LossEval:
    """Negative Poisson log-likelihood with rates yhat + background.

    value = sum_i -m_i ln(rate_i) + rate_i + lnGamma(m_i + 1); the gradient
    is w.r.t. yhat (any forward-operator chain is applied by the caller).
    """
    yhat = np.atleast_1d(np.asarray(yhat, dtype=float))
    m = np.atleast_1d(np.asarray(m, dtype=float))
    if m.shape != yhat.shape:
        raise ValueError("measurements and predictions must have equal length")
    if np.any(m < 0):
        raise ValueError("counts must be nonnegative")
    rate = yhat + background
    if np.any(rate <= 0):
        raise ValueError("rates yhat + background must be positive")
    value = float(np.sum(-m * np.log(rate) + rate + gammaln(m + 1.0)))
    grad = 1.0 - m / rate
    return LossEval(value=value, grad_yhat=grad)
