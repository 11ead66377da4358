"""Per-measurement noise distributions and their calibration scores.

Each model provides three views of the same object: the CDF evaluated at a
measurement (the probability score s), a numerically stable logit of that
CDF (the score r used by the distributional-consistency loss), and the exact
analytic derivative of r with respect to the predicted mean.

The logit is computed directly in one step wherever separate CDF + logit
evaluation would saturate in double precision:

* Gaussian: central branch for |z| <= tau, Laplace tail expansion beyond
  (carried to the z^-8 correction so the branches join to ~1e-4 at tau=5).
* Poisson: CDF via the Gamma-duality s = Q(m+1, yhat); log-space expansions
  when s falls outside [eps, 1-eps], with the finite correction sums so the
  seam error stays at roundoff level.
* Clipped Gaussian on [0,1]: Gaussian CDF in the interior, linear ramps of
  width ramp_eps at the boundaries, endpoint measurements resampled
  uniformly into the ramps, and a hard clamp before the logit.

Derivatives always differentiate the branch that actually produced r, so
they agree with finite differences of this module's own forward functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .rng import RngStream
from .special import (
    dlogit_gauss_upper_tail_dz,
    gamma_logpdf,
    gauss_cdf,
    gauss_pdf,
    logit_gauss_upper_tail,
    poisson_logpmf,
    reg_gamma_pq,
)

_POISSON_RATE_FLOOR = 1e-12  # strict-positive floor before logs
_MAX_TAIL_TERMS = 4096


@dataclass(frozen=True)
class Gaussian:
    """Additive Gaussian noise with known standard deviation (signal units)."""

    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class ClippedGaussian:
    """Gaussian noise clipped to [0, 1], smoothed by boundary ramps.

    ramp_eps is the width of the linear CDF ramps at 0 and 1; hard_eps is
    the numeric clamp applied to the probability score before the logit.
    """

    sigma: float
    ramp_eps: float = 1e-3
    hard_eps: float = 1e-12

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.ramp_eps < 0.5:
            raise ValueError("ramp_eps must lie in (0, 0.5)")
        if self.hard_eps <= 0:
            raise ValueError("hard_eps must be positive")


@dataclass(frozen=True)
class Poisson:
    """Poisson counting noise; the rate is the predicted mean, per call."""


NoiseModel = Gaussian | ClippedGaussian | Poisson


@dataclass(frozen=True)
class TailPolicy:
    """Thresholds at which logit(CDF) switches to its tail expansions."""

    gaussian_z_threshold: float = 5.0
    poisson_s_threshold: float = 1e-12
    clipped_delta: float = 1e-12

    def __post_init__(self):
        if self.gaussian_z_threshold <= 0:
            raise ValueError("gaussian_z_threshold must be positive")
        if not 0.0 < self.poisson_s_threshold < 0.5:
            raise ValueError("poisson_s_threshold must lie in (0, 0.5)")
        if self.clipped_delta <= 0:
            raise ValueError("clipped_delta must be positive")


DEFAULT_POLICY = TailPolicy()


def _as_float_arrays(*xs):
    arrs = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in xs])
    scalar = all(np.ndim(x) == 0 for x in xs)
    return [np.atleast_1d(a) for a in arrs], scalar


def _ret(x: np.ndarray, scalar: bool):
    return float(x[0]) if scalar else x


# ---------------------------------------------------------------------------
# CDF
# ---------------------------------------------------------------------------

def cdf(model: NoiseModel, m, yhat):
    """Probability score s = F(m | yhat) in [0, 1], elementwise."""
    (m_, y_), scalar = _as_float_arrays(m, yhat)
    if isinstance(model, Gaussian):
        s = gauss_cdf((m_ - y_) / model.sigma)
    elif isinstance(model, ClippedGaussian):
        if np.any((m_ < 0.0) | (m_ > 1.0)):
            raise ValueError("clipped-Gaussian measurements must lie in [0, 1]")
        s = _clipped_cdf(model, m_, y_)
    elif isinstance(model, Poisson):
        if np.any(m_ < 0):
            raise ValueError("Poisson measurements must be nonnegative")
        q = np.maximum(y_, 0.0)
        _, s = reg_gamma_pq(m_ + 1.0, q)
    else:
        raise TypeError(f"unknown noise model {model!r}")
    return _ret(s, scalar)


def _clipped_cdf(model: ClippedGaussian, m: np.ndarray, yhat: np.ndarray) -> np.ndarray:
    eps = model.ramp_eps
    sig = model.sigma
    c_lo = gauss_cdf((eps - yhat) / sig)
    c_hi = gauss_cdf((1.0 - eps - yhat) / sig)
    central = gauss_cdf((m - yhat) / sig)
    s = np.where(m < eps, (m / eps) * c_lo, central)
    s = np.where(m > 1.0 - eps, c_hi + (m - (1.0 - eps)) / eps * (1.0 - c_hi), s)
    return s


# ---------------------------------------------------------------------------
# logit(CDF)
# ---------------------------------------------------------------------------

def logit_cdf(model: NoiseModel, m, yhat, policy: TailPolicy = DEFAULT_POLICY,
              stream: RngStream | None = None):
    """Score r = logit(F(m | yhat)), stable across the whole range.

    For the clipped Gaussian, measurements exactly at 0 or 1 are resampled
    uniformly into the boundary ramps, consuming ``stream``; gradient passes
    must reuse the resampled measurements (see resample_endpoints).
    """
    (m_, y_), scalar = _as_float_arrays(m, yhat)
    if isinstance(model, Gaussian):
        r = _gaussian_logit_cdf(model, m_, y_, policy)
    elif isinstance(model, ClippedGaussian):
        if stream is not None:
            m_ = resample_endpoints(model, m_, stream)
        r = _clipped_logit_cdf(model, m_, y_, policy)
    elif isinstance(model, Poisson):
        r = _poisson_logit_cdf(m_, y_, policy)
    else:
        raise TypeError(f"unknown noise model {model!r}")
    return _ret(r, scalar)


def _gaussian_logit_cdf(model: Gaussian, m, yhat, policy) -> np.ndarray:
    z = (m - yhat) / model.sigma
    tau = policy.gaussian_z_threshold
    zabs = np.abs(z)
    safe = np.where(zabs > tau, 0.0, z)
    central = np.log(gauss_cdf(safe)) - np.log(gauss_cdf(-safe))
    tail = np.sign(z) * logit_gauss_upper_tail(np.where(zabs > tau, zabs, tau))
    return np.where(zabs > tau, tail, central)


def _poisson_logit_cdf(m, yhat, policy) -> np.ndarray:
    if np.any(m < 0):
        raise ValueError("Poisson measurements must be nonnegative")
    q = np.maximum(yhat, _POISSON_RATE_FLOOR)
    p, s = reg_gamma_pq(m + 1.0, q)
    eps = policy.poisson_s_threshold
    r = np.empty_like(q)
    left = s <= eps
    right = s >= 1.0 - eps
    central = ~(left | right)
    if np.any(central):
        r[central] = np.log(s[central]) - np.log(p[central])
    if np.any(left):
        r[left] = _poisson_left_tail(m[left], q[left])[0]
    if np.any(right):
        r[right] = _poisson_right_tail(m[right], q[right])[0]
    return r


def _poisson_left_tail(m, q):
    """log-space CDF for yhat >> m: ln s = ln pmf(m) + ln sum_j m!/(m-j)!/q^j.

    For integer m the correction sum is finite and exact; for real m it is
    the asymptotic continuation, truncated when terms stop decreasing.
    Returns (r, dr/dq).
    """
    term = np.ones_like(q)
    total = np.ones_like(q)
    weighted = np.zeros_like(q)  # sum of j * t_j, for the derivative
    active = m >= 1.0
    j = 0
    while np.any(active) and j < _MAX_TAIL_TERMS:
        j += 1
        new = term * (m - (j - 1)) / q
        keep = active & (np.abs(new) < np.abs(term))  # asymptotic: stop if terms grow
        term = np.where(keep, new, term)
        total = np.where(keep, total + new, total)
        weighted = np.where(keep, weighted + j * new, weighted)
        active = keep & (j < m) & (np.abs(new) >= np.abs(total) * 1e-17)
    r = m * np.log(q) - q - gammaln(m + 1.0) + np.log(total)
    dr = m / q - 1.0 - weighted / (q * total)
    return r, dr


def _poisson_right_tail(m, q):
    """-log of the lower Gamma tail for yhat << m; returns (r, dr/dq)."""
    term = np.ones_like(q)
    total = np.ones_like(q)
    weighted = np.zeros_like(q)
    active = np.ones(q.shape, dtype=bool)
    n = 0
    while np.any(active) and n < _MAX_TAIL_TERMS:
        n += 1
        term = np.where(active, term * q / (m + 1.0 + n), term)
        total = np.where(active, total + term, total)
        weighted = np.where(active, weighted + n * term, weighted)
        active = active & (np.abs(term) >= np.abs(total) * 1e-17)
    log_p = (m + 1.0) * np.log(q) - q - gammaln(m + 2.0) + np.log(total)
    r = -log_p
    dr = -((m + 1.0) / q - 1.0 + weighted / (q * total))
    return r, dr


def _clipped_score_pair(model: ClippedGaussian, m, yhat):
    """(s, 1 - s, z) with both probabilities computed directly per region,
    so neither loses precision near saturation."""
    eps = model.ramp_eps
    sig = model.sigma
    z = (m - yhat) / sig
    z_lo = (eps - yhat) / sig
    z_hi = (1.0 - eps - yhat) / sig
    s = gauss_cdf(z)
    comp = gauss_cdf(-z)
    in_lo = m < eps
    in_hi = m > 1.0 - eps
    f_lo = m / eps
    s = np.where(in_lo, f_lo * gauss_cdf(z_lo), s)
    comp = np.where(in_lo, gauss_cdf(-z_lo) + gauss_cdf(z_lo) * (1.0 - f_lo), comp)
    f_hi = (m - (1.0 - eps)) / eps
    s = np.where(in_hi, gauss_cdf(z_hi) + f_hi * gauss_cdf(-z_hi), s)
    comp = np.where(in_hi, (1.0 - f_hi) * gauss_cdf(-z_hi), comp)
    return s, comp, z


def _clipped_logit_cdf(model: ClippedGaussian, m, yhat, policy) -> np.ndarray:
    s, comp, z = _clipped_score_pair(model, m, yhat)
    left, right = _clipped_tail_masks(s, comp, z, policy)
    r = np.log(np.maximum(s, model.hard_eps)) - np.log(np.maximum(comp, model.hard_eps))
    if np.any(left):
        r[left] = -logit_gauss_upper_tail(-z[left])
    if np.any(right):
        r[right] = logit_gauss_upper_tail(z[right])
    return r


def _clipped_tail_masks(s, comp, z, policy):
    # The Gaussian tail formula is only meaningful when the score saturated
    # because the measurement sits far out in the Gaussian, not because the
    # boundary ramp scaled it down; require a sign-consistent |z| > 1.
    delta = policy.clipped_delta
    left = (s < delta) & (z < -1.0)
    right = (comp < delta) & (z > 1.0)
    return left, right


# ---------------------------------------------------------------------------
# d logit(CDF) / d yhat
# ---------------------------------------------------------------------------

def dlogit_dyhat(model: NoiseModel, m, yhat, policy: TailPolicy = DEFAULT_POLICY):
    """Exact derivative of logit_cdf w.r.t. the predicted mean, per branch.

    For the clipped Gaussian, ``m`` must be the same (already resampled)
    measurements used in the forward pass.
    """
    (m_, y_), scalar = _as_float_arrays(m, yhat)
    if isinstance(model, Gaussian):
        g = _gaussian_dlogit(model, m_, y_, policy)
    elif isinstance(model, ClippedGaussian):
        g = _clipped_dlogit(model, m_, y_, policy)
    elif isinstance(model, Poisson):
        g = _poisson_dlogit(m_, y_, policy)
    else:
        raise TypeError(f"unknown noise model {model!r}")
    return _ret(g, scalar)


def _gaussian_dlogit(model: Gaussian, m, yhat, policy) -> np.ndarray:
    z = (m - yhat) / model.sigma
    tau = policy.gaussian_z_threshold
    zabs = np.abs(z)
    safe = np.where(zabs > tau, 0.0, z)
    central = -gauss_pdf(safe) / (model.sigma * gauss_cdf(safe) * gauss_cdf(-safe))
    tail = -dlogit_gauss_upper_tail_dz(np.where(zabs > tau, zabs, tau)) / model.sigma
    return np.where(zabs > tau, tail, central)


def _poisson_dlogit(m, yhat, policy) -> np.ndarray:
    if np.any(m < 0):
        raise ValueError("Poisson measurements must be nonnegative")
    q = np.maximum(yhat, _POISSON_RATE_FLOOR)
    p, s = reg_gamma_pq(m + 1.0, q)
    eps = policy.poisson_s_threshold
    g = np.empty_like(q)
    left = s <= eps
    right = s >= 1.0 - eps
    central = ~(left | right)
    if np.any(central):
        # ds/dq = -Gamma(m+1) density = -pmf(m | q)
        dens = np.exp(gamma_logpdf(q[central], m[central] + 1.0))
        g[central] = -dens / (s[central] * p[central])
    if np.any(left):
        g[left] = _poisson_left_tail(m[left], q[left])[1]
    if np.any(right):
        g[right] = _poisson_right_tail(m[right], q[right])[1]
    # the rate floor freezes the score for nonpositive predictions
    return np.where(yhat > _POISSON_RATE_FLOOR, g, 0.0)


def _clipped_dlogit(model: ClippedGaussian, m, yhat, policy) -> np.ndarray:
    eps = model.ramp_eps
    sig = model.sigma
    s, comp, z = _clipped_score_pair(model, m, yhat)
    left, right = _clipped_tail_masks(s, comp, z, policy)

    ds = -gauss_pdf(z) / sig
    ds = np.where(m < eps, (m / eps) * (-gauss_pdf((eps - yhat) / sig) / sig), ds)
    ds = np.where(
        m > 1.0 - eps,
        (1.0 - (m - (1.0 - eps)) / eps) * (-gauss_pdf((1.0 - eps - yhat) / sig) / sig),
        ds,
    )
    clamped = (s < model.hard_eps) | (comp < model.hard_eps)
    g = np.where(clamped, 0.0, ds / np.maximum(s * comp, np.finfo(float).tiny))
    zabs = np.where(left | right, np.abs(z), 2.0)
    g_tail = -dlogit_gauss_upper_tail_dz(zabs) / sig
    return np.where(left | right, g_tail, g)


# ---------------------------------------------------------------------------
# Sampling and the randomized probability integral transform
# ---------------------------------------------------------------------------

def sample(model: NoiseModel, yhat, stream: RngStream) -> np.ndarray:
    """One noise realization of the measurements for predicted means yhat."""
    yhat = np.atleast_1d(np.asarray(yhat, dtype=float))
    if isinstance(model, Gaussian):
        return stream.sample_gaussian(yhat, model.sigma)
    if isinstance(model, ClippedGaussian):
        return np.clip(stream.sample_gaussian(yhat, model.sigma), 0.0, 1.0)
    if isinstance(model, Poisson):
        return stream.sample_poisson(yhat)
    raise TypeError(f"unknown noise model {model!r}")


def resample_endpoints(model: ClippedGaussian, m, stream: RngStream) -> np.ndarray:
    """Replace exact 0/1 measurements by uniform draws inside the ramps.

    Consumes one uniform per element regardless of the endpoint pattern, so
    the pairing between forward and gradient passes is reproducible.
    """
    m = np.array(np.atleast_1d(np.asarray(m, dtype=float)), copy=True)
    u = stream.sample_uniform(m.size).reshape(m.shape)
    eps = model.ramp_eps
    m[m == 0.0] = u[m == 0.0] * eps
    m[m == 1.0] = 1.0 - eps + u[m == 1.0] * eps
    return m


def randomized_pit(model: Poisson, m, yhat, stream: RngStream):
    """Randomized PIT for Poisson counts: s = F(m-1 | yhat) + U * pmf(m | yhat).

    Exactly Uniform[0,1] when m ~ Poisson(yhat); strictly inside (0,1).
    """
    if not isinstance(model, Poisson):
        raise TypeError("randomized_pit applies to the Poisson model only")
    (m_, y_), scalar = _as_float_arrays(m, yhat)
    if np.any(m_ < 0):
        raise ValueError("Poisson measurements must be nonnegative")
    q = np.maximum(y_, 0.0)
    f_prev = np.zeros_like(q)
    pos = m_ >= 1.0
    if np.any(pos):
        _, f_prev_pos = reg_gamma_pq(m_[pos], q[pos])
        f_prev[pos] = f_prev_pos
    qpos = q > 0
    pmf = np.where(m_ == 0.0, 1.0, 0.0)
    if np.any(qpos):
        pmf[qpos] = np.exp(poisson_logpmf(m_[qpos], q[qpos]))
    u = stream.sample_uniform(m_.size).reshape(m_.shape)
    s = f_prev + u * pmf
    eps = np.finfo(float).eps
    return _ret(np.clip(s, eps, 1.0 - eps), scalar)
