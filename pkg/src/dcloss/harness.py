"""Experiment harness: configures runs, executes them, writes artifacts.

Every experiment is a pure function of (spec, seed) up to wall-clock
timings: CSV and JSON numeric content reproduces bit-identically for a
fixed spec.  Random streams are keyed per purpose so methods sharing a seed
see identical noise realizations and identical per-iteration references.

Artifacts per run directory:
  trajectory_<method>.csv   iteration, dc, mse_or_nll, nrmse, psnr
  hist_<case>.csv           bin_lo, bin_hi, count
  image_<method>_<iter>.pgm 16-bit ASCII PGM snapshots (2-D problems)
  summary.json              spec echo, final/min metrics, runtime seconds
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import imageio, losses, metrics, noise, optim, regularizers
from .losses import ReferenceMode
from .noise import Gaussian, Poisson
from .operators import (
    Conv1D,
    ParallelBeam,
    ProjectorGeometry,
    gaussian_kernel,
    restrict_rows,
)
from .optim import Problem, RunConfig, support_mask
from .rng import RngStream
from .special import logit

# stream-key tags (seed, tag, ...) reserved by the harness
_NOISE = 0
_CAL_NOISE = 2
_CAL_TRUTH = 3
_CAL_NOISY = 4
_BENCH = 5
_TRUTH_DC = 6

_HIST_BINS = 20


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce one experiment run."""

    experiment: str                      # deconv | tomo | calibrate | regsweep | bench
    out_dir: str = "out"
    seed: int = 0
    n: int = 500                         # deconv / calibrate sample count
    sigma: float = 0.1                   # Gaussian noise level
    counts_scale: float = 1.0            # Poisson dose multiplier
    iterations: int | None = None        # None -> experiment default
    lr: float | None = None
    betas: tuple | None = None           # regsweep grid; None -> default grid
    loss: str | None = None              # restrict to one method where applicable
    ref_mode: ReferenceMode = ReferenceMode.FRESH_SAMPLE
    use_randomized_pit: bool = False
    model: str = "gaussian"              # calibrate: gaussian | poisson
    n_side: int = 64
    n_angles: int = 60
    n_bins: int = 95
    repeats: int = 100                   # calibrate repetitions

    def resolved(self) -> "ExperimentSpec":
        defaults = {
            "deconv": (20000, 5e-3),
            "tomo": (2000, 2.5e-3),
            "regsweep": (1000, 2.5e-3),
            "calibrate": (1, 1e-3),
            "bench": (1000, 1e-3),       # iterations = timing repetitions
        }
        if self.experiment not in defaults:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        iters, lr = defaults[self.experiment]
        return replace(
            self,
            iterations=self.iterations if self.iterations is not None else iters,
            lr=self.lr if self.lr is not None else lr,
        )


# ---------------------------------------------------------------------------
# Signals and phantoms
# ---------------------------------------------------------------------------

def deconv_signal(n: int):
    """Two-tone test signal sin(10 pi x) + 0.5 sin(40 pi x) on [0, 1]."""
    x = np.linspace(0.0, 1.0, n)
    return x, np.sin(10 * np.pi * x) + 0.5 * np.sin(40 * np.pi * x)


def tomo_phantom(n_side: int) -> np.ndarray:
    """Piecewise-constant phantom: nested ellipses plus two hot lesions."""
    c = (np.arange(n_side) + 0.5) / n_side * 2.0 - 1.0
    xx, yy = np.meshgrid(c, -c)  # row 0 at the top
    img = np.zeros((n_side, n_side))

    def ellipse(cx, cy, ax, ay):
        return ((xx - cx) / ax) ** 2 + ((yy - cy) / ay) ** 2 <= 1.0

    img[ellipse(0.0, 0.0, 0.85, 0.70)] = 1.0
    img[ellipse(-0.08, 0.05, 0.50, 0.42)] = 2.0
    img[ellipse(0.15, -0.10, 0.22, 0.30)] = 3.0
    img[ellipse(-0.35, 0.32, 0.08, 0.08)] = 5.0
    img[ellipse(0.30, -0.42, 0.06, 0.06)] = 4.0
    return img


# ---------------------------------------------------------------------------
# Artifact writers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    return repr(float(v))


def _write_trajectory(path: Path, run: optim.OptRun, use_nll: bool) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,dc,mse_or_nll,nrmse,psnr\n")
        fit = run.nll if use_nll else run.mse
        for i in range(run.iterations):
            fh.write(f"{i + 1},{_fmt(run.dc[i])},{_fmt(fit[i])},"
                     f"{_fmt(run.nrmse[i])},{_fmt(run.psnr[i])}\n")


def _write_hist(path: Path, hist: metrics.Histogram) -> None:
    with open(path, "w") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for lo, hi, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            fh.write(f"{_fmt(lo)},{_fmt(hi)},{int(c)}\n")


def _spec_echo(spec: ExperimentSpec) -> dict:
    d = asdict(spec)
    d["ref_mode"] = spec.ref_mode.value
    if d["betas"] is not None:
        d["betas"] = [float(b) for b in d["betas"]]
    return d


def _write_summary(out: Path, payload: dict) -> None:
    with open(out / "summary.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _series_stats(values: np.ndarray) -> dict:
    values = np.asarray(values, dtype=float)
    i = int(np.nanargmin(values))
    return {"final": float(values[-1]), "min": float(values[i]), "argmin_iteration": i + 1}


def _method_summary(run: optim.OptRun, use_nll: bool) -> dict:
    out = {
        "dc": _series_stats(run.dc),
        "nrmse": _series_stats(run.nrmse),
        ("nll" if use_nll else "mse"): _series_stats(run.nll if use_nll else run.mse),
    }
    return out


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def run_deconv(spec: ExperimentSpec) -> dict:
    """Gaussian-blur 1-D deconvolution: MSE-trained vs DC-trained Adam."""
    spec = spec.resolved()
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    x_axis, theta_star = deconv_signal(spec.n)
    op = Conv1D(gaussian_kernel(1.0, 15), spec.n)
    y_true = op.apply(theta_star)
    model = Gaussian(spec.sigma)
    root = RngStream(spec.seed)
    m = noise.sample(model, y_true, root.child(_NOISE))

    problem = Problem(op=op, model=model, measurements=m, ground_truth=theta_star,
                      initial=np.zeros(spec.n), psnr_peak=float(np.max(np.abs(theta_star))))
    methods = [spec.loss] if spec.loss else ["mse", "dc"]
    runs: dict[str, optim.OptRun] = {}
    for method in methods:
        cfg = RunConfig(loss=method, iterations=spec.iterations, lr=spec.lr,
                        seed=spec.seed, ref_mode=spec.ref_mode)
        runs[method] = optim.run(cfg, problem)
        _write_trajectory(out / f"trajectory_{method}.csv", runs[method], use_nll=False)
        scores = losses.pit_scores(model, m, op.apply(runs[method].final_params))
        _write_hist(out / f"hist_{method}.csv", metrics.cdf_histogram(scores.s, _HIST_BINS))

    with open(out / "signals.csv", "w") as fh:
        cols = ["x", "theta_true", "blurred_true", "measured"]
        cols += [f"recon_{k}" for k in runs] + [f"reblurred_{k}" for k in runs]
        fh.write(",".join(cols) + "\n")
        reblur = {k: op.apply(r.final_params) for k, r in runs.items()}
        for i in range(spec.n):
            row = [x_axis[i], theta_star[i], y_true[i], m[i]]
            row += [runs[k].final_params[i] for k in runs]
            row += [reblur[k][i] for k in runs]
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    summary = {
        "spec": _spec_echo(spec),
        "methods": {k: _method_summary(r, use_nll=False) for k, r in runs.items()},
        "signal_error_l2": {
            k: float(np.linalg.norm(r.final_params - theta_star)) for k, r in runs.items()
        },
        "runtime_seconds": time.perf_counter() - t0,
    }
    _write_summary(out, summary)
    return summary


def _tomo_setup(spec: ExperimentSpec, counts_scale: float):
    geom = ProjectorGeometry(n_side=spec.n_side, n_angles=spec.n_angles,
                             n_bins=spec.n_bins)
    full_op = ParallelBeam(geom)
    phantom = tomo_phantom(spec.n_side) * counts_scale
    # keep only rays that intersect the phantom (zero-rate rays carry no
    # information and pin their probability scores at 1)
    rates_full = full_op.apply(phantom)
    op = restrict_rows(full_op, rates_full > 0)
    rates = rates_full[rates_full > 0]
    root = RngStream(spec.seed)
    m = root.child(_NOISE).sample_poisson(rates).astype(float)
    xstar = phantom.ravel()
    init = np.full(xstar.size, xstar[xstar > 0].mean())
    mask = support_mask(phantom, dilation=2).ravel()
    problem = Problem(op=op, model=Poisson(), measurements=m, ground_truth=xstar,
                      initial=init, image_shape=phantom.shape,
                      psnr_peak=float(phantom.max()))
    return op, phantom, rates, m, mask, problem


def _dc_at_truth(rates, m_stream_root, n_evals: int = 20) -> float:
    """Mean DC loss of the true rates against fresh Poisson draws."""
    vals = []
    for j in range(n_evals):
        m_j = m_stream_root.child(_TRUTH_DC, j, 0).sample_poisson(rates).astype(float)
        ev = losses.dc_loss(Poisson(), m_j, rates,
                            stream=m_stream_root.child(_TRUTH_DC, j, 1))
        vals.append(ev.value)
    return float(np.mean(vals))


def run_tomo(spec: ExperimentSpec) -> dict:
    """Toy tomographic reconstruction: NLL-Adam vs DC-Adam vs MLEM."""
    spec = spec.resolved()
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    op, phantom, rates, m, mask, problem = _tomo_setup(spec, spec.counts_scale)
    root = RngStream(spec.seed)

    imageio.write_pgm(out / "image_truth.pgm", phantom)
    imageio.write_flat_csv(out / "image_truth.csv", phantom)
    method_cfgs = {
        "nll": RunConfig(loss="nll", iterations=spec.iterations, lr=spec.lr,
                         seed=spec.seed, mask=mask, precondition=True,
                         final_relu=True, ref_mode=spec.ref_mode),
        "dc": RunConfig(loss="dc", iterations=spec.iterations, lr=spec.lr,
                        seed=spec.seed, mask=mask, precondition=True,
                        final_relu=True, ref_mode=spec.ref_mode),
        "mlem": RunConfig(loss="nll", optimizer="mlem", iterations=spec.iterations,
                          seed=spec.seed, final_relu=True, ref_mode=spec.ref_mode),
    }
    if spec.loss:
        method_cfgs = {spec.loss: method_cfgs[spec.loss]}

    runs: dict[str, optim.OptRun] = {}
    for name, cfg in method_cfgs.items():
        runs[name] = optim.run(cfg, problem)
        _write_trajectory(out / f"trajectory_{name}.csv", runs[name], use_nll=True)
        for it, snap in sorted(runs[name].snapshots.items()):
            imageio.write_pgm(out / f"image_{name}_{it}.pgm",
                              snap.reshape(problem.image_shape))
        final_rates = op.apply(runs[name].final_params)
        scores = losses.pit_scores(Poisson(), m, np.maximum(final_rates, 0.0))
        _write_hist(out / f"hist_{name}.csv", metrics.cdf_histogram(scores.s, _HIST_BINS))

    summary = {
        "spec": _spec_echo(spec),
        "methods": {k: _method_summary(r, use_nll=True) for k, r in runs.items()},
        "dc_at_truth_mean": _dc_at_truth(rates, root),
        "total_counts": float(m.sum()),
        "runtime_seconds": time.perf_counter() - t0,
    }
    _write_summary(out, summary)
    return summary


def run_calibrate(spec: ExperimentSpec) -> dict:
    """DC loss and CDF histograms at the truth vs at the noisy prediction."""
    spec = spec.resolved()
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    _, theta = deconv_signal(spec.n)
    if spec.model == "gaussian":
        model = Gaussian(spec.sigma)
        signal = Conv1D(gaussian_kernel(1.0, 15), spec.n).apply(theta)
    elif spec.model == "poisson":
        model = Poisson()
        signal = spec.counts_scale * (2.0 + theta)
    else:
        raise ValueError(f"unknown calibrate model {spec.model!r}")

    root = RngStream(spec.seed)
    dc_truth, dc_noisy = [], []
    hist_truth = np.zeros(_HIST_BINS, dtype=np.int64)
    hist_noisy = np.zeros(_HIST_BINS, dtype=np.int64)
    edges = np.linspace(0.0, 1.0, _HIST_BINS + 1)
    for j in range(spec.repeats):
        m_j = noise.sample(model, signal, root.child(_CAL_NOISE, j))
        for case, yhat, bucket, accum in (
            ("truth", signal, dc_truth, hist_truth),
            ("noisy", m_j.astype(float), dc_noisy, hist_noisy),
        ):
            tag = _CAL_TRUTH if case == "truth" else _CAL_NOISY
            if isinstance(model, Poisson) and spec.use_randomized_pit:
                # exact-uniformity variant for discrete counts (opt-in)
                s = noise.randomized_pit(model, m_j, yhat, root.child(tag, j, 2))
                r = logit(s)
                u = losses.reference_scores(spec.ref_mode, r.size,
                                            root.child(tag, j))
                value = losses.wasserstein1_sorted(r, u)[0]
            else:
                s = noise.cdf(model, m_j, yhat)
                value = losses.dc_loss(model, m_j, yhat, spec.ref_mode,
                                       stream=root.child(tag, j)).value
            bucket.append(value)
            accum += np.histogram(s, bins=edges)[0]

    for name, accum in (("truth", hist_truth), ("noisy", hist_noisy)):
        _write_hist(out / f"hist_{name}.csv",
                    metrics.Histogram(edges=edges, counts=accum))

    def stats(vals):
        vals = np.asarray(vals)
        return {"mean": float(vals.mean()),
                "ci95": float(1.96 * vals.std(ddof=1)) if vals.size > 1 else 0.0}

    summary = {
        "spec": _spec_echo(spec),
        "dc_loss": {"truth": stats(dc_truth), "noisy": stats(dc_noisy)},
        "runtime_seconds": time.perf_counter() - t0,
    }
    _write_summary(out, summary)
    return summary


def default_beta_grid() -> tuple:
    """beta = 0 plus 10 log-spaced values per decade over [1e-4, 1e2]."""
    return (0.0,) + tuple(np.logspace(-4, 2, 61))


def run_regsweep(spec: ExperimentSpec) -> dict:
    """DC+TV vs NLL+TV over a regularization-strength grid at 4x lower counts."""
    spec = spec.resolved()
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    betas = tuple(spec.betas) if spec.betas is not None else default_beta_grid()
    if len(betas) == 0:
        raise ValueError("regsweep needs a nonempty beta grid")

    op, phantom, rates, m, mask, problem = _tomo_setup(spec, 0.25 * spec.counts_scale)
    results: dict[str, list] = {"dc": [], "nll": []}
    best: dict[str, tuple] = {}
    methods = [spec.loss] if spec.loss in ("dc", "nll") else ["dc", "nll"]
    for method in methods:
        for beta in betas:
            cfg = RunConfig(loss=method, iterations=spec.iterations, lr=spec.lr,
                            seed=spec.seed, mask=mask, precondition=True,
                            beta=float(beta), regularizer="eptv",
                            final_relu=True, ref_mode=spec.ref_mode)
            r = optim.run(cfg, problem)
            final = r.final_params
            err = metrics.nrmse(final, problem.ground_truth)
            penalty = regularizers.eptv(final.reshape(problem.image_shape))[0]
            final_rates = np.maximum(op.apply(final), 0.0)
            dc_val = losses.dc_loss(Poisson(), m, final_rates,
                                    stream=RngStream(spec.seed).child(_TRUTH_DC, 999)).value
            nll_val = optim._nll_guarded(final_rates, m, 0.0)[0]
            results[method].append((beta, err, penalty, dc_val, nll_val))
            if method not in best or err < best[method][1]:
                best[method] = (beta, err, final.copy())
        with open(out / f"sweep_{method}.csv", "w") as fh:
            fh.write("beta,nrmse,penalty,dc,nll\n")
            for row in results[method]:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        imageio.write_pgm(out / f"image_{method}_best.pgm",
                          best[method][2].reshape(problem.image_shape))

    summary = {
        "spec": _spec_echo(spec),
        "betas": [float(b) for b in betas],
        "argmin_beta": {k: float(best[k][0]) for k in best},
        "min_nrmse": {k: float(best[k][1]) for k in best},
        "nrmse_at_beta0": {
            k: next((row[1] for row in results[k] if row[0] == 0.0), None)
            for k in methods
        },
        "runtime_seconds": time.perf_counter() - t0,
    }
    _write_summary(out, summary)
    return summary


def run_bench(spec: ExperimentSpec) -> dict:
    """Timing of DC vs pointwise losses on shared uniform input pairs."""
    spec = spec.resolved()
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    reps = spec.iterations
    root = RngStream(spec.seed)

    def timed(fn):
        fn()  # warm-up, also captures the deterministic value
        value = fn()
        times = np.empty(reps)
        for i in range(reps):
            t = time.perf_counter()
            fn()
            times[i] = time.perf_counter() - t
        return float(np.mean(times)), float(np.std(times)), float(np.asarray(value).sum())

    rows = []
    for size in (1000, 1000000):
        u1 = root.child(_BENCH, size, 0).sample_uniform(size)
        u2 = root.child(_BENCH, size, 1).sample_uniform(size)
        ref = root.child(_BENCH, size, 2).sample_logistic(size)
        gauss = Gaussian(spec.sigma)
        pois = Poisson()

        def dc_forward(model):
            def fn():
                r = noise.logit_cdf(model, u1, u2)
                return losses.wasserstein1_sorted(r, ref)[0]
            return fn

        def dc_grad(model):
            def fn():
                r = noise.logit_cdf(model, u1, u2)
                _, sub = losses.wasserstein1_sorted(r, ref)
                return sub * noise.dlogit_dyhat(model, u1, u2)
            return fn

        cases = [
            ("gaussian", "forward", "dc", dc_forward(gauss)),
            ("gaussian", "forward", "mse", lambda: losses.mse_loss(u2, u1).value),
            ("gaussian", "gradient", "dc", dc_grad(gauss)),
            ("gaussian", "gradient", "mse", lambda: losses.mse_loss(u2, u1).grad_yhat),
            ("poisson", "forward", "dc", dc_forward(pois)),
            ("poisson", "forward", "nll", lambda: losses.poisson_nll(u2, u1).value),
            ("poisson", "gradient", "dc", dc_grad(pois)),
            ("poisson", "gradient", "nll", lambda: losses.poisson_nll(u2, u1).grad_yhat),
        ]
        for noise_kind, pass_kind, loss_kind, fn in cases:
            mean, sd, value = timed(fn)
            rows.append((size, noise_kind, pass_kind, loss_kind, mean, sd, value))

    with open(out / "bench.csv", "w") as fh:
        fh.write("size,noise,pass,loss,mean_seconds,sd_seconds,value\n")
        for size, nk, pk, lk, mean, sd, value in rows:
            fh.write(f"{size},{nk},{pk},{lk},{_fmt(mean)},{_fmt(sd)},{_fmt(value)}\n")

    summary = {
        "spec": _spec_echo(spec),
        "rows": [
            {"size": size, "noise": nk, "pass": pk, "loss": lk,
             "mean_seconds": mean, "sd_seconds": sd, "value": value}
            for size, nk, pk, lk, mean, sd, value in rows
        ],
        "runtime_seconds": time.perf_counter() - t0,
    }
    _write_summary(out, summary)
    return summary


_RUNNERS = {
    "deconv": run_deconv,
    "tomo": run_tomo,
    "calibrate": run_calibrate,
    "regsweep": run_regsweep,
    "bench": run_bench,
}


def run_experiment(spec: ExperimentSpec) -> dict:
    return _RUNNERS[spec.resolved().experiment](spec)
