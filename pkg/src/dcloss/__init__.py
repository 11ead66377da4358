"""Distributional-consistency data-fidelity loss and experiment tooling."""

from .losses import (
    LossEval,
    ReferenceMode,
    ScoreVector,
    dc_loss,
    mse_loss,
    pit_scores,
    poisson_nll,
    wasserstein1_sorted,
)
from .metrics import Histogram, cdf_histogram, nrmse, psnr
from .noise import (
    DEFAULT_POLICY,
    ClippedGaussian,
    Gaussian,
    Poisson,
    TailPolicy,
    cdf,
    dlogit_dyhat,
    logit_cdf,
    randomized_pit,
    resample_endpoints,
    sample,
)
from .operators import (
    Conv1D,
    ForwardOp,
    Identity,
    Kernel1D,
    ParallelBeam,
    ProjectorGeometry,
    gaussian_kernel,
)
from .optim import AdamState, OptRun, Problem, RunConfig, adam_step, mlem_step, run, support_mask
from .regularizers import eptv, tv
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ClippedGaussian",
    "Conv1D",
    "DEFAULT_POLICY",
    "ForwardOp",
    "Gaussian",
    "Histogram",
    "Identity",
    "Kernel1D",
    "LossEval",
    "OptRun",
    "ParallelBeam",
    "Poisson",
    "Problem",
    "ProjectorGeometry",
    "ReferenceMode",
    "RngStream",
    "RunConfig",
    "ScoreVector",
    "TailPolicy",
    "adam_step",
    "cdf",
    "cdf_histogram",
    "dc_loss",
    "dlogit_dyhat",
    "eptv",
    "gaussian_kernel",
    "logit_cdf",
    "mlem_step",
    "mse_loss",
    "nrmse",
    "pit_scores",
    "poisson_nll",
    "psnr",
    "randomized_pit",
    "resample_endpoints",
    "run",
    "sample",
    "support_mask",
    "tv",
    "wasserstein1_sorted",
]
