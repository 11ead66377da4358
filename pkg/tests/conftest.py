"""Shared fixtures.  The experiment fixtures are session-scoped because the
full-scale runs are the expensive part of the suite; acceptance and
trajectory-property tests read from the same artifacts."""

import numpy as np
import pytest

from dcloss import harness
from dcloss.harness import ExperimentSpec


@pytest.fixture(scope="session")
def deconv_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("deconv_full")
    summary = harness.run_deconv(
        ExperimentSpec(experiment="deconv", out_dir=str(out), seed=0)
    )
    return out, summary


@pytest.fixture(scope="session")
def tomo_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tomo_full")
    summary = harness.run_tomo(
        ExperimentSpec(experiment="tomo", out_dir=str(out), seed=0)
    )
    return out, summary


@pytest.fixture(scope="session")
def regsweep_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("regsweep")
    betas = (0.0,) + tuple(np.logspace(-4, 2, 19))  # 3 per decade
    summary = harness.run_regsweep(
        ExperimentSpec(experiment="regsweep", out_dir=str(out), seed=0, betas=betas)
    )
    return out, summary


@pytest.fixture(scope="session")
def bench_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    summary = harness.run_bench(
        ExperimentSpec(experiment="bench", out_dir=str(out), seed=0, iterations=5)
    )
    return out, summary


def read_trajectory(path):
    import csv

    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {key: np.array([float(r[key]) for r in rows])
            for key in rows[0].keys()}
