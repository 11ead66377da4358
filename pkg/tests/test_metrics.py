import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcloss.metrics import cdf_histogram, nrmse, psnr
from dcloss.rng import RngStream


def test_nrmse_examples():
    x = np.array([1.0, 2.0, 3.0])
    assert nrmse(x, x) == 0.0
    assert nrmse(2 * x, x) == pytest.approx(1.0, rel=1e-14)
    assert nrmse(np.zeros(3), x) == pytest.approx(1.0, rel=1e-14)


def test_nrmse_errors():
    with pytest.raises(ValueError):
        nrmse(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        nrmse(np.zeros(3), np.zeros(4))


def test_nrmse_permutation_invariance():
    rng = np.random.default_rng(0)
    a = rng.normal(size=50)
    b = rng.normal(size=50)
    perm = rng.permutation(50)
    assert nrmse(a[perm], b[perm]) == pytest.approx(nrmse(a, b), rel=1e-14)


def test_psnr_examples():
    x = np.zeros(4)
    assert psnr(x + 1.0, x, peak=1.0) == pytest.approx(0.0, abs=1e-12)
    y = np.zeros(100)
    assert psnr(y + 0.1, y, peak=1.0) == pytest.approx(20.0, rel=1e-12)
    assert psnr(y, y) == math.inf


def test_psnr_validation():
    with pytest.raises(ValueError):
        psnr(np.zeros(3), np.zeros(3), peak=0.0)


def test_histogram_bin_rule():
    h = cdf_histogram([0.1, 0.5, 0.9], 2)
    assert list(h.counts) == [1, 2]
    assert h.total == 3


def test_histogram_uniform_concentration():
    s = RngStream(1).sample_uniform(10 ** 6)
    h = cdf_histogram(s, 20)
    expected = 10 ** 6 / 20
    assert np.all(np.abs(h.counts - expected) < 0.05 * expected)


def test_histogram_overfit_spike():
    h = cdf_histogram(np.full(1000, 0.5), 20)
    assert h.counts[10] == 1000
    assert h.counts.sum() == 1000


def test_histogram_top_edge_closed():
    h = cdf_histogram([0.0, 1.0], 4)
    assert h.counts[0] == 1 and h.counts[-1] == 1


def test_histogram_validation():
    with pytest.raises(ValueError):
        cdf_histogram([0.5], 1)
    with pytest.raises(ValueError):
        cdf_histogram([1.5], 4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=200), st.integers(2, 30))
def test_histogram_total_matches_input(values, bins):
    assert cdf_histogram(values, bins).total == len(values)
