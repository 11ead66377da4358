import numpy as np
import pytest

from dcloss.operators import (
    Conv1D,
    Identity,
    Kernel1D,
    ParallelBeam,
    ProjectorGeometry,
    gaussian_kernel,
    restrict_rows,
)


def _ops():
    rng = np.random.default_rng(0)
    return [
        ("identity", Identity(37)),
        ("conv", Conv1D(gaussian_kernel(1.5, 7), 64)),
        ("parallel_beam", ParallelBeam(ProjectorGeometry(16, 12, 23))),
    ]


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def test_gaussian_kernel_reference_shape():
    k = gaussian_kernel(1.0, 15)
    assert k.taps.size == 31
    assert k.taps.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(k.taps, k.taps[::-1])


def test_gaussian_kernel_degenerate_sigma_is_delta():
    k = gaussian_kernel(1e-6, 5)
    expected = np.zeros(11)
    expected[5] = 1.0
    assert np.allclose(k.taps, expected, atol=1e-12)


def test_gaussian_kernel_validation():
    with pytest.raises(ValueError):
        gaussian_kernel(0.0, 5)
    with pytest.raises(ValueError):
        gaussian_kernel(1.0, 0)
    with pytest.raises(ValueError):
        Kernel1D(taps=np.array([0.5, 0.5]))  # even length
    with pytest.raises(ValueError):
        Kernel1D(taps=np.array([0.2, 0.5, 0.2]))  # not normalized


# ---------------------------------------------------------------------------
# apply / adjoint
# ---------------------------------------------------------------------------

def test_identity_roundtrip():
    op = Identity(5)
    x = np.arange(5.0)
    assert np.array_equal(op.apply(x), x)
    assert np.array_equal(op.adjoint(x), x)
    assert np.array_equal(op.sensitivity(), np.ones(5))


def test_conv_preserves_constants():
    op = Conv1D(gaussian_kernel(1.0, 15), 200)
    assert np.allclose(op.apply(np.full(200, 3.7)), 3.7, atol=1e-12)


def test_dimension_mismatch_raises():
    op = Conv1D(gaussian_kernel(1.0, 3), 10)
    with pytest.raises(ValueError):
        op.apply(np.zeros(11))
    with pytest.raises(ValueError):
        op.adjoint(np.zeros(11))


@pytest.mark.parametrize("name,op", _ops())
def test_adjoint_dot_product_identity(name, op):
    rng = np.random.default_rng(42)
    for _ in range(100):
        x = rng.normal(size=op.n_param)
        v = rng.normal(size=op.n_data)
        lhs = np.dot(op.apply(x), v)
        rhs = np.dot(x, op.adjoint(v))
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs), 1.0)


@pytest.mark.parametrize("name,op", _ops())
def test_linearity(name, op):
    rng = np.random.default_rng(1)
    x = rng.normal(size=op.n_param)
    y = rng.normal(size=op.n_param)
    combo = op.apply(2.5 * x - 1.25 * y)
    parts = 2.5 * op.apply(x) - 1.25 * op.apply(y)
    assert np.max(np.abs(combo - parts)) <= 1e-12 * max(1.0, np.max(np.abs(parts)))


@pytest.mark.parametrize("name,op", _ops())
def test_nonnegativity_preservation(name, op):
    rng = np.random.default_rng(2)
    x = rng.random(op.n_param)
    assert np.all(op.apply(x) >= 0.0)


# ---------------------------------------------------------------------------
# sensitivity
# ---------------------------------------------------------------------------

def test_conv_sensitivity_interior_is_one():
    op = Conv1D(gaussian_kernel(1.0, 15), 100)
    sens = op.sensitivity()
    assert np.allclose(sens[15:-15], 1.0, atol=1e-12)


def test_parallel_beam_sensitivity_positive_everywhere():
    op = ParallelBeam(ProjectorGeometry(64, 60, 95))
    assert np.all(op.sensitivity() > 0.0)


# ---------------------------------------------------------------------------
# projector geometry
# ---------------------------------------------------------------------------

def test_axis_aligned_ray_intersection_is_pixel_side():
    # vertical ray through the centers of one pixel column
    geom = ProjectorGeometry(n_side=2, n_angles=1, n_bins=4)
    op = ParallelBeam(geom)
    row = op._matrix[1].toarray().ravel()  # bin offset -0.5: left column
    hit = row[row > 0]
    assert hit.size == 2  # two pixels in the column
    assert np.allclose(hit, geom.pixel_size, atol=1e-12)


def test_rotated_rays_have_correct_total_length():
    # the total intersection length of a ray equals its chord through the grid
    geom = ProjectorGeometry(n_side=32, n_angles=8, n_bins=46)
    op = ParallelBeam(geom)
    ones = np.ones(geom.n_side ** 2)
    chords = op.apply(ones)
    half = geom.n_side * geom.pixel_size / 2.0
    offsets = (np.arange(geom.n_bins) - (geom.n_bins - 1) / 2.0) * geom.bin_size
    # angle 0: vertical rays, chord = full height wherever |t| < half
    inside = np.abs(offsets) < half - 1e-9
    assert np.allclose(chords[:geom.n_bins][inside], geom.n_side * geom.pixel_size,
                       atol=1e-9)
    assert np.allclose(chords[:geom.n_bins][~inside], 0.0, atol=1e-12)


def test_geometry_validation():
    with pytest.raises(ValueError):
        ProjectorGeometry(n_side=1, n_angles=4, n_bins=8)
    with pytest.raises(ValueError):
        ProjectorGeometry(n_side=64, n_angles=4, n_bins=64)  # diagonal uncovered


def test_restrict_rows():
    op = ParallelBeam(ProjectorGeometry(8, 4, 12))
    rng = np.random.default_rng(3)
    keep = rng.random(op.n_data) < 0.5
    sub = restrict_rows(op, keep)
    x = rng.random(op.n_param)
    assert np.array_equal(sub.apply(x), op.apply(x)[keep])
    v = rng.random(op.n_data)
    assert np.allclose(sub.adjoint(v[keep]),
                       op.adjoint(np.where(keep, v, 0.0)), atol=1e-12)
    with pytest.raises(ValueError):
        restrict_rows(op, np.zeros(op.n_data, dtype=bool))
    with pytest.raises(ValueError):
        restrict_rows(op, np.ones(3, dtype=bool))
