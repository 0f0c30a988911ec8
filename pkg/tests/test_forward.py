"""
Tests for sart.forward

- closed form circular means of the disc phantom
- discrete projector against the closed form
- refined-angle oracle, linearity and convergence in the number of angles
- noise model: determinism, streams, the zero level and its moments
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from sart.errors import ValidationError
from sart.forward import NoiseSpec, add_noise, forward, forward_analytic
from sart.grids import DataField, DataGrid, Disc, GaussianBlob, Image, ImageGrid, PhantomSpec, render_phantom


def test_disc_means_about_track_origin(ch2_phantom):
    dg = DataGrid.from_bounds(-2.0, 2.0, 60.0)
    data = forward_analytic(ch2_phantom, dg)
    col = data.values[:, 2]
    assert np.all(col[dg.r < 5] == 0.0)
    assert np.all(col[dg.r > 45] == 0.0)
    alpha = np.arccos((25.0 ** 2 + 25.0 ** 2 - 20.0 ** 2) / (2 * 25.0 * 25.0))
    assert_allclose(col[25], 20.0 * alpha / np.pi)


def test_disc_containing_circle():
    spec = PhantomSpec((Disc((0.0, 0.0), 10.0, 3.0),))
    dg = DataGrid.from_bounds(-1.0, 1.0, 20.0)
    data = forward_analytic(spec, dg, mirror=False)
    # circles about the centre of the disc lie inside it up to r = 10
    assert_allclose(data.values[:11, 1], 3.0)
    assert np.all(data.values[11:, 1] == 0.0)


def test_forward_matches_closed_form_for_blob():
    spec = PhantomSpec(blobs=(GaussianBlob((0.0, 30.0), 5.0, 1.0),))
    grid = ImageGrid(nx=129, ny=65, dx=1.0, dy=1.0, x0=-64.0, y0=0.0)
    dg = DataGrid.from_bounds(-20.0, 20.0, 40.0)
    numeric = forward(render_phantom(spec, grid), dg)
    exact = forward_analytic(spec, dg)
    err = np.linalg.norm(numeric.values - exact.values) / np.linalg.norm(exact.values)
    assert err < 2e-2
    assert numeric.meta['scene'] == 'half_plane'


def test_forward_full_plane_sees_even_part():
    grid = ImageGrid.symmetric(33, 16)
    values = np.zeros(grid.shape)
    values[20, 16] = 1.0
    img = Image(grid, values)
    dg = DataGrid.from_bounds(-8.0, 8.0, 10.0)
    a = forward(img, dg)
    b = forward(img.mirrored(), dg)
    assert a.meta['scene'] == 'full_plane'
    assert_allclose(a.values, b.values, atol=1e-12)


def test_forward_zero_and_angle_check():
    grid = ImageGrid(8, 8)
    dg = DataGrid.from_bounds(0.0, 4.0, 4.0)
    assert_array_equal(forward(Image.zeros(grid), dg).values, 0.0)
    with pytest.raises(ValidationError):
        forward(Image.zeros(grid), dg, n_angles=4)


def test_forward_parallel_matches_serial(small_data_grid):
    spec = PhantomSpec(blobs=(GaussianBlob((0.0, 8.0), 2.0, 1.0),))
    img = render_phantom(spec, ImageGrid(33, 17, x0=-16.0))
    assert_allclose(forward(img, small_data_grid, nprocs=2).values, forward(img, small_data_grid).values)


def test_noise_zero_level_is_copy(small_data_grid, rng):
    data = DataField(small_data_grid, rng.standard_normal(small_data_grid.shape))
    out = add_noise(data, NoiseSpec(0.0, seed=3))
    assert_array_equal(out.values, data.values)
    assert 'noise' in out.meta


def test_noise_is_deterministic_per_stream(small_data_grid, rng):
    data = DataField(small_data_grid, rng.standard_normal(small_data_grid.shape))
    spec = NoiseSpec(0.1, seed=7)
    a = add_noise(data, spec, stream=0)
    b = add_noise(data, spec, stream=0)
    c = add_noise(data, spec, stream=1)
    assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert not np.array_equal(a.values, data.values)


def test_noise_on_images():
    img = Image(ImageGrid(4, 4), np.ones((4, 4)))
    out = add_noise(img, NoiseSpec(0.2, seed=1))
    assert isinstance(out, Image)
    assert out.values.std() > 0


def test_noise_spec_validation():
    with pytest.raises(ValidationError):
        NoiseSpec(-0.1)
    with pytest.raises(ValidationError):
        NoiseSpec(0.1, seed=-1)


def test_forward_matches_refined_angle_oracle():
    # quarter-size circle scene at the canonical n_angles = 4*256
    img = render_phantom(PhantomSpec((Disc((0.0, 6.25), 5.0, 10.0),)), ImageGrid(64, 64, x0=-32.0))
    dg = DataGrid.from_bounds(-8.0, 8.0, 20.0, 8.0, 1.0)
    coarse = forward(img, dg, n_angles=1024)
    oracle = forward(img, dg, n_angles=64 * 1024)
    err = np.linalg.norm(coarse.values - oracle.values) / np.linalg.norm(oracle.values)
    assert err < 1e-3


def test_forward_is_linear(small_data_grid, rng):
    grid = ImageGrid(33, 17, x0=-16.0)
    f1 = Image(grid, rng.standard_normal(grid.shape))
    f2 = Image(grid, rng.standard_normal(grid.shape))
    mixed = forward(f1.with_values(2.5 * f1.values - 0.75 * f2.values), small_data_grid)
    expected = 2.5 * forward(f1, small_data_grid).values - 0.75 * forward(f2, small_data_grid).values
    assert_allclose(mixed.values, expected, rtol=0, atol=1e-12)


def test_forward_converges_under_angle_doubling():
    spec = PhantomSpec(blobs=(GaussianBlob((0.0, 20.0), 4.0, 1.0),))
    img = render_phantom(spec, ImageGrid(65, 49, x0=-32.0))
    dg = DataGrid.from_bounds(-8.0, 8.0, 40.0, 2.0, 1.0)
    runs = [forward(img, dg, n_angles=n).values for n in (64, 128, 256, 512)]
    steps = [np.linalg.norm(b - a) for a, b in zip(runs[:-1], runs[1:])]
    assert steps[0] > steps[1] > steps[2]


def test_noise_moments_on_a_million_samples():
    dg = DataGrid.from_bounds(0.0, 999.0, 999.0)
    data = DataField(dg, np.ones(dg.shape))
    out = add_noise(data, NoiseSpec(0.1, additive_scale=0.0, seed=11)).values
    assert out.size == 10 ** 6
    assert 0.999 <= out.mean() <= 1.001
    assert 0.099 <= out.std() <= 0.101
