"""
Tests for sart.ghosts

- the unmeasured-region families and their sampled data
- ghost images: baselines, symmetry, resolution checks and the range ridge
- projection onto the families and recovery of the unmeasured data
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from sart.errors import ValidationError
from sart.fbp import invert_fbp
from sart.forward import forward
from sart.ghosts import (GhostParams, UnmeasuredTable, certificate_grid, check_resolution, eval_ghost_data,
                         ghost_data_field, ghost_image, ghost_images, null_space_ratio, project_unmeasured,
                         read_ghost_batch, recover_outside)
from sart.grids import DataField, DataGrid, ImageGrid


def test_params_validation():
    assert GhostParams('range', 0.5, b=2.0).baseline().b == 0.0
    assert GhostParams('even', 1.0, l=3).baseline().l == 0
    with pytest.raises(ValidationError):
        GhostParams('range', 0.5)
    with pytest.raises(ValidationError):
        GhostParams('even', 1.0, b=1.0, l=1)
    with pytest.raises(ValidationError):
        GhostParams('odd', 1.0, l=1.5)
    with pytest.raises(ValidationError):
        GhostParams('sideways', 1.0, l=1)


def test_even_family_lives_outside_track_region():
    p = GhostParams('even', 2.0, l=1, L=1.0, R=1.0)
    x = np.array([-0.5, 0.0, 0.9, 1.3, -1.7])
    r = np.full(5, 0.4)
    val = eval_ghost_data(p, x, r)
    assert_array_equal(val[:3], 0.0)
    assert np.all(val[3:] != 0.0)
    assert eval_ghost_data(p, 1.5, 1.2) == 0.0
    odd = eval_ghost_data(GhostParams('odd', 2.0, l=1, L=1.0, R=1.0), x, r)
    assert_allclose(odd, x * val)


def test_range_family_lives_beyond_radius():
    p = GhostParams('range', 0.3, b=2.0, R=1.0)
    r = np.array([0.5, 1.0, 1.25, 2.0])
    val = eval_ghost_data(p, 0.3, r)
    assert_array_equal(val[:2], 0.0)
    s = np.sqrt(r[2:] ** 2 - 1.0)
    assert_allclose(val[2:], np.cos(2.0 * s) / s)
    assert_array_equal(eval_ghost_data(p, 0.5, r), 0.0)
    sub = eval_ghost_data(p, 0.3, r, subtract_baseline=True)
    assert_allclose(sub[2:], (np.cos(2.0 * s) - 1) / s)


def test_range_delta_on_track_samples():
    dg = DataGrid.from_bounds(-1.0, 1.0, 2.0, 0.1, 0.1)
    field = ghost_data_field(GhostParams('range', 0.3, b=1.0), dg)
    live = np.flatnonzero(np.any(field.values != 0, axis=0))
    assert len(live) == 1
    assert_allclose(dg.x[live[0]], 0.3)
    assert np.max(np.abs(field.values)) > 1.0 / 0.1 * 0.5


@pytest.mark.parametrize('p', [GhostParams('range', 0.2, b=0.0), GhostParams('even', 1.0, l=0),
                               GhostParams('odd', 3.0, l=0)])
def test_baseline_member_subtracts_to_zero(p):
    img = ghost_image(p, ImageGrid(11, 6, 0.2, 0.2, -1.0, 0.0))
    assert_array_equal(img.values, 0.0)
    assert img.meta['c1'] == 0.5


def test_resolution_check():
    grid = ImageGrid(11, 11, 0.01, 0.01)
    check_resolution(GhostParams('range', 0.0, b=10.0), grid)
    with pytest.raises(ValidationError):
        check_resolution(GhostParams('range', 0.0, b=100.0), grid)
    with pytest.raises(ValidationError):
        ghost_image(GhostParams('even', 1.0, l=40), ImageGrid(11, 11, 0.1, 0.1))


@pytest.mark.parametrize('family, sign', [('even', 1.0), ('odd', -1.0)])
def test_track_family_images_have_parity(family, sign):
    grid = ImageGrid(21, 11, 0.1, 0.1, -1.0, 0.0)
    img = ghost_image(GhostParams(family, 1.0, l=1), grid, n_nodes=32)
    scale = np.max(np.abs(img.values))
    assert scale > 0
    assert_allclose(img.values[:, ::-1], sign * img.values, atol=1e-9 * scale)


def test_track_ghost_amplitude_grows_with_l():
    grid = ImageGrid(41, 41, 0.025, 0.0125, 0.0, 0.0)
    peaks = [np.max(np.abs(ghost_image(GhostParams('even', 1.0, l=l), grid, n_nodes=1024).values))
             for l in (1, 4, 16)]
    assert peaks[0] < peaks[1] < peaks[2]


def test_range_ghost_ridge_on_circle():
    p = GhostParams('range', 0.6, b=0.25, L=1.0, R=1.0)
    grid = ImageGrid(101, 101, 0.01, 0.01, 0.0, 0.0)
    img = ghost_image(p, grid)
    j, i = np.unravel_index(np.argmax(np.abs(img.values)), grid.shape)
    distance = abs(np.hypot(grid.x[i] - 0.6, grid.y[j]) - 1.0)
    assert distance < 0.03


def test_ghost_images_keep_order():
    grid = ImageGrid(11, 6, 0.1, 0.1, -0.5, 0.0)
    params = [GhostParams('range', a, b=1.0) for a in (0.0, 0.2, -0.3)]
    images = ghost_images(params, grid, nprocs=2)
    for p, img in zip(params, images):
        assert img.meta['ghost'] == p.describe()
        assert_allclose(img.values, ghost_image(p, grid).values)


def test_read_ghost_batch(tmp_path):
    path = tmp_path / 'ghosts.csv'
    path.write_text("family,a,b,l\nrange,0.6,0.25,\neven,1.0,,4\nodd,2.0,,0\n")
    params = read_ghost_batch(str(path), L=1.0, R=2.0)
    assert params == [GhostParams('range', 0.6, b=0.25, R=2.0), GhostParams('even', 1.0, l=4, R=2.0),
                      GhostParams('odd', 2.0, l=0, R=2.0)]


def test_null_space_ratio_of_empty_ghost():
    grid = ImageGrid(11, 6, 0.2, 0.2, -1.0, 0.0)
    img = ghost_image(GhostParams('range', 0.0, b=0.0), grid)
    report = null_space_ratio(img, DataGrid.from_extent(1.0, 1.0, 0.2, 0.2), 1.0, 1.0, guard=1)
    assert report == {'measured': 0.0, 'unmeasured': 0.0, 'ratio': 0.0}


@pytest.mark.parametrize('p', [GhostParams('range', 0.6, b=1.0), GhostParams('even', 1.0, l=1),
                               GhostParams('odd', 1.0, l=1)])
def test_ghost_is_fbp_of_its_family_member(p):
    # same sign and amplitude as inverting the sampled member directly
    igrid = ImageGrid(41, 21, 0.05, 0.05, -1.0, 0.0)
    dgrid = DataGrid.from_bounds(-3.0, 3.0, 3.0, 0.05, 0.01)
    ghost = ghost_image(p, igrid).values.ravel()
    rec = invert_fbp(ghost_data_field(p, dgrid, subtract_baseline=True), igrid).values.ravel()
    assert np.corrcoef(ghost, rec)[0, 1] > 0.85
    assert 0.75 < np.linalg.norm(rec) / np.linalg.norm(ghost) < 1.33


def test_ghost_data_on_track_is_its_track_row():
    p = GhostParams('range', 0.6, b=1.0)
    igrid = ImageGrid(61, 31, 0.05, 0.05, -1.5, 0.0)
    ghost = ghost_image(p, igrid)
    dgrid = DataGrid.from_bounds(-1.0, 1.0, 1.0, 0.05, 0.05)
    data = forward(ghost, dgrid)
    row = ghost.values[0, 10:51]
    scale = np.max(np.abs(ghost.values))
    assert_allclose(data.values[0], row, atol=1e-9 * scale)
    # so the data on the measured region cannot vanish
    assert np.max(np.abs(row)) > 0.01 * scale
    report = null_space_ratio(ghost, dgrid, 1.0, 1.0, guard=2)
    assert report['measured'] > 0


def test_certificate_grid_covers_data_grid():
    dg = DataGrid.from_bounds(-3.0, 3.0, 3.0, 0.02, 0.02)
    grid = certificate_grid(dg, 0.01, 0.03)
    assert (grid.nx, grid.ny) == (201, 301)
    assert_allclose([grid.x0, grid.x_max, grid.y0, grid.y_max], [-3.0, 3.0, 0.0, 3.0])
    assert grid.track_row == 0


def _tailed_range_data():
    dg = DataGrid.from_bounds(-2.0, 2.0, 3.0, 0.05, 0.02)
    X, Rr = np.meshgrid(dg.x, dg.r)
    return DataField(dg, np.exp(-X ** 2) * np.exp(-(Rr - 1.8) ** 2 / 0.08))


def test_range_projection_recovers_data():
    data = _tailed_range_data()
    table = project_unmeasured(data, 'range', R=1.0)
    out = recover_outside(table, data.grid)
    dg = data.grid
    assert np.all(out.values[dg.r <= 1.0] == 0.0)
    far = dg.r > 1.0 + 2 * dg.d_radius
    err = np.linalg.norm(out.values[far] - data.values[far]) / np.linalg.norm(data.values[far])
    assert err < 0.05


def test_range_single_coefficient_is_family_member():
    data = _tailed_range_data()
    dg = data.grid
    table = project_unmeasured(data, 'range', R=1.0)
    i0, k0 = 30, 7
    values = np.zeros_like(table.values)
    values[i0, k0] = 1.0
    out = recover_outside(table.scaled(values), dg)
    p = GhostParams('range', dg.x[i0], b=table.second[k0], R=1.0)
    expected = table.weights[k0] * dg.d_track * ghost_data_field(p, dg).values
    assert_allclose(out.values, expected, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize('family', ['even', 'odd'])
def test_track_single_coefficient_is_family_member(family):
    dg = DataGrid.from_bounds(-3.0, 3.0, 1.0, 0.05, 0.05)
    a = np.linspace(0.0, 10.0, 21)
    values = np.zeros((21, 4))
    values[6, 2] = 1.0
    w = np.full(21, 0.5)
    table = UnmeasuredTable(family, a, np.arange(4.0), values, w, 1.0, 1.0)
    out = recover_outside(table, dg)
    X, Rr = np.meshgrid(dg.x, dg.r)
    live = (np.abs(X) > 1.0) & (Rr < 1.0)
    expected = 0.5 * eval_ghost_data(GhostParams(family, a[6], l=2, L=1.0, R=1.0), X[live], Rr[live])
    assert_allclose(out.values[live], expected, rtol=1e-10, atol=1e-12)
    assert np.all(out.values[~live] == 0.0)


def test_zero_data_gives_zero_tables():
    dg = DataGrid.from_bounds(-3.0, 3.0, 2.0, 0.1, 0.1)
    zero = DataField.zeros(dg)
    for family in ('range', 'even', 'odd'):
        table = project_unmeasured(zero, family, L=1.0, R=1.0)
        assert np.all(table.values == 0.0)
        assert np.all(recover_outside(table, dg).values == 0.0)


def test_odd_table_vanishes_for_data_even_in_track():
    dg = DataGrid.from_bounds(-3.0, 3.0, 1.0, 0.05, 0.05)
    X, Rr = np.meshgrid(dg.x, dg.r)
    data = DataField(dg, np.exp(-(np.abs(X) - 2.0) ** 2) * (1 - Rr ** 2))
    even = project_unmeasured(data, 'even', L=1.0, R=1.0, L_max=3)
    odd = project_unmeasured(data, 'odd', L=1.0, R=1.0, L_max=3)
    scale = np.max(np.abs(even.values))
    assert scale > 0
    assert np.max(np.abs(odd.values)) < 1e-10 * scale


def test_projection_needs_unmeasured_reach():
    dg = DataGrid.from_bounds(-1.0, 1.0, 1.0, 0.1, 0.1)
    with pytest.raises(ValidationError):
        project_unmeasured(DataField.zeros(dg), 'range', R=1.0)
    with pytest.raises(ValidationError):
        project_unmeasured(DataField.zeros(dg), 'even', L=1.0, R=1.0)
