import numpy as np
import pytest
from numpy.testing import assert_allclose

from sart.errors import ValidationError
from sart.grids import Disc, Image, ImageGrid, PhantomSpec, render_phantom
from sart.metrics import (compare, dip_location, end_circle_offset, l2_relative, linf, mirror_suppression_ratio,
                          near_object_mae, plateau_amplitude)


def test_identical_images(ch2_phantom, half_plane_grid):
    img = render_phantom(ch2_phantom, half_plane_grid)
    assert l2_relative(img, img) == 0.0
    assert linf(img, img) == 0.0
    zero = Image.zeros(half_plane_grid)
    assert l2_relative(zero, zero) == 0.0
    assert l2_relative(img, zero) == float('inf')


def test_constant_offset():
    grid = ImageGrid(6, 5)
    a = Image(grid, np.full(grid.shape, 3.0))
    b = Image(grid, np.full(grid.shape, 1.0))
    assert_allclose(linf(a, b), 2.0)
    assert_allclose(l2_relative(a, b), 2.0)
    region = np.zeros(grid.shape, dtype=bool)
    region[1, 1] = True
    assert_allclose(l2_relative(a, b, region), 2.0)
    with pytest.raises(ValidationError):
        l2_relative(a, b, np.zeros((2, 2), dtype=bool))
    with pytest.raises(ValidationError):
        linf(a, Image.zeros(ImageGrid(5, 5)))


def test_plateau_of_rendered_disc(ch2_phantom, ch2_disc, half_plane_grid):
    img = render_phantom(ch2_phantom, half_plane_grid)
    assert plateau_amplitude(img, ch2_disc) == 10.0
    with pytest.raises(ValidationError):
        plateau_amplitude(img, Disc((0.0, 25.0), 2.0))


def test_mirror_suppression():
    grid = ImageGrid.symmetric(41, 20)
    disc = Disc((0.0, 10.0), 5.0, 2.0)
    img = render_phantom(PhantomSpec((disc,)), grid)
    assert mirror_suppression_ratio(img, disc) == 0.0
    both = render_phantom(PhantomSpec((disc, disc.mirrored())), grid)
    assert mirror_suppression_ratio(both, disc) == 1.0
    half = img.with_values(img.values + 0.5 * img.mirrored().values)
    assert_allclose(mirror_suppression_ratio(half, disc), 0.5)


def test_near_object_mae(ch2_phantom, ch2_disc, half_plane_grid):
    img = render_phantom(ch2_phantom, half_plane_grid)
    assert near_object_mae(img, img, ch2_disc, 3.0) == 0.0
    shifted = img.with_values(img.values + 1.0)
    assert_allclose(near_object_mae(shifted, img, ch2_disc, 3.0), 1.0)


def test_dip_location_skips_disc():
    grid = ImageGrid(21, 21, x0=-10.0)
    disc = Disc((0.0, 10.0), 3.0)
    values = np.zeros(grid.shape)
    values[10, 10] = -5.0
    values[2, 15] = -1.0
    img = Image(grid, values)
    assert dip_location(img) == (0.0, 10.0)
    assert dip_location(img, disc, margin=1.0) == (5.0, 2.0)


def test_end_circle_offset():
    disc = Disc((0.0, 4.0), 1.0)
    # (3, 0) -> (0, 4) is 5; (-5, 0) -> (0, 4) is sqrt(41)
    assert_allclose(end_circle_offset((3.0, 5.0), (3.0, -5.0), disc), 0.0)
    assert_allclose(end_circle_offset((3.0, 7.0), (3.0,), disc), 2.0)


def test_compare_dispatch(ch2_phantom, ch2_disc, half_plane_grid):
    img = render_phantom(ch2_phantom, half_plane_grid)
    assert compare(img, img, 'l2_relative') == 0.0
    assert compare(img, None, 'plateau_amplitude', disc=ch2_disc) == 10.0
    with pytest.raises(ValidationError):
        compare(img, None, 'plateau_amplitude')
    with pytest.raises(ValidationError):
        compare(img, img, 'psnr')
