import numpy as np
import pytest

from sart import config as conf
from sart.data_load import bundled_scenarios, scenario_path
from sart.errors import ValidationError
from sart.forward import NoiseSpec


def test_bundled_scenarios():
    assert bundled_scenarios() == ['ch2_ladder', 'ch3_ghost_sweep', 'ch4_ortho', 'ch5_antenna_sweep']
    assert scenario_path('ch4_ortho').endswith('ch4_ortho.ini')


def test_split_override():
    assert conf.split_override('image.nx=65') == ('image', 'nx', '65')
    assert conf.split_override('phantom.cross.x = 1.5') == ('phantom.cross', 'x', '1.5')
    for bad in ('image.nx', 'nx=3', '.nx=3', 'image.=3'):
        with pytest.raises(ValidationError):
            conf.split_override(bad)


def test_smoke_then_overrides():
    cfg = conf.load_config('ch5_antenna_sweep')
    assert conf.get_int(cfg, 'image', 'nx') == 129
    cfg = conf.load_config('ch5_antenna_sweep', smoke=True)
    assert conf.get_int(cfg, 'image', 'nx') == 65
    cfg = conf.load_config('ch5_antenna_sweep', ['image.nx=33', 'extra.flag=yes'], smoke=True)
    assert conf.get_int(cfg, 'image', 'nx') == 33
    assert conf.get_bool(cfg, 'extra', 'flag') is True


def test_missing_config():
    with pytest.raises(ValidationError):
        conf.load_config('no_such_scenario')


def test_config_file_on_disk(tmp_path):
    path = tmp_path / 'geo.ini'
    path.write_text("[image]\nnx = 11\nny = 6\ndx = 0.5\n\n[data]\ntrack_min = -2\ntrack_max = 2\n"
                    "radius_max = 3\n\n[phantom.Blob]\ntype = blob\nx = 0\ny = 1\nsigma = 0.5\n")
    cfg = conf.load_config(str(path))
    grid = conf.image_grid(cfg)
    assert (grid.nx, grid.ny, grid.dx, grid.dy) == (11, 6, 0.5, 1.0)
    dg = conf.data_grid(cfg)
    assert dg.shape == (4, 5)
    spec = conf.phantom(cfg)
    assert len(spec.blobs) == 1 and spec.blobs[0].sigma == 0.5
    geo = conf.geometry(cfg)
    assert (geo.L, geo.R, geo.extent) == (2.0, 3.0, 1.0)
    assert conf.noise_spec(cfg) == NoiseSpec()
    with pytest.raises(ValidationError):
        conf.load_config(str(path), smoke=True)


def test_symmetric_image_section():
    cfg = conf.load_config('ch5_antenna_sweep', smoke=True)
    grid = conf.image_grid(cfg)
    assert grid.is_symmetric
    assert grid.ny == 129
    assert conf.get_list(cfg, 'scenario', 'layouts', str, sep=';') == ['0,1', '0,1,3,8,19']
    assert conf.get_list(cfg, 'scenario', 'noise_levels') == [0.1, 0.2, 0.3]
    assert conf.noise_spec(cfg) == NoiseSpec(0.0, 0.01, 5)
    assert len(conf.phantom(cfg).discs) == 6


def test_bad_values():
    cfg = conf.load_config('ch2_ladder', ['image.nx=many'])
    with pytest.raises(ValidationError):
        conf.image_grid(cfg)
    with pytest.raises(ValidationError):
        conf.get_float(cfg, 'image', 'nope')
    assert conf.get_float(cfg, 'image', 'nope', 2.5) == 2.5
    cfg = conf.load_config('ch2_ladder', ['phantom.circle.type=square'])
    with pytest.raises(ValidationError):
        conf.phantom(cfg)
    cfg = conf.load_config('ch2_ladder', ['geometry.extent=0.5'])
    with pytest.raises(ValidationError):
        conf.geometry(cfg)


def test_resolved_lines_follow_file_order():
    cfg = conf.load_config('ch2_ladder')
    lines = conf.resolved_lines(cfg)
    assert lines[0] == 'scenario.name = ch2_ladder'
    assert 'phantom.circle.radius = 20.0' in lines


def test_ladder_geometry_measures_the_image():
    cfg = conf.load_config('ch2_ladder')
    grid = conf.image_grid(cfg)
    assert (grid.nx, grid.ny, grid.x0, grid.y0) == (256, 256, -128.0, 0.0)
    dg = conf.data_grid(cfg)
    assert (dg.track_min, dg.track_max, dg.radius_max) == (-128.0, 127.0, 255.0)
    disc = conf.main_disc(cfg)
    # every circle about the track that meets the disc is measured
    assert np.hypot(128.0, disc.center[1]) + disc.radius < dg.radius_max
    smoke = conf.data_grid(conf.load_config('ch2_ladder', smoke=True))
    assert (smoke.n_track, smoke.n_radius) == (64, 64)
