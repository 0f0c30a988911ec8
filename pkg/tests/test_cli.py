import os

import numpy as np
import pytest

from sart import cli
from sart.errors import NumericError
from sart.grids import DataField, Image
from sart.io import read_field


def test_no_command_prints_help(capsys):
    assert cli.main([]) == 1
    assert 'usage' in capsys.readouterr().out


def test_scenario_list(capsys):
    assert cli.main(['scenario', 'list']) == 0
    out = capsys.readouterr().out.split()
    assert out == ['ch2_ladder', 'ch3_ghost_sweep', 'ch4_ortho', 'ch5_antenna_sweep']


def test_invalid_input_exits_2(tmp_path, capsys):
    assert cli.main(['phantom', '--config', str(tmp_path / 'missing.ini'), '--out', str(tmp_path / 'p')]) == 2
    assert capsys.readouterr().err.startswith('ERROR:')
    assert cli.main(['phantom', '--out', str(tmp_path / 'p')]) == 2
    assert cli.main(['scenario', 'run', 'ch9_unknown', '--out', str(tmp_path)]) == 2


def test_numeric_failure_exits_3(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericError("non-finite values")
    monkeypatch.setattr(cli, 'render_phantom', boom)
    assert cli.main(['phantom', '--config', 'ch2_ladder', '--out', str(tmp_path / 'p')]) == 3


def test_phantom_forward_invert_compare(tmp_path, capsys):
    ph, g, gn, rec = (str(tmp_path / n) for n in ('phantom', 'data', 'noisy', 'rec'))
    common = ['--config', 'ch2_ladder', '--set', 'image.nx=33', '--set', 'image.x0=-16', '--set', 'image.ny=48']
    assert cli.main(['phantom', '--out', ph, '--pgm'] + common) == 0
    assert isinstance(read_field(ph), Image)
    assert os.path.exists(ph + '.pgm')
    assert cli.main(['forward', '--analytic', '--out', g] + common) == 0
    assert isinstance(read_field(g), DataField)
    assert cli.main(['noise', '--in', g, '--percent', '0.1', '--seed', '2', '--out', gn]) == 0
    assert not np.array_equal(read_field(gn).values, read_field(g).values)
    assert cli.main(['invert', 'fbp', '--data', g, '--out', rec, '--continuation', 'approx'] + common) == 0
    img = read_field(rec)
    assert img.grid == read_field(ph).grid
    assert img.meta['continuation'] == 'approximate'
    capsys.readouterr()
    assert cli.main(['compare', '--a', ph, '--b', ph]) == 0
    assert capsys.readouterr().out.strip() == 'l2_relative = 0.0'
    assert cli.main(['compare', '--a', ph, '--metric', 'plateau_amplitude', '--disc', '0,25,20']) == 0
    assert capsys.readouterr().out.strip() == 'plateau_amplitude = 10.0'
    assert cli.main(['compare', '--a', ph, '--metric', 'plateau_amplitude']) == 2


def test_lr_resolve(tmp_path):
    ph, out, inter = (str(tmp_path / n) for n in ('phantom', 'resolved', 'stages'))
    common = ['--config', 'ch5_antenna_sweep', '--set', 'image.nx=17', '--set', 'image.ny_half=64',
              '--set', 'phantom.cross.y=20']
    assert cli.main(['phantom', '--out', ph] + common) == 0
    assert cli.main(['lr', 'resolve', '--phantom', ph, '--positions', '0,1,3', '--out', out,
                     '--emit-intermediates', inter]) == 0
    np.testing.assert_allclose(read_field(out).values, read_field(ph).values, atol=1e-9)
    assert os.path.exists(os.path.join(inter, 'even_clean_3.hdr'))
    assert cli.main(['lr', 'resolve', '--phantom', ph, '--positions', '1,3', '--out', out]) == 2


def test_ghost_single_and_batch(tmp_path):
    batch = tmp_path / 'ghosts.csv'
    batch.write_text("family,a,b,l\nrange,0.3,0.25,\nrange,0.6,1.0,\n")
    common = ['--config', 'ch3_ghost_sweep', '--set', 'image.nx=21', '--set', 'image.ny=21',
              '--set', 'image.dx=0.05', '--set', 'image.dy=0.05']
    out = str(tmp_path / 'one')
    assert cli.main(['ghost', '--family', 'range', '--a', '0.6', '--b', '0.25', '--subtract-baseline',
                     '--out', out] + common) == 0
    assert read_field(out).meta['ghost'] == 'range a=0.6 b=0.25'
    outdir = str(tmp_path / 'atlas')
    assert cli.main(['ghost', '--batch', str(batch), '--outdir', outdir] + common) == 0
    assert sorted(f for f in os.listdir(outdir) if f.endswith('.hdr')) == ['ghost_000.hdr', 'ghost_001.hdr']
    assert cli.main(['ghost', '--family', 'even', '--a', '1', '--out', out] + common) == 2


def test_ghost_subtracts_baseline_by_default(tmp_path):
    common = ['--config', 'ch3_ghost_sweep', '--set', 'image.nx=21', '--set', 'image.ny=21',
              '--set', 'image.dx=0.05', '--set', 'image.dy=0.05', '--family', 'range', '--a', '0.6', '--b', '0.25']
    default, on, off = (str(tmp_path / n) for n in ('default', 'on', 'off'))
    assert cli.main(['ghost', '--out', default] + common) == 0
    assert cli.main(['ghost', '--subtract-baseline', '--out', on] + common) == 0
    assert cli.main(['ghost', '--no-subtract-baseline', '--out', off] + common) == 0
    np.testing.assert_array_equal(read_field(default).values, read_field(on).values)
    assert not np.allclose(read_field(default).values, read_field(off).values)


def test_lr_eta0_source_option(tmp_path):
    ph = str(tmp_path / 'phantom')
    common = ['--config', 'ch5_antenna_sweep', '--set', 'image.nx=17', '--set', 'image.ny_half=64',
              '--set', 'phantom.cross.y=20']
    assert cli.main(['phantom', '--out', ph] + common) == 0
    for source in ('reference', 'offset'):
        out = str(tmp_path / source)
        assert cli.main(['lr', 'resolve', '--phantom', ph, '--positions', '0,3', '--resolver', 'reg',
                         '--eta0', source, '--out', out]) == 0
        assert read_field(out).meta['eta0_source'] == source
    with pytest.raises(SystemExit):
        cli.main(['lr', 'resolve', '--phantom', ph, '--positions', '0,3', '--resolver', 'reg',
                  '--eta0', 'mean', '--out', out])
