import os

import numpy as np
import pytest
from astropy.table import Table

from sart.errors import ValidationError
from sart.scenarios import SCENARIOS, run_scenario


def _metrics(path):
    tab = Table.read(path, format='ascii.basic', delimiter=',')
    return {(row['stage'], row['metric']): float(row['value']) for row in tab}


def test_unknown_scenario(tmp_path):
    with pytest.raises(ValidationError):
        run_scenario('ch1_intro', str(tmp_path))


def test_config_must_match_scenario(tmp_path):
    with pytest.raises(ValidationError):
        run_scenario('ch2_ladder', str(tmp_path), config='ch5_antenna_sweep')


def test_antenna_sweep_smoke(tmp_path):
    outdir = str(tmp_path / 'run')
    written = run_scenario('ch5_antenna_sweep', outdir, smoke=True)
    table = os.path.join(outdir, 'ch5_antenna_sweep_metrics.csv')
    assert written[-1] == table
    metrics = _metrics(table)
    assert metrics[('layout1_noise0.1', 'antennas')] == 5.0
    assert ('layout0', 'noise_growth') in metrics
    assert open(table).readline().startswith('# scenario = ch5_antenna_sweep')


def test_antenna_sweep_is_deterministic(tmp_path):
    a = run_scenario('ch5_antenna_sweep', str(tmp_path / 'a'), smoke=True)[-1]
    b = run_scenario('ch5_antenna_sweep', str(tmp_path / 'b'), smoke=True)[-1]
    assert open(a).read() == open(b).read()


def test_noise_free_sweep_is_exact(tmp_path):
    path = run_scenario('ch5_antenna_sweep', str(tmp_path), ['scenario.noise_levels=0'], smoke=True)[-1]
    metrics = _metrics(path)
    assert metrics[('layout0_noise0', 'l2_relative')] < 1e-9
    assert metrics[('layout1_noise0', 'mirror_suppression_ratio')] < 1e-9


@pytest.mark.slow
@pytest.mark.parametrize('name', ['ch2_ladder', 'ch3_ghost_sweep', 'ch4_ortho'])
def test_smoke_runs(tmp_path, name):
    assert name in SCENARIOS
    path = run_scenario(name, str(tmp_path), smoke=True)[-1]
    metrics = _metrics(path)
    assert len(metrics) > 0
    if name == 'ch4_ortho':
        assert metrics[('gram_even', 'max_abs_error')] < 1e-6
        assert abs(metrics[('single_basis', 'on_target')] - 1.0) < 1e-8
        assert np.isfinite(metrics[('basis_forward', 'l2_relative')])
    if name == 'ch3_ghost_sweep':
        ratios = [v for (stage, metric), v in metrics.items() if metric == 'null_space_ratio']
        assert len(ratios) == 24
        assert all(np.isfinite(ratios))
    if name == 'ch2_ladder':
        assert ('ext1_zero_fill', 'dip_end_offset') in metrics
        assert metrics[('phantom', 'plateau_amplitude')] == 10.0
        assert metrics[('forward', 'oracle_l2_relative')] < 1e-2
