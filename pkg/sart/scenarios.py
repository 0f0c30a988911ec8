"""
Reproducible multi-step experiments driven by the bundled scenario files.

Each runner takes a resolved configuration and an output directory, writes
fields, renders and profiles there, and returns metric rows
(scenario, stage, metric, value). `run_scenario` adds the metrics table.
"""

import logging
import os

import numpy as np
from astropy.table import Table

from . import config as conf
from .errors import ValidationError, require
from .fbp import ContinuationMode, invert_fbp
from .forward import NoiseSpec, add_noise, default_angles, forward, forward_analytic
from .ghosts import (GhostParams, certificate_grid, ghost_image, ghost_images, null_space_ratio,
                     project_unmeasured, recover_outside)
from .grids import DataField, DataGrid, ImageGrid, cross_section, render_phantom
from .io import write_field, write_pgm, write_profile, write_table
from .lr import AntennaArray, lr_pipeline
from .metrics import (dip_location, end_circle_offset, l2_relative, mirror_suppression_ratio,
                      near_object_mae, plateau_amplitude)
from .ortho import (BasisIndex, basis_reconstruction, eval_basis, gram_matrix, invert_ortho, neumann,
                    project_data, resynthesize)

logger = logging.getLogger(__name__)


class Report(object):
    """Collects metric rows and written files of one scenario run."""

    def __init__(self, scenario, outdir):
        self.scenario = scenario
        self.outdir = outdir
        self.rows = []
        self.written = []
        os.makedirs(outdir, exist_ok=True)

    def metric(self, stage, name, value):
        self.rows.append((self.scenario, stage, name, float(value)))
        logger.info("%s %s %s = %.6g", self.scenario, stage, name, value)

    def image(self, stem, img, cap=None):
        path = os.path.join(self.outdir, stem)
        self.written += write_field(path, img)
        self.written.append(write_pgm(path + '.pgm', img.values, cap=cap))

    def data(self, stem, field):
        self.written += write_field(os.path.join(self.outdir, stem), field)

    def profile(self, stem, prof):
        self.written.append(write_profile(os.path.join(self.outdir, stem + '.csv'), prof))


def _scaled_grid(dg, factor):
    """Track and radii `factor` times as long, same spacing."""
    return DataGrid.from_bounds(dg.track_min * factor, (dg.track_max + dg.d_track) * factor - dg.d_track,
                                (dg.radius_max + dg.d_radius) * factor - dg.d_radius, dg.d_track, dg.d_radius)


def missing_track_ends(dg):
    """The first track positions beyond either end of `dg`."""
    return (dg.track_min - dg.d_track, dg.track_max + dg.d_track)


def run_ch2_ladder(cfg, report, nprocs=1):
    """
    Circle phantom reconstructed by fbp from data of growing extent, with and
    without approximate continuation.

    The artifacts of each rung are measured against the widest rung: their most
    negative sample should sit on a circle about a missing track end that meets
    the disc.
    """
    igrid = conf.image_grid(cfg)
    base = conf.data_grid(cfg)
    spec = conf.phantom(cfg)
    disc = conf.main_disc(cfg)
    truth = render_phantom(spec, igrid)
    report.image('ch2_phantom', truth)
    report.metric('phantom', 'plateau_amplitude', plateau_amplitude(truth, disc))
    n_angles = default_angles(igrid)
    columns = DataGrid.from_bounds(disc.center[0] - disc.radius, disc.center[0] + disc.radius, base.radius_max,
                                   disc.radius, base.d_radius)
    oracle = forward(truth, columns, n_angles * conf.get_int(cfg, 'scenario', 'oracle_factor', 64), nprocs)
    sampled = forward(truth, columns, n_angles, nprocs)
    report.metric('forward', 'oracle_l2_relative', l2_relative(sampled, oracle))
    noise = conf.noise_spec(cfg)
    margin = conf.get_float(cfg, 'scenario', 'near_margin', 3.0) * igrid.dx
    extension = conf.get_float(cfg, 'scenario', 'extension', 2.0)

    factors = conf.get_list(cfg, 'scenario', 'extents', int)
    recs = {}
    for factor in factors:
        dg = _scaled_grid(base, factor)
        data = add_noise(forward_analytic(spec, dg), noise)
        for mode in ContinuationMode:
            stage = 'ext{0}_{1}'.format(factor, mode.value)
            rec = invert_fbp(data, igrid, mode, extension=extension, nprocs=nprocs)
            recs[factor, mode] = rec
            report.image('ch2_' + stage, rec, cap=4 * disc.amplitude)
            report.profile('ch2_' + stage + '_row', cross_section(rec, disc.center[1]))
            report.metric(stage, 'l2_relative', l2_relative(rec, truth))
            report.metric(stage, 'plateau_amplitude', plateau_amplitude(rec, disc))
            report.metric(stage, 'near_object_mae', near_object_mae(rec, truth, disc, margin))
        ends = missing_track_ends(dg)
        report.metric('ext{0}'.format(factor), 'smallest_missing_radius',
                      min(np.hypot(disc.center[0] - e, disc.center[1]) for e in ends) - disc.radius)
        approx, zero = recs[factor, ContinuationMode.APPROXIMATE], recs[factor, ContinuationMode.ZERO_FILL]
        report.metric('ext{0}'.format(factor), 'mode_difference_l2', l2_relative(approx, zero))

    widest = max(factors)
    for factor in factors:
        if factor == widest:
            continue
        ends = missing_track_ends(_scaled_grid(base, factor))
        for mode in ContinuationMode:
            ref = recs[widest, mode]
            artifact = recs[factor, mode].with_values(recs[factor, mode].values - ref.values)
            report.metric('ext{0}_{1}'.format(factor, mode.value), 'dip_end_offset',
                          end_circle_offset(dip_location(artifact), ends, disc))


def _ghost_params(cfg, L, R):
    s = 'scenario'
    params = [GhostParams('range', a, b=conf.get_float(cfg, s, 'range_b'), L=L, R=R)
              for a in conf.get_list(cfg, s, 'range_a')]
    a_fixed = conf.get_float(cfg, s, 'b_sweep_a')
    params += [GhostParams('range', a_fixed, b=b, L=L, R=R) for b in conf.get_list(cfg, s, 'b_sweep')]
    for family in ('even', 'odd'):
        params += [GhostParams(family, a, l=l, L=L, R=R)
                   for a in conf.get_list(cfg, s, family + '_a') for l in conf.get_list(cfg, s, family + '_l', int)]
    return params


def run_ch3_ghost_sweep(cfg, report, nprocs=1):
    """Ghost atlas over the family parameters, certified by forward projection."""
    geo = conf.geometry(cfg)
    L, R = geo.L, geo.R
    subtract = conf.get_bool(cfg, 'scenario', 'subtract_baseline', True)
    cap = conf.get_float(cfg, 'scenario', 'cap', None)
    guard = conf.get_int(cfg, 'scenario', 'guard_pixels', 5)
    params = _ghost_params(cfg, L, R)
    images = ghost_images(params, geo.image, subtract_baseline=subtract, nprocs=nprocs)
    # the certificate needs the whole support the data grid sees
    cert_grid = certificate_grid(geo.data, geo.image.dy, conf.get_float(cfg, 'scenario', 'cert_dx', None))
    counts = {}
    for p, img in zip(params, images):
        counts[p.family] = counts.get(p.family, 0) + 1
        stage = 'ghost_{0}_{1:02d}'.format(p.family, counts[p.family])
        report.image('ch3_' + stage, img, cap=cap)
        report.metric(stage, 'a', p.a)
        report.metric(stage, 'b' if p.family == 'range' else 'l', p.b if p.family == 'range' else p.l)
        report.metric(stage, 'max_abs', np.max(np.abs(img.values)))
        wide = ghost_image(p, cert_grid, subtract_baseline=subtract)
        cert = null_space_ratio(wide, geo.data, L, R, guard=guard, nprocs=nprocs)
        report.metric(stage, 'null_space_ratio', cert['ratio'])
        if p.family == 'range':
            X, Y = img.grid.mesh()
            k = np.argmax(np.abs(img.values))
            report.metric(stage, 'ridge_offset', abs(np.hypot(X.flat[k] - p.a, Y.flat[k]) - R))

    # projection onto the range family and recovery beyond R
    dg = geo.data
    X, Rr = np.meshgrid(dg.x, dg.r)
    width = conf.get_float(cfg, 'scenario', 'recover_width', 0.25)
    g = DataField(dg, np.exp(-X ** 2 / 2.0) * np.exp(-(Rr - 1.5 * R) ** 2 / (2 * width ** 2)))
    rec = recover_outside(project_unmeasured(g, 'range', R=R), dg)
    far = Rr > R + 2 * dg.d_radius
    report.metric('recover_range', 'l2_relative',
                  np.linalg.norm(rec.values[far] - g.values[far]) / np.linalg.norm(g.values[far]))
    report.data('ch3_recovered_range', rec)


def basis_certificate(idx, geo, guard=2):
    """
    Forward project one basis reconstruction and compare it with its family
    member on the measured quarter 0 < x < L, r < R.

    The reconstruction is rendered on |x| <= L + R, 0 <= y <= R so that every
    circle about the measured track stays inside the image.
    """
    L, R = geo.L, geo.R
    dx, dy = geo.image.dx, geo.image.dy
    n = int(round((L + R) / dx))
    igrid = ImageGrid(2 * n + 1, int(round(R / dy)) + 1, dx, dy, -n * dx, 0.0)
    data = forward(basis_reconstruction(idx, igrid, L, R), geo.data)
    dg = geo.data
    X, Rr = np.meshgrid(dg.x, dg.r)
    inner = (X > 0) & (X < L - guard * dg.d_track) & (Rr < R - guard * dg.d_radius)
    member = eval_basis(idx, X[inner], Rr[inner], L, R)
    return float(np.linalg.norm(data.values[inner] - member) / np.linalg.norm(member))


def run_ch4_ortho(cfg, report, nprocs=1):
    """Orthogonality, projection/resynthesis ladder and the basis inversion."""
    geo = conf.geometry(cfg)
    L, R = geo.L, geo.R
    s = 'scenario'
    n_check = conf.get_int(cfg, s, 'gram_max_index', 8)
    for parity in ('even', 'odd'):
        G = gram_matrix(parity, n_check, n_check, L, R)
        expected = np.kron(np.diag([L / neumann(k) for k in range(n_check + 1)]),
                           np.diag([R / neumann(l) for l in range(n_check + 1)]))
        report.metric('gram_' + parity, 'max_abs_error', np.max(np.abs(G - expected)))

    spec = conf.phantom(cfg)
    truth = render_phantom(spec, geo.image)
    data = add_noise(forward_analytic(spec, geo.data), conf.noise_spec(cfg))
    report.image('ch4_phantom', truth)
    for K in conf.get_list(cfg, s, 'resynth_K', int):
        table = project_data(data, K, K, L, R)
        back = resynthesize(table, geo.data)
        live = back.values != 0
        err = np.linalg.norm(back.values[live] - data.values[live]) / np.linalg.norm(data.values[live])
        report.metric('resynth_K{0}'.format(K), 'l2_relative', err)

    idx = BasisIndex('even', 1, 1)
    single = project_data(lambda x, r: eval_basis(idx, x, r, L, R), 4, 4, L, R)
    off = np.abs(np.array(single.even, copy=True))
    off[idx.k, idx.l] = 0.0
    report.metric('single_basis', 'off_target_max', max(off.max(), np.abs(single.odd).max()))
    report.metric('single_basis', 'on_target', single.coefficient(idx))
    # reported only: a compactly supported member is not circular-mean data of any image
    report.metric('basis_forward', 'l2_relative', basis_certificate(idx, geo))

    K_rec = conf.get_int(cfg, s, 'recon_K')
    cache = conf.get_str(cfg, s, 'cache_dir', None)
    if cache and not os.path.isabs(cache):
        cache = os.path.join(report.outdir, cache)
    rec = invert_ortho(data, K_rec, K_rec, geo.image, L, R, cache_dir=cache)
    report.image('ch4_ortho_K{0}'.format(K_rec), rec)
    report.metric('ortho_K{0}'.format(K_rec), 'l2_relative', l2_relative(rec, truth))
    fbp = invert_fbp(data, geo.image, ContinuationMode.APPROXIMATE, nprocs=nprocs)
    report.image('ch4_fbp', fbp)
    report.metric('fbp', 'l2_relative', l2_relative(fbp, truth))


def run_ch5_antenna_sweep(cfg, report, nprocs=1):
    """Antenna layouts against noise levels for the left-right resolution."""
    s = 'scenario'
    igrid = conf.image_grid(cfg)
    spec = conf.phantom(cfg)
    disc = conf.main_disc(cfg)
    truth = render_phantom(spec, igrid)
    report.image('ch5_phantom', truth)
    base = conf.noise_spec(cfg)
    mode = conf.get_str(cfg, s, 'mode', 'direct')
    resolver = conf.get_str(cfg, s, 'resolver', 'exact')
    dgrid = conf.data_grid(cfg) if mode == 'via_radon' else None
    layouts = [AntennaArray.parse(t) for t in conf.get_list(cfg, s, 'layouts', str, sep=';')]
    levels = conf.get_list(cfg, s, 'noise_levels')
    for n, antennas in enumerate(layouts):
        errors = []
        for level in levels:
            noise = NoiseSpec(level, base.additive_scale, base.seed)
            result = lr_pipeline(truth, antennas, noise, mode=mode, resolver=resolver, dgrid=dgrid, nprocs=nprocs)
            stage = 'layout{0}_noise{1:g}'.format(n, level)
            report.image('ch5_' + stage, result.image)
            err = l2_relative(result.image, truth)
            errors.append(err)
            report.metric(stage, 'antennas', len(antennas))
            report.metric(stage, 'l2_relative', err)
            report.metric(stage, 'mirror_suppression_ratio', mirror_suppression_ratio(result.image, disc))
        if len(errors) > 1 and errors[0] > 0:
            report.metric('layout{0}'.format(n), 'noise_growth', errors[-1] / errors[0])


SCENARIOS = {
    'ch2_ladder': run_ch2_ladder,
    'ch3_ghost_sweep': run_ch3_ghost_sweep,
    'ch4_ortho': run_ch4_ortho,
    'ch5_antenna_sweep': run_ch5_antenna_sweep,
}


def metrics_table(report, cfg):
    """astropy Table of the metric rows; the resolved configuration becomes comment lines."""
    cols = list(zip(*report.rows)) if report.rows else [[], [], [], []]
    tab = Table([list(c) for c in cols], names=('scenario', 'stage', 'metric', 'value'),
                dtype=(str, str, str, float))
    tab.meta['comments'] = ["scenario = {0}".format(report.scenario)] + conf.resolved_lines(cfg)
    return tab


def run_scenario(name, outdir, overrides=(), smoke=False, config=None, nprocs=1):
    """
    Run a named scenario.

    parameters
    ----------
    name : str
        One of `SCENARIOS`.

    outdir : str
        Output directory.

    overrides : list of str
        'section.key=value' overrides.

    smoke : bool
        Apply the scenario's [smoke] section (small grids).

    config : str or None
        Configuration file; defaults to the bundled file of the scenario.

    nprocs : int

    return
    ------
    written : list of str
        Every file produced, the metrics table last.
    """
    if name not in SCENARIOS:
        raise ValidationError("unknown scenario {0!r}; known: {1}".format(name, ', '.join(sorted(SCENARIOS))))
    cfg = conf.load_config(config or name, overrides, smoke)
    require(conf.get_str(cfg, 'scenario', 'name', name) == name,
            "configuration describes scenario {0!r}, not {1!r}", conf.get_str(cfg, 'scenario', 'name'), name)
    report = Report(name, outdir)
    SCENARIOS[name](cfg, report, nprocs=nprocs)
    report.written.append(write_table(metrics_table(report, cfg), os.path.join(outdir, name + '_metrics.csv')))
    return report.written
