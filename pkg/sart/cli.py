"""
Command line front end: `sart <command> ...`.

Exit codes: 0 success, 1 no command given, 2 invalid input, 3 non-finite results.
"""

import argparse
import logging
import os
import sys

from . import __version__
from . import config as conf
from .errors import NumericError, ValidationError, require
from .fbp import ContinuationMode, invert_fbp
from .forward import NoiseSpec, add_noise, forward, forward_analytic
from .ghosts import GhostParams, ghost_image, ghost_images, read_ghost_batch
from .grids import Disc, render_phantom
from .io import read_field, write_field, write_pgm
from .lr import AntennaArray, RegularizationSpec, lr_pipeline
from .metrics import METRICS, compare
from .ortho import invert_ortho
from .scenarios import SCENARIOS, run_scenario
from .spectral import invert_fourier

logger = logging.getLogger(__name__)


def _floats(text):
    try:
        return [float(t) for t in text.split(',')]
    except ValueError:
        raise ValidationError("expected comma separated numbers, got {0!r}".format(text))


def _save(img, out, pgm=False, cap=None):
    write_field(out, img)
    if pgm:
        write_pgm(os.path.splitext(out)[0] + '.pgm', img.values, cap=cap)


def _load(args):
    require(args.config, "--config is required")
    return conf.load_config(args.config, args.overrides)


def cmd_phantom(args):
    cfg = _load(args)
    img = render_phantom(conf.phantom(cfg), conf.image_grid(cfg))
    _save(img, args.out, args.pgm)


def cmd_forward(args):
    cfg = _load(args)
    dgrid = conf.data_grid(cfg)
    if args.analytic:
        data = forward_analytic(conf.phantom(cfg), dgrid, mirror=not args.full_plane)
    else:
        require(args.image, "forward needs --image unless --analytic is given")
        data = forward(read_field(args.image), dgrid, n_angles=args.angles, nprocs=args.cores)
    write_field(args.out, data)


def cmd_noise(args):
    field = read_field(args.infile)
    spec = NoiseSpec(args.percent, args.additive, args.seed)
    write_field(args.out, add_noise(field, spec, stream=args.stream))


def cmd_invert(args):
    cfg = _load(args)
    igrid = conf.image_grid(cfg)
    data = read_field(args.data)
    if args.method == 'fbp':
        img = invert_fbp(data, igrid, ContinuationMode.parse(args.continuation), extension=args.extension,
                         tail_guard_rows=args.tail_guard, nprocs=args.cores)
    elif args.method == 'fourier':
        img = invert_fourier(data, igrid, method=args.spectral_method)
    else:
        geo = conf.geometry(cfg)
        img = invert_ortho(data, args.kmax, args.lmax if args.lmax is not None else args.kmax, igrid, geo.L, geo.R,
                           cache_dir=args.cache)
    _save(img, args.out, args.pgm, args.cap)


def cmd_ghost(args):
    cfg = _load(args)
    geo = conf.geometry(cfg)
    if args.batch:
        require(args.outdir, "--batch requires --outdir")
        params = read_ghost_batch(args.batch, geo.L, geo.R)
        images = ghost_images(params, geo.image, args.subtract_baseline, nprocs=args.cores)
        for n, img in enumerate(images):
            _save(img, os.path.join(args.outdir, "ghost_{0:03d}".format(n)), args.pgm, args.cap)
        return
    require(args.family and args.a is not None and args.out, "ghost needs --family, --a and --out (or --batch)")
    p = GhostParams(args.family, args.a, b=args.b, l=args.l, L=geo.L, R=geo.R)
    _save(ghost_image(p, geo.image, args.subtract_baseline), args.out, args.pgm, args.cap)


def cmd_lr(args):
    phantom = read_field(args.phantom)
    antennas = AntennaArray.parse(args.positions)
    noise = NoiseSpec(args.noise, args.additive, args.seed)
    mode = 'via_radon' if args.mode in ('radon', 'via_radon') else args.mode
    dgrid = conf.data_grid(_load(args)) if mode == 'via_radon' else None
    reg = RegularizationSpec(args.eps, args.k, eta0_source=args.eta0)
    result = lr_pipeline(phantom, antennas, noise, mode=mode, resolver=args.resolver, reg=reg, dgrid=dgrid,
                         nprocs=args.cores)
    _save(result.image, args.out, args.pgm)
    if args.emit_intermediates:
        d = args.emit_intermediates
        for p, img in result.even_clean.items():
            write_field(os.path.join(d, "even_clean_{0:g}".format(p)), img)
        for p, img in result.even_noisy.items():
            write_field(os.path.join(d, "even_noisy_{0:g}".format(p)), img)
        for p, data in result.data.items():
            write_field(os.path.join(d, "data_{0:g}".format(p)), data)


def cmd_compare(args):
    a = read_field(args.a)
    b = read_field(args.b) if args.b else None
    disc = None
    if args.disc:
        x, y, r = _floats(args.disc)
        disc = Disc((x, y), r)
    require(b is not None or args.metric in ('plateau_amplitude', 'mirror_suppression_ratio'),
            "{0} needs --b", args.metric)
    print("{0} = {1!r}".format(args.metric, compare(a, b, args.metric, disc=disc)))


def cmd_scenario(args):
    if args.action == 'list':
        for name in sorted(SCENARIOS):
            print(name)
        return
    require(args.name, "scenario run needs a scenario name")
    outdir = args.out or args.name
    written = run_scenario(args.name, outdir, args.overrides, smoke=args.smoke, config=args.config,
                           nprocs=args.cores)
    print("Wrote {0} files to {1}".format(len(written), outdir))


def build_parser():
    parser = argparse.ArgumentParser(prog='sart', description="Spherical-average Radon toolkit")
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("Common options")
    group.add_argument("-v", "--verbose", dest='verbose', action='store_true', default=False,
                       help="Log progress at INFO level.")
    group.add_argument("--debug", dest='debug', action='store_true', default=False,
                       help="Log at DEBUG level.")
    group.add_argument("--config", "--geometry", "--grid", dest='config', type=str, default=None,
                       help="Configuration (INI) file or bundled scenario name.")
    group.add_argument("--set", dest='overrides', action='append', default=[], metavar='SECTION.KEY=VALUE',
                       help="Override one configuration entry. May be repeated.")
    group.add_argument("--cores", dest='cores', type=int, default=1,
                       help="Number of processes to use. Default: 1")
    group.add_argument("--pgm", dest='pgm', action='store_true', default=False,
                       help="Also write a 16-bit PGM render.")
    group.add_argument("--cap", dest='cap', type=float, default=None,
                       help="Clip |values| at this level in renders.")
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('phantom', parents=[common], help="Render the configured phantom.")
    p.add_argument("--out", dest='out', type=str, required=True, help="Output field.")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser('forward', parents=[common], help="Spherical means of an image.")
    g = p.add_argument_group("Forward model")
    g.add_argument("--image", dest='image', type=str, default=None, help="Input image field.")
    g.add_argument("--analytic", dest='analytic', action='store_true', default=False,
                   help="Exact means of the configured phantom instead of an image.")
    g.add_argument("--full-plane", dest='full_plane', action='store_true', default=False,
                   help="With --analytic: no mirror image below the track.")
    g.add_argument("--angles", dest='angles', type=int, default=None,
                   help="Angles per circle. Default: 4*max(nx, ny)")
    g.add_argument("--out", dest='out', type=str, required=True, help="Output data field.")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser('noise', parents=[common], help="Apply the noise model to a field.")
    g = p.add_argument_group("Noise")
    g.add_argument("--in", dest='infile', type=str, required=True, help="Input field.")
    g.add_argument("--percent", dest='percent', type=float, default=0.0,
                   help="Relative noise level as a fraction (0.1 = 10%%).")
    g.add_argument("--additive", dest='additive', type=float, default=0.01,
                   help="Additive noise relative to max|g|. Default: 0.01")
    g.add_argument("--seed", dest='seed', type=int, default=0)
    g.add_argument("--stream", dest='stream', type=int, default=0)
    g.add_argument("--out", dest='out', type=str, required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser('invert', parents=[common], help="Reconstruct an image from data.")
    p.add_argument("method", choices=['fbp', 'fourier', 'ortho'])
    g = p.add_argument_group("Inversion")
    g.add_argument("--data", dest='data', type=str, required=True, help="Input data field.")
    g.add_argument("--out", dest='out', type=str, required=True)
    g.add_argument("--continuation", dest='continuation', choices=['zero', 'approx'], default='zero',
                   help="fbp: continuation of the derivative beyond the last radius.")
    g.add_argument("--extension", dest='extension', type=float, default=2.0)
    g.add_argument("--tail-guard", dest='tail_guard', type=int, default=1)
    g.add_argument("--spectral-method", dest='spectral_method', choices=['grid', 'direct'], default='grid')
    g.add_argument("--kmax", dest='kmax', type=int, default=8, help="ortho: highest track index.")
    g.add_argument("--lmax", dest='lmax', type=int, default=None, help="ortho: highest range index. Default: kmax")
    g.add_argument("--cache", dest='cache', type=str, default=None, help="ortho: basis cache directory.")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser('ghost', parents=[common], help="Render ghost images.")
    g = p.add_argument_group("Ghost")
    g.add_argument("--family", dest='family', choices=['range', 'even', 'odd'], default=None)
    g.add_argument("--a", dest='a', type=float, default=None)
    g.add_argument("--b", dest='b', type=float, default=None)
    g.add_argument("--l", dest='l', type=int, default=None)
    g.add_argument("--subtract-baseline", dest='subtract_baseline', action='store_true', default=True,
                   help="Subtract the b = 0 member (default).")
    g.add_argument("--no-subtract-baseline", dest='subtract_baseline', action='store_false',
                   help="Keep the b = 0 member.")
    g.add_argument("--batch", dest='batch', type=str, default=None, help="CSV of parameter tuples.")
    g.add_argument("--outdir", dest='outdir', type=str, default=None)
    g.add_argument("--out", dest='out', type=str, default=None)
    p.set_defaults(func=cmd_ghost)

    p = sub.add_parser('lr', parents=[common], help="Left-right resolution.")
    p.add_argument("action", choices=['resolve'])
    g = p.add_argument_group("Left-right resolution")
    g.add_argument("--phantom", dest='phantom', type=str, required=True)
    g.add_argument("--positions", dest='positions', type=str, required=True, help="e.g. 0,1,3,8,19")
    g.add_argument("--noise", dest='noise', type=float, default=0.0)
    g.add_argument("--additive", dest='additive', type=float, default=0.01)
    g.add_argument("--seed", dest='seed', type=int, default=0)
    g.add_argument("--mode", dest='mode', choices=['direct', 'radon', 'via_radon'], default='direct')
    g.add_argument("--resolver", dest='resolver', choices=['exact', 'reg'], default='exact')
    g.add_argument("--eps", dest='eps', type=float, default=1e-2)
    g.add_argument("--k", dest='k', type=int, default=2)
    g.add_argument("--eta0", dest='eta0', choices=['reference', 'offset'], default='reference',
                   help="reg: even image supplying eta = 0.")
    g.add_argument("--out", dest='out', type=str, required=True)
    g.add_argument("--emit-intermediates", dest='emit_intermediates', type=str, default=None)
    p.set_defaults(func=cmd_lr)

    p = sub.add_parser('compare', parents=[common], help="Compare two images.")
    g = p.add_argument_group("Compare")
    g.add_argument("--a", dest='a', type=str, required=True)
    g.add_argument("--b", dest='b', type=str, default=None)
    g.add_argument("--metric", dest='metric', choices=METRICS, default='l2_relative')
    g.add_argument("--disc", dest='disc', type=str, default=None, help="x,y,radius of the object disc.")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('scenario', parents=[common], help="Run or list the bundled experiments.")
    p.add_argument("action", choices=['run', 'list'])
    p.add_argument("name", nargs='?', default=None)
    g = p.add_argument_group("Scenario")
    g.add_argument("--out", dest='out', type=str, default=None, help="Output directory. Default: the name.")
    g.add_argument("--smoke", dest='smoke', action='store_true', default=False,
                   help="Apply the scenario's [smoke] overrides.")
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, 'func', None):
        parser.print_help()
        return 1
    level = logging.DEBUG if args.debug else (logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValidationError as e:
        print("ERROR: {0}".format(e), file=sys.stderr)
        return 2
    except NumericError as e:
        print("ERROR: {0}".format(e), file=sys.stderr)
        return 3
    return 0
