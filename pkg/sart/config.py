"""
INI configuration for geometries, phantoms, noise and scenarios.

Sections
--------
[image]      nx, ny (or ny_half for a grid symmetric about the track), dx, dy, x0, y0
[data]       track_min, track_max, radius_max, d_track, d_radius
[geometry]   L, R, extent
[phantom.*]  type = disc | blob | cross plus the primitive's parameters
[noise]      percent, additive_scale, seed
[scenario]   name plus scenario specific keys
[smoke]      section.key = value overrides applied in smoke mode
"""

import configparser
import logging
import os
from dataclasses import dataclass

from .data_load import scenario_path
from .errors import ValidationError, require
from .forward import NoiseSpec
from .grids import DataGrid, Disc, GaussianBlob, ImageGrid, PhantomSpec, cross_phantom

logger = logging.getLogger(__name__)


def new_parser():
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.optionxform = str
    return cfg


def split_override(text):
    """'section.key=value' -> (section, key, value); the key follows the last dot."""
    lhs, sep, value = str(text).partition('=')
    name, dot, key = lhs.strip().rpartition('.')
    if not sep or not dot or not name or not key:
        raise ValidationError("override {0!r} is not of the form section.key=value".format(text))
    return name, key, value.strip()


def apply_overrides(cfg, overrides):
    for item in overrides or ():
        section, key, value = split_override(item)
        if not cfg.has_section(section):
            cfg.add_section(section)
        cfg.set(section, key, value)
        logger.debug("override %s.%s = %s", section, key, value)
    return cfg


def load_config(source, overrides=(), smoke=False):
    """
    Read a configuration file.

    parameters
    ----------
    source : str
        File name, or the name of a bundled scenario.

    overrides : list of str
        'section.key=value' entries applied last.

    smoke : bool
        Apply the [smoke] section before the overrides.

    return
    ------
    cfg : `configparser.ConfigParser`
    """
    path = source if os.path.exists(str(source)) else scenario_path(str(source))
    require(os.path.exists(path), "configuration {0!r} not found", source)
    cfg = new_parser()
    try:
        cfg.read(path)
    except configparser.Error as e:
        raise ValidationError("cannot parse {0}: {1}".format(path, e))
    if smoke:
        require(cfg.has_section('smoke'), "{0} has no [smoke] section", path)
        apply_overrides(cfg, ["{0}={1}".format(k, v) for k, v in cfg.items('smoke')])
    apply_overrides(cfg, overrides)
    return cfg


def _get(cfg, section, key, kind, default):
    if not cfg.has_option(section, key):
        if default is ValidationError:
            raise ValidationError("missing {0}.{1}".format(section, key))
        return default
    text = cfg.get(section, key)
    try:
        if kind is bool:
            return cfg.getboolean(section, key)
        return kind(text)
    except ValueError:
        raise ValidationError("{0}.{1} = {2!r} is not a valid {3}".format(section, key, text, kind.__name__))


def get_float(cfg, section, key, default=ValidationError):
    return _get(cfg, section, key, float, default)


def get_int(cfg, section, key, default=ValidationError):
    return _get(cfg, section, key, int, default)


def get_str(cfg, section, key, default=ValidationError):
    return _get(cfg, section, key, str, default)


def get_bool(cfg, section, key, default=ValidationError):
    return _get(cfg, section, key, bool, default)


def get_list(cfg, section, key, kind=float, default=ValidationError, sep=','):
    """Comma separated list; ';' separates groups when `sep` is ';'."""
    text = _get(cfg, section, key, str, None)
    if text is None:
        if default is ValidationError:
            raise ValidationError("missing {0}.{1}".format(section, key))
        return default
    try:
        return [kind(t.strip()) for t in text.split(sep) if t.strip()]
    except ValueError:
        raise ValidationError("{0}.{1} = {2!r} is not a list of {3}".format(section, key, text, kind.__name__))


def image_grid(cfg, section='image'):
    """ImageGrid from a section; ny_half selects the symmetric constructor."""
    require(cfg.has_section(section), "missing [{0}] section", section)
    nx = get_int(cfg, section, 'nx')
    dx = get_float(cfg, section, 'dx', 1.0)
    dy = get_float(cfg, section, 'dy', 1.0)
    if cfg.has_option(section, 'ny_half'):
        return ImageGrid.symmetric(nx, get_int(cfg, section, 'ny_half'), dx, dy,
                                   get_float(cfg, section, 'x0', None))
    return ImageGrid(nx, get_int(cfg, section, 'ny'), dx, dy, get_float(cfg, section, 'x0', 0.0),
                     get_float(cfg, section, 'y0', 0.0))


def data_grid(cfg, section='data'):
    require(cfg.has_section(section), "missing [{0}] section", section)
    return DataGrid.from_bounds(get_float(cfg, section, 'track_min'), get_float(cfg, section, 'track_max'),
                                get_float(cfg, section, 'radius_max'), get_float(cfg, section, 'd_track', 1.0),
                                get_float(cfg, section, 'd_radius', 1.0))


def _center(cfg, section):
    return (get_float(cfg, section, 'x'), get_float(cfg, section, 'y'))


def phantom(cfg, prefix='phantom.'):
    """PhantomSpec summed over every [phantom.*] section."""
    spec = PhantomSpec()
    names = [s for s in cfg.sections() if s.startswith(prefix)]
    for s in names:
        kind = get_str(cfg, s, 'type', 'disc')
        amp = get_float(cfg, s, 'amplitude', 1.0)
        if kind == 'disc':
            spec = spec + PhantomSpec((Disc(_center(cfg, s), get_float(cfg, s, 'radius'), amp),))
        elif kind == 'blob':
            spec = spec + PhantomSpec(blobs=(GaussianBlob(_center(cfg, s), get_float(cfg, s, 'sigma'), amp),))
        elif kind == 'cross':
            spec = spec + cross_phantom(_center(cfg, s), get_float(cfg, s, 'radius'), amp,
                                        get_float(cfg, s, 'small_radius'), get_float(cfg, s, 'small_amplitude'),
                                        get_float(cfg, s, 'spacing'))
        else:
            raise ValidationError("[{0}] has unknown type {1!r}; use disc, blob or cross".format(s, kind))
    return spec


def main_disc(cfg, prefix='phantom.'):
    """The first disc phantom section, the object most metrics refer to."""
    spec = phantom(cfg, prefix)
    require(len(spec.discs) > 0, "configuration holds no disc phantom")
    return spec.discs[0]


def noise_spec(cfg, section='noise'):
    if not cfg.has_section(section):
        return NoiseSpec()
    return NoiseSpec(get_float(cfg, section, 'percent', 0.0), get_float(cfg, section, 'additive_scale', 0.01),
                     get_int(cfg, section, 'seed', 0))


@dataclass(frozen=True)
class GeometryConfig:
    """Image and data sampling plus the measured region."""
    image: ImageGrid
    data: DataGrid
    L: float
    R: float
    extent: float = 1.0

    def __post_init__(self):
        require(self.L > 0 and self.R > 0, "L and R must be positive")
        require(self.extent >= 1, "extent multiplier must be >= 1, got {0}", self.extent)


def geometry(cfg):
    """GeometryConfig; L and R default to the data grid's half track and radius_max."""
    dg = data_grid(cfg)
    return GeometryConfig(image_grid(cfg), dg, get_float(cfg, 'geometry', 'L', dg.half_track),
                          get_float(cfg, 'geometry', 'R', dg.radius_max),
                          get_float(cfg, 'geometry', 'extent', 1.0))


def resolved_lines(cfg):
    """'section.key = value' for every entry, in file order; used in report headers."""
    return ["{0}.{1} = {2}".format(s, k, v) for s in cfg.sections() for k, v in cfg.items(s)]
