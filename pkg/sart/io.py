"""
Reading and writing fields, profiles, renders and metric tables.

Fields are stored as a raw little-endian payload (``<stem>.raw``) plus a text
header (``<stem>.hdr``). Names ending in ``.fits`` go through astropy instead.
Every writer replaces its target atomically: the payload is written first, the
header last, each to a temporary name that is then renamed into place.
"""

import configparser
import logging
import os
import tempfile

import numpy as np
from astropy.io import fits
from astropy.table import Table

from .errors import ValidationError, require
from .grids import DataField, DataGrid, Image, ImageGrid, Profile
from .spectral import SpectralField

logger = logging.getLogger(__name__)

__all__ = ['field_paths', 'write_field', 'read_field', 'write_fits', 'read_fits',
           'write_pgm', 'write_profile', 'read_profile', 'write_table']


def field_paths(path):
    """Return (payload, header) file names for `path` (with or without extension)."""
    stem, ext = os.path.splitext(str(path))
    if ext not in ('.raw', '.hdr'):
        stem = str(path)
    return stem + '.raw', stem + '.hdr'


def _atomic_write(path, writer, mode='wb'):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        with os.fdopen(fd, mode) as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _describe(field):
    """Header entries for a field: kind, shape, spacing, origin and names."""
    if isinstance(field, Image):
        g = field.grid
        return dict(kind='image', shape=(g.ny, g.nx), spacing=(g.dy, g.dx), origin=(g.y0, g.x0),
                    dtype='float64')
    if isinstance(field, DataField):
        g = field.grid
        return dict(kind='data', shape=g.shape, spacing=(g.d_radius, g.d_track), origin=(0.0, g.track_min),
                    dtype='float64')
    if isinstance(field, SpectralField):
        def step(c):
            return float(c[1] - c[0]) if len(c) > 1 else 1.0
        return dict(kind='spectrum', shape=field.values.shape, spacing=(step(field.rows), step(field.cols)),
                    origin=(float(field.rows[0]), float(field.cols[0])), dtype='complex128',
                    row_name=field.row_name, col_name=field.col_name)
    raise ValidationError("cannot write object of type {0}".format(type(field).__name__))


def _fmt(values):
    return ', '.join(repr(float(v)) if not isinstance(v, (int, np.integer)) else str(int(v)) for v in values)


def write_field(path, field):
    """
    Write an Image, DataField or SpectralField.

    parameters
    ----------
    path : str
        Output name. ``.fits`` selects FITS, anything else the raw format.

    field : `Image`, `DataField` or `SpectralField`

    return
    ------
    written : list of str
    """
    if str(path).lower().endswith('.fits'):
        return [write_fits(path, field)]
    desc = _describe(field)
    payload, header = field_paths(path)
    dtype = '<c16' if desc['dtype'] == 'complex128' else '<f8'
    data = np.ascontiguousarray(field.values, dtype=dtype)
    _atomic_write(payload, lambda fh: fh.write(data.tobytes(order='C')))

    cfg = configparser.ConfigParser(interpolation=None)
    cfg['field'] = {'kind': desc['kind'], 'ndim': '2', 'shape': _fmt(desc['shape']),
                    'spacing': _fmt(desc['spacing']), 'origin': _fmt(desc['origin']),
                    'dtype': desc['dtype'], 'byteorder': 'little'}
    for key in ('row_name', 'col_name'):
        if key in desc:
            cfg['field'][key] = desc[key]
    if isinstance(field, DataField):
        cfg['field']['radius_max'] = repr(float(field.grid.radius_max))
    cfg['meta'] = {str(k): str(v) for k, v in field.meta.items()}
    _atomic_write(header, cfg.write, mode='w')
    logger.info("Wrote %s", payload)
    return [payload, header]


def _floats(text):
    return [float(t) for t in text.split(',')]


def read_field(path):
    """Read a field written by `write_field`."""
    if str(path).lower().endswith('.fits'):
        return read_fits(path)
    payload, header = field_paths(path)
    require(os.path.exists(header), "missing header file {0}", header)
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.read(header)
    f = cfg['field']
    shape = tuple(int(s) for s in f['shape'].split(','))
    dy, dx = _floats(f['spacing'])
    y0, x0 = _floats(f['origin'])
    dtype = '<c16' if f.get('dtype') == 'complex128' else '<f8'
    values = np.fromfile(payload, dtype=dtype)
    require(values.size == shape[0] * shape[1], "{0} holds {1} samples, header says {2}",
            payload, values.size, shape)
    values = values.reshape(shape)
    meta = dict(cfg['meta']) if cfg.has_section('meta') else {}
    kind = f['kind']
    if kind == 'image':
        return Image(ImageGrid(shape[1], shape[0], dx, dy, x0, y0), values, meta)
    if kind == 'data':
        grid = DataGrid(n_track=shape[1], n_radius=shape[0], d_track=dx, d_radius=dy, track_min=x0,
                        track_max=x0 + (shape[1] - 1) * dx, radius_max=(shape[0] - 1) * dy)
        return DataField(grid, values, meta)
    if kind == 'spectrum':
        rows = y0 + dy * np.arange(shape[0])
        cols = x0 + dx * np.arange(shape[1])
        return SpectralField(values, rows, cols, f.get('row_name', 'eta'), f.get('col_name', 'xi'), meta)
    raise ValidationError("unknown field kind {0!r} in {1}".format(kind, header))


def write_fits(path, field):
    """Write an Image or DataField as a FITS primary HDU with linear axis keywords."""
    desc = _describe(field)
    require(desc['kind'] != 'spectrum', "spectra are written in the raw format only")
    hdu = fits.PrimaryHDU(data=np.asarray(field.values, dtype=np.float64))
    hdr = hdu.header
    hdr['KIND'] = desc['kind']
    (dy, dx), (y0, x0) = desc['spacing'], desc['origin']
    hdr['CRPIX1'], hdr['CRVAL1'], hdr['CDELT1'] = 1, x0, dx
    hdr['CRPIX2'], hdr['CRVAL2'], hdr['CDELT2'] = 1, y0, dy
    hdr['CTYPE1'] = 'X' if desc['kind'] == 'image' else 'TRACK'
    hdr['CTYPE2'] = 'Y' if desc['kind'] == 'image' else 'RADIUS'
    for k, v in field.meta.items():
        hdr.add_history("{0}={1}".format(k, v))
    _atomic_write(path, lambda fh: hdu.writeto(fh))
    logger.info("Wrote %s", path)
    return path


def read_fits(path):
    with fits.open(path) as hdul:
        hdr = hdul[0].header
        values = np.array(hdul[0].data, dtype=float)
        meta = {}
        for card in hdr.get('HISTORY', []):
            key, _, val = str(card).partition('=')
            meta[key] = val
        kind = hdr.get('KIND', 'image')
        dx, x0, dy, y0 = hdr['CDELT1'], hdr['CRVAL1'], hdr['CDELT2'], hdr['CRVAL2']
    ny, nx = values.shape
    if kind == 'data':
        grid = DataGrid(n_track=nx, n_radius=ny, d_track=dx, d_radius=dy, track_min=x0,
                        track_max=x0 + (nx - 1) * dx, radius_max=(ny - 1) * dy)
        return DataField(grid, values, meta)
    return Image(ImageGrid(nx, ny, dx, dy, x0, y0), values, meta)


def write_pgm(path, values, cap=None):
    """
    16-bit PGM render, linearly mapped from [min, max] to [0, 65535].

    The first sample row is written last so that y increases upwards. `cap`
    clips |values| before scaling. The mapping is recorded in a comment line.
    """
    v = np.asarray(values, dtype=float)
    if cap is not None:
        v = np.clip(v, -cap, cap)
    lo, hi = float(v.min()), float(v.max())
    scale = (hi - lo) if hi > lo else 1.0
    pix = np.rint((v - lo) / scale * 65535).astype('>u2')[::-1, :]
    head = "P5\n# min={0!r} max={1!r}\n{2} {3}\n65535\n".format(lo, hi, v.shape[1], v.shape[0])
    _atomic_write(path, lambda fh: (fh.write(head.encode('ascii')), fh.write(pix.tobytes())))
    logger.info("Wrote %s", path)
    return path


def write_profile(path, profile):
    """Two column CSV: coordinate and value."""
    tab = Table([profile.coords, profile.values], names=(profile.axis, 'value'))
    tab.meta['comments'] = ["axis={0} position={1!r}".format(profile.axis, profile.position)]
    write_table(tab, path)
    return path


def read_profile(path):
    tab = Table.read(path, format='ascii.basic', delimiter=',')
    axis = tab.colnames[0]
    return Profile(np.array(tab[axis], dtype=float), np.array(tab['value'], dtype=float), axis=axis)


def write_table(tab, path):
    """
    Write an astropy table as comma separated text. Entries of
    tab.meta['comments'] become leading "# " lines.
    """
    _atomic_write(path, lambda fh: tab.write(fh, format='ascii.basic', delimiter=','), mode='w')
    logger.info("Wrote %s", path)
    return path
