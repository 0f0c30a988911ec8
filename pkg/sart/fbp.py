"""
Filtered backprojection f = c1 * H_y R*d g for the two dimensional ground plane.

R*d g(x, y) is the track integral of d/dy g(z, sqrt((x-z)^2 + y^2)); H_y is the
Hilbert transform along y with multiplier -i*sgn(eta). Missing data beyond the
track ends is either treated as zero or continued with closed form tail terms.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, check_finite, require
from .grids import Image, ImageGrid
from .parallel import run_strided

logger = logging.getLogger(__name__)


class ContinuationMode(enum.Enum):
    ZERO_FILL = 'zero_fill'
    APPROXIMATE = 'approximate'

    @classmethod
    def parse(cls, text):
        """Accept 'zero', 'zero_fill', 'approx' or 'approximate'."""
        if isinstance(text, cls):
            return text
        aliases = {'zero': cls.ZERO_FILL, 'zero_fill': cls.ZERO_FILL,
                   'approx': cls.APPROXIMATE, 'approximate': cls.APPROXIMATE}
        try:
            return aliases[str(text).strip().lower()]
        except KeyError:
            raise ValidationError("unknown continuation mode {0!r}; use zero or approx".format(text))


@dataclass(frozen=True)
class InversionConstants:
    """c1 = |S^1| / (2 * 2pi) in the plane."""
    c1: float = 0.5

    def __post_init__(self):
        require(self.c1 == 0.5, "the planar inversion constant is 1/2, got {0}", self.c1)


CONSTANTS = InversionConstants()


def hilbert_columns(values, axis=0):
    """
    Hilbert transform of every line along `axis` with multiplier -i*sgn(eta).
    The zero frequency and, for even lengths, the Nyquist bin are set to 0.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    freq = np.fft.fftfreq(n)
    mult = -1j * np.sign(freq)
    if n % 2 == 0:
        mult[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    spec = np.fft.fft(values, axis=axis) * mult.reshape(shape)
    return np.real(np.fft.ifft(spec, axis=axis))


def hilbert_y(img):
    """
    Hilbert transform of each image column.

    parameters
    ----------
    img : `Image`
        Needs at least 4 rows.

    return
    ------
    out : `Image`
    """
    require(img.grid.ny >= 4, "hilbert_y needs at least 4 rows, got {0}", img.grid.ny)
    return img.with_values(hilbert_columns(img.values, axis=0))


def _radius_interp(D, cols, rho, d_radius, radius_max):
    """Linear interpolation of D[:, cols] at radii rho; zero beyond radius_max."""
    n_r = D.shape[0]
    fr = rho / d_radius
    i0 = np.clip(np.floor(fr).astype(int), 0, n_r - 2)
    t = fr - i0
    vals = D[i0, cols] * (1 - t) + D[i0 + 1, cols] * t
    return np.where(rho <= radius_max * (1 + 1e-12), vals, 0.0)


def _backproject_rows(D, track, d_radius, radius_max, xs, ys, approx, guard, start=0, stride=1):
    """R*d g on rows ys[start::stride], every y > 0."""
    weights = np.full(len(track), track[1] - track[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    cols = np.arange(len(track))[None, :]
    rows = np.arange(start, len(ys), stride)
    out = np.empty((len(rows), len(xs)))
    for n, k in enumerate(rows):
        y = ys[k]
        rho = np.hypot(xs[:, None] - track[None, :], y)
        Dr = _radius_interp(D, cols, rho, d_radius, radius_max)
        val = (Dr * (y / rho)) @ weights
        if approx and y >= guard:
            for end, sign in ((0, -1.0), (len(track) - 1, 1.0)):
                z = track[end]
                rho_e = np.hypot(xs - z, y)
                De = _radius_interp(D, np.full(len(xs), end), rho_e, d_radius, radius_max)
                val += (0.5 * np.pi + sign * np.arctan((xs - z) / y)) * rho_e * De
        out[n, :] = val
    return rows, out


def backproject_deriv(data, igrid, mode=ContinuationMode.ZERO_FILL, tail_guard_rows=1, nprocs=1):
    """
    Derivative backprojection R*d g on an image grid.

    parameters
    ----------
    data : `DataField`
        Measured g(x, r).

    igrid : `ImageGrid`
        Output grid; the track row y = 0 must be one of its rows.

    mode : `ContinuationMode`
        ZERO_FILL treats data outside the track as 0. APPROXIMATE adds the
        closed form tails for z < track_min and z > track_max.

    tail_guard_rows : int
        Tails are only added on rows with |y| >= tail_guard_rows*dy.

    nprocs : int
        Worker processes, parallel over rows.

    return
    ------
    img : `Image`
        Odd in y; the track row is 0.
    """
    mode = ContinuationMode.parse(mode)
    require(igrid.track_row is not None, "image grid has no row on the track y = 0")
    dg = data.grid
    D = np.gradient(data.values, dg.d_radius, axis=0)

    y = igrid.y
    keys = np.round(np.abs(y) / igrid.dy, 6)
    uniq, inverse = np.unique(keys, return_inverse=True)
    positive = uniq > 0
    ys = uniq[positive] * igrid.dy
    approx = mode is ContinuationMode.APPROXIMATE
    logger.debug("backproject: %d distinct rows, %d columns, %d track nodes", len(ys), igrid.nx, dg.n_track)
    results = run_strided(_backproject_rows,
                          args=[D, dg.x, dg.d_radius, dg.radius_max, igrid.x, ys, approx,
                                tail_guard_rows * igrid.dy],
                          nprocs=nprocs)
    by_key = np.zeros((len(uniq), igrid.nx))
    pos_index = np.flatnonzero(positive)
    for rows, block in results:
        by_key[pos_index[rows], :] = block
    values = np.sign(y)[:, None] * by_key[inverse, :]
    values[igrid.track_row, :] = 0.0
    check_finite(values, "backprojection")
    return Image(igrid, values, {'continuation': mode.value, 'tail_guard_rows': tail_guard_rows})


def extended_grid(igrid, extension):
    """Symmetric grid with the columns of `igrid` and 2M+1 rows, M >= extension*max|y|/dy."""
    ymax = max(abs(igrid.y0), abs(igrid.y_max))
    m = max(int(math.ceil(extension * ymax / igrid.dy - 1e-9)), int(round(ymax / igrid.dy)), 2)
    return ImageGrid.symmetric(igrid.nx, m, igrid.dx, igrid.dy, igrid.x0)


def rows_in(ext, igrid):
    """Row indices of the extended grid matching the rows of `igrid`."""
    return np.rint((igrid.y - ext.y0) / ext.dy).astype(int)


def invert_fbp(data, igrid, mode=ContinuationMode.ZERO_FILL, extension=2.0, tail_guard_rows=1, nprocs=1):
    """
    Reconstruct f = c1 * H_y R*d g on `igrid`.

    The odd backprojection is formed on a symmetric grid reaching `extension`
    times further from the track than `igrid`, Hilbert transformed there and
    cut back to the rows of `igrid`.

    parameters
    ----------
    data : `DataField`

    igrid : `ImageGrid`
        Rows must sit on integer multiples of dy.

    mode : `ContinuationMode`

    extension : float
        Row extent of the intermediate symmetric grid relative to `igrid`.

    tail_guard_rows : int

    nprocs : int

    return
    ------
    img : `Image`
    """
    mode = ContinuationMode.parse(mode)
    require(igrid.rows_aligned, "image rows must be integer multiples of dy (y0={0}, dy={1})", igrid.y0, igrid.dy)
    require(extension >= 1, "extension must be >= 1, got {0}", extension)
    ext = extended_grid(igrid, extension)
    bp = backproject_deriv(data, ext, mode, tail_guard_rows=tail_guard_rows, nprocs=nprocs)
    filtered = hilbert_columns(bp.values, axis=0)
    values = CONSTANTS.c1 * filtered[rows_in(ext, igrid), :]
    check_finite(values, "fbp reconstruction")
    logger.info("fbp reconstruction on %dx%d grid (%s)", igrid.nx, igrid.ny, mode.value)
    return Image(igrid, values, {'method': 'fbp', 'continuation': mode.value, 'c1': CONSTANTS.c1,
                                 'laplacian_power': 0, 'tail_guard_rows': tail_guard_rows,
                                 'extension': extension})
