"""
Shared machinery for reflectivities whose data is separable in track and range.

For data A(x) B(r) the inversion reduces to

    f(x, y) = c1 * H_y d/dy P(x, y),   P(x, y) = int A(t) B(sqrt((x-t)^2 + y^2)) dt,

with P even in y. The basis reconstructions and the ghost images both go
through `render_even_kernel`; the track integrals use `arcsine_nodes`, which
absorb inverse square root singularities at either end of an interval.
"""

import logging

import numpy as np

from .fbp import CONSTANTS, extended_grid, hilbert_columns, rows_in

logger = logging.getLogger(__name__)


def arcsine_nodes(lo, hi, n):
    """
    Midpoint rule in phi for t = c + h*sin(phi), phi in (-pi/2, pi/2).

    parameters
    ----------
    lo, hi : array-like
        Interval ends, shape (p,). Empty intervals (hi <= lo) get zero weights.

    n : int
        Nodes per interval.

    return
    ------
    t : `numpy.ndarray`
        Nodes, shape (p, n).

    weight : `numpy.ndarray`
        h*cos(phi)*dphi, shape (p, n).

    above, below : `numpy.ndarray`
        t - lo and hi - t, formed without cancellation.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    c = 0.5 * (lo + hi)
    h = np.clip(0.5 * (hi - lo), 0.0, None)
    phi = -0.5 * np.pi + (np.arange(n) + 0.5) * (np.pi / n)
    s = np.sin(phi)
    t = c[:, None] + h[:, None] * s[None, :]
    weight = h[:, None] * np.cos(phi)[None, :] * (np.pi / n)
    above = h[:, None] * (1 + s)[None, :]
    below = h[:, None] * (1 - s)[None, :]
    return t, weight, above, below


def half_rows(ext):
    """Rows y >= 0 of a symmetric grid."""
    return ext.y[ext.track_row:]


def render_even_kernel(evaluate, igrid, extension=2.0):
    """
    f = c1 * H_y d/dy P for a kernel P that is even in y.

    parameters
    ----------
    evaluate : callable
        evaluate(x, y) -> P with x of shape (nx,) and y of shape (m,) (rows with
        y >= 0); returns shape (..., m, nx).

    igrid : `ImageGrid`
        Output grid, rows on integer multiples of dy.

    extension : float
        Rows of the intermediate symmetric grid reach `extension` times further
        than `igrid`.

    return
    ------
    values : `numpy.ndarray`
        Shape (..., ny, nx).
    """
    ext = extended_grid(igrid, extension)
    P_half = np.asarray(evaluate(ext.x, half_rows(ext)))
    P = np.concatenate([P_half[..., :0:-1, :], P_half], axis=-2)
    dP = np.gradient(P, ext.dy, axis=-2)
    f = CONSTANTS.c1 * hilbert_columns(dP, axis=-2)
    return f[..., rows_in(ext, igrid), :]
