"""
Scalar comparisons between reconstructions and references.
"""

import logging

import numpy as np

from .errors import ValidationError, require
from .grids import disc_mask, require_same_grid

logger = logging.getLogger(__name__)

METRICS = ('l2_relative', 'linf', 'plateau_amplitude', 'mirror_suppression_ratio')


def _masked(img, region):
    if region is None:
        return img.values.ravel()
    region = np.asarray(region, dtype=bool)
    require(region.shape == img.grid.shape, "region mask has shape {0}, image {1}", region.shape, img.grid.shape)
    return img.values[region]


def l2_relative(a, b, region=None):
    """||a - b|| / ||b||; 0 when both vanish."""
    require_same_grid(a, b)
    diff = np.linalg.norm(_masked(a, region) - _masked(b, region))
    ref = np.linalg.norm(_masked(b, region))
    if ref == 0:
        return 0.0 if diff == 0 else float('inf')
    return float(diff / ref)


def linf(a, b, region=None):
    """max |a - b|."""
    require_same_grid(a, b)
    d = _masked(a, region) - _masked(b, region)
    return float(np.max(np.abs(d))) if d.size else 0.0


def plateau_amplitude(img, disc, erode_pixels=3):
    """Mean value inside `disc` after eroding its edge by `erode_pixels` samples."""
    mask = disc_mask(img.grid, disc, erode_pixels * max(img.grid.dx, img.grid.dy))
    require(mask.any(), "no samples left inside the eroded disc")
    return float(np.mean(img.values[mask]))


def mirror_suppression_ratio(img, disc):
    """max |img| over the mirrored disc divided by max |img| over the disc."""
    true = disc_mask(img.grid, disc)
    mirror = disc_mask(img.grid, disc.mirrored())
    require(true.any() and mirror.any(), "disc or its mirror image holds no samples")
    peak = float(np.max(np.abs(img.values[true])))
    if peak == 0:
        return float('inf')
    return float(np.max(np.abs(img.values[mirror]))) / peak


def near_object_mae(a, b, disc, margin):
    """Mean |a - b| within `margin` of the disc boundary, inside or out."""
    require_same_grid(a, b)
    X, Y = a.grid.mesh()
    d = np.hypot(X - disc.center[0], Y - disc.center[1])
    band = np.abs(d - disc.radius) <= margin
    require(band.any(), "no samples within {0} of the disc edge", margin)
    return float(np.mean(np.abs(a.values[band] - b.values[band])))


def dip_location(img, disc=None, margin=0.0):
    """(x, y) of the most negative sample, ignoring `disc` grown by `margin`."""
    X, Y = img.grid.mesh()
    keep = np.ones(img.grid.shape, dtype=bool)
    if disc is not None:
        keep = np.hypot(X - disc.center[0], Y - disc.center[1]) > disc.radius + margin
    require(keep.any(), "no samples outside the disc")
    k = int(np.argmin(np.where(keep, img.values, np.inf)))
    return float(X.flat[k]), float(Y.flat[k])


def end_circle_offset(point, ends, disc):
    """
    Distance of `point` from the closest circle centred at a track end point that
    passes through the disc centre. Offsets up to disc.radius lie on a circle
    about that end which meets the disc.
    """
    xc, yc = disc.center
    return float(min(abs(np.hypot(point[0] - e, point[1]) - np.hypot(xc - e, yc)) for e in ends))


def compare(a, b, metric, region=None, disc=None):
    """
    Evaluate one metric.

    parameters
    ----------
    a : `Image`
        Reconstruction.

    b : `Image` or None
        Reference; unused by plateau_amplitude and mirror_suppression_ratio.

    metric : str
        One of `METRICS`.

    region : array-like of bool or None
        Restricts l2_relative and linf.

    disc : `Disc` or None
        Needed by plateau_amplitude and mirror_suppression_ratio.

    return
    ------
    value : float
    """
    if metric == 'l2_relative':
        return l2_relative(a, b, region)
    if metric == 'linf':
        return linf(a, b, region)
    if metric in ('plateau_amplitude', 'mirror_suppression_ratio'):
        require(disc is not None, "{0} needs a disc", metric)
        if metric == 'plateau_amplitude':
            return plateau_amplitude(a, disc)
        return mirror_suppression_ratio(a, disc)
    raise ValidationError("unknown metric {0!r}; choose from {1}".format(metric, ', '.join(METRICS)))
