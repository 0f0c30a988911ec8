"""
Discrete spherical Radon transform and the measurement noise model.

The projector averages the reflectivity over circles centred on the track
(y = 0). Images whose grid starts at or above the track describe a half plane
and are read through their even extension f(x, |y|); images that reach below
the track are integrated over the full circle, which only sees their even part.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import ive

from .errors import ValidationError, check_finite, require
from .grids import DataField
from .parallel import run_strided

logger = logging.getLogger(__name__)

MIN_ANGLES = 8


@dataclass(frozen=True)
class NoiseSpec:
    """
    out = g*(1 + percent*N1) + percent*additive_scale*max|g|*N2

    `percent` is a fraction (0.10 means ten percent).
    """
    percent: float = 0.0
    additive_scale: float = 0.01
    seed: int = 0

    def __post_init__(self):
        require(self.percent >= 0, "noise percent must be >= 0, got {0}", self.percent)
        require(self.additive_scale >= 0, "additive_scale must be >= 0, got {0}", self.additive_scale)
        require(int(self.seed) == self.seed and self.seed >= 0, "seed must be a non-negative integer")

    def describe(self):
        return "relative={0} additive_scale={1} seed={2}".format(self.percent, self.additive_scale, self.seed)


def default_angles(grid):
    return max(MIN_ANGLES, 4 * max(grid.nx, grid.ny))


def _project_rows(padded, origin, spacing, mirror, track, radii, cos_t, sin_t, start=0, stride=1):
    """Circular means for radius rows start, start+stride, ..."""
    x0, y0 = origin
    dx, dy = spacing
    rows = np.arange(start, len(radii), stride)
    out = np.empty((len(rows), len(track)))
    for n, j in enumerate(rows):
        r = radii[j]
        X = track[:, None] + r * cos_t[None, :]
        Y = np.broadcast_to(r * sin_t[None, :], X.shape)
        if mirror:
            Y = np.abs(Y)
        # +1 accounts for the zero border
        coords = [((Y - y0) / dy + 1).ravel(), ((X - x0) / dx + 1).ravel()]
        vals = ndimage.map_coordinates(padded, coords, order=1, mode='constant', cval=0.0)
        out[n, :] = vals.reshape(X.shape).mean(axis=1)
    return rows, out


def forward(img, dgrid, n_angles=None, nprocs=1):
    """
    Circular means g(x_i, r_j) = (1/2pi) sum_m f(x_i + r_j cos t_m, r_j sin t_m) dt.

    parameters
    ----------
    img : `Image`
        Reflectivity. Samples outside the grid read as 0.

    dgrid : `DataGrid`
        Track and radius sampling of the output.

    n_angles : int or None
        Number of uniform angles on [0, 2pi). None -> 4*max(nx, ny).

    nprocs : int
        Worker processes, parallel over radius rows.

    return
    ------
    data : `DataField`
    """
    if n_angles is None:
        n_angles = default_angles(img.grid)
    require(n_angles >= MIN_ANGLES, "n_angles must be >= {0}, got {1}", MIN_ANGLES, n_angles)
    if not np.all(np.isfinite(img.values)):
        raise ValidationError("image holds non-finite values")

    g = img.grid
    mirror = g.y0 >= 0
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    padded = np.pad(img.values, 1)
    logger.debug("forward: %d radii x %d track points x %d angles", dgrid.n_radius, dgrid.n_track, n_angles)
    results = run_strided(_project_rows,
                          args=[padded, (g.x0, g.y0), (g.dx, g.dy), mirror, dgrid.x, dgrid.r,
                                np.cos(theta), np.sin(theta)],
                          nprocs=nprocs)
    values = np.empty(dgrid.shape)
    for rows, block in results:
        values[rows, :] = block
    return DataField(dgrid, values, {'n_angles': n_angles,
                                     'scene': 'half_plane' if mirror else 'full_plane'})


def _interval_overlap(lo, hi, a, b):
    return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)


def _disc_means(disc, x, r, mirror):
    xc, yc = disc.center
    rho = disc.radius
    dxc = xc - x
    d = np.hypot(dxc, yc)
    with np.errstate(divide='ignore', invalid='ignore'):
        cos_a = (d ** 2 + r ** 2 - rho ** 2) / (2 * d * r)
    alpha = np.arccos(np.clip(np.nan_to_num(cos_a, nan=1.0), -1.0, 1.0))
    # degenerate circles: a point, or a circle about the disc centre
    point = (r == 0) | (d == 0)
    inside = d + r <= rho
    alpha = np.where(point, np.where(inside, np.pi, 0.0), alpha)
    if not mirror:
        frac = alpha / np.pi
    else:
        phi = np.arctan2(yc, dxc)
        lo, hi = phi - alpha, phi + alpha
        meas = sum(_interval_overlap(lo + s, hi + s, 0.0, np.pi) for s in (-2 * np.pi, 0.0, 2 * np.pi))
        frac = np.minimum(meas / np.pi, 1.0)
    return disc.amplitude * frac


def _blob_means(blob, x, r, mirror):
    xc, yc = blob.center
    s2 = blob.sigma ** 2
    d = np.hypot(xc - x, yc)
    mean = blob.amplitude * np.exp(-(r - d) ** 2 / (2 * s2)) * ive(0, r * d / s2)
    return 2 * mean if mirror else mean


def forward_analytic(spec, dgrid, mirror=True):
    """
    Exact circular means of a disc/blob phantom.

    parameters
    ----------
    spec : `PhantomSpec`

    dgrid : `DataGrid`

    mirror : bool
        True reads the scene through f(x, |y|) (a half plane scene counted twice).
        Blob means are doubled, which is accurate while the blob sits at least
        four sigma above the track.

    return
    ------
    data : `DataField`
    """
    X, Rr = np.meshgrid(dgrid.x, dgrid.r)
    values = np.zeros(dgrid.shape)
    for disc in spec.discs:
        values += _disc_means(disc, X, Rr, mirror)
    for blob in spec.blobs:
        if mirror and abs(blob.center[1]) < 4 * blob.sigma:
            logger.warning("blob at y=%g is within 4 sigma of the track; mirrored mean is approximate",
                           blob.center[1])
        values += _blob_means(blob, X, Rr, mirror)
    return DataField(dgrid, values, {'generator': 'analytic', 'scene': 'half_plane' if mirror else 'full_plane'})


def noise_generator(seed, stream=0):
    """Counter based generator: deviates are a pure function of (seed, stream, position)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def add_noise(data, spec, stream=0):
    """
    Apply the relative plus additive Gaussian noise model.

    parameters
    ----------
    data : `DataField` or `Image`
        Field to perturb.

    spec : `NoiseSpec`

    stream : int
        Independent stream index; distinct fields noised with one seed use
        distinct streams.

    return
    ------
    noisy : same type as `data`
    """
    g = data.values
    if spec.percent == 0:
        return data.with_values(g.copy(), noise=spec.describe(), noise_stream=stream)
    rng = noise_generator(spec.seed, stream)
    n1 = rng.standard_normal(g.shape)
    n2 = rng.standard_normal(g.shape)
    scale = float(np.max(np.abs(g))) if g.size else 0.0
    out = g * (1 + spec.percent * n1) + spec.percent * spec.additive_scale * scale * n2
    check_finite(out, "noisy field")
    return data.with_values(out, noise=spec.describe(), noise_stream=stream)
