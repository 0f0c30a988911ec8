"""
Grids, fields, phantoms and profiles shared by every other module.

Images are stored with shape (ny, nx) so that ``values[j, i]`` is the sample at
``(x0 + i*dx, y0 + j*dy)``. Data fields are stored with shape
(n_radius, n_track) so that ``values[j, i]`` is g(track_min + i*d_track, j*d_radius).
"""

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Tuple

import numpy as np
from scipy import ndimage

from .errors import ValidationError, require

# relative tolerance used when checking that grid coordinates line up
ALIGN_TOL = 1e-9


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ImageGrid:
    """A uniform grid in the ground plane. The flight track is the line y = 0."""
    nx: int
    ny: int
    dx: float = 1.0
    dy: float = 1.0
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        require(self.nx >= 2 and self.ny >= 2, "image grid needs nx, ny >= 2, got {0}x{1}", self.nx, self.ny)
        require(self.dx > 0 and self.dy > 0, "image grid spacing must be positive, got dx={0} dy={1}", self.dx, self.dy)
        if self.y0 <= 0.0 <= self.y_max:
            require(self.track_row is not None,
                    "y = 0 lies inside the image rows but is not a sample row (y0={0}, dy={1})", self.y0, self.dy)

    @classmethod
    def symmetric(cls, nx, ny_half, dx=1.0, dy=1.0, x0=None):
        """
        Grid with 2*ny_half+1 rows placed symmetrically about the track.
        `x0` defaults to centring the columns on x = 0.
        """
        if x0 is None:
            x0 = -0.5 * (nx - 1) * dx
        return cls(nx=nx, ny=2 * ny_half + 1, dx=dx, dy=dy, x0=x0, y0=-ny_half * dy)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def y(self):
        return self.y0 + self.dy * np.arange(self.ny)

    @property
    def x_max(self):
        return self.x0 + (self.nx - 1) * self.dx

    @property
    def y_max(self):
        return self.y0 + (self.ny - 1) * self.dy

    def mesh(self):
        """Return (X, Y) coordinate arrays of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y)

    @property
    def track_row(self):
        """Index of the row on y = 0, or None if the track is not a sample row."""
        j = -self.y0 / self.dy
        jr = int(round(j))
        if 0 <= jr < self.ny and abs(j - jr) < ALIGN_TOL * max(1.0, abs(j)):
            return jr
        return None

    @property
    def rows_aligned(self):
        """True when every row sits on an integer multiple of dy."""
        j = self.y0 / self.dy
        return abs(j - round(j)) < ALIGN_TOL * max(1.0, abs(j))

    @property
    def is_symmetric(self):
        """True when the rows are mirror images of each other about y = 0."""
        return self.track_row is not None and 2 * self.track_row == self.ny - 1

    def row_index(self, y):
        return int(round((y - self.y0) / self.dy))

    def column_index(self, x):
        return int(round((x - self.x0) / self.dx))

    def shifted(self, dy0):
        """The same grid with every row moved by `dy0`."""
        return replace(self, y0=self.y0 + dy0)


@dataclass(frozen=True)
class DataGrid:
    """Track-by-radius sampling of the measured data g(x, r)."""
    n_track: int
    n_radius: int
    d_track: float
    d_radius: float
    track_min: float
    track_max: float
    radius_max: float

    def __post_init__(self):
        require(self.n_track >= 2 and self.n_radius >= 2, "data grid needs at least 2x2 samples")
        require(self.d_track > 0 and self.d_radius > 0, "data grid spacing must be positive")
        require(self.track_min < self.track_max, "track_min must be below track_max")
        span = (self.n_track - 1) * self.d_track
        require(math.isclose(self.track_max - self.track_min, span, rel_tol=1e-9, abs_tol=1e-9),
                "track extent {0} does not match (n_track-1)*d_track = {1}",
                self.track_max - self.track_min, span)
        rmax = (self.n_radius - 1) * self.d_radius
        require(math.isclose(self.radius_max, rmax, rel_tol=1e-9, abs_tol=1e-9),
                "radius_max {0} does not match (n_radius-1)*d_radius = {1}", self.radius_max, rmax)

    @classmethod
    def from_bounds(cls, track_min, track_max, radius_max, d_track=1.0, d_radius=1.0):
        """Build a grid from its bounds; the bounds must be multiples of the spacing."""
        n_track = int(round((track_max - track_min) / d_track)) + 1
        n_radius = int(round(radius_max / d_radius)) + 1
        return cls(n_track=n_track, n_radius=n_radius, d_track=d_track, d_radius=d_radius,
                   track_min=track_min, track_max=track_min + (n_track - 1) * d_track,
                   radius_max=(n_radius - 1) * d_radius)

    @classmethod
    def from_extent(cls, L, R, d_track=1.0, d_radius=1.0):
        """Symmetric track [-L, L] and radii [0, R]."""
        return cls.from_bounds(-L, L, R, d_track, d_radius)

    @property
    def shape(self):
        return (self.n_radius, self.n_track)

    @property
    def x(self):
        return self.track_min + self.d_track * np.arange(self.n_track)

    @property
    def r(self):
        return self.d_radius * np.arange(self.n_radius)

    @property
    def half_track(self):
        """Largest L such that [-L, L] lies inside the track."""
        return min(-self.track_min, self.track_max)


@dataclass(frozen=True)
class Image:
    """Reflectivity samples on an ImageGrid. Also used for reconstructions and ghosts."""
    grid: ImageGrid
    values: np.ndarray
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        values = _frozen(self.values)
        require(values.shape == self.grid.shape,
                "image values have shape {0}, grid expects {1}", values.shape, self.grid.shape)
        require(np.all(np.isfinite(values)), "image values must be finite")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'meta', dict(self.meta))

    @classmethod
    def zeros(cls, grid, **meta):
        return cls(grid, np.zeros(grid.shape), meta)

    def with_values(self, values, **meta):
        merged = dict(self.meta)
        merged.update(meta)
        return replace(self, values=values, meta=merged)

    def mirrored(self):
        """The image reflected about the row at the centre of the grid."""
        return self.with_values(self.values[::-1, :])


@dataclass(frozen=True)
class DataField:
    """Samples of g(x, r) on a DataGrid; g extends evenly to negative r."""
    grid: DataGrid
    values: np.ndarray
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        values = _frozen(self.values)
        require(values.shape == self.grid.shape,
                "data values have shape {0}, grid expects {1}", values.shape, self.grid.shape)
        require(np.all(np.isfinite(values)), "data values must be finite")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'meta', dict(self.meta))

    @classmethod
    def zeros(cls, grid, **meta):
        return cls(grid, np.zeros(grid.shape), meta)

    def with_values(self, values, **meta):
        merged = dict(self.meta)
        merged.update(meta)
        return replace(self, values=values, meta=merged)

    def sample(self, x, r):
        """
        Bilinear interpolation of g at arbitrary (x, r), using g(x, -r) = g(x, r).
        Points outside the sampled region read as 0.

        parameters
        ----------
        x, r : array-like
            Query coordinates, broadcast against each other.

        return
        ------
        g : `numpy.ndarray`
        """
        x, r = np.broadcast_arrays(np.asarray(x, dtype=float), np.abs(np.asarray(r, dtype=float)))
        ix = (x - self.grid.track_min) / self.grid.d_track
        jr = r / self.grid.d_radius
        out = ndimage.map_coordinates(self.values, [jr.ravel(), ix.ravel()], order=1,
                                      mode='constant', cval=0.0)
        return out.reshape(x.shape)


@dataclass(frozen=True)
class Disc:
    center: Tuple[float, float]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        require(self.radius > 0, "disc radius must be positive, got {0}", self.radius)
        require(math.isfinite(self.amplitude), "disc amplitude must be finite")

    def contains(self, x, y):
        xc, yc = self.center
        return (x - xc) ** 2 + (y - yc) ** 2 <= self.radius ** 2

    def evaluate(self, x, y):
        return np.where(self.contains(x, y), self.amplitude, 0.0)

    def mirrored(self):
        """The disc reflected about the track."""
        return replace(self, center=(self.center[0], -self.center[1]))


@dataclass(frozen=True)
class GaussianBlob:
    """amplitude * exp(-|p - center|^2 / (2 sigma^2))"""
    center: Tuple[float, float]
    sigma: float
    amplitude: float = 1.0

    def __post_init__(self):
        require(self.sigma > 0, "blob sigma must be positive, got {0}", self.sigma)
        require(math.isfinite(self.amplitude), "blob amplitude must be finite")

    def evaluate(self, x, y):
        xc, yc = self.center
        return self.amplitude * np.exp(-((x - xc) ** 2 + (y - yc) ** 2) / (2 * self.sigma ** 2))

    def mirrored(self):
        return replace(self, center=(self.center[0], -self.center[1]))


@dataclass(frozen=True)
class PhantomSpec:
    """A reflectivity scene built from discs and Gaussian blobs."""
    discs: Tuple[Disc, ...] = ()
    blobs: Tuple[GaussianBlob, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'discs', tuple(self.discs))
        object.__setattr__(self, 'blobs', tuple(self.blobs))

    def __add__(self, other):
        return PhantomSpec(self.discs + other.discs, self.blobs + other.blobs)

    def evaluate(self, x, y):
        """Direct evaluation at arbitrary points."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        out = np.zeros(x.shape)
        for part in self.discs + self.blobs:
            out += part.evaluate(x, y)
        return out

    def mirrored(self):
        return PhantomSpec(tuple(d.mirrored() for d in self.discs),
                           tuple(b.mirrored() for b in self.blobs))


@dataclass(frozen=True)
class Profile:
    """Samples along one grid row (axis='x') or column (axis='y')."""
    coords: np.ndarray
    values: np.ndarray
    axis: str = 'x'
    position: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'coords', _frozen(self.coords))
        object.__setattr__(self, 'values', _frozen(self.values))
        require(self.coords.shape == self.values.shape, "profile coordinates and values differ in length")


def render_phantom(spec, grid):
    """
    Rasterise a phantom with the sample-centre rule.

    parameters
    ----------
    spec : `PhantomSpec`
        Scene description.

    grid : `ImageGrid`
        Target grid.

    return
    ------
    img : `Image`
        Each sample holds the sum of the primitives evaluated at the sample centre.
    """
    X, Y = grid.mesh()
    return Image(grid, spec.evaluate(X, Y), {'phantom_discs': len(spec.discs),
                                             'phantom_blobs': len(spec.blobs)})


def cross_section(img, row_y):
    """Return the row nearest to `row_y`."""
    g = img.grid
    require(g.y0 - 0.5 * g.dy <= row_y <= g.y_max + 0.5 * g.dy,
            "row y={0} lies outside the grid [{1}, {2}]", row_y, g.y0, g.y_max)
    j = min(max(g.row_index(row_y), 0), g.ny - 1)
    return Profile(g.x, img.values[j, :].copy(), axis='x', position=float(g.y[j]))


def column_section(img, col_x):
    """Return the column nearest to `col_x`."""
    g = img.grid
    require(g.x0 - 0.5 * g.dx <= col_x <= g.x_max + 0.5 * g.dx,
            "column x={0} lies outside the grid [{1}, {2}]", col_x, g.x0, g.x_max)
    i = min(max(g.column_index(col_x), 0), g.nx - 1)
    return Profile(g.y, img.values[:, i].copy(), axis='y', position=float(g.x[i]))


def cross_phantom(center, radius, amplitude, small_radius, small_amplitude, spacing):
    """
    A large disc holding five small discs in a cross formation.

    parameters
    ----------
    center : (float, float)
        Centre of the large disc and of the middle small disc.

    radius, amplitude : float
        Large disc.

    small_radius, small_amplitude : float
        Each of the five small discs; their amplitude adds to the large disc.

    spacing : float
        Distance from the middle small disc to the four outer ones.
    """
    require(spacing + small_radius < radius, "small discs must lie inside the large disc")
    xc, yc = center
    offsets = [(0, 0), (spacing, 0), (-spacing, 0), (0, spacing), (0, -spacing)]
    discs = [Disc(center, radius, amplitude)]
    discs += [Disc((xc + ox, yc + oy), small_radius, small_amplitude) for ox, oy in offsets]
    return PhantomSpec(tuple(discs))


def disc_mask(grid, disc, erode=0.0):
    """Boolean mask of the samples inside `disc` with its radius reduced by `erode`."""
    X, Y = grid.mesh()
    rad = disc.radius - erode
    if rad <= 0:
        return np.zeros(grid.shape, dtype=bool)
    xc, yc = disc.center
    return (X - xc) ** 2 + (Y - yc) ** 2 <= rad ** 2


def require_same_grid(a, b):
    if a.grid != b.grid:
        raise ValidationError("grids differ: {0} vs {1}".format(a.grid, b.grid))
