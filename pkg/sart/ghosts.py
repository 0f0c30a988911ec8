"""
Data living only on the unmeasured region, and the images ("ghosts") it comes from.

With the measured region |x| < L, 0 <= r < R the families are

    o_range^{a,b}(x, r) = delta(x - a) cos(b s) / s,       s = sqrt(r^2 - R^2), r > R
    o_even^{a,l}(x, r)  = J0(a x') cos(l pi r''/R) / r'',  x' = sqrt(x^2 - L^2), |x| > L, r < R
    o_odd^{a,l}(x, r)   = x o_even^{a,l}(x, r)

with r'' = sqrt(R^2 - r^2). The ghost of a member o is f = c1 H_y d/dy R* o with
the fbp constant c1 = 1/2. A member is not itself in the range of R: circular
means only carry track-Fourier/radial-Hankel frequencies with rho >= |xi|, and
R f is the part of o on that cone. R f(x, 0) = f(x, 0) on the track, so the
data of a ghost on the measured region are as large as its track row.
`null_space_ratio` reports that share. The images are only distributions; by
default the member with b = 0 (resp. l = 0) is subtracted, which leaves a
bounded kernel.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import numpy as np
from astropy.table import Table
from scipy.interpolate import interp1d

from .errors import check_finite, require
from .forward import forward
from .grids import DataField, Image, ImageGrid
from .ortho import midpoint_nodes, neumann
from .parallel import run_strided
from .separable import arcsine_nodes, render_even_kernel
from .spectral import bessel_j0, hankel_j0, trapezoid_weights

logger = logging.getLogger(__name__)

FAMILIES = ('range', 'even', 'odd')
# samples per oscillation of the radial cosine a ghost image needs
SAMPLES_PER_PERIOD = 8
KERNEL_BLOCK = 1 << 22


@dataclass(frozen=True)
class GhostParams:
    """
    One member of a family.

    `a` is the track position (range) or the Hankel parameter (even, odd); `b`
    belongs to the range family and `l` to the other two.
    """
    family: str
    a: float
    b: Optional[float] = None
    l: Optional[int] = None
    L: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        require(self.family in FAMILIES, "family must be one of {0}, got {1!r}", FAMILIES, self.family)
        require(self.L > 0 and self.R > 0, "L and R must be positive")
        if self.family == 'range':
            require(self.b is not None and self.b >= 0, "range family needs b >= 0")
            require(self.l is None, "range family takes no l")
        else:
            require(self.l is not None and int(self.l) == self.l and self.l >= 0,
                    "{0} family needs an integer l >= 0", self.family)
            require(self.b is None, "{0} family takes no b", self.family)
            require(self.a >= 0, "{0} family needs a >= 0", self.family)

    def baseline(self):
        """The member whose image is subtracted: b = 0 or l = 0."""
        if self.family == 'range':
            return replace(self, b=0.0)
        return replace(self, l=0)

    def describe(self):
        second = "b={0}".format(self.b) if self.family == 'range' else "l={0}".format(self.l)
        return "{0} a={1} {2}".format(self.family, self.a, second)


def _radial_range(b, s, subtract):
    """cos(b s)/s, or its difference to b = 0; zero for s <= 0."""
    live = s > 0
    sv = np.where(live, s, 1.0)
    if subtract:
        val = -2.0 * np.sin(0.5 * b * sv) ** 2 / sv
    else:
        val = np.cos(b * sv) / sv
    return np.where(live, val, 0.0)


def _radial_even(l, u, R, subtract):
    """cos(l pi u/R)/u, or its difference to l = 0; zero for u <= 0."""
    live = u > 0
    uv = np.where(live, u, 1.0)
    if subtract:
        val = -2.0 * np.sin(0.5 * l * np.pi * uv / R) ** 2 / uv
    else:
        val = np.cos(l * np.pi * uv / R) / uv
    return np.where(live, val, 0.0)


def eval_ghost_data(p, x, r, d_track=None, subtract_baseline=False):
    """
    Evaluate a family member at (x, r).

    The range family is represented by a discrete delta: 1/d_track on track
    samples within d_track/2 of `a`. Without `d_track` the radial factor is
    returned where x equals a. Points on r = R or |x| = L must be excluded by
    the caller.
    """
    x, r = np.broadcast_arrays(np.asarray(x, dtype=float), np.abs(np.asarray(r, dtype=float)))
    if p.family == 'range':
        s = np.sqrt(np.clip((r - p.R) * (r + p.R), 0.0, None))
        radial = _radial_range(p.b, s, subtract_baseline)
        if d_track is None:
            spike = np.isclose(x, p.a, rtol=0.0, atol=1e-12).astype(float)
        else:
            spike = np.where(np.abs(x - p.a) < 0.5 * d_track * (1 + 1e-9), 1.0 / d_track, 0.0)
        return spike * np.where(r > p.R, radial, 0.0)

    outside = np.abs(x) > p.L
    xp = np.sqrt(np.where(outside, (np.abs(x) - p.L) * (np.abs(x) + p.L), 0.0))
    u = np.sqrt(np.clip((p.R - r) * (p.R + r), 0.0, None))
    val = bessel_j0(p.a * xp) * _radial_even(p.l, u, p.R, subtract_baseline)
    val = np.where(outside & (r < p.R), val, 0.0)
    return val * x if p.family == 'odd' else val


def ghost_data_field(p, dgrid, subtract_baseline=False):
    """Family member sampled on the nodes of `dgrid`."""
    X, Rr = np.meshgrid(dgrid.x, dgrid.r)
    values = eval_ghost_data(p, X, Rr, dgrid.d_track, subtract_baseline)
    return DataField(dgrid, values, {'ghost': p.describe(), 'delta': '1/d_track at nearest track sample',
                                     'subtract_baseline': subtract_baseline})


def _range_kernel(p, subtract):
    def evaluate(xv, yv):
        X, Y = np.meshgrid(xv - p.a, yv)
        rho = np.hypot(X, Y)
        s = np.sqrt(np.clip((rho - p.R) * (rho + p.R), 0.0, None))
        return _radial_range(p.b, s, subtract)
    return evaluate


def _track_kernel(p, x, y, n_nodes, subtract):
    """int over |t| > L of J0(a sqrt(t^2-L^2)) [t] B_l(sqrt((x-t)^2+y^2)) dt."""
    x, y = x.ravel(), np.abs(y.ravel())
    L, R = p.L, p.R
    out = np.zeros(x.size)
    w = np.sqrt(np.clip((R - y) * (R + y), 0.0, None))
    for side in (-1, 1):
        if side < 0:
            lo, hi = x - w, np.minimum(x + w, -L)
        else:
            lo, hi = np.maximum(x - w, L), x + w
        live = np.flatnonzero((y < R) & (hi > lo))
        chunk = max(1, KERNEL_BLOCK // n_nodes)
        for s in range(0, len(live), chunk):
            q = live[s:s + chunk]
            t, wt, above, below = arcsine_nodes(lo[q], hi[q], n_nodes)
            u = np.sqrt((above + (lo[q] - x[q] + w[q])[:, None]) * (below + (x[q] + w[q] - hi[q])[:, None]))
            if side < 0:
                tp2 = (below + (-L - hi[q])[:, None]) * (L - t)
            else:
                tp2 = (above + (lo[q] - L)[:, None]) * (t + L)
            val = bessel_j0(p.a * np.sqrt(np.clip(tp2, 0.0, None))) * _radial_even(p.l, u, R, subtract) * wt
            if p.family == 'odd':
                val = val * t
            out[q] += val.sum(axis=1)
    return out


def _adaptive_kernel(p, subtract, n_nodes, tol, n_max):
    def evaluate(xv, yv):
        X, Y = np.meshgrid(xv, yv)
        if n_nodes is not None:
            return _track_kernel(p, X, Y, n_nodes, subtract).reshape(X.shape)
        n = 64
        prev = _track_kernel(p, X, Y, n, subtract)
        while True:
            n *= 2
            cur = _track_kernel(p, X, Y, n, subtract)
            change = np.max(np.abs(cur - prev))
            scale = max(np.max(np.abs(cur)), 1e-300)
            logger.debug("ghost %s: %d nodes, relative change %.3g", p.describe(), n, change / scale)
            if change <= tol * scale:
                break
            if n >= n_max:
                logger.warning("ghost %s: track integral not converged at %d nodes (change %.3g)",
                               p.describe(), n, change / scale)
                break
            prev = cur
        return cur.reshape(X.shape)
    return evaluate


def check_resolution(p, igrid):
    """Raise if the grid has fewer than 8 samples per oscillation of the radial cosine."""
    if p.family == 'range':
        if p.b > 0:
            step = 2 * np.pi / (SAMPLES_PER_PERIOD * p.b)
            require(igrid.dx <= step and igrid.dy <= step,
                    "grid spacing ({0}, {1}) too coarse for b={2}; need <= {3:.4g}", igrid.dx, igrid.dy, p.b, step)
    elif p.l > 0:
        step = 2 * p.R / (SAMPLES_PER_PERIOD * p.l)
        require(igrid.dy <= step, "row spacing {0} too coarse for l={1}; need <= {2:.4g}", igrid.dy, p.l, step)


def ghost_image(p, igrid, subtract_baseline=True, n_nodes=None, extension=2.0, tol=1e-4, n_max=4096):
    """
    Ghost of the family member `p` (or of its difference to the baseline).

    The amplitude is that of `invert_fbp` applied to the member:

        range:     f = 1/2 H_y d/dy [cos(b s)/s],  s = sqrt((x-a)^2 + y^2 - R^2)
        even, odd: f = 1/2 H_y d/dy int_{|t|>L} J0(a t') [t] cos(l pi u/R)/u dt,
                   t' = sqrt(t^2 - L^2), u = sqrt(R^2 - (x-t)^2 - y^2)

    Closed forms written with unitary transforms in track and radius carry
    1/sqrt(8 pi) (range) and sqrt(2/pi) (even, odd) instead of 1/2; dividing an
    image by 1/2 and multiplying by those gives them back.

    parameters
    ----------
    p : `GhostParams`

    igrid : `ImageGrid`
        Rows on integer multiples of dy.

    subtract_baseline : bool
        Subtract the image of the b = 0 (l = 0) member.

    n_nodes : int or None
        Fixed track nodes for the even and odd families. None doubles from 64
        until the kernel changes by less than `tol`.

    extension : float
        Row extent of the intermediate symmetric grid.

    return
    ------
    img : `Image`
    """
    check_resolution(p, igrid)
    zero_baseline = (p.family == 'range' and p.b == 0) or (p.family != 'range' and p.l == 0)
    if subtract_baseline and zero_baseline:
        values = np.zeros(igrid.shape)
    else:
        if p.family == 'range':
            kernel = _range_kernel(p, subtract_baseline)
        else:
            kernel = _adaptive_kernel(p, subtract_baseline, n_nodes, tol, n_max)
        values = render_even_kernel(kernel, igrid, extension)
    check_finite(values, "ghost image")
    return Image(igrid, values, {'ghost': p.describe(), 'subtract_baseline': subtract_baseline,
                                 'L': p.L, 'R': p.R, 'c1': 0.5})


def _render_batch(params, igrid, subtract_baseline, extension, start=0, stride=1):
    return [ghost_image(p, igrid, subtract_baseline, extension=extension) for p in params[start::stride]]


def ghost_images(params, igrid, subtract_baseline=True, extension=2.0, nprocs=1):
    """Render several ghosts; independent members are spread over `nprocs` workers."""
    params = list(params)
    results = run_strided(_render_batch, args=[params, igrid, subtract_baseline, extension], nprocs=nprocs)
    out = [None] * len(params)
    stride = len(results)
    for start, block in enumerate(results):
        out[start::stride] = block
    return out


def read_ghost_batch(path, L=1.0, R=1.0):
    """
    GhostParams from a CSV with columns family, a and b or l (L, R optional).
    Empty cells are absent parameters.
    """
    tab = Table.read(path, format='ascii.csv')
    require('family' in tab.colnames and 'a' in tab.colnames, "{0} needs family and a columns", path)

    def cell(row, name):
        if name not in tab.colnames or np.ma.is_masked(row[name]):
            return None
        return row[name]

    params = []
    for row in tab:
        b, l = cell(row, 'b'), cell(row, 'l')
        params.append(GhostParams(str(row['family']).strip(), float(row['a']),
                                  b=None if b is None else float(b),
                                  l=None if l is None else int(l),
                                  L=float(cell(row, 'L') or L), R=float(cell(row, 'R') or R)))
    return params


def certificate_grid(dgrid, dy, dx=None):
    """Half plane grid over the track and radii of `dgrid`, rows every `dy`."""
    dx = dx or dy
    nx = int(math.floor((dgrid.track_max - dgrid.track_min) / dx + 1e-9)) + 1
    ny = int(math.floor(dgrid.radius_max / dy + 1e-9)) + 1
    return ImageGrid(nx, ny, dx, dy, dgrid.track_min, 0.0)


def null_space_ratio(ghost, dgrid, L, R, guard=5, n_angles=None, nprocs=1):
    """
    Forward project a ghost and compare the measured with the unmeasured region.

    The measured region is |x| < L - guard*d_track, r < R - guard*d_radius; the
    unmeasured region is |x| > L or r > R. The ghost should cover the track and
    radii of `dgrid` (see `certificate_grid`); a cropped view loses the data
    its far rows and columns carry.

    return
    ------
    report : dict
        measured and unmeasured L2 norms and their ratio.
    """
    data = forward(ghost, dgrid, n_angles=n_angles, nprocs=nprocs)
    X, Rr = np.meshgrid(dgrid.x, dgrid.r)
    measured = (np.abs(X) < L - guard * dgrid.d_track) & (Rr < R - guard * dgrid.d_radius)
    unmeasured = (np.abs(X) > L) | (Rr > R)
    m = float(np.linalg.norm(data.values[measured]))
    u = float(np.linalg.norm(data.values[unmeasured]))
    ratio = m / u if u > 0 else (0.0 if m == 0 else math.inf)
    logger.info("null space ratio %.4g (measured %.4g, unmeasured %.4g)", ratio, m, u)
    return {'measured': m, 'unmeasured': u, 'ratio': ratio}


@dataclass(frozen=True)
class UnmeasuredTable:
    """
    Coefficients of data on one family.

    For the range family `first` are track positions a and `second` the nodes
    b, with quadrature weights over b. For the even and odd families `first`
    are the Hankel parameters a, weighted, and `second` the indices l.
    values[i, j] belongs to (first[i], second[j]).
    """
    family: str
    first: np.ndarray
    second: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    L: float
    R: float
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        require(self.family in FAMILIES, "unknown family {0!r}", self.family)
        vals = np.array(self.values, dtype=float)
        require(vals.shape == (len(self.first), len(self.second)),
                "table values have shape {0}, expected {1}", vals.shape, (len(self.first), len(self.second)))
        object.__setattr__(self, 'values', vals)

    def scaled(self, values):
        return replace(self, values=values)


def project_unmeasured(g_full, family, n_nodes=None, a_nodes=None, L_max=8, L=None, R=1.0):
    """
    Coefficients of data on the unmeasured region with respect to one family.

    range:
        G(a, b) = 2/pi int_R^inf r cos(b sqrt(r^2-R^2)) g(a, r) dr, on the track
        nodes a and b_k = k pi/S, S = sqrt(radius_max^2 - R^2). Substituting
        s = sqrt(r^2 - R^2) on k = 0..n_nodes uniform nodes makes projection and
        recovery a discrete cosine pair.
    even, odd:
        G^l(a) = a eps_l/(2R) iint x' J0(a x') r'' cos(l pi r''/R) g(x, r) dx' dr''
        with g replaced by g(x) + g(-x) (even) or (g(x) - g(-x))/x (odd) on |x| > L.

    parameters
    ----------
    g_full : `DataField`
        Data reaching beyond R (range) or beyond L (even, odd).

    family : str

    n_nodes : int or None
        Substituted nodes per axis.

    a_nodes : array-like or None
        Hankel parameters of the even and odd families.

    L_max : int
        Highest l of the even and odd families.

    L, R : float
        Measured region. L defaults to half the measured track only for the
        range family, where it is unused.

    return
    ------
    table : `UnmeasuredTable`
    """
    require(family in FAMILIES, "unknown family {0!r}", family)
    dg = g_full.grid
    if family == 'range':
        require(dg.radius_max > R + dg.d_radius, "data reach r={0}; the range family needs r > R={1}",
                dg.radius_max, R)
        S = math.sqrt((dg.radius_max - R) * (dg.radius_max + R))
        n = n_nodes or 2 * int(math.ceil(S / dg.d_radius))
        s = np.linspace(0.0, S, n + 1)
        ds = S / n
        b = np.arange(n + 1) * (np.pi / S)
        w = np.ones(n + 1)
        w[0] = w[-1] = 0.5
        X, Ss = np.meshgrid(dg.x, s, indexing='ij')
        h = g_full.sample(X, np.sqrt(R * R + Ss * Ss)) * Ss
        values = (2 / np.pi) * ds * (h * w) @ np.cos(np.outer(s, b))
        check_finite(values, "range coefficients")
        return UnmeasuredTable('range', dg.x.copy(), b, values, w * (np.pi / S), L or dg.half_track, R,
                               {'nodes': n, 'S': S})

    require(L is not None, "{0} family needs L", family)
    require(dg.half_track > L + dg.d_track, "data reach |x|={0}; the {1} family needs |x| > L={2}",
            dg.half_track, family, L)
    require(dg.radius_max >= R, "data reach r={0} < R={1}", dg.radius_max, R)
    Xp = math.sqrt((dg.half_track - L) * (dg.half_track + L))
    nx = nr = n_nodes
    if n_nodes is None:
        nx = max(64, 2 * int(math.ceil(Xp / dg.d_track)))
        nr = max(4 * (L_max + 1), 2 * int(math.ceil(R / dg.d_radius)))
    xp, hx = midpoint_nodes(Xp, nx)
    rpp, hr = midpoint_nodes(R, nr)
    x = np.sqrt(L * L + xp * xp)
    r = np.sqrt(R * R - rpp * rpp)
    X, Rr = np.meshgrid(x, r, indexing='ij')
    if family == 'even':
        ge = g_full.sample(X, Rr) + g_full.sample(-X, Rr)
    else:
        ge = (g_full.sample(X, Rr) - g_full.sample(-X, Rr)) / X
    ls = np.arange(L_max + 1)
    eps = np.array([neumann(l) for l in ls], dtype=float)
    moments = hr * (ge * rpp[None, :]) @ np.cos(np.pi * np.outer(rpp, ls) / R)
    if a_nodes is None:
        a_nodes = np.arange(0.0, np.pi / hx + 1e-12, np.pi / (2 * Xp))
    a = np.asarray(a_nodes, dtype=float)
    H = hankel_j0(moments, xp, a, weights=np.full(nx, hx), warn=False)
    values = a[:, None] * H * (eps / (2 * R))[None, :]
    check_finite(values, "{0} coefficients".format(family))
    return UnmeasuredTable(family, a, ls.astype(float), values, trapezoid_weights(a), L, R,
                           {'nodes': (nx, nr)})


def recover_outside(table, dgrid):
    """
    Resynthesize data on the unmeasured region from a coefficient table.

    The range family fills r > R; the even and odd families fill their part of
    |x| > L, r < R. Everything else is 0.
    """
    X, Rr = np.meshgrid(dgrid.x, dgrid.r)
    values = np.zeros(dgrid.shape)
    if table.family == 'range':
        G = interp1d(table.first, table.values, axis=0, bounds_error=False, fill_value=0.0,
                     assume_sorted=True)(dgrid.x)
        outside = dgrid.r > table.R
        s = np.sqrt((dgrid.r[outside] - table.R) * (dgrid.r[outside] + table.R))
        C = np.cos(np.outer(s, table.second)) / s[:, None]
        values[outside, :] = C @ (G * table.weights[None, :]).T
    else:
        live = (np.abs(X) > table.L) & (Rr < table.R)
        x, r = X[live], Rr[live]
        xp = np.sqrt((np.abs(x) - table.L) * (np.abs(x) + table.L))
        u = np.sqrt((table.R - r) * (table.R + r))
        # sum_a w_a G^l(a) J0(a x') for every l
        radial = bessel_j0(np.outer(xp, table.first)) @ (table.values * table.weights[:, None])
        cosines = np.cos(np.pi * np.outer(u, table.second) / table.R) / u[:, None]
        part = np.sum(radial * cosines, axis=1)
        values[live] = part * x if table.family == 'odd' else part
    check_finite(values, "recovered data")
    return DataField(dgrid, values, {'family': table.family})
