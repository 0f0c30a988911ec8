"""
Inversion through the compactly supported families i_even and i_odd.

For a measured region |x| < L, 0 <= r < R the families are

    i_even^{k,l}(x, r) = cos(k pi x''/L) cos(l pi r''/R) / (x'' r''),
    i_odd^{k,l}(x, r)  = x * i_even^{k,l}(x, r),

with x'' = sqrt(L^2 - x^2) and r'' = sqrt(R^2 - r^2). Every quadrature runs in
the substituted variables x'', r'' on midpoint nodes, where the families turn
into plain cosine series. Reconstructions of single family members are
precomputed and combined with the projection coefficients of the data.
"""

import hashlib
import logging
import os
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ValidationError, check_finite, require
from .grids import DataField, Image
from .separable import arcsine_nodes, render_even_kernel

logger = logging.getLogger(__name__)

PARITIES = ('even', 'odd')
DEFAULT_KERNEL_NODES = 256
# floats held by one block of the batched track integral
KERNEL_BLOCK = 1 << 23


def neumann(n):
    """Neumann's number: 1 for n = 0, else 2."""
    return 1 if n == 0 else 2


def _neumann_array(n):
    e = np.full(n, 2.0)
    e[0] = 1.0
    return e


@dataclass(frozen=True, order=True)
class BasisIndex:
    parity: str
    k: int
    l: int

    def __post_init__(self):
        require(self.parity in PARITIES, "parity must be even or odd, got {0!r}", self.parity)
        require(int(self.k) == self.k and self.k >= 0, "k must be a non-negative integer")
        require(int(self.l) == self.l and self.l >= 0, "l must be a non-negative integer")


def midpoint_nodes(length, n):
    """n midpoint nodes on [0, length] and their common weight."""
    h = length / n
    return (np.arange(n) + 0.5) * h, h


def _track_factor(parity, k, x, L):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < L
    s = np.sqrt(np.where(inside, L * L - x * x, 1.0))
    val = np.where(inside, np.cos(k * np.pi * s / L) / s, 0.0)
    return val * x if parity == 'odd' else val


def _range_factor(l, r, R):
    r = np.abs(np.asarray(r, dtype=float))
    inside = r < R
    s = np.sqrt(np.where(inside, R * R - r * r, 1.0))
    return np.where(inside, np.cos(l * np.pi * s / R) / s, 0.0)


def eval_basis(idx, x, r, L, R):
    """
    Evaluate i_even or i_odd at (x, r).

    Zero outside |x| < L, |r| < R. The functions are singular on |x| = L and
    r = R; callers evaluate at interior points only.
    """
    x, r = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(r, dtype=float))
    return _track_factor(idx.parity, idx.k, x, L) * _range_factor(idx.l, r, R)


def _gram_factors(parity, n_k, n_l, L, R, n_nodes):
    """One dimensional Gram matrices in x and r via the substitution quadrature."""
    xs, hx = midpoint_nodes(L, n_nodes)
    rs, hr = midpoint_nodes(R, n_nodes)
    x = np.sqrt(L * L - xs * xs)
    r = np.sqrt(R * R - rs * rs)
    X = np.array([_track_factor(parity, k, x, L) for k in range(n_k)])
    Rr = np.array([_range_factor(l, r, R) for l in range(n_l)])
    if parity == 'even':
        wx = x * xs * (xs / x)
    else:
        wx = (xs / x) * (xs / x)
    wr = r * rs * (rs / r)
    return (X * wx) @ X.T * hx, (Rr * wr) @ Rr.T * hr


def basis_gram(idx1, idx2, L=1.0, R=1.0, n_nodes=2048):
    """
    Weighted inner product of two family members of the same parity.

    Weights are r sqrt(R^2-r^2) x sqrt(L^2-x^2) (even) and
    r sqrt(R^2-r^2) sqrt(L^2-x^2)/x (odd) over (0, L) x (0, R).
    """
    if idx1.parity != idx2.parity:
        raise ValidationError("basis_gram needs equal parities, got {0} and {1}".format(idx1.parity, idx2.parity))
    gx, gr = _gram_factors(idx1.parity, max(idx1.k, idx2.k) + 1, max(idx1.l, idx2.l) + 1, L, R, n_nodes)
    return float(gx[idx1.k, idx2.k] * gr[idx1.l, idx2.l])


def gram_matrix(parity, K_max, L_max, L=1.0, R=1.0, n_nodes=2048):
    """Full Gram matrix over k <= K_max, l <= L_max, indexed [(k, l), (k', l')]."""
    gx, gr = _gram_factors(parity, K_max + 1, L_max + 1, L, R, n_nodes)
    return np.kron(gx, gr)


@dataclass(frozen=True)
class CoeffTable:
    """Projection coefficients G_even[k, l] and G_odd[k, l]."""
    K_max: int
    L_max: int
    even: np.ndarray
    odd: np.ndarray
    L: float
    R: float
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.K_max + 1, self.L_max + 1)
        for name in ('even', 'odd'):
            arr = np.array(getattr(self, name), dtype=float)
            require(arr.shape == shape, "{0} coefficients have shape {1}, expected {2}", name, arr.shape, shape)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, K_max, L_max, L, R):
        z = np.zeros((K_max + 1, L_max + 1))
        return cls(K_max, L_max, z, z, L, R)

    @classmethod
    def single(cls, idx, K_max, L_max, L, R, value=1.0):
        """Table holding one nonzero coefficient."""
        even = np.zeros((K_max + 1, L_max + 1))
        odd = np.zeros_like(even)
        (even if idx.parity == 'even' else odd)[idx.k, idx.l] = value
        return cls(K_max, L_max, even, odd, L, R)

    def coefficient(self, idx):
        return float((self.even if idx.parity == 'even' else self.odd)[idx.k, idx.l])

    def nonzero(self):
        """BasisIndex of every nonzero coefficient."""
        out = []
        for parity, table in (('even', self.even), ('odd', self.odd)):
            for k, l in zip(*np.nonzero(table)):
                out.append(BasisIndex(parity, int(k), int(l)))
        return out

    def evaluate(self, x, r):
        """Truncated double sum of both parities at (x, r); zero outside the region."""
        x, r = np.broadcast_arrays(np.asarray(x, dtype=float), np.abs(np.asarray(r, dtype=float)))
        shape = x.shape
        x, r = x.ravel(), r.ravel()
        inside = (np.abs(x) < self.L) & (r < self.R)
        xs = np.sqrt(np.where(inside, self.L ** 2 - x ** 2, 1.0))
        rs = np.sqrt(np.where(inside, self.R ** 2 - r ** 2, 1.0))
        Cx = np.cos(np.pi * np.outer(xs, np.arange(self.K_max + 1)) / self.L)
        Cr = np.cos(np.pi * np.outer(rs, np.arange(self.L_max + 1)) / self.R)
        total = np.einsum('pk,kl,pl->p', Cx, self.even, Cr) + x * np.einsum('pk,kl,pl->p', Cx, self.odd, Cr)
        out = np.where(inside, total / (xs * rs), 0.0)
        return out.reshape(shape)


def project_data(data, K_max, L_max, L=None, R=None, n_nodes=None):
    """
    Coefficients of g on the families i_even and i_odd.

    G_even = eps_k eps_l / (2LR) iint cos cos x r (g(x, r) + g(-x, r)) dx dr
    G_odd  = eps_k eps_l / (2LR) iint cos cos r (g(x, r) - g(-x, r)) dx dr

    parameters
    ----------
    data : `DataField` or callable
        Measured data, sampled bilinearly, or a function g(x, r).

    K_max, L_max : int
        Highest track and range indices.

    L, R : float or None
        Region bounds. Default to the data's half track and radius_max.

    n_nodes : int or (int, int) or None
        Substitution nodes in x'' and r''. Default follows the data sampling.

    return
    ------
    table : `CoeffTable`
    """
    require(K_max >= 0 and L_max >= 0, "K_max and L_max must be >= 0")
    if isinstance(data, DataField):
        dg = data.grid
        L = dg.half_track if L is None else L
        R = dg.radius_max if R is None else R
        require(L <= dg.half_track * (1 + 1e-12) and R <= dg.radius_max * (1 + 1e-12),
                "data covers |x| <= {0}, r <= {1}; projection needs L={2}, R={3}",
                dg.half_track, dg.radius_max, L, R)
        sample = data.sample
        default = (max(4 * (K_max + 1), 2 * int(np.ceil(L / dg.d_track))),
                   max(4 * (L_max + 1), 2 * int(np.ceil(R / dg.d_radius))))
    else:
        require(L is not None and R is not None, "L and R are required when projecting a function")
        sample = data
        default = (max(4 * (K_max + 1), 256), max(4 * (L_max + 1), 256))
    require(L > 0 and R > 0, "L and R must be positive")
    if n_nodes is None:
        n_nodes = default
    nx, nr = (n_nodes, n_nodes) if np.isscalar(n_nodes) else n_nodes

    xs, hx = midpoint_nodes(L, nx)
    rs, hr = midpoint_nodes(R, nr)
    x = np.sqrt(L * L - xs * xs)
    r = np.sqrt(R * R - rs * rs)
    X, Rr = np.meshgrid(x, r, indexing='ij')
    g_pos = np.asarray(sample(X, Rr), dtype=float)
    g_neg = np.asarray(sample(-X, Rr), dtype=float)
    Cx = np.cos(np.pi * np.outer(np.arange(K_max + 1), xs) / L)
    Cr = np.cos(np.pi * np.outer(np.arange(L_max + 1), rs) / R)
    scale = np.outer(_neumann_array(K_max + 1), _neumann_array(L_max + 1)) / (2 * L * R) * hx * hr
    even = scale * (Cx @ ((xs[:, None] * rs[None, :]) * (g_pos + g_neg)) @ Cr.T)
    odd = scale * (Cx @ (((xs / x)[:, None] * rs[None, :]) * (g_pos - g_neg)) @ Cr.T)
    check_finite(even, "even coefficients")
    check_finite(odd, "odd coefficients")
    return CoeffTable(K_max, L_max, even, odd, L, R, {'nodes': (nx, nr)})


def resynthesize(coeffs, dgrid):
    """
    Evaluate the truncated expansion on the interior nodes of `dgrid`.

    Nodes within half a sample of |x| = L or r = R, and everything outside the
    region, are 0.
    """
    X, Rr = np.meshgrid(dgrid.x, dgrid.r)
    interior = (np.abs(X) < coeffs.L - 0.5 * dgrid.d_track) & (Rr < coeffs.R - 0.5 * dgrid.d_radius)
    values = np.zeros(dgrid.shape)
    values[interior] = coeffs.evaluate(X[interior], Rr[interior])
    return DataField(dgrid, values, {'K_max': coeffs.K_max, 'L_max': coeffs.L_max})


def basis_track_integral(parity, ks, ls, x, y, L, R, n_nodes=DEFAULT_KERNEL_NODES):
    """
    P(x, y) = int A_k(t) B_l(sqrt((x-t)^2 + y^2)) dt for all k in `ks`, l in `ls`.

    A_k(t) = cos(k pi sqrt(L^2-t^2)/L) / sqrt(L^2-t^2) on |t| < L (times t for
    the odd parity) and B_l(rho) = cos(l pi sqrt(R^2-rho^2)/R) / sqrt(R^2-rho^2)
    on rho < R.

    return
    ------
    P : `numpy.ndarray`
        Shape x.shape + (len(ks), len(ls)).
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    x, y = x.ravel(), np.abs(y.ravel())
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    ls = np.atleast_1d(np.asarray(ls, dtype=float))
    out = np.zeros((x.size, len(ks), len(ls)))

    w = np.sqrt(np.clip(R * R - y * y, 0.0, None))
    lo = np.maximum(-L, x - w)
    hi = np.minimum(L, x + w)
    live = np.flatnonzero((y < R) & (hi > lo))
    chunk = max(1, KERNEL_BLOCK // (n_nodes * (len(ks) + len(ls) + 4)))
    for s in range(0, len(live), chunk):
        p = live[s:s + chunk]
        t, wt, above, below = arcsine_nodes(lo[p], hi[p], n_nodes)
        sa = np.sqrt((above + (lo[p] + L)[:, None]) * (below + (L - hi[p])[:, None]))
        sb = np.sqrt((above + (lo[p] - x[p] + w[p])[:, None]) * (below + (x[p] + w[p] - hi[p])[:, None]))
        base = wt / (sa * sb)
        if parity == 'odd':
            base = base * t
        Ck = np.cos(np.pi / L * sa[:, :, None] * ks[None, None, :])
        Cl = np.cos(np.pi / R * sb[:, :, None] * ls[None, None, :])
        out[p] = np.einsum('pn,pnk,pnl->pkl', base, Ck, Cl)
    return out.reshape(shape + (len(ks), len(ls)))


def _grid_key(igrid, L, R, n_nodes, extension):
    text = repr((igrid.nx, igrid.ny, igrid.dx, igrid.dy, igrid.x0, igrid.y0, L, R, n_nodes, extension))
    return hashlib.sha1(text.encode('utf-8')).hexdigest()[:12]


def basis_reconstructions(parity, wanted, igrid, L, R, n_nodes=DEFAULT_KERNEL_NODES, extension=2.0):
    """
    Yield (BasisIndex, Image) for every (k, l) in `wanted` of one parity.

    All k sharing one l are computed together from one set of track nodes.
    """
    require(igrid.x0 >= -(L + R) - 1e-9 and igrid.x_max <= L + R + 1e-9,
            "image columns [{0}, {1}] leave |x| <= L+R = {2}", igrid.x0, igrid.x_max, L + R)
    by_l = {}
    for k, l in wanted:
        by_l.setdefault(int(l), []).append(int(k))
    for l in sorted(by_l):
        ks = sorted(set(by_l[l]))
        logger.debug("basis reconstructions: parity=%s l=%d, %d k values", parity, l, len(ks))

        def kernel(xv, yv):
            X, Y = np.meshgrid(xv, yv)
            P = basis_track_integral(parity, ks, [l], X, Y, L, R, n_nodes)[..., 0]
            return np.moveaxis(P, -1, 0)

        values = render_even_kernel(kernel, igrid, extension)
        for n, k in enumerate(ks):
            check_finite(values[n], "basis reconstruction")
            yield BasisIndex(parity, k, l), Image(igrid, values[n], {'parity': parity, 'k': k, 'l': l,
                                                                     'L': L, 'R': R, 'c1': 0.5})


def basis_reconstruction(idx, igrid, L, R, n_nodes=DEFAULT_KERNEL_NODES, extension=2.0):
    """
    Image whose data is the single family member `idx`:
    f = 1/2 H_y d/dy int A_k(t) B_l(sqrt((x-t)^2 + y^2)) dt.

    The amplitude is that of `invert_fbp` (c1 = 1/2). A closed form written
    with the unitary transforms carries sqrt(pi/2) in place of 1/2; multiply
    the returned image by sqrt(2*pi) to compare with it. The image metadata
    records c1.

    parameters
    ----------
    idx : `BasisIndex`

    igrid : `ImageGrid`
        Columns within |x| <= L + R.

    L, R : float

    n_nodes : int
        Arcsine nodes per track interval.

    extension : float
        Row extent of the intermediate symmetric grid.

    return
    ------
    img : `Image`
    """
    (_, img), = basis_reconstructions(idx.parity, [(idx.k, idx.l)], igrid, L, R, n_nodes, extension)
    return img


class BasisCache:
    """
    On-disk store of basis reconstructions, one raw field per index.

    Files are keyed by the index and a digest of the grid, L, R, node count and
    extension.
    """

    def __init__(self, directory, igrid, L, R, n_nodes=DEFAULT_KERNEL_NODES, extension=2.0):
        self.directory = directory
        self.igrid = igrid
        self.key = _grid_key(igrid, L, R, n_nodes, extension)
        os.makedirs(directory, exist_ok=True)

    def path(self, idx):
        return os.path.join(self.directory, "basis_{0}_k{1}_l{2}_{3}".format(idx.parity, idx.k, idx.l, self.key))

    def get(self, idx):
        from .io import field_paths, read_field
        if not os.path.exists(field_paths(self.path(idx))[1]):
            return None
        img = read_field(self.path(idx))
        if img.grid != self.igrid:
            logger.warning("cache entry %s has a different grid; ignoring it", self.path(idx))
            return None
        return img

    def put(self, idx, img):
        from .io import write_field
        write_field(self.path(idx), img)


def invert_ortho(data, K_max, L_max, igrid, L=None, R=None, cache_dir=None,
                 n_nodes=DEFAULT_KERNEL_NODES, extension=2.0):
    """
    Reconstruct f as sum G_even f_even^{k,l} + G_odd f_odd^{k,l}.

    parameters
    ----------
    data : `DataField`

    K_max, L_max : int

    igrid : `ImageGrid`

    L, R : float or None
        Measured region; default from the data grid.

    cache_dir : str or None
        Directory holding precomputed basis reconstructions.

    n_nodes : int
        Arcsine nodes per track interval of the basis reconstructions.

    extension : float

    return
    ------
    img : `Image`
    """
    coeffs = project_data(data, K_max, L_max, L, R)
    L, R = coeffs.L, coeffs.R
    cache = BasisCache(cache_dir, igrid, L, R, n_nodes, extension) if cache_dir else None
    values = np.zeros(igrid.shape)
    hits = 0
    for parity in PARITIES:
        wanted = [(i.k, i.l) for i in coeffs.nonzero() if i.parity == parity]
        missing = []
        for k, l in wanted:
            idx = BasisIndex(parity, k, l)
            img = cache.get(idx) if cache else None
            if img is None:
                missing.append((k, l))
            else:
                hits += 1
                values += coeffs.coefficient(idx) * img.values
        for idx, img in basis_reconstructions(parity, missing, igrid, L, R, n_nodes, extension):
            if cache:
                cache.put(idx, img)
            values += coeffs.coefficient(idx) * img.values
    check_finite(values, "ortho reconstruction")
    logger.info("ortho reconstruction K=%d L=%d (%d cached bases)", K_max, L_max, hits)
    return Image(igrid, values, {'method': 'ortho', 'K_max': K_max, 'L_max': L_max, 'L': L, 'R': R})
