"""
Left-right disambiguation from several parallel flight tracks.

Each antenna at offset p only sees the even part of the reflectivity about its
own track,

    f^e_p(x, y) = 1/2 [f(x, y + p) + f(x, -y + p)],

stored in track-local coordinates (even about y = 0). Differences of two such
images give sin(b eta) times the y-spectrum of f, which the resolvers divide
out. All transforms along y are circular DFTs over the rows of the grid.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ValidationError, check_finite, require
from .fbp import ContinuationMode, invert_fbp
from .forward import NoiseSpec, add_noise, forward
from .grids import Image, require_same_grid
from .spectral import SpectralField

logger = logging.getLogger(__name__)

MODES = ('direct', 'via_radon')
RESOLVERS = ('exact', 'reg')
PAIRINGS = ('all', 'reference')
# smallest admissible sum of sin^2 over all separations at a nonzero bin
COMMON_ZERO_TOL = 1e-10


@dataclass(frozen=True)
class AntennaArray:
    """Track offsets in pixels, strictly increasing from 0."""
    positions: tuple

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        require(len(pos) >= 1, "antenna array is empty")
        require(all(int(p) == p for p in self.positions), "antenna positions must be whole pixels: {0}",
                self.positions)
        require(pos[0] == 0, "the first antenna sits on the reference track, got {0}", pos[0])
        require(all(b > a for a, b in zip(pos, pos[1:])), "antenna positions must increase: {0}", pos)
        object.__setattr__(self, 'positions', pos)

    @classmethod
    def parse(cls, text):
        """'0,1,3,8,19' -> AntennaArray."""
        try:
            return cls(tuple(int(t) for t in str(text).split(',') if t.strip()))
        except ValueError:
            raise ValidationError("cannot read antenna positions from {0!r}".format(text))

    def offsets(self, dy):
        return [p * dy for p in self.positions]

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class RegularizationSpec:
    """
    epsilon * cos^(2k)(b eta) is added to the denominator above |eta| = pi/(2b).
    `eta0_source` picks the even image supplying eta = 0: 'reference' or 'offset'.
    """
    epsilon: float = 1e-2
    cos_power_k: int = 2
    eta0_source: str = 'reference'

    def __post_init__(self):
        require(self.epsilon > 0, "epsilon must be > 0, got {0}", self.epsilon)
        require(int(self.cos_power_k) == self.cos_power_k and self.cos_power_k >= 1,
                "cos_power_k must be an integer >= 1, got {0}", self.cos_power_k)
        require(self.eta0_source in ('reference', 'offset'),
                "eta0_source must be reference or offset, got {0!r}", self.eta0_source)


def _row_shift(grid, b):
    n = b / grid.dy
    require(abs(n - round(n)) < 1e-9 * max(1.0, abs(n)), "offset {0} is not a multiple of dy={1}", b, grid.dy)
    return int(round(n))


def even_part_about(img, b, wrap=False):
    """
    out(x, y) = 1/2 [f(x, y + b) + f(x, -y + b)] on the rows of `img`.

    parameters
    ----------
    img : `Image`
        Rows on integer multiples of dy.

    b : float
        Offset, a multiple of dy.

    wrap : bool
        Read rows circularly instead of as 0 outside the grid.

    return
    ------
    out : `Image`
    """
    g = img.grid
    require(g.rows_aligned, "image rows must be integer multiples of dy (y0={0})", g.y0)
    n = _row_shift(g, b)
    c = int(round(-2 * g.y0 / g.dy))
    j = np.arange(g.ny)
    out = np.zeros(g.shape)
    for idx in (j + n, c - j + n):
        if wrap:
            out += img.values[idx % g.ny, :]
        else:
            ok = (idx >= 0) & (idx < g.ny)
            out[ok, :] += img.values[idx[ok], :]
    return img.with_values(0.5 * out, even_about=b, wrap=wrap)


def eta_frequencies(grid):
    """Angular frequencies of the row DFT, in numpy's bin order."""
    return 2 * np.pi * np.fft.fftfreq(grid.ny, grid.dy)


def _modulated(fe_b, fe_0, n):
    """(1/i) DFT_y[fe_b(y) - fe_0(y - b)] in bin order, b = n rows."""
    diff = fe_b.values - np.roll(fe_0.values, n, axis=0)
    return -1j * np.fft.fft(diff, axis=0)


def sine_modulated_spectrum(fe_b, fe_0, b):
    """
    h_b(x, eta) = (1/i) DFT_y[f^e_b(x, y) - f^e_0(x, y - b)](eta).

    Equals sin(b eta) times the row DFT of f when f is zero within b of the
    first and last rows (or everything is circular).

    return
    ------
    h : `SpectralField`
        Rows eta (ascending), columns x.
    """
    require_same_grid(fe_b, fe_0)
    g = fe_b.grid
    h = _modulated(fe_b, fe_0, _row_shift(g, b))
    eta = eta_frequencies(g)
    return SpectralField(np.fft.fftshift(h, axes=0), np.fft.fftshift(eta), g.x, row_name='eta', col_name='x',
                         meta={'b': b})


def resolve_two(fe_0, fe_b, b, reg=RegularizationSpec()):
    """
    Full reflectivity from the even parts about the reference track and about y = b.

    F(eta) = sin(b eta) h_b / (sin^2(b eta) + H(|eta| - pi/(2b)) eps cos^(2k)(b eta))
    for eta != 0; F(0) is the zero bin of the even image picked by `reg`.

    parameters
    ----------
    fe_0, fe_b : `Image`
        Even images in track-local coordinates, same grid.

    b : float
        Positive offset between the tracks.

    reg : `RegularizationSpec`

    return
    ------
    img : `Image`
    """
    require(b > 0, "offset b must be > 0, got {0}", b)
    require_same_grid(fe_0, fe_b)
    g = fe_0.grid
    eta = eta_frequencies(g)
    h = _modulated(fe_b, fe_0, _row_shift(g, b))
    sb = np.sin(b * eta)
    switch = (np.abs(eta) >= np.pi / (2 * b)).astype(float)
    denom = sb ** 2 + switch * reg.epsilon * np.cos(b * eta) ** (2 * reg.cos_power_k)
    F = np.zeros_like(h)
    nz = eta != 0
    F[nz, :] = (sb[nz] / denom[nz])[:, None] * h[nz, :]
    source = fe_0 if reg.eta0_source == 'reference' else fe_b
    F[0, :] = np.fft.fft(source.values, axis=0)[0, :]
    values = np.real(np.fft.ifft(F, axis=0))
    check_finite(values, "two-track resolution")
    return fe_0.with_values(values, method='resolve_two', b=b, epsilon=reg.epsilon, k=reg.cos_power_k,
                            eta0_source=reg.eta0_source)


def separations(positions, pairs='all'):
    """(i, j) index pairs and their separations p_j - p_i."""
    require(pairs in PAIRINGS, "pairs must be one of {0}, got {1!r}", PAIRINGS, pairs)
    out = []
    for i in range(len(positions)):
        if pairs == 'reference' and i > 0:
            break
        for j in range(i + 1, len(positions)):
            out.append((i, j, positions[j] - positions[i]))
    return out


def common_zeros(seps, grid):
    """Nonzero eta bins where every sin(b eta) vanishes."""
    eta = eta_frequencies(grid)
    total = sum(np.sin(b * eta) ** 2 for b in seps)
    return np.flatnonzero((eta != 0) & (total < COMMON_ZERO_TOL))


def resolve_many(fe_set, eta0_offset=0.0, pairs='all'):
    """
    Exact reconstruction from the even images of several tracks.

    F(eta) = sum_k sin(b_k eta) h_k / sum_k sin^2(b_k eta) for eta != 0, summed
    over the antenna pairs. A pair (i, j) not involving the reference track is
    formed in the coordinates of track i and brought back with exp(-i p_i eta).

    parameters
    ----------
    fe_set : mapping
        Offset -> even `Image`, one entry per track; the smallest offset is the
        reference and must be 0.

    eta0_offset : float
        Offset whose even image supplies the eta = 0 bin.

    pairs : str
        'all' pairwise separations or only those to the 'reference' track.

    return
    ------
    img : `Image`
    """
    positions = sorted(fe_set)
    require(len(positions) >= 2, "resolve_many needs at least 2 tracks, got {0}", len(positions))
    require(positions[0] == 0, "the reference track (offset 0) is missing from {0}", positions)
    require(eta0_offset in fe_set, "no even image for the eta=0 offset {0}", eta0_offset)
    ref = fe_set[positions[0]]
    for p in positions[1:]:
        require_same_grid(ref, fe_set[p])
    g = ref.grid
    pair_list = separations(positions, pairs)
    bad = common_zeros([b for _, _, b in pair_list], g)
    if len(bad):
        raise ValidationError("separations {0} share zeros of sin(b eta) at eta bins {1} (eta={2})".format(
            [b for _, _, b in pair_list], bad.tolist(), eta_frequencies(g)[bad].tolist()))

    eta = eta_frequencies(g)
    num = np.zeros(g.shape, dtype=complex)
    den = np.zeros(g.ny)
    for i, j, b in pair_list:
        p_i = positions[i]
        h = _modulated(fe_set[positions[j]], fe_set[p_i], _row_shift(g, b))
        h *= np.exp(-1j * p_i * eta)[:, None]
        s = np.sin(b * eta)
        num += s[:, None] * h
        den += s ** 2
    F = np.zeros_like(num)
    nz = eta != 0
    F[nz, :] = num[nz, :] / den[nz, None]
    F[0, :] = np.fft.fft(fe_set[eta0_offset].values, axis=0)[0, :]
    values = np.real(np.fft.ifft(F, axis=0))
    check_finite(values, "multi-track resolution")
    logger.debug("resolve_many: %d tracks, %d separations", len(positions), len(pair_list))
    return ref.with_values(values, method='resolve_many', positions=tuple(positions), pairs=pairs,
                           eta0_offset=eta0_offset)


@dataclass(frozen=True)
class LRResult:
    """Resolved image and the stages leading to it, keyed by track offset."""
    image: Image
    even_clean: Mapping
    even_noisy: Mapping
    data: Mapping = field(default_factory=dict)
    meta: Mapping = field(default_factory=dict)


def check_guard_band(img, p_max):
    """Raise unless the image is 0 on the first and last p_max (physical) rows."""
    n = _row_shift(img.grid, p_max)
    if n == 0:
        return
    rows = np.flatnonzero(np.any(img.values != 0, axis=1))
    if len(rows) == 0:
        return
    require(rows[0] >= n and rows[-1] < img.grid.ny - n,
            "phantom rows {0}..{1} reach into the guard band of {2} rows at the grid edges",
            int(rows[0]), int(rows[-1]), n)


def lr_pipeline(phantom, antennas, noise=NoiseSpec(), mode='direct', resolver='exact',
                reg=RegularizationSpec(), pairs='all', dgrid=None, n_angles=None,
                continuation=ContinuationMode.APPROXIMATE, nprocs=1):
    """
    Simulate several tracks, perturb, and resolve the left-right ambiguity.

    direct:
        the even parts about each track are formed from the phantom and noised.
    via_radon:
        each track's data is forward projected, noised and inverted with
        `invert_fbp`; the inversion is the even part about that track.

    parameters
    ----------
    phantom : `Image`
        On a grid symmetric about the reference track.

    antennas : `AntennaArray`

    noise : `NoiseSpec`
        Applied to the even images (direct) or to the data (via_radon); field
        n uses noise stream n.

    mode : str

    resolver : str
        'exact' (resolve_many) or 'reg' (resolve_two on the first two tracks).

    reg : `RegularizationSpec`

    pairs : str

    dgrid : `DataGrid`
        Data sampling of each track (via_radon only).

    n_angles : int or None

    continuation : `ContinuationMode`

    nprocs : int

    return
    ------
    result : `LRResult`
    """
    require(mode in MODES, "mode must be one of {0}, got {1!r}", MODES, mode)
    require(resolver in RESOLVERS, "resolver must be one of {0}, got {1!r}", RESOLVERS, resolver)
    g = phantom.grid
    require(g.is_symmetric, "lr_pipeline needs an image grid symmetric about y = 0")
    offsets = antennas.offsets(g.dy)
    require(len(offsets) >= 2, "at least two antennas are needed, got {0}", len(offsets))
    check_guard_band(phantom, offsets[-1])

    clean, noisy, data = {}, {}, {}
    for n, p in enumerate(offsets):
        if mode == 'direct':
            clean[p] = even_part_about(phantom, p)
            noisy[p] = add_noise(clean[p], noise, stream=n)
        else:
            require(dgrid is not None, "via_radon mode needs a data grid")
            local = Image(g.shifted(-p), phantom.values, phantom.meta)
            data[p] = add_noise(forward(local, dgrid, n_angles=n_angles, nprocs=nprocs), noise, stream=n)
            clean[p] = even_part_about(phantom, p)
            rec = invert_fbp(data[p], g, continuation, nprocs=nprocs)
            noisy[p] = rec.with_values(rec.values, even_about=p)
        logger.info("track at offset %g: %s", p, noise.describe())

    if resolver == 'exact':
        image = resolve_many(noisy, pairs=pairs)
    else:
        image = resolve_two(noisy[offsets[0]], noisy[offsets[1]], offsets[1], reg)
    meta = {'mode': mode, 'resolver': resolver, 'positions': antennas.positions, 'noise': noise.describe()}
    return LRResult(image.with_values(image.values, **meta), clean, noisy, data, meta)
