"""
Frequency domain relations between reflectivity and data, and the Fourier-Hankel
inversion route.

Conventions
-----------
Reflectivity spectra use the unitary transform
    f^(xi, eta) = 1/(2 pi) * iint exp(-i(x xi + y eta)) f(x, y) dx dy.
Data spectra use a plain transform along the track and the order zero Hankel
transform in range
    g^(xi, rho) = int exp(-i x xi) int g(x, r) r J0(r rho) dr dx.
With these conventions
    f^(xi, eta) = 1/2 |eta| g^(xi, sqrt(xi^2 + eta^2))
    g^(xi, rho) = 2 f^(xi, sqrt(rho^2 - xi^2)) / sqrt(rho^2 - xi^2),  rho > |xi|.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import special

from .errors import ValidationError, check_finite, require
from .grids import Image

logger = logging.getLogger(__name__)

# relative size of |f(r_max)| above which hankel_j0 warns about truncation
DECAY_WARNING = 1e-3
# entries of the J0 kernel evaluated per block
KERNEL_BLOCK = 1 << 22


@dataclass(frozen=True)
class SpectralField:
    """
    Complex samples on a uniform, ascending (rows x cols) coordinate lattice.

    `row_name` is 'rho' or 'eta' for the range frequency, `col_name` is 'xi'
    for the track frequency or 'x' for a field that is still spatial in x.
    """
    values: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    row_name: str = 'eta'
    col_name: str = 'xi'
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        rows = np.array(self.rows, dtype=float)
        cols = np.array(self.cols, dtype=float)
        require(values.shape == (len(rows), len(cols)),
                "spectrum has shape {0}, coordinates give {1}", values.shape, (len(rows), len(cols)))
        for name, c in (('rows', rows), ('cols', cols)):
            if len(c) > 1:
                step = np.diff(c)
                require(np.all(step > 0) and np.allclose(step, step[0], rtol=1e-6, atol=1e-12),
                        "spectrum {0} must be uniform and ascending", name)
        for arr in (values, rows, cols):
            arr.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'cols', cols)
        object.__setattr__(self, 'meta', dict(self.meta))

    def is_hermitian(self, tol=1e-9):
        """True if values(-col) = conj(values(col)) on the columns present with both signs."""
        idx = {round(c, 9): i for i, c in enumerate(self.cols)}
        for i, c in enumerate(self.cols):
            j = idx.get(round(-c, 9))
            if j is not None and not np.allclose(self.values[:, j], np.conj(self.values[:, i]), atol=tol):
                return False
        return True


def angular_frequencies(n, d):
    """fft-ordered angular frequencies 2 pi k / (n d)."""
    return 2 * np.pi * np.fft.fftfreq(n, d)


def bessel_j0(z):
    """Bessel function of the first kind of order zero."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValidationError("bessel_j0 needs finite arguments")
    return special.j0(z)


def trapezoid_weights(r):
    """Trapezoid rule weights for samples at (possibly non-uniform) nodes r."""
    r = np.asarray(r, dtype=float)
    w = np.zeros_like(r)
    step = np.diff(r)
    w[:-1] += 0.5 * step
    w[1:] += 0.5 * step
    return w


def check_decay(samples, r):
    """Log a warning when the samples have not decayed at the last radius."""
    f = np.asarray(samples)
    if not f.size:
        return
    peak = np.max(np.abs(f))
    tail = np.max(np.abs(f[-1]))
    if peak > 0 and tail > DECAY_WARNING * peak:
        logger.warning("hankel_j0: samples have not decayed at r=%g (|f|=%.3g of peak)", r[-1], tail / peak)


def hankel_j0(samples, r, rho, weights=None, warn=True):
    """
    Order zero Hankel transform H(rho) = sum_j w_j f(r_j) r_j J0(r_j rho).

    parameters
    ----------
    samples : array-like
        f(r_j), shape (n_r,) or (n_r, m) for m functions at once. May be complex.

    r : array-like
        Nodes r_j >= 0.

    rho : array-like
        Output frequencies.

    weights : array-like or None
        Quadrature weights w_j. None uses the trapezoid rule on `r`. Explicit
        weights allow substitution rules for endpoint singularities.

    warn : bool
        Log a warning when |f| has not decayed at the last node.

    return
    ------
    H : `numpy.ndarray`
        Shape (n_rho,) or (n_rho, m).
    """
    f = np.asarray(samples)
    r = np.asarray(r, dtype=float)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    require(f.shape[0] == len(r), "hankel_j0: {0} samples for {1} nodes", f.shape[0], len(r))
    w = trapezoid_weights(r) if weights is None else np.asarray(weights, dtype=float)
    require(w.shape == r.shape, "hankel_j0: weights do not match the nodes")
    if warn:
        check_decay(f, r)

    wr = (w * r)
    flat = f.reshape(len(r), -1) * wr[:, None]
    out = np.empty((len(rho), flat.shape[1]), dtype=np.result_type(flat, float))
    block = max(1, KERNEL_BLOCK // max(1, len(r)))
    for s in range(0, len(rho), block):
        kernel = special.j0(np.outer(rho[s:s + block], r))
        out[s:s + block] = kernel @ flat
    return out.reshape((len(rho),) + f.shape[1:])


def _interp_complex(xq, xp, fp, left=0.0, right=0.0):
    return (np.interp(xq, xp, fp.real, left=left, right=right)
            + 1j * np.interp(xq, xp, fp.imag, left=left, right=right))


def data_to_reflectivity_spectrum(gspec, eta):
    """
    f^(xi, eta) = 1/2 |eta| g^(xi, sqrt(xi^2 + eta^2)), linear in rho.

    parameters
    ----------
    gspec : `SpectralField`
        Data spectrum with rows 'rho' and columns 'xi'.

    eta : array-like
        Uniform ascending range frequencies of the output.

    return
    ------
    fspec : `SpectralField`
        Rows 'eta', columns 'xi'.
    """
    require(gspec.row_name == 'rho', "data spectrum rows must be 'rho', got {0!r}", gspec.row_name)
    eta = np.asarray(eta, dtype=float)
    xi = gspec.cols
    target = np.hypot(xi[None, :], eta[:, None])
    top = gspec.rows[-1]
    if np.any(target > top * (1 + 1e-12)):
        raise ValidationError("requested sqrt(xi^2+eta^2) up to {0:.6g} exceeds rho coverage {1:.6g}"
                              .format(float(target.max()), top))
    out = np.empty(target.shape, dtype=complex)
    for k in range(len(xi)):
        out[:, k] = 0.5 * np.abs(eta) * _interp_complex(target[:, k], gspec.rows, gspec.values[:, k])
    return SpectralField(out, eta, xi, 'eta', gspec.col_name, {'relation': 'data_to_reflectivity'})


def reflectivity_to_data_spectrum(fspec, rho, guard_bins=1):
    """
    g^(xi, rho) = 2 f^(xi, sqrt(rho^2 - xi^2)) / sqrt(rho^2 - xi^2) for rho > |xi|.

    The cone rho <= |xi| is zero, and so is a guard band of `guard_bins` rho bins
    above it. f^ is read at |eta| by linear interpolation and is 0 beyond the
    eta rows of `fspec`.

    parameters
    ----------
    fspec : `SpectralField`
        Rows 'eta', columns 'xi'.

    rho : array-like
        Uniform ascending output radii.

    guard_bins : int

    return
    ------
    gspec : `SpectralField`
    """
    require(fspec.row_name == 'eta', "reflectivity spectrum rows must be 'eta', got {0!r}", fspec.row_name)
    rho = np.asarray(rho, dtype=float)
    xi = fspec.cols
    drho = rho[1] - rho[0] if len(rho) > 1 else 0.0
    out = np.zeros((len(rho), len(xi)), dtype=complex)
    eta_nodes = fspec.rows
    for k, x in enumerate(xi):
        live = rho > abs(x) + guard_bins * drho
        if not np.any(live):
            continue
        s = np.sqrt(rho[live] ** 2 - x ** 2)
        if eta_nodes[0] < 0:
            vals = _interp_complex(s, eta_nodes, fspec.values[:, k])
        else:
            vals = _interp_complex(s, eta_nodes, fspec.values[:, k], left=fspec.values[0, k])
        out[live, k] = 2 * vals / s
    return SpectralField(out, rho, xi, 'rho', fspec.col_name,
                         {'relation': 'reflectivity_to_data', 'guard_bins': guard_bins})


def track_transform(values, d_track, track_min):
    """int exp(-i x xi) g dx along axis 1, fft ordered."""
    n = values.shape[1]
    xi = angular_frequencies(n, d_track)
    phase = np.exp(-1j * xi * track_min)
    return d_track * np.fft.fft(values, axis=1) * phase[None, :], xi


def data_spectrum(data, rho=None):
    """
    Data spectrum g^(xi, rho) of a DataField.

    `rho` defaults to a uniform grid with step pi/(2 R) up to pi/d_radius.
    """
    dg = data.grid
    if rho is None:
        rho = np.arange(0.0, np.pi / dg.d_radius + 1e-12, np.pi / (2 * dg.radius_max))
    G, xi = track_transform(data.values, dg.d_track, dg.track_min)
    H = hankel_j0(G, dg.r, rho)
    order = np.argsort(xi)
    return SpectralField(H[:, order], rho, xi[order], 'rho', 'xi', {'kind': 'data'})


def reflectivity_spectrum(img):
    """Unitary 2-D spectrum of an image, rows 'eta', columns 'xi', both ascending."""
    g = img.grid
    xi = angular_frequencies(g.nx, g.dx)
    eta = angular_frequencies(g.ny, g.dy)
    F = np.fft.fft2(img.values)
    F = F * np.exp(-1j * (eta[:, None] * g.y0 + xi[None, :] * g.x0)) * (g.dx * g.dy / (2 * np.pi))
    F = np.fft.fftshift(F)
    return SpectralField(F, np.fft.fftshift(eta), np.fft.fftshift(xi), 'eta', 'xi', {'kind': 'reflectivity'})


def _eta_nodes(data, igrid):
    """Uniform eta nodes on [0, pi/dy] with trapezoid weights."""
    extent = max(data.grid.radius_max, abs(igrid.y0), abs(igrid.y_max))
    step = np.pi / (2 * extent)
    eta = np.arange(0.0, np.pi / igrid.dy + 0.5 * step, step)
    return eta, trapezoid_weights(eta)


def invert_fourier(data, igrid, method='grid'):
    """
    Reconstruct f from g through the track Fourier transform and the Hankel transform.

    parameters
    ----------
    data : `DataField`
        Must cover the image: track range over the image columns and
        radius_max at least max|y|.

    igrid : `ImageGrid`

    method : str
        'grid' evaluates the Hankel transform on a uniform rho grid and resamples
        it linearly (data_to_reflectivity_spectrum); 'direct' evaluates it at
        rho = sqrt(xi^2 + eta^2) for every eta node.

    return
    ------
    img : `Image`
        Even in y by construction.
    """
    dg = data.grid
    require(method in ('grid', 'direct'), "unknown fourier method {0!r}; use grid or direct", method)
    require(dg.track_min <= igrid.x0 + 1e-9 and dg.track_max >= igrid.x_max - 1e-9,
            "data track [{0}, {1}] does not cover image columns [{2}, {3}]",
            dg.track_min, dg.track_max, igrid.x0, igrid.x_max)
    require(dg.radius_max >= max(abs(igrid.y0), abs(igrid.y_max)) - 1e-9,
            "data radius {0} does not cover image rows up to |y|={1}",
            dg.radius_max, max(abs(igrid.y0), abs(igrid.y_max)))

    # plain fft along the track; the inverse fft below cancels its constants
    G = np.fft.fft(data.values, axis=1)
    xi = angular_frequencies(dg.n_track, dg.d_track)
    band = np.abs(xi) <= np.pi / igrid.dx * (1 + 1e-12)
    eta, w_eta = _eta_nodes(data, igrid)
    check_decay(data.values, dg.r)

    fhat = np.zeros((len(eta), dg.n_track), dtype=complex)
    if method == 'grid':
        rho_top = np.hypot(np.max(np.abs(xi[band])), eta[-1])
        drho = np.pi / (2 * dg.radius_max)
        rho = np.arange(0.0, rho_top + 2 * drho, drho)
        order = np.argsort(xi)
        ghat = hankel_j0(G, dg.r, rho, warn=False)
        gspec = SpectralField(ghat[:, order], rho, xi[order], 'rho', 'xi')
        fspec = data_to_reflectivity_spectrum(gspec, eta)
        fhat[:, order] = fspec.values
    else:
        for k in np.flatnonzero(band):
            rho = np.hypot(xi[k], eta)
            fhat[:, k] = 0.5 * eta * hankel_j0(G[:, k], dg.r, rho, warn=False)
    fhat[:, ~band] = 0.0

    # F(xi, y) = 2 int_0^inf cos(y eta) f^ d eta, then the inverse track transform
    cosines = np.cos(np.abs(igrid.y)[:, None] * eta[None, :]) * w_eta[None, :]
    F = 2 * cosines @ fhat
    rows = np.real(np.fft.ifft(F, axis=1))
    values = np.empty(igrid.shape)
    for j in range(igrid.ny):
        values[j, :] = np.interp(igrid.x, dg.x, rows[j, :])
    check_finite(values, "fourier reconstruction")
    logger.info("fourier reconstruction on %dx%d grid (%s)", igrid.nx, igrid.ny, method)
    return Image(igrid, values, {'method': 'fourier', 'fourier_method': method,
                                 'eta_step': float(eta[1] - eta[0]), 'cone_guard_bins': 1})
