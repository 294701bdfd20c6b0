"""Periodic-channel grid and its derivative toolbox.

Scalar fields live on a tensor grid of the unit channel T^2 x [0,1]:
surface fields have shape (n1, n2), volume fields (n1, n2, n3).  The
horizontal directions are 1-periodic and differentiated as Fourier
multipliers; the vertical direction carries n3 nodes including both
walls and is differentiated with second-order finite differences
(centered inside, one-sided at the walls).

Derivative multipliers zero the Nyquist column so that every spectral
derivative is exactly skew-adjoint for the discrete mean inner product;
this is what makes the weak-form identities in the plate and pressure
modules hold to roundoff.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * np.pi


class Grid:
    """Collocation grid with cached spectral multipliers.

    n1, n2: horizontal point counts (even, >= 8).
    n3: vertical point count including both walls (>= 9).
    """

    def __init__(self, n1: int, n2: int, n3: int):
        if n1 < 8 or n2 < 8 or n1 % 2 or n2 % 2:
            raise ConfigError(f"horizontal sizes must be even and >= 8, got {n1}x{n2}")
        if n3 < 9:
            raise ConfigError(f"vertical point count must be >= 9, got {n3}")
        self.n1, self.n2, self.n3 = n1, n2, n3
        self.dz = 1.0 / (n3 - 1)
        self.x1 = np.arange(n1) / n1
        self.x2 = np.arange(n2) / n2
        self.x3 = np.linspace(0.0, 1.0, n3)

        # integer wavevectors; rfft halves the second axis
        k1 = np.fft.fftfreq(n1, d=1.0 / n1)
        k2 = np.arange(n2 // 2 + 1, dtype=float)
        self.k1, self.k2 = k1, k2
        k1d = np.where(np.abs(k1) == n1 // 2, 0.0, k1)
        k2d = np.where(k2 == n2 // 2, 0.0, k2)
        self._ik1 = (1j * TWO_PI * k1d)[:, None]
        self._ik2 = (1j * TWO_PI * k2d)[None, :]
        self.ksq = (TWO_PI ** 2) * (k1d[:, None] ** 2 + k2d[None, :] ** 2)
        # full wavevector magnitude for norm multipliers (Nyquist kept)
        self.ksq_full = (TWO_PI ** 2) * (k1[:, None] ** 2 + k2[None, :] ** 2)

        cut1, cut2 = n1 // 3, n2 // 3
        self.dealias_mask = (np.abs(k1)[:, None] <= cut1) & (k2[None, :] <= cut2)

        w = np.full(n3, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        self._zweights = w
        self._ext_profiles = None

    # -- transforms -------------------------------------------------------

    def rfft2(self, f):
        return np.fft.rfft2(f, axes=(0, 1))

    def irfft2(self, fh):
        return np.fft.irfft2(fh, s=(self.n1, self.n2), axes=(0, 1))

    def _bcast(self, mult, ndim):
        return mult[..., None] if ndim == 3 else mult

    # -- horizontal spectral derivatives ----------------------------------

    def dx1(self, f):
        fh = self.rfft2(f)
        return self.irfft2(self._bcast(self._ik1, f.ndim) * fh)

    def dx2(self, f):
        fh = self.rfft2(f)
        return self.irfft2(self._bcast(self._ik2, f.ndim) * fh)

    def lap2(self, f):
        fh = self.rfft2(f)
        return self.irfft2(-self._bcast(self.ksq, f.ndim) * fh)

    def dealias(self, f):
        fh = self.rfft2(f)
        fh *= self._bcast(self.dealias_mask, f.ndim)
        return self.irfft2(fh)

    # -- vertical finite differences --------------------------------------

    def dz_v(self, f):
        """First vertical derivative: centered inside, one-sided 2nd order at walls."""
        out = np.empty_like(f)
        h = self.dz
        out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
        out[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * h)
        out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * h)
        return out

    def dzz_v(self, f):
        """Second vertical derivative; one-sided 4-point at the walls."""
        out = np.empty_like(f)
        h2 = self.dz ** 2
        out[..., 1:-1] = (f[..., 2:] - 2.0 * f[..., 1:-1] + f[..., :-2]) / h2
        out[..., 0] = (2.0 * f[..., 0] - 5.0 * f[..., 1] + 4.0 * f[..., 2] - f[..., 3]) / h2
        out[..., -1] = (2.0 * f[..., -1] - 5.0 * f[..., -2] + 4.0 * f[..., -3] - f[..., -4]) / h2
        return out

    # -- means and norms ---------------------------------------------------

    def smean(self, f):
        return float(f.mean())

    def vmean(self, f):
        """Volume mean: horizontal average times trapezoidal vertical quadrature."""
        return float(f.mean(axis=(0, 1)) @ self._zweights)

    def sl2(self, f):
        return float(np.sqrt(np.mean(f * f)))

    def vl2(self, f):
        return float(np.sqrt(self.vmean(f * f)))

    @property
    def x3v(self):
        """x3 broadcast to volume shape (1, 1, n3)."""
        return self.x3[None, None, :]

    # rfft coefficient weights for Parseval sums (double the interior columns)
    @property
    def rfft_weights(self):
        w = np.full(self.n2 // 2 + 1, 2.0)
        w[0] = 1.0
        if self.n2 % 2 == 0:
            w[-1] = 1.0
        return w


def random_surface(grid: Grid, rng: np.random.Generator, kmax: int, amplitude: float,
                   zero_mean: bool = True):
    """Random band-limited surface field with sup norm = amplitude.

    Modes are drawn uniformly inside |k1|, k2 <= kmax, well inside the
    dealiasing cutoff for the default kmax choices.
    """
    n1, n2 = grid.n1, grid.n2
    fh = np.zeros((n1, n2 // 2 + 1), dtype=complex)
    sel1 = np.abs(grid.k1) <= kmax
    sel2 = grid.k2 <= kmax
    block = rng.standard_normal((sel1.sum(), sel2.sum())) + 1j * rng.standard_normal(
        (sel1.sum(), sel2.sum()))
    fh[np.ix_(sel1, sel2)] = block
    if zero_mean:
        fh[0, 0] = 0.0
    f = grid.irfft2(fh)
    m = np.abs(f).max()
    if m > 0:
        f *= amplitude / m
    return f
