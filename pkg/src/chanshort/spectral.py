"""Tap sequences and DTFT-domain numerics on a uniform frequency grid.

Every frequency integral ``(1/2pi) * int_{-pi}^{pi} X(w) dw`` used by the
library is evaluated as the mean of ``X`` over a :class:`FrequencyGrid`.
The DTFT follows the positive-exponent convention
``X(w) = sum_l x_l exp(j w l)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_RATE_POINTS = 4096
DEFAULT_INNER_POINTS = 1024


@dataclass(frozen=True)
class TapVector:
    """Finite complex sequence whose element ``origin`` sits at delay 0.

    ``taps[i]`` is the coefficient at delay ``i - origin``, so two-sided
    (non-causal) filters are represented with ``origin > 0``.
    """

    taps: np.ndarray
    origin: int = 0

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=complex)).ravel()
        if taps.size < 1:
            raise ValueError("a TapVector needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "origin", int(self.origin))

    def __len__(self):
        return self.taps.size

    @property
    def delays(self) -> np.ndarray:
        return np.arange(self.taps.size) - self.origin

    @property
    def first_delay(self) -> int:
        return -self.origin

    @property
    def last_delay(self) -> int:
        return self.taps.size - 1 - self.origin

    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))

    def at(self, delay: int) -> complex:
        """Coefficient at ``delay`` (zero outside the support)."""
        i = delay + self.origin
        if 0 <= i < self.taps.size:
            return complex(self.taps[i])
        return 0j

    def window(self, first: int, last: int) -> np.ndarray:
        """Coefficients at delays ``first..last`` inclusive, zero-filled."""
        out = np.zeros(last - first + 1, dtype=complex)
        lo = max(first, self.first_delay)
        hi = min(last, self.last_delay)
        if lo <= hi:
            out[lo - first:hi - first + 1] = self.taps[lo + self.origin:hi + self.origin + 1]
        return out

    def scaled(self, c: complex) -> "TapVector":
        return TapVector(self.taps * c, self.origin)

    @classmethod
    def causal(cls, taps) -> "TapVector":
        return cls(taps, 0)

    @classmethod
    def at_delays(cls, taps, first_delay: int) -> "TapVector":
        """Build a vector whose first tap sits at ``first_delay``.

        A positive ``first_delay`` is stored with explicit leading zeros so
        that ``origin`` stays non-negative.
        """
        taps = np.asarray(taps, dtype=complex).ravel()
        if first_delay >= 0:
            return cls(np.concatenate([np.zeros(first_delay, complex), taps]), 0)
        return cls(taps, -first_delay)

    @classmethod
    def impulse(cls) -> "TapVector":
        return cls([1.0], 0)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid ``w_n = -pi + 2 pi n / N`` covering one period."""

    n_points: int = DEFAULT_RATE_POINTS
    omegas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        w = -np.pi + 2.0 * np.pi * np.arange(self.n_points) / self.n_points
        w.setflags(write=False)
        object.__setattr__(self, "omegas", w)

    def __len__(self):
        return self.n_points

    def harmonic(self, k: int) -> np.ndarray:
        """``exp(j k w)`` sampled on the grid."""
        return np.exp(1j * k * self.omegas)

    def harmonics(self, ks) -> np.ndarray:
        """Matrix with rows ``exp(j k w)`` for each ``k`` in ``ks``."""
        ks = np.asarray(ks)
        return np.exp(1j * np.outer(ks, self.omegas))


@dataclass(frozen=True)
class Spectrum:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).ravel()
        if v.size != self.grid.n_points:
            raise ValueError(
                f"spectrum has {v.size} values for a {self.grid.n_points}-point grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def abs2(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def dtft_values(taps: TapVector, grid: FrequencyGrid) -> np.ndarray:
    """Raw array form of :func:`dtft`."""
    n = grid.n_points
    if len(taps) > n:
        d = taps.delays
        return np.exp(1j * np.outer(grid.omegas, d)) @ taps.taps
    # exp(j w_n l) = (-1)^l exp(2 pi j n l / N)
    d = taps.delays
    buf = np.zeros(n, dtype=complex)
    np.add.at(buf, d % n, taps.taps * np.where(d % 2 == 0, 1.0, -1.0))
    return np.fft.ifft(buf) * n


def dtft(taps: TapVector, grid: FrequencyGrid) -> Spectrum:
    """Sample ``X(w) = sum_l x_l exp(j w l)`` on ``grid``."""
    return Spectrum(grid, dtft_values(taps, grid))


def idtft_values(values: np.ndarray, first: int, last: int) -> np.ndarray:
    """Riemann-sum inverse DTFT for delays ``first..last`` inclusive."""
    values = np.asarray(values, dtype=complex)
    n = values.size
    d = np.arange(first, last + 1)
    coeffs = np.fft.fft(values) / n
    return coeffs[d % n] * np.where(d % 2 == 0, 1.0, -1.0)


def idtft(spectrum: Spectrum, index_range: tuple[int, int]) -> TapVector:
    """Taps ``x_l = mean_n X(w_n) exp(-j w_n l)`` for ``l`` in ``index_range``.

    ``index_range`` is an inclusive ``(first, last)`` pair of delays.
    """
    first, last = index_range
    if last < first:
        raise ValueError("empty index range")
    taps = idtft_values(spectrum.values, first, last)
    return TapVector.at_delays(taps, first) if first >= 0 else TapVector(taps, -first)


def mean_integral(spectrum) -> complex:
    """Grid mean, i.e. ``(1/2pi) int X(w) dw`` by the periodic Riemann sum.

    Accepts a :class:`Spectrum` or a bare array of grid samples.
    """
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    return complex(np.mean(values))


def convolve(a: TapVector, b: TapVector) -> TapVector:
    """Linear convolution; the delay-0 origin is propagated."""
    return TapVector(np.convolve(a.taps, b.taps), a.origin + b.origin)
