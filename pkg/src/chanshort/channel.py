"""Channel impulse responses, random channels and minimum-phase factoring."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .spectral import TapVector

#: |H| floor applied before taking the log in the cepstrum.
LOG_FLOOR = 1e-10
#: relative |H_min| vs |H| mismatch marking a bin as numerically at a null
MAG_AGREE = 1e-6
DEFAULT_PREFILTER_TAPS = 129
DEFAULT_FFT_SIZE = 1 << 19


class ChannelError(ValueError):
    pass


class MinPhaseError(ChannelError):
    """Truncated homomorphic prefilter is too far from all-pass."""


class StandardChannel(str, Enum):
    EPR4 = "epr4"
    PROAKIS_C = "proakis_c"


_PRESETS = {
    StandardChannel.EPR4: [0.5, 0.5, -0.5, -0.5],
    StandardChannel.PROAKIS_C: [0.227, 0.46, 0.688, 0.46, 0.227],
}


@dataclass(frozen=True)
class Cir:
    """Causal channel ``h`` (origin 0) observed in complex AWGN of variance ``n0``."""

    h: TapVector
    n0: float
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.h, TapVector):
            object.__setattr__(self, "h", TapVector(self.h, 0))
        if self.h.origin != 0:
            raise ChannelError("channel taps must be causal with origin 0")
        if not self.n0 > 0:
            raise ChannelError("n0 must be positive")
        object.__setattr__(self, "n0", float(self.n0))

    @property
    def length(self) -> int:
        return len(self.h)

    @property
    def taps(self) -> np.ndarray:
        return self.h.taps

    def with_n0(self, n0: float) -> "Cir":
        return Cir(self.h, n0, self.name)

    def with_snr_db(self, snr_db: float) -> "Cir":
        return self.with_n0(n0_from_snr_db(snr_db))


def n0_from_snr_db(snr_db: float) -> float:
    """Noise variance for unit-energy symbols through a unit-energy channel."""
    return 10.0 ** (-snr_db / 10.0)


def standard_channel(name, n0: float = 1.0) -> Cir:
    """EPR-4 or Proakis-C test channel."""
    try:
        key = StandardChannel(name.lower() if isinstance(name, str) else name)
    except ValueError:
        raise ChannelError(f"unknown channel {name!r}") from None
    return Cir(TapVector(_PRESETS[key]), n0, key.value)


def random_iid_channel(length: int, seed: int, n0: float = 1.0) -> Cir:
    """IID complex Gaussian taps scaled to unit energy.

    Taps come from ``numpy.random.default_rng(seed)`` (PCG64), one stream per
    seed, so a seed always reproduces the same channel.
    """
    if length < 1:
        raise ChannelError("length must be >= 1")
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    h /= np.sqrt(np.sum(np.abs(h) ** 2))
    return Cir(TapVector(h), n0, f"iid{length}-seed{seed}")


def channel_from_dict(spec: dict) -> Cir:
    """Parse the JSON channel description.

    Either ``{"name", "taps_re", "taps_im", "n0"}`` or
    ``{"preset": "epr4" | "proakis_c", "snr_db": x}``. A preset may also carry
    ``n0`` directly, and explicit taps may use ``snr_db`` instead of ``n0``.
    """
    if "preset" in spec:
        if "n0" in spec:
            n0 = float(spec["n0"])
        else:
            n0 = n0_from_snr_db(float(spec.get("snr_db", 0.0)))
        return standard_channel(spec["preset"], n0)
    if "taps_re" not in spec:
        raise ChannelError("channel spec needs 'preset' or 'taps_re'")
    re = np.asarray(spec["taps_re"], dtype=float)
    im = np.asarray(spec.get("taps_im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ChannelError("taps_re and taps_im differ in length")
    if "n0" in spec:
        n0 = float(spec["n0"])
    elif "snr_db" in spec:
        n0 = n0_from_snr_db(float(spec["snr_db"]))
    else:
        raise ChannelError("channel spec needs 'n0' or 'snr_db'")
    return Cir(TapVector(re + 1j * im), n0, spec.get("name", ""))


def channel_to_dict(cir: Cir) -> dict:
    return {
        "name": cir.name,
        "taps_re": cir.taps.real.tolist(),
        "taps_im": cir.taps.imag.tolist(),
        "n0": cir.n0,
    }


def load_channel(path) -> Cir:
    return channel_from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class MinPhaseResult:
    """Homomorphic prefilter and the minimum-phase equivalent channel.

    ``w_hom`` already contains the ``1/sqrt(N0)`` scaling, i.e. it is applied
    to the raw received samples and ``|W_hom(w)| = 1/sqrt(N0)``.
    ``h_tilde`` is the minimum-phase factor of ``h / sqrt(N0)``.
    """

    w_hom: TapVector
    h_tilde: TapVector
    allpass_deviation: float


def min_phase(cir: Cir, fft_size: int = DEFAULT_FFT_SIZE,
              prefilter_taps: int | None = None,
              tol: float = 1e-3) -> MinPhaseResult:
    """Minimum-phase factor of ``|H(w)|^2`` by the real-cepstrum method.

    log|H| is folded onto the causal half of the cepstrum and exponentiated.
    The all-pass prefilter ``H_min / (sqrt(N0) H)`` is then sampled and
    truncated to two-sided taps centred on delay 0. With
    ``prefilter_taps=None`` the length starts at 129 and doubles (up to
    ``fft_size // 2``) until the all-pass tolerance is met.

    Raises:
        MinPhaseError: if the truncated prefilter deviates from all-pass by
            more than ``tol`` (``max | |W|*sqrt(N0) - 1 |``).
    """
    L = cir.length
    if fft_size < 16 * L:
        raise ChannelError("fft_size must be at least 16 * channel length")
    n = int(fft_size)
    k = np.arange(n)
    # fft on a grid offset by half a bin: modulate by exp(-j pi k / n)
    shift = np.exp(-1j * np.pi * k / n)
    h_pad = np.zeros(n, dtype=complex)
    h_pad[:L] = cir.taps
    H = np.fft.fft(h_pad * shift)  # exp(-j w l) kernel at w = 2pi(m + 1/2)/n

    log_mag = np.log(np.maximum(np.abs(H), LOG_FLOOR))
    ceps = np.fft.ifft(log_mag) * np.conj(shift)  # valid for delays 0..n/2
    fold = np.zeros(n, dtype=complex)
    fold[0] = ceps[0]
    fold[1:n // 2] = 2.0 * ceps[1:n // 2]
    fold[n // 2] = ceps[n // 2]
    H_min = np.exp(np.fft.fft(fold * shift))
    h_min = np.fft.ifft(H_min) * np.conj(shift)

    scale = 1.0 / np.sqrt(cir.n0)
    h_tilde = TapVector(h_min[:L] * scale)

    # Next to an exact spectral null the cepstral factor no longer reproduces
    # |H| and the phase of H_min / H is meaningless; those bins borrow the
    # ratio of the nearest bin where the magnitudes agree.
    mag = np.abs(H)
    ok = np.abs(np.abs(H_min) - mag) <= MAG_AGREE * np.maximum(mag, LOG_FLOOR)
    ratio = np.ones(n, dtype=complex)
    ratio[ok] = H_min[ok] / H[ok]
    ratio /= np.abs(ratio)
    if not ok.all():
        good = np.flatnonzero(ok)
        bad = np.flatnonzero(~ok)
        pos = np.searchsorted(good, bad) % good.size
        left, right = good[pos - 1], good[pos]
        dist_l = (bad - left) % n
        dist_r = (right - bad) % n
        ratio[bad] = ratio[np.where(dist_l <= dist_r, left, right)]
    coeffs = np.fft.ifft(ratio) * np.conj(shift)  # indexed by delay mod n

    lengths = [prefilter_taps] if prefilter_taps else _doubling(DEFAULT_PREFILTER_TAPS, n // 2)
    for n_taps in lengths:
        half = n_taps // 2
        d = np.arange(-half, n_taps - half)
        taps = coeffs[d % n] * np.exp(1j * np.pi * (d - d % n) / n)
        Wt = np.fft.fft(_wrap(taps, d, n))
        dev = float(np.max(np.abs(np.abs(Wt) - 1.0)))
        if dev <= tol:
            break
    else:
        raise MinPhaseError(
            f"truncated all-pass prefilter deviates by {dev:.3g} (> {tol:g})")
    return MinPhaseResult(TapVector(taps * scale, half), h_tilde, dev)


def _doubling(start: int, cap: int) -> list[int]:
    out = [start]
    while 2 * out[-1] - 1 <= cap:
        out.append(2 * out[-1] - 1)
    return out


def _wrap(taps: np.ndarray, delays: np.ndarray, n: int) -> np.ndarray:
    buf = np.zeros(n, dtype=complex)
    # exp(-j w d) on the offset grid = exp(-2j pi m d / n) * exp(-j pi d / n)
    np.add.at(buf, delays % n, taps * np.exp(-1j * np.pi * delays / n))
    return buf


def split_target(h_tilde: TapVector, nu: int) -> tuple[TapVector, TapVector]:
    """Split a causal response into target ``h_f`` and feedback tail ``h_b``.

    ``h_f`` holds delays ``0..nu``. ``h_b`` keeps the remaining taps at their
    original delays ``nu+1..L-1`` (stored with explicit leading zeros); it is a
    single zero tap when ``nu = L-1``.
    """
    L = len(h_tilde)
    if h_tilde.origin != 0:
        raise ChannelError("split_target expects a causal response")
    if not 0 <= nu <= L - 1:
        raise ChannelError(f"nu must lie in [0, {L - 1}]")
    h_f = TapVector(h_tilde.taps[:nu + 1])
    if nu == L - 1:
        h_b = TapVector(np.zeros(1))
    else:
        h_b = TapVector(np.concatenate([np.zeros(nu + 1), h_tilde.taps[nu + 1:]]))
    return h_f, h_b
