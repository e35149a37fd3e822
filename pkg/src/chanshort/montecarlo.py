"""Block transmission, measured mutual information and sweep experiments.

Every block draws its bits and noise from ``numpy.random.default_rng`` seeded
with ``(seed, block)``, so the same blocks are replayed at every SNR point,
delay and shortener (common random numbers), and results are reproducible
bit for bit.
"""
from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import Cir, channel_from_dict, n0_from_snr_db
from .design import TruncationWarning, design_hom, optimize_fom, optimize_ubm
from .modulation import Modulation
from .sove import TrellisConfig, forward_pass, hard_bits, llrs_for_delay

log = logging.getLogger(__name__)

DEFAULT_BLOCK_LEN = 1064
RESULTS_CSV_VERSION = "chanshort-sim/1"
RESULT_COLUMNS = ("shortener", "sigma_in", "modulation", "snr_db", "d", "ser", "ber",
                  "mi_bits", "mi_norm", "sigma_out", "se_mi", "n_blocks")
SHORTENERS = ("fom", "ubm", "hom")


def transmit(bits, modulation, cir: Cir, rng: np.random.Generator,
             noise: np.ndarray | None = None):
    """Map bits, pass them through ``h`` and add complex AWGN of variance ``N0``.

    Returns ``(x, y)``; ``y`` has ``K + L - 1`` samples because ``L-1`` zero
    guard symbols follow the data. ``noise`` may supply unit-variance complex
    samples to reuse.
    """
    mod = Modulation.of(modulation)
    x = mod.map_bits(bits)
    K, L = x.size, cir.length
    padded = np.concatenate([x, np.zeros(L - 1, complex)])
    clean = np.convolve(padded, cir.taps)[:K + L - 1]
    if noise is None:
        noise = (rng.standard_normal(K + L - 1)
                 + 1j * rng.standard_normal(K + L - 1)) / np.sqrt(2.0)
    return x, clean + np.sqrt(cir.n0) * noise


def measured_mi(llrs, true_bits, bits_per_symbol: int = 1) -> float:
    """``log2|X| + sum_n mean log2 p(true bit | LLR)`` in bits per symbol.

    ``p = 1 / (1 + exp(-s L))`` with ``s = +1`` for bit 1 and ``-1`` for bit 0.
    """
    llrs = np.asarray(llrs, float)
    s = 2.0 * np.asarray(true_bits, float) - 1.0
    if llrs.shape != s.shape:
        raise ValueError("llrs and true_bits differ in length")
    log2p = -np.logaddexp(0.0, -s * llrs) / np.log(2.0)
    return float(bits_per_symbol * (1.0 + np.mean(log2p)))


@dataclass(frozen=True)
class SimConfig:
    channel: Cir | dict
    modulation: str = "bpsk"
    shortener: str = "fom"
    sigma: float = 1.0
    nu: int = 1
    d: int | None = None
    block_len: int = DEFAULT_BLOCK_LEN
    n_blocks: int = 100
    snr_db: tuple = (10.0,)
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.channel, dict):
            object.__setattr__(self, "channel", channel_from_dict(self.channel))
        object.__setattr__(self, "modulation", Modulation.of(self.modulation))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in np.atleast_1d(self.snr_db)))
        if self.shortener not in SHORTENERS:
            raise ValueError(f"shortener must be one of {SHORTENERS}")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must lie in [0, 1]")
        if self.block_len < 64:
            raise ValueError("block_len must be >= 64")
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be >= 1")


@dataclass
class SimRow:
    shortener: str
    sigma_in: float
    modulation: str
    snr_db: float
    d: int
    ser: float
    ber: float
    mi_bits: float
    mi_norm: float
    sigma_out: float
    se_mi: float
    n_blocks: int
    se_ser: float = 0.0
    block_mi: np.ndarray = field(default=None, repr=False)  # bits per symbol
    bits_per_symbol: int = 1

    @property
    def se_mi_norm(self) -> float:
        return self.se_mi / self.bits_per_symbol

    def as_csv_row(self) -> dict:
        return {k: getattr(self, k) for k in RESULT_COLUMNS}


def design_filters(cir: Cir, shortener: str, nu: int, sigma: float = 1.0):
    """Filters for one (channel, SNR) design point."""
    if shortener == "hom":
        return design_hom(cir, nu)
    if shortener == "ubm":
        return optimize_ubm(cir, nu)
    with warnings.catch_warnings():
        warnings.simplefilter("always", TruncationWarning)
        return optimize_fom(cir, nu, sigma)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(block)])


def _block_draws(config: SimConfig, block: int):
    rng = block_rng(config.seed, block)
    m = config.modulation.bits_per_symbol
    K, L = config.block_len, config.channel.length
    bits = rng.integers(0, 2, K * m)
    noise = (rng.standard_normal(K + L - 1) + 1j * rng.standard_normal(K + L - 1)) / np.sqrt(2.0)
    return bits, noise, rng


def run_point(config: SimConfig, snr_db: float, filters=None) -> SimRow:
    """Design once, then run ``n_blocks`` blocks at one SNR point."""
    return _simulate(config, snr_db, filters, [config.d])[0]


def _simulate(config: SimConfig, snr_db: float, filters, delays) -> list[SimRow]:
    # one forward pass per block serves every decision delay
    cir = config.channel.with_snr_db(snr_db)
    if filters is None:
        filters = design_filters(cir, config.shortener, config.nu, config.sigma)
    mod = config.modulation
    m = mod.bits_per_symbol
    K, n = config.block_len, config.n_blocks
    cfgs = [TrellisConfig(config.nu, mod, d) for d in delays]
    block_mi = np.empty((len(cfgs), n))
    sym_err = np.empty((len(cfgs), n))
    bit_err = np.empty((len(cfgs), n))
    for blk in range(n):
        bits, noise, rng = _block_draws(config, blk)
        _, y = transmit(bits, mod, cir, rng, noise)
        fp = forward_pass(y, filters, cfgs[0], K)
        for c, tcfg in enumerate(cfgs):
            frame = llrs_for_delay(fp, tcfg.delay(cir.length))
            wrong = hard_bits(frame) != bits
            block_mi[c, blk] = measured_mi(frame.llrs, bits, m)
            bit_err[c, blk] = wrong.mean()
            sym_err[c, blk] = wrong.reshape(K, m).any(axis=1).mean()

    def se(v):
        return float(v.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")

    rows = []
    for c, tcfg in enumerate(cfgs):
        ser = float(sym_err[c].mean())
        mi = float(block_mi[c].mean())
        rows.append(SimRow(
            shortener=config.shortener,
            sigma_in=config.sigma if config.shortener == "fom" else float("nan"),
            modulation=mod.name.value, snr_db=float(snr_db), d=tcfg.delay(cir.length),
            ser=ser, ber=float(bit_err[c].mean()), mi_bits=mi, mi_norm=mi / m,
            sigma_out=1.0 - ser, se_mi=se(block_mi[c]), n_blocks=n,
            se_ser=se(sym_err[c]), block_mi=block_mi[c], bits_per_symbol=m))
    return rows


def run(config: SimConfig) -> list[SimRow]:
    return [run_point(config, s) for s in config.snr_db]


def sigma_experiment(config: SimConfig, snr_db: float, sigma_grid) -> list[tuple]:
    """``(sigma_in, sigma_out, se)`` for FOM designs at each ``sigma_in``."""
    out = []
    for s in sigma_grid:
        row = run_point(replace(config, shortener="fom", sigma=float(s)), snr_db)
        out.append((float(s), row.sigma_out, row.se_ser))
    return out


def snr_at_mi(snr_db, mi_norm, target: float) -> float:
    """First upward crossing of ``target`` by linear interpolation (NaN if none)."""
    snr = np.asarray(snr_db, float)
    mi = np.asarray(mi_norm, float)
    for a in range(snr.size - 1):
        if mi[a] <= target <= mi[a + 1] and mi[a + 1] > mi[a]:
            return float(snr[a] + (target - mi[a]) * (snr[a + 1] - snr[a]) / (mi[a + 1] - mi[a]))
    return float("nan")


@dataclass
class DelaySweep:
    rows: dict  # d -> list[SimRow]
    target: float
    snr_at_target: dict  # d -> dB


def delay_sweep(config: SimConfig, d_values, target: float = 0.5) -> DelaySweep:
    """MI-versus-SNR per decision delay and the SNR reaching ``target``.

    Filters are designed once per SNR point and shared by every delay.
    """
    rows = {int(d): [] for d in d_values}
    for snr in config.snr_db:
        cir = config.channel.with_snr_db(snr)
        filters = design_filters(cir, config.shortener, config.nu, config.sigma)
        for d, row in zip(rows, _simulate(config, snr, filters, list(rows))):
            rows[d].append(row)
    at = {d: snr_at_mi([r.snr_db for r in rr], [r.mi_norm for r in rr], target)
          for d, rr in rows.items()}
    return DelaySweep(rows, target, at)


def write_results_csv(rows, stream=None) -> str:
    buf = io.StringIO()
    buf.write(f"# {RESULTS_CSV_VERSION}; mi in bits per symbol\n")
    w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_csv_row())
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


__all__ = ["transmit", "measured_mi", "SimConfig", "SimRow", "run_point", "run",
           "sigma_experiment", "delay_sweep", "DelaySweep", "snr_at_mi",
           "write_results_csv", "design_filters", "n0_from_snr_db"]
