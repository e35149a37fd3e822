"""Capacity, LMMSE error, HOM rate bounds and the rate-ordering report.

Every rate is in nats per channel use.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np

from .channel import Cir
from .design import (DesignError, TruncationWarning, _channel_arrays, _epsilons, _phi,
                     _solve_eps, design_hom, milb_general, optimize_fom, optimize_ubm,
                     sigma_floor)
from .spectral import DEFAULT_RATE_POINTS, FrequencyGrid, TapVector, dtft_values

RATES_CSV_VERSION = "chanshort-rates/1"
#: slack allowed in the ordering checks
CHAIN_SLACK = 1e-9


def capacity(cir: Cir, grid: FrequencyGrid | None = None) -> float:
    """Gaussian-input capacity ``mean log(1 + |H|^2 / N0)``."""
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    H = dtft_values(cir.h, grid)
    return float(np.mean(np.log1p(np.abs(H) ** 2 / cir.n0)))


def delta_mse(cir: Cir, grid: FrequencyGrid | None = None) -> float:
    """Per-symbol MSE of the LMMSE estimator, ``-mean(M)``."""
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    return float(-np.mean(_channel_arrays(cir, grid)[2]))


def hom_bounds(h_f: TapVector, h_b: TapVector,
               grid: FrequencyGrid | None = None) -> tuple[float, float]:
    """Lower (tail treated as noise) and upper (perfect feedback) HOM rates."""
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    af = np.abs(dtft_values(h_f, grid)) ** 2
    ab = np.abs(dtft_values(h_b, grid)) ** 2
    return float(np.mean(np.log1p(af / (1.0 + ab)))), float(np.mean(np.log1p(af)))


@dataclass(frozen=True)
class RateReport:
    snr_db: float
    nu: int
    c: float
    i_hom_l: float
    i_hom: float
    i_hom_u: float
    i_fom0: float
    i_fom1: float
    i_ubm: float
    delta_mse: float
    sigma_floor: float
    gm3_value: float
    corollary_lhs: float

    def chain_slacks(self) -> dict[str, float]:
        """Each ordering as ``larger - smaller``; all must be >= -1e-9."""
        return {
            "hom_l<=hom": self.i_hom - self.i_hom_l,
            "hom<=fom0": self.i_fom0 - self.i_hom,
            "fom0<=ubm": self.i_ubm - self.i_fom0,
            "ubm<=c": self.c - self.i_ubm,
            "hom<=hom_u": self.i_hom_u - self.i_hom,
            "hom_u<=fom1": self.i_fom1 - self.i_hom_u,
            "corollary<=1": 1.0 - self.corollary_lhs,
        }

    def violations(self, slack: float = CHAIN_SLACK) -> list[str]:
        return [k for k, v in self.chain_slacks().items() if v < -slack]


def corollary_check(cir: Cir, nu: int, grid: FrequencyGrid | None = None,
                    h_f: TapVector | None = None) -> float:
    """``eps1^H eps2^{-1} eps1 - mean(M (1 + |H_f|^2))`` at ``sigma = 1``.

    ``eps1``/``eps2`` are taken at the HOM target ``F = H_f``. The value is
    bounded by 1 for every channel. With no feedback taps the quadratic term
    is zero.
    """
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    if h_f is None:
        h_f = design_hom(cir, nu).h_f
    M = _channel_arrays(cir, grid)[2]
    F = dtft_values(h_f, grid)
    lhs = -float(np.mean(M * (1.0 + np.abs(F) ** 2)))
    if nu < cir.length - 1:
        eps = _epsilons(F, M, 1.0, _phi(cir, nu, grid))
        u = _solve_eps(eps)
        if u is not None:
            lhs += float(np.real(np.vdot(eps.eps1, u)))
    return lhs


def rate_report(cir: Cir, nu: int, grid: FrequencyGrid | None = None,
                snr_db: float | None = None) -> RateReport:
    """All rates of the ordering chain for one channel and memory ``nu``.

    ``i_hom`` is the no-feedback (``sigma = 0``) lower bound reached by the HOM
    filters themselves.
    """
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    hom = design_hom(cir, nu)
    i_hom_l, i_hom_u = hom_bounds(hom.h_f, hom.h_b, grid)
    i_hom = milb_general(hom.w_hom, hom.h_f, hom.h_b, cir, 0.0, grid)
    with warnings.catch_warnings():
        # only the bound matters here, not how well w fits in 129+ taps
        warnings.simplefilter("ignore", TruncationWarning)
        fom0 = optimize_fom(cir, nu, 0.0, rate_grid=grid, init=hom.h_f)
        fom1 = optimize_fom(cir, nu, 1.0, rate_grid=grid, init=hom.h_f)
        ubm = optimize_ubm(cir, nu, grid=grid)
    dm = delta_mse(cir, grid)
    if snr_db is None:
        snr_db = float(-10.0 * np.log10(cir.n0))
    return RateReport(
        snr_db=float(snr_db), nu=nu, c=capacity(cir, grid),
        i_hom_l=i_hom_l, i_hom=i_hom, i_hom_u=i_hom_u,
        i_fom0=fom0.milb, i_fom1=fom1.milb, i_ubm=ubm.milb,
        delta_mse=dm, sigma_floor=sigma_floor(dm), gm3_value=ubm.stationarity,
        corollary_lhs=corollary_check(cir, nu, grid, hom.h_f),
    )


RATE_COLUMNS = tuple(f.name for f in fields(RateReport))


#: columns holding rates, rescaled when bits are requested
RATE_VALUE_COLUMNS = ("c", "i_hom_l", "i_hom", "i_hom_u", "i_fom0", "i_fom1", "i_ubm")


def write_rates_csv(reports, stream=None, units: str = "nats") -> str:
    """CSV with a version comment line and the :data:`RATE_COLUMNS` order.

    ``units="bits"`` rescales the rate columns; the comment line names the
    unit either way. Returns the text and also writes it to ``stream``.
    """
    if units not in ("nats", "bits"):
        raise ValueError("units must be 'nats' or 'bits'")
    scale = 1.0 / np.log(2.0) if units == "bits" else 1.0
    buf = io.StringIO()
    buf.write(f"# {RATES_CSV_VERSION} {units}; columns: {','.join(RATE_COLUMNS)}\n")
    writer = csv.DictWriter(buf, fieldnames=RATE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        row = asdict(r)
        for k in RATE_VALUE_COLUMNS:
            row[k] *= scale
        writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                         for k, v in row.items()})
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


__all__ = ["capacity", "delta_mse", "hom_bounds", "RateReport", "corollary_check",
           "rate_report", "write_rates_csv", "RATE_COLUMNS", "DesignError"]
