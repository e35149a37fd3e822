"""Reduced-state soft-output Viterbi equalizer with decision delay ``D``.

Block layout: ``K`` data symbols followed by ``L-1`` zero guard symbols, so
``y`` holds ``K+L-1`` samples and the trellis has ``T = K+L-1`` stages.
Symbols outside ``0..K-1`` are zero; the trellis starts in state 0 and the
guard stages only admit the zero input, which drives it back to state 0.

A state at stage ``t`` is the tuple of the ``nu`` most recent symbols
``(x_t, x_{t-1}, ..., x_{t-nu+1})`` with index ``d_0 + |X| d_1 + ...``
where ``d_m`` is the constellation index of ``x_{t-m}``. Each state carries
the ``L-nu-1`` symbols that precede it on its survivor path; they drive the
feedback term of the Forney metric. Backward recursions reuse the branch
metrics of the forward pass, i.e. feedback frozen from the forward
survivors.

LLRs are max-log, positive for bit value 1, clamped to +-50.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .design import FomFilters, HomFilters, UbmFilters
from .modulation import Modulation
from .spectral import TapVector

LLR_CLAMP = 50.0
MAX_STATES = 1 << 20


class SoveError(ValueError):
    pass


class Metric(str, Enum):
    FORNEY_FEEDBACK = "forney"
    UNGERBOECK = "ungerboeck"
    HOM_FEEDBACK = "hom"


_METRIC_OF = {FomFilters: Metric.FORNEY_FEEDBACK, UbmFilters: Metric.UNGERBOECK,
              HomFilters: Metric.HOM_FEEDBACK}


@dataclass(frozen=True)
class TrellisConfig:
    """Equalizer parameters. ``d=None`` means the default ``L + 2``."""

    nu: int
    modulation: Modulation
    d: int | None = None
    metric: Metric | None = None
    max_states: int = MAX_STATES

    def __post_init__(self):
        object.__setattr__(self, "modulation", Modulation.of(self.modulation))
        if self.metric is not None:
            object.__setattr__(self, "metric", Metric(self.metric))
        if self.nu < 0:
            raise SoveError("nu must be >= 0")
        if self.d is not None and self.d < self.nu:
            raise SoveError("decision delay D must be >= nu")
        if self.n_states > min(self.max_states, MAX_STATES):
            raise SoveError(f"{self.n_states} states exceed the budget")

    @property
    def n_states(self) -> int:
        return self.modulation.size ** self.nu

    def delay(self, L: int) -> int:
        return L + 2 if self.d is None else self.d


@dataclass(frozen=True)
class LlrFrame:
    llrs: np.ndarray
    block_len: int
    bits_per_symbol: int


# ------------------------------------------------------------ branch metrics

def branch_metric_forney(y_filtered: complex, symbols, feedback, f, b) -> float:
    """``|y - sum_l f_l x_{k-l} - sum_l b_l xhat_{k-l-nu-1}|^2``.

    ``symbols`` is ``(x_k, ..., x_{k-nu})`` and ``feedback`` is
    ``(xhat_{k-nu-1}, ..., xhat_{k-L+1})``; ``f`` and ``b`` are the matching
    coefficient arrays (``b`` without its leading zeros).
    """
    f = np.asarray(getattr(f, "taps", f), complex)
    b = np.asarray(getattr(b, "taps", b), complex)
    r = complex(y_filtered) - np.dot(f, np.asarray(symbols, complex))
    if b.size:
        r -= np.dot(b, np.asarray(feedback, complex))
    return float(abs(r) ** 2)


def branch_metric_ungerboeck(y_filtered: complex, symbols, g) -> float:
    """``g0 |x_k|^2 - 2 Re{conj(x_k) (y - sum_{l>=1} g_l x_{k-l})}``."""
    g = np.asarray(getattr(g, "taps", g), complex)
    s = np.asarray(symbols, complex)
    inner = complex(y_filtered) - np.dot(g[1:], s[1:g.size])
    return float(g[0].real * abs(s[0]) ** 2 - 2.0 * (np.conj(s[0]) * inner).real)


# ------------------------------------------------------------------ kernels

@njit(cache=True)
def _sym(pts, idx, time, K):
    if time < 0 or time >= K:
        return 0j
    return pts[idx]


@njit(cache=True)
def _forward(ytil, K, pts, digits, preds_i, preds_e, jmap, f, b, g, ung):
    T = ytil.size
    ns, nx = jmap.shape
    nu = digits.shape[1]
    nb = b.size
    inf = np.inf
    gam = np.empty((T, ns, nx))
    alpha = np.full((T + 1, ns), inf)  # alpha[t + 1] is the metric after stage t
    alpha[0, 0] = 0.0
    tails = np.zeros((ns, max(nb, 1)), dtype=np.complex128)
    new_tails = np.zeros_like(tails)
    sym = np.empty(nu + 1, dtype=np.complex128)
    for t in range(T):
        for i in range(ns):
            fb = 0j
            for q in range(nb):
                fb += b[q] * tails[i, q]
            for m in range(1, nu + 1):
                sym[m] = _sym(pts, digits[i, m - 1], t - m, K)
            for e in range(nx):
                if t >= K and e != 0:
                    gam[t, i, e] = inf
                    continue
                sym[0] = _sym(pts, e, t, K)
                if ung:
                    acc = ytil[t]
                    for m in range(1, nu + 1):
                        acc -= g[m] * sym[m]
                    s0 = sym[0]
                    gam[t, i, e] = (g[0].real * (s0.real ** 2 + s0.imag ** 2)
                                    - 2.0 * (s0.real * acc.real + s0.imag * acc.imag))
                else:
                    r = ytil[t] - fb
                    for m in range(nu + 1):
                        r -= f[m] * sym[m]
                    gam[t, i, e] = r.real ** 2 + r.imag ** 2
        for j in range(ns):
            best = inf
            bi = preds_i[j, 0]
            be = preds_e[j, 0]
            for r_ in range(preds_i.shape[1]):
                i = preds_i[j, r_]
                e = preds_e[j, r_]
                c = alpha[t, i] + gam[t, i, e]
                if c < best:
                    best = c
                    bi = i
                    be = e
            alpha[t + 1, j] = best
            if nb:
                # symbol leaving the state window joins the survivor tail
                if nu == 0:
                    out = _sym(pts, be, t, K)
                else:
                    out = _sym(pts, digits[bi, nu - 1], t - nu, K)
                new_tails[j, 0] = out
                for q in range(1, nb):
                    new_tails[j, q] = tails[bi, q - 1]
        if nb:
            tails[:, :] = new_tails
    return gam, alpha


@njit(cache=True)
def _backward(gam, jmap, starts, stop_offset):
    """beta at stage ``k + stop_offset`` for windows starting at ``starts[k]``."""
    K = starts.size
    T, ns, nx = gam.shape
    out = np.zeros((K, ns))
    beta = np.zeros(ns)
    nxt = np.zeros(ns)
    for k in range(K):
        beta[:] = 0.0
        for t in range(starts[k], k + stop_offset, -1):
            for i in range(ns):
                best = np.inf
                for e in range(nx):
                    c = beta[jmap[i, e]] + gam[t, i, e]
                    if c < best:
                        best = c
                nxt[i] = best
            beta[:] = nxt
        out[k] = beta
    return out


@njit(cache=True)
def _symbol_minima(gam, alpha, beta, jmap, K):
    ns, nx = jmap.shape
    out = np.full((K, nx), np.inf)
    for k in range(K):
        for i in range(ns):
            a = alpha[k, i]
            if a == np.inf:
                continue
            for e in range(nx):
                c = a + gam[k, i, e] + beta[k, jmap[i, e]]
                if c < out[k, e]:
                    out[k, e] = c
    return out


# ------------------------------------------------------------- trellis tables

def _tables(nx: int, nu: int):
    ns = nx ** nu
    states = np.arange(ns)
    digits = np.zeros((ns, nu), dtype=np.int64)
    for m in range(nu):
        digits[:, m] = (states // nx ** m) % nx
    jmap = (states[:, None] * nx + np.arange(nx)[None, :]) % ns
    # predecessors of each state, ordered by (state, input) so ties pick the lowest
    order = np.lexsort((np.tile(np.arange(nx), ns), np.repeat(states, nx)))
    flat_j = jmap.reshape(-1)[order]
    src_i = np.repeat(states, nx)[order]
    src_e = np.tile(np.arange(nx), ns)[order]
    srt = np.argsort(flat_j, kind="stable")
    preds_i = src_i[srt].reshape(ns, nx)
    preds_e = src_e[srt].reshape(ns, nx)
    return digits, jmap.astype(np.int64), preds_i.astype(np.int64), preds_e.astype(np.int64)


def _feedback_taps(b: TapVector, nu: int) -> np.ndarray:
    """Coefficients at delays ``nu+1 ..`` (empty if none)."""
    last = b.last_delay
    if last <= nu:
        return np.zeros(0, complex)
    return b.window(nu + 1, last)


def prefilter(y, w: TapVector) -> np.ndarray:
    """``(w * y)_k`` for ``k = 0..len(y)-1`` with ``y`` zero outside the block."""
    y = np.asarray(y, complex)
    full = np.convolve(y, w.taps)
    return full[w.origin:w.origin + y.size]


def _model(filters, nu: int):
    if isinstance(filters, FomFilters):
        return filters.w, filters.f, filters.b, None
    if isinstance(filters, HomFilters):
        return filters.w_hom, filters.h_f, filters.h_b, None
    if isinstance(filters, UbmFilters):
        return filters.v, None, None, filters.g
    raise SoveError(f"unsupported filter set {type(filters).__name__}")


@dataclass
class ForwardPass:
    """Branch metrics and forward metrics of one block; reusable for any D."""

    gamma: np.ndarray
    alpha: np.ndarray
    y_filtered: np.ndarray
    digits: np.ndarray
    jmap: np.ndarray
    block_len: int
    channel_len: int
    nu: int
    modulation: Modulation


def forward_pass(y, filters, config: TrellisConfig, block_len: int) -> ForwardPass:
    """Prefilter ``y`` and run the forward recursion with survivor feedback."""
    K = int(block_len)
    if K < 1:
        raise SoveError("block length must be >= 1")
    nu = config.nu
    mod = config.modulation
    metric = _METRIC_OF.get(type(filters))
    if metric is None:
        raise SoveError(f"unsupported filter set {type(filters).__name__}")
    if config.metric is not None and config.metric is not metric:
        raise SoveError(f"{type(filters).__name__} needs the {metric.value} metric")
    if getattr(filters, "nu", nu) != nu:
        raise SoveError("filters were designed for a different nu")
    pre, f, b, g = _model(filters, nu)
    y = np.asarray(y, complex)
    T = y.size
    L = T - K + 1
    if L < 1:
        raise SoveError("y is shorter than the block")
    if metric is Metric.UNGERBOECK:
        f_arr = np.zeros(nu + 1, complex)
        b_arr = np.zeros(0, complex)
        g_arr = g.window(0, nu)
        ung = True
    else:
        f_arr = f.window(0, nu)
        b_arr = _feedback_taps(b, nu)
        g_arr = np.zeros(nu + 1, complex)
        ung = False
        if b_arr.size > max(L - nu - 1, 0):
            raise SoveError("feedback filter is longer than the channel tail")
    ytil = prefilter(y, pre)
    digits, jmap, preds_i, preds_e = _tables(mod.size, nu)
    gam, alpha = _forward(ytil, K, np.ascontiguousarray(mod.points), digits, preds_i,
                          preds_e, jmap, f_arr, b_arr, g_arr, ung)
    return ForwardPass(gam, alpha, ytil, digits, jmap, K, L, nu, mod)


def llrs_for_delay(fp: ForwardPass, d: int, llr_form: str = "branch") -> LlrFrame:
    """Backward windows of depth ``d`` and max-log LLRs.

    ``llr_form`` selects how per-symbol minima are assembled:
    ``"branch"`` uses ``alpha_{k-1} + gamma_k + beta_k``, ``"state"`` uses
    ``alpha_k + beta_k`` and ``"delayed"`` uses
    ``alpha_{k+nu-1} + gamma_{k+nu} + beta_{k+nu}`` grouped by ``x_k``. All
    three agree; the default is valid for every ``nu``.

    Windows whose start ``k + d`` reaches the last data symbol run to the end
    of the guard instead, so ``d >= K`` gives exact block max-log LLRs.
    """
    K, nu, mod = fp.block_len, fp.nu, fp.modulation
    if d < nu:
        raise SoveError("decision delay D must be >= nu")
    gam, alpha, jmap, digits = fp.gamma, fp.alpha, fp.jmap, fp.digits
    T = gam.shape[0]
    ks = np.arange(K)
    starts = np.where(ks + d >= K - 1, T - 1, ks + d).astype(np.int64)
    if llr_form == "branch":
        beta = _backward(gam, jmap, starts, 0)
        minima = _symbol_minima(gam, alpha, beta, jmap, K)
    elif llr_form == "state":
        if nu == 0:
            raise SoveError("the state form needs nu >= 1")
        beta = _backward(gam, jmap, starts, 0)
        tot = alpha[1:K + 1] + beta
        minima = np.full((K, mod.size), np.inf)
        for e in range(mod.size):
            minima[:, e] = tot[:, digits[:, 0] == e].min(axis=1)
    elif llr_form == "delayed":
        beta = _backward(gam, jmap, np.maximum(starts, ks + nu), nu)
        minima = np.full((K, mod.size), np.inf)
        for k in range(K):
            t = k + nu
            tot = alpha[t][:, None] + gam[t] + beta[k][jmap]
            if nu == 0:
                lab = np.broadcast_to(np.arange(mod.size), tot.shape)
            else:
                lab = np.broadcast_to(digits[:, nu - 1][:, None], tot.shape)
            for e in range(mod.size):
                minima[k, e] = tot[lab == e].min()
    else:
        raise ValueError(f"unknown llr_form {llr_form!r}")
    return LlrFrame(_llrs_from_minima(minima, mod), K, mod.bits_per_symbol)


def equalize(y, filters, config: TrellisConfig, block_len: int, *,
             llr_form: str = "branch") -> LlrFrame:
    """Max-log LLRs for the ``block_len`` data symbols of one block.

    ``y`` holds ``block_len + L - 1`` samples. The metric follows the filter
    type: Forney with feedback for FOM, the same with ``(h_f, h_b)`` for HOM
    and Ungerboeck without feedback for UBM. See :func:`llrs_for_delay` for
    ``llr_form`` and the window rule at the end of the block.
    """
    fp = forward_pass(y, filters, config, block_len)
    return llrs_for_delay(fp, config.delay(fp.channel_len), llr_form)


def _llrs_from_minima(minima: np.ndarray, mod: Modulation) -> np.ndarray:
    labels = mod.bit_labels.astype(bool)
    out = np.empty((minima.shape[0], mod.bits_per_symbol))
    for n in range(mod.bits_per_symbol):
        one = labels[:, n]
        with np.errstate(invalid="ignore"):
            out[:, n] = minima[:, ~one].min(axis=1) - minima[:, one].min(axis=1)
    out = np.nan_to_num(out, nan=0.0, posinf=LLR_CLAMP, neginf=-LLR_CLAMP)
    return np.clip(out, -LLR_CLAMP, LLR_CLAMP).reshape(-1)


def hard_decisions(frame: LlrFrame | np.ndarray, modulation) -> np.ndarray:
    """Constellation points from per-bit signs; a zero LLR decides bit 1."""
    mod = Modulation.of(modulation)
    llrs = frame.llrs if isinstance(frame, LlrFrame) else np.asarray(frame)
    bits = (llrs >= 0).astype(np.int64)
    return mod.map_bits(bits)


def hard_bits(frame: LlrFrame | np.ndarray) -> np.ndarray:
    llrs = frame.llrs if isinstance(frame, LlrFrame) else np.asarray(frame)
    return (llrs >= 0).astype(np.int8)
