"""Channel-shortener design: FOM, UBM and HOM filter sets.

All rates are in nats per symbol. Spectra are sampled on a
:class:`~chanshort.spectral.FrequencyGrid` and integrals become grid means.

The FOM model scores ``exp(-|W y - F x - B xhat|^2)``; its prefilter and
feedback filter have closed forms for a given target ``f`` and the target
itself is found by gradient ascent on the mutual-information lower bound.
The UBM model ``exp(2 Re{x^H V y} - x^H G x)`` has no feedback and a concave
objective in the target autocorrelation ``g``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import Cir, MinPhaseResult, min_phase, split_target
from .spectral import (DEFAULT_INNER_POINTS, DEFAULT_RATE_POINTS, FrequencyGrid,
                       Spectrum, TapVector, dtft_values, idtft_values)

log = logging.getLogger(__name__)

#: |F| floor in the prefilter denominator
F_FLOOR = 1e-8
#: relative ridge added to the feedback Gram matrix before inversion
RIDGE = 1e-12
#: smallest allowed 1 + G(w) for the UBM target
UBM_DOMAIN_EPS = 1e-9
DEFAULT_PREFILTER_TAPS = 129
#: relative rate loss tolerated when truncating a prefilter
TRUNCATION_LOSS = 1e-4


class DesignError(RuntimeError):
    pass


class ConvergenceWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FeedbackQuality:
    """Correlation ``sigma`` of fed-back decisions with the symbols.

    ``eta`` is the decision energy; hard decisions fix it at 1 and it does not
    enter any rate expression used here.
    """

    sigma: float
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.sigma <= self.eta <= 1.0:
            raise ValueError("need 0 <= sigma <= eta <= 1")


@dataclass(frozen=True)
class FomFilters:
    w: TapVector
    f: TapVector
    b: TapVector
    sigma: float
    milb: float
    nu: int
    iterations: int = 0
    converged: bool = True
    history: tuple = ()
    kind: str = field(default="fom", init=False)


@dataclass(frozen=True)
class UbmFilters:
    v: TapVector
    g: TapVector
    milb: float
    nu: int
    stationarity: float = float("nan")
    iterations: int = 0
    kind: str = field(default="ubm", init=False)


@dataclass(frozen=True)
class HomFilters:
    w_hom: TapVector
    h_f: TapVector
    h_b: TapVector
    nu: int
    allpass_deviation: float = 0.0
    kind: str = field(default="hom", init=False)


@dataclass(frozen=True)
class EpsilonTerms:
    """Feedback cross-correlation vector and Gram matrix for one target."""

    eps1: np.ndarray
    eps2: np.ndarray
    singular: bool


# --------------------------------------------------------------- spectra

def _check_nu(cir: Cir, nu: int):
    if not 0 <= nu <= cir.length - 1:
        raise DesignError(f"nu must lie in [0, {cir.length - 1}]")


def _channel_arrays(cir: Cir, grid: FrequencyGrid):
    H = dtft_values(cir.h, grid)
    S = cir.n0 + np.abs(H) ** 2
    return H, S, -cir.n0 / S


def _phi(cir: Cir, nu: int, grid: FrequencyGrid) -> np.ndarray:
    # rows exp(j w d) for the feedback delays d = nu+1 .. L-1
    return grid.harmonics(np.arange(nu + 1, cir.length))


def _as_target(f, nu=None) -> TapVector:
    if isinstance(f, TapVector):
        if f.origin != 0:
            raise DesignError("target response must be causal")
        return f
    return TapVector(f)


def m_spectrum(cir: Cir, grid: FrequencyGrid) -> Spectrum:
    """``M(w) = -N0 / (N0 + |H(w)|^2)``; real, in [-1, 0)."""
    return Spectrum(grid, _channel_arrays(cir, grid)[2])


def m_tilde_spectrum(m: Spectrum, sigma: float) -> Spectrum:
    """``sigma^2 (1 + M) - sigma``."""
    return Spectrum(m.grid, _m_tilde(m.values, sigma))


def _m_tilde(M, sigma):
    return sigma ** 2 * (1.0 + M) - sigma


def epsilon_vectors(f, cir: Cir, sigma: float, nu: int,
                    grid: FrequencyGrid) -> EpsilonTerms:
    """Grid evaluation of the feedback terms for target ``f``.

    ``eps1 = sigma * mean(M conj(F) phi)`` and
    ``eps2 = mean(Mt |F|^2 / (1 + |F|^2) phi phi^H)`` where ``phi`` stacks
    ``exp(j w d)`` over the feedback delays ``d = nu+1 .. L-1``.
    ``singular`` flags an eigenvalue spread beyond 1e12.
    """
    _check_nu(cir, nu)
    if nu == cir.length - 1:
        raise DesignError("no feedback taps when nu = L - 1")
    if sigma < 0:
        raise DesignError("sigma must be non-negative")
    _, _, M = _channel_arrays(cir, grid)
    F = dtft_values(_as_target(f), grid)
    return _epsilons(F, M, sigma, _phi(cir, nu, grid))


def _epsilons(F, M, sigma, phi) -> EpsilonTerms:
    n = F.size
    eps1 = phi @ (sigma * M * np.conj(F)) / n
    a2 = np.abs(F) ** 2
    weight = _m_tilde(M, sigma) * a2 / (1.0 + a2)
    eps2 = (phi * weight) @ phi.conj().T / n
    eps2 = 0.5 * (eps2 + eps2.conj().T)
    ev = np.abs(np.linalg.eigvalsh(eps2))
    singular = bool(ev.max() == 0.0 or ev.min() < 1e-12 * ev.max())
    return EpsilonTerms(eps1, eps2, singular)


def _ridged(eps2: np.ndarray) -> np.ndarray:
    dim = eps2.shape[0]
    ridge = RIDGE * abs(np.trace(eps2).real) / dim
    # eps2 is negative semidefinite, so the ridge moves it away from zero
    return eps2 - ridge * np.eye(dim)


def _solve_eps(eps: EpsilonTerms) -> np.ndarray | None:
    """``eps2^{-1} eps1`` after the ridge, or None when eps2 vanishes."""
    A = _ridged(eps.eps2) if eps.singular else eps.eps2
    if not np.any(A):
        if np.any(eps.eps1):
            raise DesignError("feedback Gram matrix is singular")
        return None
    try:
        return np.linalg.solve(A, eps.eps1)
    except np.linalg.LinAlgError as exc:
        raise DesignError("feedback Gram matrix is singular") from exc


# ------------------------------------------------------------ FOM rates

def _j_rate(F, M) -> float:
    a2 = np.abs(F) ** 2
    return float(1.0 + np.mean(np.log1p(a2) + M * (1.0 + a2)))


def theorem1_rate(f, cir: Cir, sigma: float,
                  grid: FrequencyGrid | None = None, nu: int | None = None) -> float:
    """Lower bound attained by target ``f`` with the optimal ``w`` and ``b``.

    ``J(F)`` when ``sigma = 0``, otherwise ``J(F) - eps1^H eps2^{-1} eps1``.
    ``nu`` defaults to ``len(f) - 1``.
    """
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    f = _as_target(f)
    nu = len(f) - 1 if nu is None else nu
    _check_nu(cir, nu)
    _, _, M = _channel_arrays(cir, grid)
    F = dtft_values(f, grid)
    return _fom_rate(F, M, sigma, cir, nu, grid)


def _fom_rate(F, M, sigma, cir, nu, grid) -> float:
    J = _j_rate(F, M)
    if sigma == 0 or nu == cir.length - 1:
        return J
    eps = _epsilons(F, M, sigma, _phi(cir, nu, grid))
    u = _solve_eps(eps)
    if u is None:
        return J
    return J - float(np.real(np.vdot(eps.eps1, u)))


def milb_general(w: TapVector, f: TapVector, b: TapVector, cir: Cir,
                 sigma: float, grid: FrequencyGrid | None = None) -> float:
    """Mutual-information lower bound of an arbitrary FOM filter triple."""
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    H, S, _ = _channel_arrays(cir, grid)
    W = dtft_values(w, grid)
    F = dtft_values(f, grid)
    B = dtft_values(b, grid)
    a2 = np.abs(F) ** 2
    Lw = (a2 * np.abs(W) ** 2 * S + sigma * a2 * np.abs(B) ** 2
          - 2.0 * sigma * a2 * np.real(H * W * np.conj(B)))
    val = np.log1p(a2) - a2 - Lw / (1.0 + a2) + 2.0 * np.real(np.conj(F) * (W * H - sigma * B))
    return float(np.mean(val))


def optimal_b(f, cir: Cir, sigma: float, grid: FrequencyGrid | None = None,
              nu: int | None = None) -> TapVector:
    """Closed-form feedback filter ``B(w) = -eps1^H eps2^{-1} phi(w)``.

    Returned taps sit at delays ``nu+1 .. L-1``.
    """
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    f = _as_target(f)
    nu = len(f) - 1 if nu is None else nu
    if sigma <= 0:
        raise DesignError("optimal_b needs sigma > 0")
    eps = epsilon_vectors(f, cir, sigma, nu, grid)
    u = _solve_eps(eps)
    coeffs = np.zeros(cir.length - nu - 1, complex) if u is None else -np.conj(u)
    return TapVector.at_delays(coeffs, nu + 1)


def zero_feedback(cir: Cir, nu: int) -> TapVector:
    if nu == cir.length - 1:
        return TapVector([0.0])
    return TapVector.at_delays(np.zeros(cir.length - nu - 1), nu + 1)


def optimal_w_values(f, b, cir: Cir, sigma: float, grid: FrequencyGrid) -> np.ndarray:
    """Optimal prefilter sampled on ``grid``.

    ``W = conj(H) (1 + |F|^2 + sigma conj(F) B) / (conj(F) (N0 + |H|^2))``
    with ``|F|`` floored at 1e-8 in the denominator.
    """
    H, S, _ = _channel_arrays(cir, grid)
    F = dtft_values(_as_target(f), grid)
    B = dtft_values(b, grid) if b is not None else 0.0
    a = np.abs(F)
    Fd = np.where(a < F_FLOOR, F_FLOOR * np.exp(1j * np.angle(F)), F)
    return np.conj(H) * (1.0 + a ** 2 + sigma * np.conj(F) * B) / (np.conj(Fd) * S)


def _truncate(values: np.ndarray, n_taps: int) -> TapVector:
    half = n_taps // 2
    taps = idtft_values(values, -half, n_taps - 1 - half)
    return TapVector(taps, half)


def _lengths(start: int, cap: int):
    n = start
    while n < cap:
        yield n
        n = 2 * n - 1
    yield cap


def optimal_w(f, b, cir: Cir, sigma: float, grid: FrequencyGrid | None = None,
              trunc_len: int | None = None) -> TapVector:
    """Optimal FOM prefilter as a two-sided FIR centred on delay 0.

    With ``trunc_len=None`` the length starts at 129 taps and doubles until
    the truncated filter loses less than 1e-4 (relative) of the lower bound
    reached by the untruncated grid response. ``trunc_len = grid.n_points``
    reproduces the grid response exactly.

    When no admissible length meets the tolerance (a target with a zero on
    the unit circle puts a pole in the prefilter) the best length found is
    returned and :class:`TruncationWarning` is emitted.
    """
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    f = _as_target(f)
    b = b if b is not None else TapVector([0.0])
    W = optimal_w_values(f, b, cir, sigma, grid)
    if trunc_len is not None:
        return _truncate(W, trunc_len)
    full = milb_general(_truncate(W, grid.n_points), f, b, cir, sigma, grid)
    return _auto_truncate(W, full, lambda w: milb_general(w, f, b, cir, sigma, grid),
                          grid.n_points)


def _auto_truncate(values, full, rate_of, n_points) -> TapVector:
    best, best_rate = None, -np.inf
    for n_taps in _lengths(DEFAULT_PREFILTER_TAPS, n_points // 2 + 1):
        w = _truncate(values, n_taps)
        rate = rate_of(w)
        if full - rate <= TRUNCATION_LOSS * max(abs(full), 1e-12):
            return w
        if rate > best_rate:
            best, best_rate = w, rate
    warnings.warn(f"prefilter truncation loses {full - best_rate:.3g} nats "
                  f"({len(best)} taps)", TruncationWarning, stacklevel=3)
    return best


def fom_gradient(f, cir: Cir, sigma: float, grid: FrequencyGrid | None = None,
                 nu: int | None = None) -> np.ndarray:
    """Wirtinger gradient of the FOM lower bound with respect to ``conj(f)``.

    This is the ascent direction: for a small step ``t``,
    ``I(f + t g) ~ I(f) + 2 t ||g||^2``.
    """
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    f = _as_target(f)
    nu = len(f) - 1 if nu is None else nu
    _check_nu(cir, nu)
    _, _, M = _channel_arrays(cir, grid)
    F = dtft_values(f, grid)
    return _fom_grad(F, M, sigma, cir, nu, grid)


def _fom_grad(F, M, sigma, cir, nu, grid) -> np.ndarray:
    n = grid.n_points
    kharm = grid.harmonics(np.arange(nu + 1))  # exp(j k w)
    a2 = np.abs(F) ** 2
    # dJ/df_k
    dI = kharm @ ((M + 1.0 / (1.0 + a2)) * np.conj(F)) / n
    if sigma != 0 and nu < cir.length - 1:
        phi = _phi(cir, nu, grid)
        eps = _epsilons(F, M, sigma, phi)
        u = _solve_eps(eps)
        if u is not None:
            p = phi.conj().T @ u  # phi(w)^H eps2^{-1} eps1
            d_eps1 = kharm @ (sigma * M * p) / n
            d_eps2 = kharm @ (_m_tilde(M, sigma) * np.conj(F) * np.abs(p) ** 2
                              / (1.0 + a2) ** 2) / n
            dI -= d_eps1 - d_eps2
    return np.conj(dI)


def _hom_init(cir: Cir, nu: int) -> TapVector:
    return design_hom(cir, nu).h_f


def optimize_fom(cir: Cir, nu: int, sigma: float, *,
                 grid: FrequencyGrid | None = None,
                 rate_grid: FrequencyGrid | None = None,
                 max_iters: int = 50, rel_tol: float = 1e-9,
                 armijo: float = 1e-4, shrink: float = 0.5,
                 method: str = "bfgs",
                 init: TapVector | None = None,
                 trunc_len: int | None = None) -> FomFilters:
    """Ascent on the target response, then closed-form ``w`` and ``b``.

    Starts from the HOM target ``h_f`` (or ``init``). Each iteration moves
    along the ascent direction ``d`` with a step from backtracking (initial
    step 1, shrink ``shrink``, Armijo constant ``armijo``), so accepted
    iterates never lower the bound. With ``method="gradient"`` the direction
    is the Wirtinger gradient itself; the default ``"bfgs"`` preconditions it
    with a BFGS inverse-Hessian estimate (identity on the first step), which
    cuts the iteration count from tens to a handful.

    Stops when the relative improvement drops below ``rel_tol`` or after
    ``max_iters`` iterations; the latter emits :class:`ConvergenceWarning`
    and returns the best iterate with ``converged=False``.

    ``history`` holds the bound at the start and after every accepted step,
    evaluated on ``grid`` (1024 points by default). The reported ``milb`` is
    re-evaluated on ``rate_grid``.
    """
    _check_nu(cir, nu)
    if not 0.0 <= sigma <= 1.0:
        raise DesignError("sigma must lie in [0, 1]")
    if method not in ("bfgs", "gradient"):
        raise ValueError(f"unknown ascent method {method!r}")
    grid = grid or FrequencyGrid(DEFAULT_INNER_POINTS)
    rate_grid = rate_grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    _, _, M = _channel_arrays(cir, grid)
    kharm = grid.harmonics(np.arange(nu + 1))
    n = nu + 1

    def evaluate(x, with_grad=True):
        # x stacks real and imaginary parts of f
        F = (x[:n] + 1j * x[n:]) @ kharm
        try:
            rate = _fom_rate(F, M, sigma, cir, nu, grid)
        except DesignError:
            return -np.inf, None
        if not with_grad:
            return rate, None
        g = _fom_grad(F, M, sigma, cir, nu, grid)
        # d rate / d Re f = 2 Re g, d rate / d Im f = 2 Im g
        return rate, np.concatenate([2.0 * g.real, 2.0 * g.imag])

    f0 = np.asarray((init if init is not None else _hom_init(cir, nu)).taps, dtype=complex)
    if f0.size != n:
        raise DesignError("initial target has the wrong length")
    x = np.concatenate([f0.real, f0.imag])
    rate, grad = evaluate(x)
    history = [rate]
    precond = np.eye(2 * n)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        d = precond @ grad if method == "bfgs" else 0.5 * grad
        slope = float(grad @ d)
        if slope <= 0.0:
            if method == "bfgs" and not np.allclose(precond, np.eye(2 * n)):
                precond = np.eye(2 * n)
                d = precond @ grad
                slope = float(grad @ d)
            if slope <= 0.0:
                converged = True
                break
        t = 1.0
        while True:
            x_new = x + t * d
            new_rate, _ = evaluate(x_new, with_grad=False)
            if new_rate >= rate + armijo * t * slope:
                break
            t *= shrink
            if t < 1e-12:
                break
        if t < 1e-12:
            converged = True  # no ascent step left at working precision
            break
        _, new_grad = evaluate(x_new)
        if method == "bfgs":
            s_k = x_new - x
            y_k = grad - new_grad  # gradient change of the minimised -rate
            sy = float(s_k @ y_k)
            if sy > 1e-16:
                rho = 1.0 / sy
                eye = np.eye(2 * n)
                precond = ((eye - rho * np.outer(s_k, y_k)) @ precond
                           @ (eye - rho * np.outer(y_k, s_k)) + rho * np.outer(s_k, s_k))
        gain = new_rate - rate
        x, rate, grad = x_new, new_rate, new_grad
        history.append(rate)
        if gain <= rel_tol * abs(rate):
            converged = True
            break
    if not converged:
        warnings.warn(f"FOM ascent stopped after {max_iters} iterations",
                      ConvergenceWarning, stacklevel=2)

    f_tap = TapVector(x[:n] + 1j * x[n:])
    if sigma > 0 and nu < cir.length - 1:
        b = optimal_b(f_tap, cir, sigma, rate_grid, nu)
    else:
        b = zero_feedback(cir, nu)
    w = optimal_w(f_tap, b, cir, sigma, rate_grid, trunc_len)
    milb = _fom_rate(dtft_values(f_tap, rate_grid), _channel_arrays(cir, rate_grid)[2],
                     sigma, cir, nu, rate_grid)
    return FomFilters(w, f_tap, b, float(sigma), milb, nu, it, converged, tuple(history))


# ----------------------------------------------------------------- UBM

def _ubm_basis(nu: int, grid: FrequencyGrid) -> np.ndarray:
    # G = g0 + 2 sum_k (Re g_k cos kw - Im g_k sin kw)
    k = np.arange(1, nu + 1)[:, None]
    w = grid.omegas[None, :]
    return np.vstack([np.ones((1, grid.n_points)), 2 * np.cos(k * w), -2 * np.sin(k * w)])


def _ubm_params_to_g(theta: np.ndarray, nu: int) -> np.ndarray:
    return np.concatenate([[theta[0]], theta[1:nu + 1] + 1j * theta[nu + 1:]])


def g_spectrum(g, grid: FrequencyGrid) -> np.ndarray:
    """``G(w) = g0 + 2 Re{sum_{k>=1} g_k exp(j k w)}`` (``g0`` taken real)."""
    g = np.asarray(g.taps if isinstance(g, TapVector) else g, dtype=complex)
    G = np.full(grid.n_points, g[0].real)
    for k in range(1, g.size):
        G = G + 2.0 * np.real(g[k] * grid.harmonic(k))
    return G


def g_from_target(f) -> TapVector:
    """Autocorrelation ``g_k = sum_n f_{n+k} conj(f_n)``, so ``G = |F|^2``."""
    f = np.asarray(f.taps if isinstance(f, TapVector) else f, dtype=complex)
    r = np.correlate(f, f, mode="full")[f.size - 1:]
    return TapVector(r)


def ubm_rate(g, cir: Cir, grid: FrequencyGrid | None = None) -> float:
    """``1 + mean(log(1 + G) + M (1 + G))``.

    Raises:
        DesignError: if ``1 + G(w) <= 0`` anywhere on the grid.
    """
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    G = g_spectrum(g, grid)
    if np.any(1.0 + G <= 0):
        raise DesignError("1 + G(w) must stay positive")
    M = _channel_arrays(cir, grid)[2]
    return float(1.0 + np.mean(np.log1p(G) + M * (1.0 + G)))


def ubm_milb_general(v: TapVector, g, cir: Cir, grid: FrequencyGrid | None = None) -> float:
    """Lower bound of an arbitrary Ungerboeck pair ``(v, g)``."""
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    H, S, _ = _channel_arrays(cir, grid)
    G = g_spectrum(g, grid)
    V = dtft_values(v, grid)
    val = np.log1p(G) - G - np.abs(V) ** 2 * S / (1.0 + G) + 2.0 * np.real(V * H)
    return float(np.mean(val))


def ubm_stationarity(g, cir: Cir, grid: FrequencyGrid | None = None) -> float:
    """``mean(M (1 + G))``; equals -1 at the UBM optimum."""
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    G = g_spectrum(g, grid)
    M = _channel_arrays(cir, grid)[2]
    return float(np.mean(M * (1.0 + G)))


def optimal_v_values(g, cir: Cir, grid: FrequencyGrid) -> np.ndarray:
    H, S, _ = _channel_arrays(cir, grid)
    return np.conj(H) * (1.0 + g_spectrum(g, grid)) / S


def optimize_ubm(cir: Cir, nu: int, *, grid: FrequencyGrid | None = None,
                 max_iters: int = 100, tol: float = 1e-13,
                 trunc_len: int | None = None) -> UbmFilters:
    """Maximise the UBM bound over real ``g0`` and complex ``g1..g_nu``.

    The objective is concave, so damped Newton steps with backtracking that
    keeps ``1 + G >= 1e-9`` converge to the unique optimum from ``g = 0``.

    Raises:
        DesignError: if the Newton decrement has not vanished after
            ``max_iters`` steps.
    """
    _check_nu(cir, nu)
    grid = grid or FrequencyGrid(DEFAULT_RATE_POINTS)
    M = _channel_arrays(cir, grid)[2]
    Psi = _ubm_basis(nu, grid)
    n = grid.n_points
    theta = np.zeros(2 * nu + 1)

    def objective(G):
        return 1.0 + np.mean(np.log1p(G) + M * (1.0 + G))

    G = Psi.T @ theta
    val = objective(G)
    for it in range(1, max_iters + 1):
        q = 1.0 / (1.0 + G)
        grad = Psi @ (q + M) / n
        hess = -(Psi * q ** 2) @ Psi.T / n
        step = -np.linalg.solve(hess, grad)
        decrement = float(grad @ step)
        if decrement <= tol:
            break
        t = 1.0
        while True:
            G_new = Psi.T @ (theta + t * step)
            if np.all(1.0 + G_new >= UBM_DOMAIN_EPS):
                new_val = objective(G_new)
                if new_val >= val + 0.25 * t * decrement:
                    break
            t *= 0.5
            if t < 1e-16:
                raise DesignError("UBM line search failed")
        theta = theta + t * step
        G, val = G_new, new_val
    else:
        raise DesignError("UBM optimisation did not converge")

    g = TapVector(_ubm_params_to_g(theta, nu))
    V = optimal_v_values(g, cir, grid)
    if trunc_len is not None:
        v = _truncate(V, trunc_len)
    else:
        v = _auto_truncate(V, float(val), lambda v: ubm_milb_general(v, g, cir, grid), n)
    return UbmFilters(v, g, float(val), nu, ubm_stationarity(g, cir, grid), it)


# ----------------------------------------------------------------- HOM

def design_hom(cir: Cir, nu: int, **min_phase_kw) -> HomFilters:
    """Homomorphic all-pass prefilter with target/feedback split at ``nu``."""
    _check_nu(cir, nu)
    mp: MinPhaseResult = min_phase(cir, **min_phase_kw)
    h_f, h_b = split_target(mp.h_tilde, nu)
    return HomFilters(mp.w_hom, h_f, h_b, nu, mp.allpass_deviation)


# ------------------------------------------------------------ selection

@dataclass(frozen=True)
class SigmaChoice:
    shortener: str  # "fom" or "ubm"
    sigma: float | None
    advisory_sigma_floor: float | None


def sigma_floor(delta_mse: float) -> float:
    """Lower bound ``1 - delta_mse / 2`` on the feedback correlation."""
    return 1.0 - delta_mse / 2.0


def select_sigma(code_rate: float, threshold: float = 0.5,
                 delta_mse: float | None = None) -> SigmaChoice:
    """FOM with ``sigma = 1`` above the code-rate threshold, UBM otherwise."""
    if not 0.0 < code_rate < 1.0:
        raise ValueError("code_rate must lie in (0, 1)")
    floor = None if delta_mse is None else sigma_floor(delta_mse)
    if code_rate > threshold:
        return SigmaChoice("fom", 1.0, floor)
    return SigmaChoice("ubm", None, floor)


# ------------------------------------------------------------- filters io

def _tap_fields(prefix: str, t: TapVector) -> dict:
    return {f"{prefix}_re": t.taps.real.tolist(), f"{prefix}_im": t.taps.imag.tolist(),
            f"{prefix}_origin": t.origin}


def _tap_from(d: dict, prefix: str) -> TapVector:
    re = np.asarray(d[f"{prefix}_re"], float)
    im = np.asarray(d.get(f"{prefix}_im", np.zeros_like(re)), float)
    return TapVector(re + 1j * im, int(d.get(f"{prefix}_origin", 0)))


def filters_to_dict(filters) -> dict:
    """JSON-ready description of a FOM, UBM or HOM filter set."""
    if isinstance(filters, FomFilters):
        out = {"kind": "fom", "nu": filters.nu}
        out.update(_tap_fields("w", filters.w))
        out.update(_tap_fields("f", filters.f))
        out.update(_tap_fields("b", filters.b))
        out.update(sigma=filters.sigma, milb_nats=filters.milb,
                   iterations=filters.iterations, converged=filters.converged)
        return out
    if isinstance(filters, UbmFilters):
        out = {"kind": "ubm", "nu": filters.nu}
        out.update(_tap_fields("v", filters.v))
        out.update(_tap_fields("g", filters.g))
        out.update(milb_nats=filters.milb, gm3_value=filters.stationarity)
        return out
    if isinstance(filters, HomFilters):
        out = {"kind": "hom", "nu": filters.nu}
        out.update(_tap_fields("w", filters.w_hom))
        out.update(_tap_fields("f", filters.h_f))
        out.update(_tap_fields("b", filters.h_b))
        return out
    raise TypeError(f"not a filter set: {type(filters).__name__}")


def filters_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "fom":
        return FomFilters(_tap_from(d, "w"), _tap_from(d, "f"), _tap_from(d, "b"),
                          float(d["sigma"]), float(d.get("milb_nats", np.nan)),
                          int(d["nu"]), int(d.get("iterations", 0)),
                          bool(d.get("converged", True)))
    if kind == "ubm":
        return UbmFilters(_tap_from(d, "v"), _tap_from(d, "g"),
                          float(d.get("milb_nats", np.nan)), int(d["nu"]),
                          float(d.get("gm3_value", np.nan)))
    if kind == "hom":
        return HomFilters(_tap_from(d, "w"), _tap_from(d, "f"), _tap_from(d, "b"),
                          int(d["nu"]))
    raise ValueError(f"unknown filter kind {kind!r}")
