"""Renyi and Tsallis entropies of discrete distributions and of the continuous
phase-space density.

All entropies are in nats; order ``alpha == 1`` means the Shannon limit.
Probabilities below ``1e-300`` count as exact zeros for every order, so
``sum s^alpha`` never picks up spurious terms for ``alpha < 1``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import eval_genlaguerre, gammaln

from .probability import as_probs
from .transform import DEFAULT_POINTS, PhaseDensity, PhaseGrid, required_extent

ZERO = 1e-300
TAIL_TOL = 1e-10
# below this |alpha - 1| the expm1 form is used; above it, the log-domain power sum
NEAR_ONE = 1e-2


class TailControlError(ValueError):
    """The grid truncates too much of a fractional-power or moment integral."""


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"entropy order must be a positive finite number, got {alpha!r}")
    return alpha


def alpha_log(x: float, alpha: float) -> float:
    """``ln_alpha x = (x^(1-alpha) - 1) / (1 - alpha)``; natural log at ``alpha = 1``."""
    alpha = check_alpha(alpha)
    if not x > 0:
        raise ValueError(f"alpha-logarithm needs x > 0, got {x!r}")
    if alpha == 1.0:
        return math.log(x)
    e = (1.0 - alpha) * math.log(x)
    if e > 709.0:
        # x^(1-alpha) overflows; only possible for alpha > 1, where the result is negative
        return -math.inf
    return math.expm1(e) / (1.0 - alpha)


def _power_excess(p: np.ndarray, alpha: float) -> float:
    # sum p^alpha - 1 for a normalized p, written to avoid cancellation near alpha = 1
    p = p[p > ZERO]
    return math.fsum(p * np.expm1((alpha - 1.0) * np.log(p))) + (math.fsum(p) - 1.0)


def _log_power_sum(p: np.ndarray, weights, alpha: float) -> float:
    """``ln sum weights * p^alpha`` in log space, so large orders do not underflow."""
    mask = p > ZERO
    lp = alpha * np.log(p[mask])
    top = lp.max()
    # pairwise summation: exact enough here and far cheaper than fsum on a full grid
    return float(top + math.log(np.sum(np.asarray(weights)[mask] * np.exp(lp - top))))


def shannon_discrete(s) -> float:
    p = as_probs(s)
    p = p[p > ZERO]
    return float(-math.fsum(p * np.log(p)))


def renyi_discrete(s, alpha: float) -> float:
    """``ln(sum s^alpha) / (1 - alpha)``."""
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return shannon_discrete(s)
    p = as_probs(s)
    if abs(alpha - 1.0) < NEAR_ONE:
        return math.log1p(_power_excess(p, alpha)) / (1.0 - alpha)
    return _log_power_sum(p, np.ones_like(p), alpha) / (1.0 - alpha)


def tsallis_discrete(s, alpha: float) -> float:
    """``(sum s^alpha - 1) / (1 - alpha)``."""
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return shannon_discrete(s)
    p = as_probs(s)
    if abs(alpha - 1.0) < NEAR_ONE:
        return _power_excess(p, alpha) / (1.0 - alpha)
    return math.expm1(_log_power_sum(p, np.ones_like(p), alpha)) / (1.0 - alpha)


def norm_discrete(s, alpha: float) -> float:
    """``(sum s^alpha)^(1/alpha)``."""
    alpha = check_alpha(alpha)
    p = as_probs(s)
    p = p[p > ZERO]
    return float(math.fsum(p**alpha) ** (1.0 / alpha))


# --- tail control for the continuous density ---------------------------------


def envelope(u, nmax: int, n0: int):
    """Upper envelope of ``w`` as a function of ``u = (xi^2 + k^2) / 2``.

    Cauchy-Schwarz gives ``w <= sum_{n<=nmax} |phi~_n|^2`` for any unit state;
    each ``|phi~_n|^2`` is radial with the displaced-number-state form
    ``(2 pi)^-1 (m!/M!) u^(M-m) e^-u [L_m^(M-m)(u)]^2``, ``m = min(n, n0)``.
    """
    u = np.asarray(u, dtype=float)
    total = np.zeros_like(u)
    for n in range(nmax + 1):
        lo, hi = min(n, n0), max(n, n0)
        with np.errstate(divide="ignore"):
            logpref = gammaln(lo + 1) - gammaln(hi + 1) + (hi - lo) * np.log(u) - u
        lag = eval_genlaguerre(lo, hi - lo, u)
        total += np.exp(logpref) * lag**2
    return np.minimum(total, 1.0) / (2.0 * math.pi)


def inner_radius(w: PhaseDensity) -> float:
    g = w.grid
    return min(-g.xi_min, g.xi_max, -g.k_min, g.k_max)


def tail_mass(nmax: int, n0: int, radius: float, alpha: float = 1.0, moment: int = 0) -> float:
    """Envelope estimate of ``int_{r > radius} w^alpha r^moment`` over the plane."""
    if radius <= 0:
        return math.inf
    f = lambda u: envelope(u, nmax, n0) ** alpha * (2.0 * u) ** (0.5 * moment)
    u0 = 0.5 * radius**2
    val, _ = quad(f, u0, np.inf, limit=200, epsabs=1e-16)
    return 2.0 * math.pi * val


def suggest_extent(nmax: int, n0: int, alpha: float = 1.0, moment: int = 0) -> float:
    radius = 1.0
    while tail_mass(nmax, n0, radius, alpha, moment) >= TAIL_TOL:
        radius += 0.5
    return radius


def check_tail(w: PhaseDensity, alpha: float, moment: int = 0) -> None:
    radius = inner_radius(w)
    mass = tail_mass(w.nmax, w.n0, radius, alpha, moment)
    if mass >= TAIL_TOL:
        need = suggest_extent(w.nmax, w.n0, alpha, moment)
        raise TailControlError(
            f"grid half-width {radius:.6g} leaves an estimated {mass:.3g} of the "
            f"order-{alpha:g} integral outside; use an extent of at least {need:.6g}"
        )


def _log_power_integral(w: PhaseDensity, alpha: float) -> float:
    """``ln int int w^alpha`` with the trapezoid weights of the grid."""
    alpha = check_alpha(alpha)
    if alpha < 1.0:
        check_tail(w, alpha)
    return _log_power_sum(w.w.ravel(), w.grid.weights().ravel(), alpha)


def norm_functional_continuous(w: PhaseDensity, alpha: float) -> float:
    """``(int int w^alpha)^(1/alpha)``."""
    return math.exp(_log_power_integral(w, alpha) / alpha)


def shannon_continuous(w: PhaseDensity) -> float:
    vals = np.where(w.w > ZERO, w.w, 1.0)
    return -w.grid.integrate(vals * np.log(vals) * (w.w > ZERO))


def _continuous_excess(w: PhaseDensity, alpha: float) -> float:
    # int w^alpha - 1, split as in _power_excess; the normalization error enters additively
    if alpha < 1.0:
        check_tail(w, alpha)
    mask = w.w > ZERO
    vals = np.where(mask, w.w, 1.0)
    excess = np.where(mask, vals * np.expm1((alpha - 1.0) * np.log(vals)), 0.0)
    return w.grid.integrate(excess) + (w.total() - 1.0)


def renyi_continuous(w: PhaseDensity, alpha: float) -> float:
    """Differential Renyi entropy ``ln(int int w^alpha) / (1 - alpha)``."""
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return shannon_continuous(w)
    if abs(alpha - 1.0) < NEAR_ONE:
        return math.log1p(_continuous_excess(w, alpha)) / (1.0 - alpha)
    return _log_power_integral(w, alpha) / (1.0 - alpha)


def tsallis_continuous(w: PhaseDensity, alpha: float) -> float:
    """Differential Tsallis entropy ``(int int w^alpha - 1) / (1 - alpha)``."""
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return shannon_continuous(w)
    if abs(alpha - 1.0) < NEAR_ONE:
        return _continuous_excess(w, alpha) / (1.0 - alpha)
    return math.expm1(_log_power_integral(w, alpha)) / (1.0 - alpha)


def auto_grid(nmax: int, n0: int, alphas=(), points: int = DEFAULT_POINTS) -> PhaseGrid:
    """Default grid, widened when a fractional order needs more tail room."""
    extent = required_extent(nmax, n0)
    low = [a for a in alphas if a < 1.0]
    if low:
        a = min(low)
        if tail_mass(nmax, n0, extent, a) >= TAIL_TOL:
            extent = max(extent, suggest_extent(nmax, n0, a))
    return PhaseGrid.square(extent, points)
