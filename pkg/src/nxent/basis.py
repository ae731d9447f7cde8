"""Orthonormal Hermite functions of the harmonic oscillator.

``phi_n(x) = (sqrt(pi) 2^n n!)^(-1/2) exp(-x^2/2) H_n(x)`` is evaluated through
the normalized three-term recurrence with the Gaussian folded into the seed.
Neither ``H_n`` nor ``n!`` is ever formed, and a running log-scale keeps the
seed from underflowing for large ``|x|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PI_QUARTER = np.pi ** -0.25

# rescale threshold for the running recurrence (true value = scaled * exp(logscale))
_BIG = 1e150


@dataclass(frozen=True)
class BasisTable:
    """Hermite functions sampled on a set of points.

    ``values[n, j]`` holds ``phi_n(xs[j])`` for ``n = 0..nmax``.
    """

    nmax: int
    xs: np.ndarray
    values: np.ndarray


def _as_points(x) -> np.ndarray:
    xs = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise ValueError("Hermite functions need finite sample points")
    return xs


def _seed(xs):
    # phi_0 split into a scaled part and a log-scale so exp(-x^2/2) never underflows
    scaled0 = np.full(xs.shape, PI_QUARTER)
    logscale = -0.5 * xs * xs
    return scaled0, logscale


def _unscale(scaled, logscale):
    with np.errstate(under="ignore", over="ignore"):
        return scaled * np.exp(logscale)


def _iterate(nmax: int, xs: np.ndarray):
    """Yield ``phi_n(xs)`` for n = 0..nmax, one recurrence pass."""
    prev = np.zeros_like(xs)
    cur, logscale = _seed(xs)
    yield _unscale(cur, logscale)
    for n in range(1, nmax + 1):
        nxt = np.sqrt(2.0 / n) * xs * cur - np.sqrt((n - 1) / n) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if np.any(big):
            prev = np.where(big, prev / _BIG, prev)
            cur = np.where(big, cur / _BIG, cur)
            logscale = np.where(big, logscale + np.log(_BIG), logscale)
        yield _unscale(cur, logscale)


def hermite_fn(n: int, x: float) -> float:
    """Return ``phi_n(x)``.

    Accurate for ``n <= 1000`` and ``|x| <= 50``; far outside that range the
    result may underflow to zero but is never NaN.
    """
    if n < 0:
        raise ValueError(f"Hermite index must be non-negative, got {n}")
    xs = _as_points(x)
    if xs.ndim != 0:
        raise ValueError("hermite_fn takes a scalar point; use hermite_functions")
    value = 0.0
    for value in _iterate(int(n), xs):
        pass
    return float(value)


def hermite_functions(nmax: int, x) -> np.ndarray:
    """Array of shape ``(nmax + 1,) + np.shape(x)`` with ``phi_n(x)``."""
    if nmax < 0:
        raise ValueError(f"nmax must be non-negative, got {nmax}")
    xs = _as_points(x)
    out = np.empty((nmax + 1,) + xs.shape)
    for n, row in enumerate(_iterate(int(nmax), xs)):
        out[n] = row
    return out


def hermite_series(coeffs, x) -> np.ndarray:
    """Evaluate ``sum_n coeffs[n] phi_n(x)`` without storing the whole table."""
    coeffs = np.asarray(coeffs)
    xs = _as_points(x)
    dtype = np.result_type(coeffs.dtype, float)
    acc = np.zeros(xs.shape, dtype=dtype)
    for c, row in zip(coeffs, _iterate(len(coeffs) - 1, xs)):
        if c != 0:
            acc += c * row
    return acc


def basis_table(nmax: int, xs) -> BasisTable:
    """Tabulate ``phi_0..phi_nmax`` at every point of ``xs``."""
    points = _as_points(xs).ravel()
    values = hermite_functions(nmax, points)
    points.setflags(write=False)
    values.setflags(write=False)
    return BasisTable(nmax=int(nmax), xs=points, values=values)
