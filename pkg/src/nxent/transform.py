"""Transform of a Fock-basis state onto the common eigenfunctions of the
commuting quadratures of the two-mode normal operator.

For an input wavefunction ``f`` of the measured mode and the ancilla prepared
in ``|n0>``, the amplitude at outcome ``(xi, k)`` is

    F(xi, k) = (2 pi)^(-1/2) e^(i k xi / 2) int phi_n0(xi - x) f(x) e^(-i k x) dx

and ``w = |F|^2`` is the joint probability density of the two outcomes.
Substituting ``x = xi/2 + z`` removes the phase prefactor::

    F(xi, k) = (2 pi)^(-1/2) int f(xi/2 + z) phi_n0(xi/2 - z) e^(-i k z) dz

so one fixed set of trapezoid nodes in ``z`` serves every grid point, and the
whole field is a product of a (xi, z) sample matrix with a (z, k) Fourier
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .basis import hermite_functions, _iterate
from .states import FockVector, MixedState, State, pure_components

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
DEFAULT_POINTS = 512

# working-set cap (float64 elements) for one block of xi rows
_BLOCK_ELEMS = 4_000_000


class GridAdequacyError(ValueError):
    """The phase-space grid does not cover the region the state occupies."""


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform rectangular grid over the outcome plane ``(xi, k)``."""

    xi_min: float
    xi_max: float
    k_min: float
    k_max: float
    n_xi: int = DEFAULT_POINTS
    n_k: int = DEFAULT_POINTS

    def __post_init__(self):
        vals = (self.xi_min, self.xi_max, self.k_min, self.k_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("grid bounds must be finite")
        if not (self.xi_max > self.xi_min and self.k_max > self.k_min):
            raise ValueError("grid extents must be strictly positive")
        if self.n_xi < 2 or self.n_k < 2:
            raise ValueError("grid needs at least two points per axis")

    @classmethod
    def square(cls, extent: float, points: int = DEFAULT_POINTS) -> "PhaseGrid":
        return cls(-extent, extent, -extent, extent, points, points)

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(self.xi_min, self.xi_max, self.n_xi)

    @property
    def k(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_k)

    @property
    def dxi(self) -> float:
        return (self.xi_max - self.xi_min) / (self.n_xi - 1)

    @property
    def dk(self) -> float:
        return (self.k_max - self.k_min) / (self.n_k - 1)

    def weights(self) -> np.ndarray:
        """2D trapezoid weights, shape ``(n_xi, n_k)``."""
        return np.outer(_trapezoid_weights(self.n_xi, self.dxi), _trapezoid_weights(self.n_k, self.dk))

    def integrate(self, values) -> float:
        wx = _trapezoid_weights(self.n_xi, self.dxi)
        wk = _trapezoid_weights(self.n_k, self.dk)
        return float(wx @ np.asarray(values) @ wk)

    def covers(self, extent: float) -> bool:
        eps = 1e-9
        return (
            self.xi_min <= -extent + eps
            and self.xi_max >= extent - eps
            and self.k_min <= -extent + eps
            and self.k_max >= extent - eps
        )

    def to_dict(self) -> dict:
        return {
            "xi_min": self.xi_min,
            "xi_max": self.xi_max,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "n_xi": self.n_xi,
            "n_k": self.n_k,
        }


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def required_extent(nmax: int, n0: int) -> float:
    """Half-width that holds the density of any state supported on ``n <= nmax``."""
    return 2.0 * math.sqrt(2 * nmax + 2 * n0 + 2) + 6.0


def default_grid(nmax: int, n0: int, points: int = DEFAULT_POINTS) -> PhaseGrid:
    return PhaseGrid.square(required_extent(nmax, n0), points)


def check_grid(grid: PhaseGrid, nmax: int, n0: int) -> None:
    need = required_extent(nmax, n0)
    if not grid.covers(need):
        raise GridAdequacyError(
            f"grid [{grid.xi_min:g}, {grid.xi_max:g}] x [{grid.k_min:g}, {grid.k_max:g}] "
            f"does not cover |xi|, |k| <= {need:.6g} required for n <= {nmax}, n0 = {n0}"
        )


# --- quadrature in the relative coordinate z = x - xi/2 ------------------------


def quad_step(kabs: float) -> float:
    return min(0.02, math.pi / (16.0 * (kabs + 1.0)))


def quad_halfwidth(nmax: int, n0: int) -> float:
    """Half-width of the z interval.

    9 suffices while both Hermite factors sit near the origin; wider when the
    classical turning points ``sqrt(2n+1)`` of the two factors are far apart.
    """
    return max(9.0, 0.5 * (math.sqrt(2 * nmax + 1) + math.sqrt(2 * n0 + 1)) + 6.0)


def quad_nodes(nmax: int, n0: int, kabs: float):
    half = quad_halfwidth(nmax, n0)
    m = int(math.ceil(2.0 * half / quad_step(kabs))) + 1
    z = np.linspace(-half, half, m)
    return z, _trapezoid_weights(m, z[1] - z[0])


def transform_basis(n: int, n0: int, xi: float, k: float) -> complex:
    """Transformed basis function ``phi~_n(xi, k)`` for ancilla number ``n0``."""
    if n < 0 or n0 < 0:
        raise ValueError("Fock indices must be non-negative")
    if not (math.isfinite(xi) and math.isfinite(k)):
        raise ValueError("xi and k must be finite")
    z, wz = quad_nodes(n, n0, abs(k))
    fx = hermite_functions(n, 0.5 * xi + z)[n]
    fy = hermite_functions(n0, 0.5 * xi - z)[n0]
    g = wz * fx * fy
    re = g @ np.cos(k * z)
    im = -(g @ np.sin(k * z))
    return complex(re, im) * INV_SQRT_2PI


def _fourier_matrices(grid: PhaseGrid, z, wz):
    kz = np.outer(grid.k, z)
    return (np.cos(kz) * wz).T.copy(), (np.sin(kz) * wz).T.copy()


def _apply_fourier(g, cos_t, sin_t):
    # g: (..., n_z) samples; returns sum_z g e^{-ikz} with trapezoid weights
    if np.iscomplexobj(g):
        gr, gi = np.ascontiguousarray(g.real), np.ascontiguousarray(g.imag)
        return (gr @ cos_t + gi @ sin_t) + 1j * (gi @ cos_t - gr @ sin_t)
    return (g @ cos_t) - 1j * (g @ sin_t)


def _field(grid: PhaseGrid, n0: int, nmax: int, coeffs: Optional[np.ndarray]):
    """Core evaluation.

    With ``coeffs`` of shape ``(M, nmax+1)`` returns ``M`` transformed states;
    with ``coeffs=None`` returns every transformed basis function ``n <= nmax``.
    Result shape ``(M, n_xi, n_k)``.
    """
    kabs = max(abs(grid.k_min), abs(grid.k_max))
    z, wz = quad_nodes(nmax, n0, kabs)
    cos_t, sin_t = _fourier_matrices(grid, z, wz)
    xi = grid.xi
    nout = nmax + 1 if coeffs is None else coeffs.shape[0]
    out = np.empty((nout, grid.n_xi, grid.n_k), dtype=complex)
    block = max(1, _BLOCK_ELEMS // (z.size * max(nout, 1)))
    for start in range(0, xi.size, block):
        xs = xi[start:start + block]
        X = 0.5 * xs[:, None] + z[None, :]
        Y = 0.5 * xs[:, None] - z[None, :]
        anc = hermite_functions(n0, Y)[n0] * INV_SQRT_2PI
        if coeffs is None:
            for n, row in enumerate(_iterate(nmax, X)):
                out[n, start:start + block] = _apply_fourier(row * anc, cos_t, sin_t)
        else:
            acc = np.zeros((nout,) + X.shape, dtype=complex)
            for n, row in enumerate(_iterate(nmax, X)):
                col = coeffs[:, n]
                for m in np.flatnonzero(col):
                    acc[m] += col[m] * row
            for m in range(nout):
                out[m, start:start + block] = _apply_fourier(acc[m] * anc, cos_t, sin_t)
    return out


@dataclass(frozen=True)
class TransformField:
    """Complex amplitudes ``F(xi_i, k_j)`` of one pure state."""

    grid: PhaseGrid
    amps: np.ndarray
    n0: int

    def norm2(self) -> float:
        """Trapezoid integral of ``|F|^2``; equals 1 for a unit input vector."""
        return self.grid.integrate(np.abs(self.amps) ** 2)


@dataclass(frozen=True)
class PhaseDensity:
    """Joint density ``w(xi, k) >= 0`` sampled on a grid.

    ``nmax`` is the highest Fock index of the generating state; it feeds the
    tail estimates used for fractional-power integrals.
    """

    grid: PhaseGrid
    w: np.ndarray
    n0: int
    nmax: int

    def total(self) -> float:
        return self.grid.integrate(self.w)

    def to_csv(self, dest) -> None:
        """Write ``xi,k,w`` rows (xi-major) with 17 significant digits to a path or text stream."""
        if isinstance(dest, (str, Path)):
            with open(dest, "w") as fh:
                self.to_csv(fh)
            return
        dest.write("xi,k,w\n")
        for x, row in zip(self.grid.xi, self.w):
            dest.writelines(f"{x:.17g},{kv:.17g},{wv:.17g}\n" for kv, wv in zip(self.grid.k, row))

    def to_json_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "n0": self.n0,
            "nmax": self.nmax,
            "w": [[float(f"{v:.17g}") for v in row] for row in self.w],
        }


def _coeff_matrix(vectors, nmax: int) -> np.ndarray:
    mat = np.zeros((len(vectors), nmax + 1), dtype=complex)
    for m, f in enumerate(vectors):
        c = f.coeffs[: nmax + 1]
        mat[m, : c.size] = c
    return mat


def _prepare(state: State, n0: int, grid: Optional[PhaseGrid], strict: bool):
    if n0 < 0:
        raise ValueError(f"ancilla number n0 must be non-negative, got {n0}")
    nmax = state.support
    if grid is None:
        grid = default_grid(nmax, n0)
    elif strict:
        check_grid(grid, nmax, n0)
    return nmax, grid


def transform_state(
    f: FockVector, n0: int, grid: Optional[PhaseGrid] = None, strict: bool = True
) -> TransformField:
    """Transform a pure state onto the grid (default grid when ``grid`` is None)."""
    nmax, grid = _prepare(f, n0, grid, strict)
    amps = _field(grid, n0, nmax, _coeff_matrix([f], nmax))[0]
    amps.setflags(write=False)
    return TransformField(grid=grid, amps=amps, n0=n0)


def transform_basis_grid(nmax: int, n0: int, grid: PhaseGrid) -> np.ndarray:
    """All transformed basis functions ``n <= nmax``; shape ``(nmax+1, n_xi, n_k)``."""
    return _field(grid, n0, nmax, None)


def density(
    state: State, n0: int, grid: Optional[PhaseGrid] = None, strict: bool = True
) -> PhaseDensity:
    """Density ``w = |F|^2``; mixtures are weighted sums of component densities."""
    nmax, grid = _prepare(state, n0, grid, strict)
    comps = pure_components(state)
    amps = _field(grid, n0, nmax, _coeff_matrix([f for _, f in comps], nmax))
    w = np.zeros((grid.n_xi, grid.n_k))
    for (lam, _), a in zip(comps, amps):
        w += lam * (a.real**2 + a.imag**2)
    w.setflags(write=False)
    return PhaseDensity(grid=grid, w=w, n0=n0, nmax=nmax)


# --- eta: the supremum of |phi~_n| --------------------------------------------


@dataclass(frozen=True)
class EtaEstimate:
    eta: float
    n: int
    xi: float
    k: float
    grid_max: float
    bound: float = INV_SQRT_2PI

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "n": self.n,
            "xi": self.xi,
            "k": self.k,
            "grid_max": self.grid_max,
            "bound": self.bound,
        }


def _golden_max(fun, center: float, step: float, lo: float, hi: float, tol: float) -> float:
    a, c = max(lo, center - step), min(hi, center + step)
    neg = lambda t: -fun(t)
    f_mid = neg(center)
    if a < center < c and f_mid < neg(a) and f_mid < neg(c):
        res = minimize_scalar(neg, bracket=(a, center, c), method="golden", tol=tol)
    else:
        res = minimize_scalar(neg, bounds=(a, c), method="bounded", options={"xatol": tol})
    return float(res.x) if -res.fun >= -f_mid else center


def eta_estimate(
    n0: int, nmax: int, grid: Optional[PhaseGrid] = None, candidates: int = 3, tol: float = 1e-8
) -> EtaEstimate:
    """Largest ``|phi~_n(xi, k)|`` over ``n <= nmax`` and the grid, then refined
    by alternating golden-section searches in ``xi`` and ``k`` around the best
    grid points of the leading ``candidates`` indices."""
    if nmax < 0 or n0 < 0:
        raise ValueError("nmax and n0 must be non-negative")
    grid = grid or default_grid(nmax, n0)
    mags = np.abs(transform_basis_grid(nmax, n0, grid))
    per_n = mags.reshape(nmax + 1, -1).max(axis=1)
    grid_max = float(per_n.max())
    xi_axis, k_axis = grid.xi, grid.k
    found = []
    for n in np.argsort(-per_n, kind="stable")[:candidates]:
        n = int(n)
        i, j = np.unravel_index(int(mags[n].argmax()), mags[n].shape)
        x, y = float(xi_axis[i]), float(k_axis[j])
        val = abs(transform_basis(n, n0, x, y))
        for _ in range(50):
            x = _golden_max(lambda t: abs(transform_basis(n, n0, t, y)), x, grid.dxi,
                            grid.xi_min, grid.xi_max, tol)
            y = _golden_max(lambda t: abs(transform_basis(n, n0, x, t)), y, grid.dk,
                            grid.k_min, grid.k_max, tol)
            new = abs(transform_basis(n, n0, x, y))
            done = new - val < 1e-15
            val = max(val, new)
            if done:
                break
        found.append((val, n, x, y))
    eta, n, x, y = max(found, key=lambda item: item[0])
    return EtaEstimate(eta=float(eta), n=n, xi=x, k=y, grid_max=grid_max)
