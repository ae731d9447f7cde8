"""Quadrature and annihilation-operator moments, from the Fock coefficients and
from the phase-space density, and the identities tying the two together."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .basis import hermite_functions, hermite_series
from .entropy import check_tail
from .probability import number_dist
from .relations import RelationReport
from .states import State, pure_components
from .transform import PhaseDensity, PhaseGrid, density

EDGE_TOL = 1e-8
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MomentSet:
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    mean_a: complex
    varL_a: float
    varR_a: float
    mean_n: float
    var_n: float
    warnings: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean_a"] = [self.mean_a.real, self.mean_a.imag]
        d["warnings"] = list(self.warnings)
        return d


def _ladder(c: np.ndarray):
    """``a|psi>`` and ``a^dag|psi>`` on one extra level, so no truncation error enters."""
    n = np.arange(c.size)
    ext = np.zeros(c.size + 1, dtype=complex)
    lower = ext.copy()
    lower[: c.size - 1] = np.sqrt(n[1:]) * c[1:]
    ext[1:] = np.sqrt(n + 1) * c
    return lower, ext


def fock_moments(state: State) -> MomentSet:
    """Moments from the Fock coefficients via exact ladder-operator algebra."""
    mean_a = 0j
    q2 = p2 = n1 = n2 = 0.0
    warnings = []
    for lam, f in pure_components(state):
        c = f.coeffs
        if abs(c[-1]) ** 2 > EDGE_TOL:
            warnings.append(
                f"|c_N|^2 = {abs(c[-1]) ** 2:.3g} exceeds {EDGE_TOL:g}; truncation edge is populated"
            )
        lower, raise_ = _ladder(c)
        ext = np.append(c, 0.0)
        mean_a += lam * np.vdot(ext, lower)
        qpsi = (lower + raise_) / SQRT2
        ppsi = (lower - raise_) / (1j * SQRT2)
        q2 += lam * float(np.vdot(qpsi, qpsi).real)
        p2 += lam * float(np.vdot(ppsi, ppsi).real)
        s = np.abs(c) ** 2
        n = np.arange(c.size)
        n1 += lam * float(s @ n)
        n2 += lam * float(s @ n**2)
    mean_q = SQRT2 * mean_a.real
    mean_p = SQRT2 * mean_a.imag
    abs2 = abs(mean_a) ** 2
    return MomentSet(
        mean_q=mean_q,
        mean_p=mean_p,
        var_q=q2 - mean_q**2,
        var_p=p2 - mean_p**2,
        mean_a=complex(mean_a),
        varL_a=n1 + 1.0 - abs2,
        varR_a=n1 - abs2,
        mean_n=n1,
        var_n=n2 - n1**2,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class DensityMoments:
    mean_Q: float
    mean_P: float
    var_Q: float
    var_P: float
    mean_A: complex

    @property
    def var_A(self) -> float:
        """Variance of the complex outcome ``(xi + i k) / sqrt 2``."""
        return 0.5 * (self.var_Q + self.var_P)


def density_moments(w: PhaseDensity) -> DensityMoments:
    check_tail(w, 1.0, moment=2)
    g = w.grid
    xi, k = g.xi[:, None], g.k[None, :]
    total = w.total()
    mq = g.integrate(w.w * xi) / total
    mp = g.integrate(w.w * k) / total
    vq = g.integrate(w.w * (xi - mq) ** 2) / total
    vp = g.integrate(w.w * (k - mp) ** 2) / total
    return DensityMoments(mq, mp, vq, vp, complex(mq, mp) / SQRT2)


def _position_number_dist(state: State, nmax: int) -> np.ndarray:
    # s_n = |<phi_n, f>|^2 recomputed by position-space quadrature
    half = 2.0 * math.sqrt(2 * nmax + 1) + 10.0
    x = np.linspace(-half, half, int(2 * half / 0.02) + 1)
    h = x[1] - x[0]
    table = hermite_functions(nmax, x)
    s = np.zeros(nmax + 1)
    for lam, f in pure_components(state):
        fx = hermite_series(f.coeffs, x)
        s[: f.coeffs.size] += lam * np.abs(table[: f.coeffs.size] @ fx * h) ** 2
    return s


def check_tracing(
    state: State, n0: int, grid: Optional[PhaseGrid] = None, tol: float = 1e-4, *,
    w: Optional[PhaseDensity] = None,
) -> RelationReport:
    """Compare density-side moments with Fock-side moments plus the ancilla offsets.

    Identities: equal means of both quadratures and of the annihilation
    operator; quadrature variances shifted by ``n0 + 1/2``; the complex-outcome
    variance equal to the left variance plus ``n0`` and to the right variance
    plus ``n0 + 1``; the number distribution reproduced by projection.
    """
    if w is None:
        w = density(state, n0, grid)
    fm = fock_moments(state)
    dm = density_moments(w)
    s = number_dist(state).probs
    s_proj = _position_number_dist(state, s.size - 1)
    pairs = {
        "mean_Q=mean_q": (dm.mean_Q, fm.mean_q),
        "mean_P=mean_p": (dm.mean_P, fm.mean_p),
        "mean_A=mean_a": (dm.mean_A, fm.mean_a),
        "var_Q=var_q+n0+1/2": (dm.var_Q, fm.var_q + n0 + 0.5),
        "var_P=var_p+n0+1/2": (dm.var_P, fm.var_p + n0 + 0.5),
        "var_A=varL_a+n0": (dm.var_A, fm.varL_a + n0),
        "var_A=varR_a+n0+1": (dm.var_A, fm.varR_a + n0 + 1),
        "s_n=<n|rho|n>": (float(np.abs(s - s_proj).max()), 0.0),
    }
    terms = {}
    worst = 0.0
    for name, (lhs, rhs) in pairs.items():
        dev = abs(lhs - rhs)
        worst = max(worst, dev)
        enc = lambda v: [v.real, v.imag] if isinstance(v, complex) else float(v)
        terms[name] = {"density": enc(lhs), "fock": enc(rhs), "deviation": dev}
    return RelationReport(
        relation="tracing", n0=n0, lhs_terms=terms, lhs=worst, bound=tol, sense="<=",
        tolerance=0.0, params={"fock_warnings": list(fm.warnings), "tol": tol},
    )
