"""Checks of the norm inequalities and entropic uncertainty relations between
the phase-space density ``w`` and the number distribution ``s``.

Orders come in conjugate pairs with ``1/alpha + 1/beta = 2``. Every check
returns :class:`RelationReport` objects; a report passes when its margin is at
least ``-tolerance``. Margins are oriented so that a satisfied relation has a
non-negative margin for both lower bounds (``>=``) and upper bounds (``<=``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .entropy import (
    alpha_log,
    auto_grid,
    norm_discrete,
    norm_functional_continuous,
    renyi_continuous,
    renyi_discrete,
    tsallis_continuous,
    tsallis_discrete,
)
from .probability import BinPartition, DiscreteDist, bin_probs, number_dist
from .states import FockVector, State, random_state
from .transform import INV_SQRT_2PI, PhaseDensity, PhaseGrid, density, eta_estimate

LN_2PI = math.log(2.0 * math.pi)
DEFAULT_TOL = 1e-5


@dataclass(frozen=True)
class ConjugatePair:
    """Orders with ``1/alpha + 1/beta = 2``; ``alpha`` is the caller's order."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (a > 0.5 and b > 0.5):
            raise ValueError(f"conjugate orders must exceed 1/2, got ({a}, {b})")
        if abs(1.0 / a + 1.0 / b - 2.0) > 1e-12:
            raise ValueError(f"orders ({a}, {b}) are not conjugate")
        if not ((a > 1 > b) or (b > 1 > a) or (a == b == 1.0)):
            raise ValueError(f"orders ({a}, {b}) must straddle 1")

    @property
    def high(self) -> float:
        return max(self.alpha, self.beta)

    @property
    def low(self) -> float:
        return min(self.alpha, self.beta)

    @property
    def mu(self) -> float:
        return self.high


def conjugate(alpha: float) -> ConjugatePair:
    alpha = float(alpha)
    if not alpha > 0.5 or not math.isfinite(alpha):
        raise ValueError(f"alpha must exceed 1/2 (beta would be non-positive), got {alpha!r}")
    if alpha == 1.0:
        return ConjugatePair(1.0, 1.0)
    return ConjugatePair(alpha, alpha / (2.0 * alpha - 1.0))


@dataclass(frozen=True)
class RelationReport:
    relation: str
    n0: int
    lhs_terms: dict
    bound: float
    lhs: float
    sense: str = ">="
    alpha: Optional[float] = None
    beta: Optional[float] = None
    mu: Optional[float] = None
    tolerance: float = DEFAULT_TOL
    params: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.lhs - self.bound if self.sense == ">=" else self.bound - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            "relation": self.relation,
            "alpha": self.alpha,
            "beta": self.beta,
            "mu": self.mu,
            "n0": self.n0,
            "lhs_terms": dict(self.lhs_terms),
            "lhs": self.lhs,
            "sense": self.sense,
            "bound": self.bound,
            "margin": self.margin,
            "pass": self.passed,
            "tolerances": {"margin": self.tolerance},
            **({"params": dict(self.params)} if self.params else {}),
        }


@lru_cache(maxsize=32)
def computed_eta(n0: int, nmax: int) -> float:
    return eta_estimate(n0, nmax).eta


def _density_for(state, n0, grid, w, orders) -> PhaseDensity:
    if w is not None:
        return w
    if grid is None:
        grid = auto_grid(state.support, n0, orders)
    return density(state, n0, grid)


def _assignments(pair: ConjugatePair, which: str):
    """Yield ``(label, order on w, order on s)``."""
    if which not in ("both", "w", "s"):
        raise ValueError(f"assignment must be 'both', 'w' or 's', got {which!r}")
    if pair.alpha == pair.beta:
        yield "w", pair.alpha, pair.beta
        return
    if which in ("both", "w"):
        yield "w", pair.alpha, pair.beta
    if which in ("both", "s"):
        yield "s", pair.beta, pair.alpha


def check_riesz(
    w: PhaseDensity, s, pair: ConjugatePair, eta: Optional[float] = None, tol: float = DEFAULT_TOL
) -> list:
    """Both norm inequalities with constant ``eta^(2(1-beta)/beta)``.

    ``||w||_hi <= C ||s||_lo`` and ``||s||_hi <= C ||w||_lo`` where ``hi > 1 > lo``
    are the two conjugate orders. ``w`` and ``s`` must come from the same state
    and ancilla number; that is the caller's responsibility.
    """
    if pair.alpha == pair.beta:
        raise ValueError("the norm inequalities need alpha != 1")
    hi, lo = pair.high, pair.low
    if eta is None:
        eta = computed_eta(w.n0, w.nmax)
    expo = 2.0 * (1.0 - lo) / lo
    const = eta**expo
    const_universal = INV_SQRT_2PI**expo
    w_hi, w_lo = norm_functional_continuous(w, hi), norm_functional_continuous(w, lo)
    s_hi, s_lo = norm_discrete(s, hi), norm_discrete(s, lo)
    common = dict(alpha=hi, beta=lo, mu=hi, tolerance=tol, sense="<=")
    params = {"eta": eta, "eta_universal": INV_SQRT_2PI, "constant": const,
              "constant_universal": const_universal}
    return [
        RelationReport(
            relation="riesz_w", n0=w.n0, lhs=w_hi, bound=const * s_lo,
            lhs_terms={"norm_w_alpha": w_hi, "norm_s_beta": s_lo},
            params={**params, "bound_universal": const_universal * s_lo}, **common,
        ),
        RelationReport(
            relation="riesz_s", n0=w.n0, lhs=s_hi, bound=const * w_lo,
            lhs_terms={"norm_s_alpha": s_hi, "norm_w_beta": w_lo},
            params={**params, "bound_universal": const_universal * w_lo}, **common,
        ),
    ]


def check_renyi_relation(
    state: State, n0: int, alpha: float, grid: Optional[PhaseGrid] = None, *,
    w: Optional[PhaseDensity] = None, s=None, assignment: str = "both", tol: float = DEFAULT_TOL,
) -> list:
    """``R_a(w) + R_b(s) >= ln 2 pi`` for each requested assignment of orders."""
    pair = conjugate(alpha)
    w = _density_for(state, n0, grid, w, (pair.alpha, pair.beta))
    s = number_dist(state) if s is None else s
    out = []
    for label, a_w, a_s in _assignments(pair, assignment):
        rw, rs = renyi_continuous(w, a_w), renyi_discrete(s, a_s)
        out.append(RelationReport(
            relation="renyi", n0=w.n0, alpha=a_w, beta=a_s, mu=pair.mu, tolerance=tol,
            lhs_terms={"renyi_w": rw, "renyi_s": rs}, lhs=rw + rs, bound=LN_2PI,
            params={"assignment": label},
        ))
    return out


def check_tsallis_relation(
    state: State, n0: int, alpha: float, grid: Optional[PhaseGrid] = None, *,
    w: Optional[PhaseDensity] = None, s=None, assignment: str = "both", tol: float = DEFAULT_TOL,
) -> list:
    """``H_a(w) + H_b(s) >= ln_mu 2 pi`` with ``mu = max(a, b)``."""
    pair = conjugate(alpha)
    w = _density_for(state, n0, grid, w, (pair.alpha, pair.beta))
    s = number_dist(state) if s is None else s
    bound = alpha_log(2.0 * math.pi, pair.mu)
    out = []
    for label, a_w, a_s in _assignments(pair, assignment):
        hw, hs = tsallis_continuous(w, a_w), tsallis_discrete(s, a_s)
        out.append(RelationReport(
            relation="tsallis", n0=w.n0, alpha=a_w, beta=a_s, mu=pair.mu, tolerance=tol,
            lhs_terms={"tsallis_w": hw, "tsallis_s": hs}, lhs=hw + hs, bound=bound,
            params={"assignment": label},
        ))
    return out


def check_binned_relations(
    state: State, n0: int, alpha: float, partition: BinPartition,
    grid: Optional[PhaseGrid] = None, *, w: Optional[PhaseDensity] = None, s=None,
    assignment: str = "both", tol: float = DEFAULT_TOL,
) -> list:
    """Binned Renyi and Tsallis relations with the cell bound ``2 pi / (dxi dk)``.

    ``dxi`` and ``dk`` are the largest bin widths. When ``dxi * dk >= 2 pi`` the
    bound carries no information and the report is flagged ``trivial``.
    """
    pair = conjugate(alpha)
    w = _density_for(state, n0, grid, w, (pair.alpha, pair.beta))
    s = number_dist(state) if s is None else s
    binned = bin_probs(w, partition)
    r = binned.dist
    cell = binned.dxi * binned.dk
    ratio = 2.0 * math.pi / cell
    params = {"dxi": binned.dxi, "dk": binned.dk, "cell": cell, "trivial": cell >= 2.0 * math.pi,
              "catch_all": binned.catch_all, "bins": list(binned.r.shape)}
    out = []
    for label, a_r, a_s in _assignments(pair, assignment):
        rr, rs = renyi_discrete(r, a_r), renyi_discrete(s, a_s)
        out.append(RelationReport(
            relation="renyi_binned", n0=w.n0, alpha=a_r, beta=a_s, mu=pair.mu, tolerance=tol,
            lhs_terms={"renyi_r": rr, "renyi_s": rs}, lhs=rr + rs, bound=math.log(ratio),
            params={**params, "assignment": label},
        ))
        hr, hs = tsallis_discrete(r, a_r), tsallis_discrete(s, a_s)
        out.append(RelationReport(
            relation="tsallis_binned", n0=w.n0, alpha=a_r, beta=a_s, mu=pair.mu, tolerance=tol,
            lhs_terms={"tsallis_r": hr, "tsallis_s": hs}, lhs=hr + hs,
            bound=alpha_log(ratio, pair.mu), params={**params, "assignment": label},
        ))
    return out


# --- the constrained minimum behind the Tsallis bound -------------------------


def _tsallis_objective(alpha: float, eta: float):
    beta = conjugate(alpha).beta
    c = eta**-2.0

    def g(t, tau):
        return (t - 1.0) / (1.0 - alpha) + (tau - 1.0) / (1.0 - beta)

    def reduced(t):
        # g grows with tau, so the smallest feasible tau is optimal
        tau = max(1.0, c ** (1.0 - beta) * t ** (beta / alpha))
        return g(t, tau)

    return g, reduced


def _last_argmin(vals) -> int:
    # g is flat to rounding below t0 when t0 is tiny; prefer the largest tied t
    return int(vals.size - 1 - np.argmin(vals[::-1]))


def tsallis_min_closed_form(alpha: float, eta: float = INV_SQRT_2PI):
    c = eta**-2.0
    return c ** (1.0 - alpha), alpha_log(c, alpha)


def tsallis_min_oracle(alpha: float, eta: float = INV_SQRT_2PI):
    """Numerically minimize ``g(t, tau) = (t-1)/(1-alpha) + (tau-1)/(1-beta)``
    over ``t <= 1``, ``tau >= 1``, ``eta^-2(1-beta) t^(beta/alpha) <= tau``.

    Returns ``(t0, g_min)``; for ``eta = (2 pi)^(-1/2)`` these are
    ``(2 pi)^(1-alpha)`` and ``ln_alpha 2 pi``.
    """
    alpha = float(alpha)
    if not alpha > 1:
        raise ValueError(f"need alpha > 1, got {alpha!r}")
    if not 0 < eta**2 < 1:
        raise ValueError(f"need 0 < eta^2 < 1, got eta={eta!r}")
    _, reduced = _tsallis_objective(alpha, eta)
    # coarse log-spaced scan, then repeated zooming onto the best bracket
    ts = np.logspace(-300, 0, 6001)
    vals = np.array([reduced(t) for t in ts])
    i = _last_argmin(vals)
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    t0 = float(ts[i])
    for _ in range(60):
        grid = np.linspace(lo, hi, 41)
        vals = np.array([reduced(t) for t in grid])
        i = _last_argmin(vals)
        t0 = float(grid[i])
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    closed_t0, closed_val = tsallis_min_closed_form(alpha, eta)
    if abs(reduced(t0) - closed_val) > 1e-6:
        raise ArithmeticError(
            f"numerical minimum {reduced(t0)!r} disagrees with closed form {closed_val!r}"
        )
    return t0, float(reduced(t0))


# --- search for near-saturating states ------------------------------------------


@dataclass
class _Search:
    alpha: float
    beta: float
    n0: int
    grid: PhaseGrid
    evals: int = 0

    def state(self, amp, phase) -> FockVector:
        return FockVector.from_amplitudes(np.abs(amp) * np.exp(1j * phase))

    def objective(self, amp, phase) -> float:
        self.evals += 1
        if not np.any(amp > 0):
            return math.inf
        f = self.state(amp, phase)
        w = density(f, self.n0, self.grid, strict=False)
        return renyi_continuous(w, self.alpha) + renyi_discrete(number_dist(f), self.beta)


def _coordinate_descent(search: _Search, amp, phase, max_evals: int, min_step: float):
    best = search.objective(amp, phase)
    steps = [0.5, math.pi / 2]
    converged = False
    while search.evals < max_evals:
        improved = False
        for vec, step_i in ((amp, 0), (phase, 1)):
            step = steps[step_i]
            for idx in range(vec.size):
                for sign in (1.0, -1.0):
                    old = vec[idx]
                    vec[idx] = old + sign * step
                    if step_i == 0:
                        vec[idx] = max(vec[idx], 0.0)
                    val = search.objective(amp, phase)
                    if val < best - 1e-12:
                        best, improved = val, True
                        break
                    vec[idx] = old
        if not improved:
            steps = [steps[0] / 2, steps[1] / 2]
            if steps[0] < min_step:
                converged = True
                break
    return best, converged


def minimize_entropy_sum(
    alpha: float, n0: int, N: int, seed: int, *, starts: int = 3, max_evals: int = 4000,
    search_points: int = 128, min_step: float = 1e-3, tol: float = DEFAULT_TOL,
):
    """Multi-start coordinate descent on ``R_alpha(w) + R_beta(s)``.

    Amplitude moduli and phases are the coordinates; every start is a random
    state from ``seed``, plus the best single number state. The search runs
    on a coarse grid and the winner is re-evaluated on the full automatic
    grid. Returns ``(state, report)``; ``report.params['converged']`` is False
    when the evaluation budget ran out first.
    """
    if N > 30:
        raise ValueError("minimize_entropy_sum supports N <= 30")
    pair = conjugate(alpha)
    full = auto_grid(N, n0, (pair.alpha, pair.beta))
    coarse = PhaseGrid.square(full.xi_max, search_points)
    search = _Search(pair.alpha, pair.beta, n0, coarse)
    budget = max_evals // max(starts, 1)

    inits = []
    fock_vals = []
    for n in range(N + 1):
        amp = np.zeros(N + 1)
        amp[n] = 1.0
        fock_vals.append((search.objective(amp, np.zeros(N + 1)), n))
    amp = np.zeros(N + 1)
    amp[min(fock_vals)[1]] = 1.0
    inits.append((amp, np.zeros(N + 1)))
    rng = np.random.default_rng(seed)
    for _ in range(max(starts - 1, 0)):
        f = random_state(int(rng.integers(0, 2**63 - 1)), N)
        inits.append((np.abs(f.coeffs), np.angle(f.coeffs)))

    best = None
    all_converged = True
    for amp, phase in inits:
        amp, phase = amp.copy(), phase.copy()
        start_evals = search.evals
        val, conv = _coordinate_descent(search, amp, phase, start_evals + budget, min_step)
        all_converged &= conv
        if best is None or val < best[0]:
            best = (val, amp.copy(), phase.copy())
    state = search.state(best[1], best[2])
    report = check_renyi_relation(state, n0, pair.alpha, full, assignment="w", tol=tol)[0]
    report = RelationReport(
        **{**report.__dict__, "params": {**report.params, "converged": bool(all_converged),
                                        "evaluations": search.evals, "search_value": best[0]}}
    )
    return state, report
