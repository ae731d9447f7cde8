"""Discrete distributions: Fock-number statistics and binned phase-space
probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import State, pure_components
from .transform import PhaseDensity, PhaseGrid

SUM_TOL = 1e-9
RESIDUAL_TOL = 1e-6


class PartitionError(ValueError):
    """Invalid bin partition, or one that leaves the density grid."""


@dataclass(frozen=True)
class DiscreteDist:
    """Probability vector: non-negative entries summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size == 0 or not np.all(np.isfinite(p)):
            raise ValueError("a distribution needs finite entries")
        if np.any(p < 0) or np.any(p > 1 + SUM_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        total = math.fsum(p)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


def as_probs(s) -> np.ndarray:
    return s.probs if isinstance(s, DiscreteDist) else DiscreteDist(s).probs


def number_dist(state: State) -> DiscreteDist:
    """Photon-number distribution ``s_n = sum_lambda lambda |c_n|^2``."""
    comps = pure_components(state)
    size = max(f.coeffs.size for _, f in comps)
    s = np.zeros(size)
    for lam, f in comps:
        c = f.coeffs
        s[: c.size] += lam * (c.real**2 + c.imag**2)
    return DiscreteDist(np.clip(s, 0.0, 1.0))


# --- bins --------------------------------------------------------------------


def _check_edges(edges, axis: str) -> np.ndarray:
    e = np.array(edges, dtype=float).ravel()
    if e.size < 2:
        raise PartitionError(f"{axis} partition needs at least two edges")
    if not np.all(np.isfinite(e)):
        raise PartitionError(f"{axis} edges must be finite")
    if np.any(np.diff(e) <= 0):
        raise PartitionError(f"{axis} edges must be strictly increasing")
    e.setflags(write=False)
    return e


@dataclass(frozen=True)
class BinPartition:
    """Rectangular product partition of the outcome plane."""

    xi_edges: np.ndarray
    k_edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi_edges", _check_edges(self.xi_edges, "xi"))
        object.__setattr__(self, "k_edges", _check_edges(self.k_edges, "k"))

    @property
    def shape(self):
        return (self.xi_edges.size - 1, self.k_edges.size - 1)

    @property
    def max_widths(self):
        return float(np.diff(self.xi_edges).max()), float(np.diff(self.k_edges).max())

    def to_dict(self) -> dict:
        return {"xi_edges": self.xi_edges.tolist(), "k_edges": self.k_edges.tolist()}


def _uniform_edges(step: float, extent: float) -> np.ndarray:
    if not (step > 0 and extent > 0):
        raise PartitionError("uniform bins need positive step and extent")
    m = int(math.floor(2.0 * extent / step + 1e-9))
    if m < 1:
        raise PartitionError(f"bin width {step} exceeds the extent 2*{extent}")
    return (np.arange(m + 1) - 0.5 * m) * step


def uniform_partition(dxi: float, dk: float, extent: float) -> BinPartition:
    """Equal bins of size ``dxi x dk`` centred on the origin inside ``[-extent, extent]^2``."""
    return BinPartition(_uniform_edges(dxi, extent), _uniform_edges(dk, extent))


def parse_partition(spec) -> BinPartition:
    if not isinstance(spec, dict):
        raise PartitionError("partition spec must be a JSON object")
    if "uniform" in spec:
        u = spec["uniform"]
        try:
            return uniform_partition(float(u["dxi"]), float(u["dk"]), float(u["extent"]))
        except (KeyError, TypeError) as exc:
            raise PartitionError("uniform partition needs dxi, dk and extent") from exc
    if "xi_edges" in spec and "k_edges" in spec:
        return BinPartition(spec["xi_edges"], spec["k_edges"])
    raise PartitionError("partition spec needs xi_edges/k_edges or uniform")


def _ramp(u):
    # integral of the unit hat function from -inf to u
    u = np.clip(u, -1.0, 1.0)
    return np.where(u <= 0, 0.5 * (1 + u) ** 2, 1 - 0.5 * (1 - u) ** 2)


def _bin_weights(edges: np.ndarray, lo: float, n: int, h: float) -> np.ndarray:
    """Weights integrating the piecewise-linear interpolant of grid samples over each bin.

    Over the whole grid the rows sum to the ordinary trapezoid weights.
    """
    nodes = lo + h * np.arange(n)
    start = _ramp((lo - nodes) / h)
    cum = h * (_ramp((edges[:, None] - nodes[None, :]) / h) - start[None, :])
    return np.diff(cum, axis=0)


@dataclass(frozen=True)
class BinnedDist:
    """Bin probabilities ``r_lm`` with the maximal bin widths.

    ``dist`` is the flattened (row-major in ``xi``) distribution; when mass
    outside the partition exceeded the residual tolerance a catch-all entry is
    appended last and ``catch_all`` is set.
    """

    dist: DiscreteDist
    r: np.ndarray
    dxi: float
    dk: float
    catch_all: bool
    residual: float
    partition: BinPartition


def bin_probs(w: PhaseDensity, part: BinPartition) -> BinnedDist:
    grid: PhaseGrid = w.grid
    eps = 1e-9
    if (part.xi_edges[0] < grid.xi_min - eps or part.xi_edges[-1] > grid.xi_max + eps
            or part.k_edges[0] < grid.k_min - eps or part.k_edges[-1] > grid.k_max + eps):
        raise PartitionError(
            f"partition [{part.xi_edges[0]:g}, {part.xi_edges[-1]:g}] x "
            f"[{part.k_edges[0]:g}, {part.k_edges[-1]:g}] exceeds the density grid"
        )
    xe = np.clip(part.xi_edges, grid.xi_min, grid.xi_max)
    ke = np.clip(part.k_edges, grid.k_min, grid.k_max)
    wx = _bin_weights(xe, grid.xi_min, grid.n_xi, grid.dxi)
    wk = _bin_weights(ke, grid.k_min, grid.n_k, grid.dk)
    r = wx @ w.w @ wk.T
    total = w.total()
    residual = total - float(r.sum())
    r = np.clip(r / total, 0.0, None)
    flat = r.ravel()
    catch_all = residual / total > RESIDUAL_TOL
    if catch_all:
        flat = np.append(flat, max(0.0, 1.0 - math.fsum(flat)))
    flat = flat / math.fsum(flat)
    dxi, dk = part.max_widths
    r.setflags(write=False)
    return BinnedDist(DiscreteDist(flat), r, dxi, dk, bool(catch_all), float(residual), part)
