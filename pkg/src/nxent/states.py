"""Pure and mixed states of the measured mode in a truncated Fock basis.

A pure state is stored as its coefficient vector ``c_0..c_N`` over the number
states; a mixture is a list of ``(weight, pure state)`` pairs. The truncation
index ``N`` is always explicit.

State files are JSON objects with a ``kind`` field::

    {"kind": "fock", "n": 2, "N": 10}
    {"kind": "coherent", "alpha": [1.0, 0.5], "N": 40}
    {"kind": "superposition", "coeffs": [[1, 0], [0, 1]], "normalize": true}
    {"kind": "mixture", "components": [{"weight": 0.5, "state": {...}}, ...]}

Complex numbers are ``[re, im]`` pairs (a bare real is also accepted).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import gammaln

NORM_TOL = 1e-12
WEIGHT_TOL = 1e-9


class StateSpecError(ValueError):
    """Raised for invalid state construction or malformed state files."""


@dataclass(frozen=True)
class FockVector:
    """Unit vector of Fock amplitudes ``c_0..c_N``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise StateSpecError("a Fock vector needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise StateSpecError("Fock coefficients must be finite")
        norm2 = float(np.sum(np.abs(c) ** 2))
        if abs(norm2 - 1.0) > NORM_TOL:
            raise StateSpecError(f"Fock vector is not normalized: sum |c_n|^2 = {norm2!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return self.coeffs.size - 1

    @property
    def support(self) -> int:
        """Highest index carrying non-negligible amplitude (``|c_n|^2 > 1e-30``)."""
        nz = np.flatnonzero(np.abs(self.coeffs) ** 2 > 1e-30)
        return int(nz[-1]) if nz.size else 0

    @classmethod
    def from_amplitudes(cls, amps) -> "FockVector":
        """Normalize an arbitrary non-zero amplitude vector."""
        a = np.asarray(amps, dtype=complex).ravel()
        norm = np.linalg.norm(a)
        if not np.isfinite(norm) or norm == 0:
            raise StateSpecError("cannot normalize a zero or non-finite amplitude vector")
        return cls(a / norm)


@dataclass(frozen=True)
class MixedState:
    """Convex combination of pure states; weights are positive and sum to one."""

    components: tuple = field(default_factory=tuple)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def support(self) -> int:
        return max(f.support for _, f in self.components)

    @property
    def N(self) -> int:
        return max(f.N for _, f in self.components)


State = Union[FockVector, MixedState]


def pure_components(state: State) -> list:
    """``[(weight, FockVector), ...]`` for either kind of state."""
    if isinstance(state, FockVector):
        return [(1.0, state)]
    return list(state.components)


def fock_state(n: int, N: int) -> FockVector:
    if not 0 <= n <= N:
        raise StateSpecError(f"need 0 <= n <= N, got n={n}, N={N}")
    c = np.zeros(N + 1, dtype=complex)
    c[n] = 1.0
    return FockVector(c)


def coherent_state(a: complex, N: int) -> FockVector:
    """Coherent state ``|a>`` truncated at ``N`` and renormalized.

    The truncation must satisfy ``|a|^2 <= N/4``; the discarded Poisson tail is
    then below 1e-10 and renormalization is a no-op at working precision.
    """
    a = complex(a)
    if N < 0:
        raise StateSpecError(f"N must be non-negative, got {N}")
    if abs(a) ** 2 > N / 4:
        need = math.ceil(4 * abs(a) ** 2)
        raise StateSpecError(
            f"truncation N={N} too small for coherent amplitude |a|^2={abs(a) ** 2:.6g}; "
            f"use N >= {need}"
        )
    if a == 0:
        return fock_state(0, N)
    n = np.arange(N + 1)
    logmag = n * math.log(abs(a)) - 0.5 * gammaln(n + 1) - 0.5 * abs(a) ** 2
    c = np.exp(logmag) * np.exp(1j * n * np.angle(a))
    return FockVector.from_amplitudes(c)


def random_state(seed: int, N: int) -> FockVector:
    """Haar-random pure state on ``C^(N+1)``, deterministic in ``seed``."""
    if N < 0:
        raise StateSpecError(f"N must be non-negative, got {N}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
    return FockVector.from_amplitudes(z)


def random_mixture(seed: int, N: int, ncomp: int = 3) -> MixedState:
    """Mixture of ``ncomp`` random pure states with Dirichlet weights."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(ncomp))
    seeds = rng.integers(0, 2**63 - 1, size=ncomp)
    return mixed([(w, random_state(int(s), N)) for w, s in zip(weights, seeds)])


def mixed(components: Iterable) -> MixedState:
    """Validate a list of ``(weight, FockVector)`` pairs as a mixed state."""
    comps = [(float(w), f) for w, f in components]
    if not comps:
        raise StateSpecError("a mixture needs at least one component")
    for w, f in comps:
        if not w > 0:
            raise StateSpecError(f"mixture weights must be positive, got {w!r}")
        if not isinstance(f, FockVector):
            raise StateSpecError("mixture components must be pure Fock vectors")
    total = math.fsum(w for w, _ in comps)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise StateSpecError(f"mixture weights sum to {total!r}, not 1")
    return MixedState(tuple((w / total, f) for w, f in comps))


def superposition(amps: Sequence, normalize: bool = True) -> FockVector:
    if normalize:
        return FockVector.from_amplitudes(amps)
    return FockVector(amps)


# --- JSON state files --------------------------------------------------------


def _complex(value) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        return complex(float(re), float(im))
    raise StateSpecError(f"expected a complex number as [re, im], got {value!r}")


def _int(spec: dict, key: str) -> int:
    try:
        value = spec[key]
    except KeyError:
        raise StateSpecError(f"state spec of kind {spec.get('kind')!r} needs {key!r}") from None
    if isinstance(value, bool) or not isinstance(value, int):
        raise StateSpecError(f"{key!r} must be an integer, got {value!r}")
    return value


def parse_state(spec) -> State:
    """Build a state from its JSON-like description."""
    if not isinstance(spec, dict):
        raise StateSpecError("state spec must be a JSON object")
    kind = spec.get("kind")
    if kind == "fock":
        return fock_state(_int(spec, "n"), _int(spec, "N"))
    if kind == "coherent":
        if "alpha" not in spec:
            raise StateSpecError("coherent state spec needs 'alpha'")
        return coherent_state(_complex(spec["alpha"]), _int(spec, "N"))
    if kind == "superposition":
        coeffs = spec.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise StateSpecError("superposition spec needs a non-empty 'coeffs' list")
        return superposition([_complex(c) for c in coeffs], bool(spec.get("normalize", True)))
    if kind == "mixture":
        comps = spec.get("components")
        if not isinstance(comps, list):
            raise StateSpecError("mixture spec needs a 'components' list")
        pairs = []
        for item in comps:
            if not isinstance(item, dict) or "weight" not in item or "state" not in item:
                raise StateSpecError("mixture components are {'weight': w, 'state': {...}}")
            sub = parse_state(item["state"])
            if not isinstance(sub, FockVector):
                raise StateSpecError("nested mixtures are not supported")
            pairs.append((item["weight"], sub))
        return mixed(pairs)
    raise StateSpecError(f"unknown state kind {kind!r}")


def load_state(path) -> State:
    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateSpecError(f"{path}: malformed JSON ({exc})") from exc
    return parse_state(spec)


def state_to_spec(state: State) -> dict:
    """Inverse of :func:`parse_state` using explicit coefficients."""
    if isinstance(state, FockVector):
        return {
            "kind": "superposition",
            "coeffs": [[float(c.real), float(c.imag)] for c in state.coeffs],
            "normalize": False,
        }
    return {
        "kind": "mixture",
        "components": [{"weight": w, "state": state_to_spec(f)} for w, f in state.components],
    }
