import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nxent.entropy import (
    TailControlError,
    alpha_log,
    auto_grid,
    envelope,
    norm_functional_continuous,
    renyi_continuous,
    renyi_discrete,
    tsallis_continuous,
    tsallis_discrete,
)
from nxent.states import fock_state, random_state
from nxent.transform import PhaseGrid, density, transform_basis

LN_2PI = math.log(2 * math.pi)

dists = arrays(np.float64, st.integers(2, 12), elements=st.floats(0, 1)).filter(
    lambda p: p.sum() > 1e-3).map(lambda p: p / p.sum())
orders = st.floats(0.05, 20).filter(lambda a: abs(a - 1) > 1e-9)


def gaussian_power_integral(alpha):
    """int int w^alpha for the isotropic Gaussian w = exp(-r^2/2)/(2 pi)."""
    return (2 * math.pi) ** (1 - alpha) / alpha


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.0, 7.5])
def test_deterministic_distribution_has_zero_entropy(alpha):
    s = [0, 1, 0, 0]
    assert renyi_discrete(s, alpha) == 0.0
    assert tsallis_discrete(s, alpha) == 0.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.3])
def test_uniform_renyi(alpha):
    assert renyi_discrete([0.25] * 4, alpha) == pytest.approx(math.log(4), abs=1e-14)


def test_two_point_values():
    assert renyi_discrete([0.5, 0.5], 2) == pytest.approx(-math.log(0.5), abs=1e-15)
    assert tsallis_discrete([0.5, 0.5], 2) == pytest.approx(0.5, abs=1e-15)


def test_bad_orders_rejected():
    for bad in (0, -1, float("nan")):
        with pytest.raises(ValueError):
            renyi_discrete([1.0], bad)
        with pytest.raises(ValueError):
            tsallis_discrete([1.0], bad)
    with pytest.raises(ValueError):
        alpha_log(0.0, 2)
    assert alpha_log(1e-300, 4.0) == -math.inf


def test_alpha_log():
    assert alpha_log(1.0, 1) == 0.0
    assert alpha_log(2 * math.pi, 1) == pytest.approx(LN_2PI)
    assert alpha_log(2 * math.pi, 2) == pytest.approx(1 - 1 / (2 * math.pi), abs=1e-15)
    assert abs(alpha_log(2 * math.pi, 2) - 0.840845) < 1e-6
    for a in (0.3, 2.0, 9.0):
        assert alpha_log(1.0, a) == 0.0


@settings(max_examples=100, deadline=None)
@given(p=dists, a=orders, b=orders)
def test_renyi_non_increasing_in_order(p, a, b):
    lo, hi = min(a, b), max(a, b)
    assert renyi_discrete(p, hi) <= renyi_discrete(p, lo) + 1e-9


@settings(max_examples=100, deadline=None)
@given(p=dists, a=orders)
def test_entropies_non_negative_and_tsallis_identity(p, a):
    assert renyi_discrete(p, a) >= -1e-12
    assert tsallis_discrete(p, a) >= -1e-12
    # p^a ln_a p = (p - p^a) / (1 - a), finite even where ln_a p alone overflows
    nz = p[p > 0]
    direct = -np.sum((nz - nz**a) / (1 - a))
    assert tsallis_discrete(p, a) == pytest.approx(direct, rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(p=dists)
def test_shannon_limit_continuity(p):
    h1 = renyi_discrete(p, 1.0)
    assert h1 == pytest.approx(tsallis_discrete(p, 1.0))
    for a in (1 - 1e-5, 1 + 1e-5):
        assert abs(renyi_discrete(p, a) - h1) <= 1e-4
        assert abs(tsallis_discrete(p, a) - h1) <= 1e-4
    # both agree to first order, the gap is about |alpha - 1| H^2 / 2
    for a in (1 - 1e-6, 1 + 1e-6):
        assert abs(renyi_discrete(p, a) - tsallis_discrete(p, a)) < 1e-6 * (1 + h1 * h1)


def test_large_order_does_not_underflow():
    p = np.full(1000, 1e-3)
    assert renyi_discrete(p, 200.0) == pytest.approx(math.log(1000), rel=1e-12)


def test_continuous_normalization(vacuum_density):
    assert norm_functional_continuous(vacuum_density, 1.0) == pytest.approx(1.0, abs=2e-6)


def test_vacuum_two_norm(vacuum_density):
    want = math.sqrt(gaussian_power_integral(2.0))
    assert want == pytest.approx((4 * math.pi) ** -0.5)
    assert norm_functional_continuous(vacuum_density, 2.0) == pytest.approx(want, abs=1e-10)


def test_vacuum_half_norm():
    w = density(fock_state(0, 0), 0, auto_grid(0, 0, [0.5]))
    want = gaussian_power_integral(0.5) ** 2
    assert want == pytest.approx(8 * math.pi)
    assert norm_functional_continuous(w, 0.5) == pytest.approx(want, rel=1e-9)


def test_vacuum_continuous_entropies(vacuum_density):
    assert renyi_continuous(vacuum_density, 2) == pytest.approx(LN_2PI + math.log(2), abs=1e-9)
    assert abs(LN_2PI + math.log(2) - 2.5310) < 1e-4
    assert renyi_continuous(vacuum_density, 1) == pytest.approx(LN_2PI + 1, abs=1e-9)
    assert tsallis_continuous(vacuum_density, 2) == pytest.approx(1 - 1 / (4 * math.pi), abs=1e-9)
    for a in (1.5, 3.0, 10.0, 0.7):
        w = vacuum_density if a > 1 else density(fock_state(0, 0), 0, auto_grid(0, 0, [a]))
        want = math.log(gaussian_power_integral(a)) / (1 - a)
        assert renyi_continuous(w, a) == pytest.approx(want, abs=1e-9)


def test_continuous_shannon_continuity(vacuum_density):
    h1 = renyi_continuous(vacuum_density, 1.0)
    for a in (1 - 1e-5, 1 + 1e-5):
        assert abs(renyi_continuous(vacuum_density, a) - h1) <= 1e-4
        assert abs(tsallis_continuous(vacuum_density, a) - h1) <= 1e-4


def test_tail_control(vacuum_density):
    with pytest.raises(TailControlError, match="extent of at least"):
        norm_functional_continuous(vacuum_density, 0.5)
    narrow = density(fock_state(0, 0), 0, PhaseGrid.square(5.0, 128), strict=False)
    with pytest.raises(TailControlError):
        renyi_continuous(narrow, 0.8)
    assert auto_grid(0, 0, [0.5]).xi_max > vacuum_density.grid.xi_max


@pytest.mark.parametrize("n0", [0, 1, 2])
def test_envelope_is_sum_of_kernel_moduli(n0):
    rng = np.random.default_rng(n0)
    for xi, k in rng.uniform(-6, 6, size=(5, 2)):
        direct = sum(abs(transform_basis(n, n0, xi, k)) ** 2 for n in range(6))
        assert envelope(0.5 * (xi * xi + k * k), 5, n0) == pytest.approx(direct, rel=1e-8, abs=1e-300)


@pytest.mark.parametrize("seed", range(3))
def test_continuous_renyi_above_ln_2pi(seed):
    w = density(random_state(seed, 8), seed, auto_grid(8, seed, [0.6]))
    assert w.w.max() <= 1 / (2 * math.pi) + 1e-9
    for a in (0.6, 1.0, 2.0, 5.0):
        assert renyi_continuous(w, a) >= LN_2PI - 1e-6
