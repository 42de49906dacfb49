import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adimaxwell.exponents import (
    CLASSICAL_ORDER,
    ORDER_CAP,
    ORDERING_TOL,
    EigenvalueBracketError,
    ExponentReport,
    QuarterCircleConfig,
    eigenfunctions,
    eigenvalues_quarter_circle,
    exponents_for_pair,
    kappa_bar_function,
    kappa_ring_function,
    report,
    solve_kappa_bar,
    solve_kappa_ring,
)
from adimaxwell.materials import uniform_map

# regression constants produced by the plain-bisection oracle below
KAPPA_RING_JUMP = 0.2736035372462675
KAPPA_BAR_JUMP = 0.7263964627537319
EIGS_JUMP = [0.2736035372462675, 1.0, 1.0, 1.7263964627537319, 2.2736035372462681]


def _plain_bisection(f, lo, hi, width=1e-15):
    flo = f(lo)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _ring_lhs(k):
    return 4 * np.sin(k * np.pi) ** 2 / (np.cos(1.5 * k * np.pi) * np.cos(0.5 * k * np.pi))


def _bar_lhs(k):
    return -4 * np.sin(k * np.pi) ** 2 / (np.sin(0.5 * k * np.pi) * np.sin(1.5 * k * np.pi))


def test_oracle_reproduces_pinned_constants():
    r = 100 / 11
    ring = _plain_bisection(lambda k: _ring_lhs(k) - r, 1e-9, 1 / 3 - 1e-9)
    bar = _plain_bisection(lambda k: _bar_lhs(k) - r, 2 / 3 + 1e-9, 1.0)
    assert ring == pytest.approx(KAPPA_RING_JUMP, abs=1e-12)
    assert bar == pytest.approx(KAPPA_BAR_JUMP, abs=1e-12)


def test_jump_layout_constants():
    assert solve_kappa_ring(100 / 11) == pytest.approx(KAPPA_RING_JUMP, abs=1e-12)
    assert solve_kappa_bar(100 / 11) == pytest.approx(KAPPA_BAR_JUMP, abs=1e-12)


def test_zero_ratio_limits():
    assert solve_kappa_ring(0.0) == 0.0
    assert solve_kappa_bar(0.0) == 1.0


@pytest.mark.parametrize("solver", [solve_kappa_ring, solve_kappa_bar])
@pytest.mark.parametrize("ratio", [-1e-3, -5.0, math.nan, math.inf])
def test_rejects_bad_ratio(solver, ratio):
    with pytest.raises(ValueError):
        solver(ratio)


@pytest.mark.parametrize("k", [0.25, 0.01, 0.3, 0.33])
def test_ring_round_trip(k):
    assert solve_kappa_ring(kappa_ring_function(k)) == pytest.approx(k, abs=1e-10)


@pytest.mark.parametrize("k", [0.8, 0.7, 0.95, 0.999])
def test_bar_round_trip(k):
    assert solve_kappa_bar(kappa_bar_function(k)) == pytest.approx(k, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(ratio=st.floats(1e-6, 1e4))
def test_defining_equation_residuals(ratio):
    ring = solve_kappa_ring(ratio)
    bar = solve_kappa_bar(ratio)
    assert 0.0 <= ring < 1 / 3 and 2 / 3 < bar <= 1.0
    assert abs(kappa_ring_function(ring) - ratio) <= 1e-10 * ratio
    assert abs(kappa_bar_function(bar) - ratio) <= 1e-10 * ratio


def test_monotone_in_ratio():
    ratios = np.geomspace(1e-4, 1e3, 50)
    ring = [solve_kappa_ring(r) for r in ratios]
    bar = [solve_kappa_bar(r) for r in ratios]
    assert all(a <= b for a, b in zip(ring, ring[1:]))
    assert all(a >= b for a, b in zip(bar, bar[1:]))


def test_uniform_eigenvalues_are_integers():
    vals = eigenvalues_quarter_circle(QuarterCircleConfig((2.0, 2.0, 2.0, 2.0)), 8)
    assert vals == pytest.approx([1, 1, 2, 2, 3, 3, 4, 4], abs=1e-8)


def test_jump_layout_eigenvalues_pinned():
    vals = eigenvalues_quarter_circle(QuarterCircleConfig((0.1, 0.1, 0.1, 1.1)), 5)
    assert vals == pytest.approx(EIGS_JUMP, abs=1e-9)


def _psi(coeffs, kappa, quad, phi):
    """Quadrant-local cosine/sine representation, evaluated on the closed quadrant."""
    start = quad * math.pi / 2
    a, b = coeffs[2 * quad], coeffs[2 * quad + 1]
    s = phi - start
    val = a * math.cos(kappa * s) + b * math.sin(kappa * s) / kappa
    der = -a * kappa * math.sin(kappa * s) + b * math.cos(kappa * s)
    return val, der


def _conditions(eps, coeffs, kappa):
    e1, e4 = eps[0], eps[3]
    p = math.pi
    v1_0, d1_0 = _psi(coeffs, kappa, 0, 0.0)
    v4_2p, d4_2p = _psi(coeffs, kappa, 3, 2 * p)
    v1_h, d1_h = _psi(coeffs, kappa, 0, p / 2)
    v2_h, d2_h = _psi(coeffs, kappa, 1, p / 2)
    v2_p, d2_p = _psi(coeffs, kappa, 1, p)
    v3_p, d3_p = _psi(coeffs, kappa, 2, p)
    v3_t, d3_t = _psi(coeffs, kappa, 2, 1.5 * p)
    v4_t, d4_t = _psi(coeffs, kappa, 3, 1.5 * p)
    return np.array([
        e1 * v1_0 - e4 * v4_2p, d1_0 - d4_2p,
        v1_h - v2_h, d1_h - d2_h,
        v2_p - v3_p, d2_p - d3_p,
        v3_t - v4_t, e1 * d3_t - e4 * d4_t,
    ])


@pytest.mark.parametrize("eps", [(0.1, 0.1, 0.1, 1.1), (1.0, 1.0, 1.0, 1.0), (3.0, 3.0, 3.0, 0.2)])
def test_eigenfunctions_satisfy_conditions(eps):
    config = QuarterCircleConfig(eps)
    for kappa in eigenvalues_quarter_circle(config, 4):
        vecs = eigenfunctions(config, kappa)
        for v in vecs:
            v = v / np.max(np.abs(v))
            assert np.max(np.abs(_conditions(eps, v, kappa))) <= 1e-8


def test_double_root_has_two_eigenfunctions():
    vecs = eigenfunctions(QuarterCircleConfig((0.1, 0.1, 0.1, 1.1)), 1.0)
    assert vecs.shape[0] == 2


@pytest.mark.parametrize("eps", [(0.1, 0.1, 0.1, 1.1), (1.0, 1.0, 1.0, 4.0), (1.0, 2.0, 3.0, 4.0)])
def test_root_count_stable_under_step_halving(eps):
    config = QuarterCircleConfig(eps)
    coarse = eigenvalues_quarter_circle(config, 12, step=1e-3)
    fine = eigenvalues_quarter_circle(config, 12, step=5e-4)
    below = lambda vals: [v for v in vals if v < 5.0]  # noqa: E731
    assert len(below(coarse)) == len(below(fine))
    assert below(coarse) == pytest.approx(below(fine), abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_eigenvalue_ordering_random_pairs(seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        e0, el = rng.uniform(0.05, 5.0, 2)
        rep = exponents_for_pair(e0, el)
        assert rep.kappa_1 <= rep.kappa_ring + ORDERING_TOL
        assert rep.kappa_ring < 1.0 <= rep.kappa_2 + ORDERING_TOL


def test_k_max_guard_and_ceiling():
    cfg = QuarterCircleConfig((1.0, 1.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        eigenvalues_quarter_circle(cfg, 1)
    with pytest.raises(EigenvalueBracketError):
        eigenvalues_quarter_circle(cfg, 20, kappa_ceiling=3.0)


def test_config_validation():
    with pytest.raises(ValueError):
        QuarterCircleConfig((1.0, 1.0, -1.0, 1.0))
    assert QuarterCircleConfig((1, 1, 1, 2)).strong_discontinuity
    assert not QuarterCircleConfig((1, 1, 1, 1)).strong_discontinuity


def test_report_jump_layout(jump_map8):
    rep = report(jump_map8)
    assert rep.ratio == pytest.approx(100 / 11, rel=1e-14)
    assert rep.kappa_ring == pytest.approx(KAPPA_RING_JUMP, abs=1e-12)
    assert rep.kappa_bar == pytest.approx(KAPPA_BAR_JUMP, abs=1e-12)
    assert (rep.kappa_1, rep.kappa_2) == pytest.approx(EIGS_JUMP[:2], abs=1e-9)
    assert rep.predicted_regularity == pytest.approx(1 + KAPPA_BAR_JUMP - 1e-6, abs=1e-12)
    assert rep.predicted_order_cap == ORDER_CAP == 1.5
    assert rep.eps_config == (0.1, 0.1, 0.1, 1.1)
    assert not rep.outside_assumptions


def test_report_uniform(grid8):
    rep = report(uniform_map(grid8, epsilon=2.0))
    assert rep.ratio == 0.0 and rep.kappa_ring == 0.0 and rep.kappa_bar == 1.0
    assert rep.predicted_regularity == pytest.approx(2.0, abs=1e-5)
    assert rep.predicted_order_cap == 1.5
    assert rep.outside_assumptions
    assert any("classical order 2" in n for n in rep.notes)
    assert CLASSICAL_ORDER == 2.0


def test_report_invariants_enforced():
    with pytest.raises(ValueError):
        ExponentReport(1.0, 0.4, 0.8, 0.1, 1.0, 1.8)
    with pytest.raises(ValueError):
        ExponentReport(1.0, 0.2, 0.8, 0.3, 1.0, 1.8)
