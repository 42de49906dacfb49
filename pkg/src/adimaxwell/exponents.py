"""Edge-singularity exponents of the permittivity jump.

Three quantities are computed from the largest relative jump

    ratio = max (eps_l - eps_0)**2 / (eps_l * eps_0)

of the permittivity across an inclusion edge:

* ``kappa_ring`` in [0, 1/3), the root of
  ``4 sin^2(k pi) / (cos(3 k pi / 2) cos(k pi / 2)) = ratio``;
* ``kappa_bar`` in (2/3, 1], the root of
  ``-4 sin^2(k pi) / (sin(k pi / 2) sin(3 k pi / 2)) = ratio``;
* the eigenvalues ``kappa`` of the angular transmission problem
  ``psi'' = -kappa^2 psi`` on the four quadrants of the circle.

The first eigenvalue never exceeds ``kappa_ring`` and the second is at
least 1; solutions then lie in piecewise ``H^{2 - kappa}`` for every
``kappa > 1 - kappa_bar`` and the splitting scheme converges with order
``3/2 - theta`` for every ``theta > 0``, instead of the classical order 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import bisect

ORDER_CAP = 1.5
CLASSICAL_ORDER = 2.0
SCAN_STEP = 1e-3
ROOT_XTOL = 1e-13
# tolerance for the (provably sharp) ordering kappa_1 <= kappa_ring, 1 <= kappa_2
ORDERING_TOL = 1e-9

QUADRANT_STARTS = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)


class EigenvalueBracketError(RuntimeError):
    """Fewer eigenvalues than requested were found below the scan ceiling."""


def kappa_ring_function(k: float) -> float:
    """Left-hand side of the defining relation of ``kappa_ring``."""
    return 4.0 * math.sin(k * math.pi) ** 2 / (
        math.cos(1.5 * k * math.pi) * math.cos(0.5 * k * math.pi)
    )


def kappa_bar_function(k: float) -> float:
    """Left-hand side of the defining relation of ``kappa_bar``."""
    return -4.0 * math.sin(k * math.pi) ** 2 / (
        math.sin(0.5 * k * math.pi) * math.sin(1.5 * k * math.pi)
    )


def _check_ratio(ratio: float) -> float:
    ratio = float(ratio)
    if not ratio >= 0.0 or math.isinf(ratio):
        raise ValueError(f"jump ratio must be finite and >= 0, got {ratio}")
    return ratio


def _bisect_root(f, lo: float, hi: float) -> float:
    return bisect(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)


def solve_kappa_ring(ratio: float) -> float:
    """Root of the ``kappa_ring`` relation in [0, 1/3).

    The function increases from 0 at k=0 to +inf at k=1/3; the upper bracket
    is pushed towards 1/3 until it exceeds ``ratio``.
    """
    ratio = _check_ratio(ratio)
    if ratio == 0.0:
        return 0.0
    gap = 1e-3
    while kappa_ring_function(1.0 / 3.0 - gap) <= ratio:
        gap *= 0.5
        if gap < 1e-300:
            raise ValueError(f"cannot bracket kappa_ring for ratio={ratio}")
    return _bisect_root(lambda k: kappa_ring_function(k) - ratio, 0.0, 1.0 / 3.0 - gap)


def solve_kappa_bar(ratio: float) -> float:
    """Root of the ``kappa_bar`` relation in (2/3, 1]; 1 for ``ratio == 0``."""
    ratio = _check_ratio(ratio)
    if ratio == 0.0:
        return 1.0
    gap = 1e-3
    while kappa_bar_function(2.0 / 3.0 + gap) <= ratio:
        gap *= 0.5
        if gap < 1e-300:
            raise ValueError(f"cannot bracket kappa_bar for ratio={ratio}")
    return _bisect_root(lambda k: kappa_bar_function(k) - ratio, 2.0 / 3.0 + gap, 1.0)


@dataclass(frozen=True)
class QuarterCircleConfig:
    """Permittivity on the quadrants (0, pi/2), (pi/2, pi), (pi, 3pi/2), (3pi/2, 2pi)."""

    eps: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        eps = tuple(float(v) for v in self.eps)
        if len(eps) != 4 or not all(v > 0.0 for v in eps):
            raise ValueError(f"need four positive permittivities, got {self.eps}")
        object.__setattr__(self, "eps", eps)

    @property
    def strong_discontinuity(self) -> bool:
        e1, e2, e3, e4 = self.eps
        return e1 == e2 == e3 != e4


def _basis(kappa: NDArray, s: float) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """``cos(k s)``, ``sin(k s)/k`` and their s-derivatives (finite at k = 0)."""
    ks = kappa * s
    c = np.cos(ks)
    sinc = s * np.sinc(ks / math.pi)
    return c, sinc, -kappa * np.sin(ks), np.cos(ks)


def transmission_matrices(config: QuarterCircleConfig, kappa) -> NDArray:
    """Stack of 8x8 matrices whose null vectors are the eigenfunctions.

    On quadrant i, ``psi_i(phi) = a_i cos(k (phi - phi_i)) + b_i sin(k (phi - phi_i)) / k``
    with ``phi_i`` the quadrant start; the unknown vector is
    ``(a_1, b_1, ..., a_4, b_4)``.  Rows, in order:

    1. ``eps_1 psi_1(0) = eps_4 psi_4(2 pi)``
    2. ``psi_1'(0) = psi_4'(2 pi)``
    3-4. value and derivative continuity at pi/2 (quadrants 1, 2)
    5-6. value and derivative continuity at pi (quadrants 2, 3)
    7. ``psi_3(3 pi/2) = psi_4(3 pi/2)``
    8. ``eps_1 psi_3'(3 pi/2) = eps_4 psi_4'(3 pi/2)``
    """
    e1, _, _, e4 = config.eps
    k = np.atleast_1d(np.asarray(kappa, dtype=float))
    mat = np.zeros((k.size, 8, 8))
    q = math.pi / 2
    # each quadrant starts at its own origin, so values at the start are (1, 0)
    c0, s0, dc0, ds0 = _basis(k, 0.0)
    cq, sq, dcq, dsq = _basis(k, q)

    def put(row, quad, at_end, weight_val, weight_der, deriv):
        c, s, dc, ds = (cq, sq, dcq, dsq) if at_end else (c0, s0, dc0, ds0)
        if deriv:
            mat[:, row, 2 * quad] += weight_der * dc
            mat[:, row, 2 * quad + 1] += weight_der * ds
        else:
            mat[:, row, 2 * quad] += weight_val * c
            mat[:, row, 2 * quad + 1] += weight_val * s

    # junction 0 / 2pi: start of quadrant 1, end of quadrant 4
    put(0, 0, False, e1, 0.0, False)
    put(0, 3, True, -e4, 0.0, False)
    put(1, 0, False, 0.0, 1.0, True)
    put(1, 3, True, 0.0, -1.0, True)
    # pi/2 and pi: plain continuity
    for row, left in ((2, 0), (4, 1)):
        put(row, left, True, 1.0, 0.0, False)
        put(row, left + 1, False, -1.0, 0.0, False)
        put(row + 1, left, True, 0.0, 1.0, True)
        put(row + 1, left + 1, False, 0.0, -1.0, True)
    # 3pi/2: value continuity, eps-weighted derivative
    put(6, 2, True, 1.0, 0.0, False)
    put(6, 3, False, -1.0, 0.0, False)
    put(7, 2, True, 0.0, e1, True)
    put(7, 3, False, 0.0, -e4, True)
    return mat


def determinant(config: QuarterCircleConfig, kappa) -> NDArray:
    return np.linalg.det(transmission_matrices(config, kappa))


def _singular_values(config: QuarterCircleConfig, kappa: float) -> NDArray:
    return np.linalg.svd(transmission_matrices(config, kappa)[0], compute_uv=False)


def _nullity(config: QuarterCircleConfig, kappa: float, rtol: float = 1e-7) -> int:
    sv = _singular_values(config, kappa)
    return max(1, int(np.sum(sv <= rtol * sv[0])))


def _golden_minimum(f, lo: float, hi: float, xtol: float = 1e-15) -> tuple[float, float]:
    """Golden-section search; robust on the V-shaped smallest singular value."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol * max(1.0, abs(a)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
        if b - a < 1e-300 or c >= d:
            break
    k = 0.5 * (a + b)
    return k, f(k)


def _roots_on_grid(config: QuarterCircleConfig, upper: float, step: float) -> list[tuple[float, int]]:
    grid = np.arange(0.0, upper + 0.5 * step, step)
    d = determinant(config, grid)
    sv_scale = _singular_values(config, 1.0)[0]
    roots: list[tuple[float, int]] = []

    def det_scalar(k: float) -> float:
        return float(determinant(config, k)[0])

    for i in range(len(grid) - 1):
        if d[i] * d[i + 1] < 0.0:
            r = bisect(det_scalar, grid[i], grid[i + 1], xtol=ROOT_XTOL, maxiter=500)
            roots.append((r, _nullity(config, r)))
    absd = np.abs(d)
    for i in range(1, len(grid) - 1):
        if not (absd[i] <= absd[i - 1] and absd[i] <= absd[i + 1]):
            continue
        if d[i - 1] * d[i] < 0.0 or d[i] * d[i + 1] < 0.0:
            continue
        k_min, s_min = _golden_minimum(
            lambda k: _singular_values(config, k)[-1], grid[i - 1], grid[i + 1]
        )
        if s_min <= 1e-10 * sv_scale:
            roots.append((float(k_min), _nullity(config, k_min)))
    roots = [(r, m) for r, m in roots if r > 1e-9]
    roots.sort()
    merged: list[tuple[float, int]] = []
    for r, m in roots:
        if merged and abs(r - merged[-1][0]) < 1e-6:
            continue
        merged.append((r, m))
    return merged


def eigenvalues_quarter_circle(
    config: QuarterCircleConfig,
    k_max: int = 2,
    kappa_ceiling: float = 50.0,
    step: float = SCAN_STEP,
) -> list[float]:
    """First ``k_max`` positive eigenvalues ``kappa`` (ascending, with multiplicity).

    Roots of the transmission determinant are located by a sign scan with
    spacing ``step`` and refined by bisection; roots of even multiplicity,
    where the determinant touches zero without changing sign, are found as
    local minima of ``|det|`` refined on the smallest singular value.  The
    multiplicity is the numerical nullity of the matrix at the root.

    Raises
    ------
    EigenvalueBracketError
        If fewer than ``k_max`` eigenvalues exist below ``kappa_ceiling``.
    """
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    upper = min(kappa_ceiling, 0.5 * k_max + 2.0)
    while True:
        roots = _roots_on_grid(config, upper, step)
        values = [r for r, m in roots for _ in range(m)]
        if len(values) >= k_max:
            return values[:k_max]
        if upper >= kappa_ceiling:
            raise EigenvalueBracketError(
                f"found {len(values)} eigenvalues below kappa={kappa_ceiling}, wanted {k_max}"
            )
        upper = min(kappa_ceiling, 2.0 * upper)


def eigenfunctions(config: QuarterCircleConfig, kappa: float, rtol: float = 1e-7) -> NDArray:
    """Coefficient vectors ``(a_1, b_1, ..., a_4, b_4)`` spanning the null space at ``kappa``."""
    _, sv, vt = np.linalg.svd(transmission_matrices(config, kappa)[0])
    n = max(1, int(np.sum(sv <= rtol * sv[0])))
    return vt[-n:]


def evaluate_eigenfunction(coeffs, kappa: float, phi) -> tuple[NDArray, NDArray]:
    """``psi(phi)`` and ``psi'(phi)`` for ``phi`` in [0, 2 pi] (quadrant by floor)."""
    phi = np.asarray(phi, dtype=float)
    quad = np.clip((phi // (math.pi / 2)).astype(int), 0, 3)
    s = phi - np.asarray(QUADRANT_STARTS)[quad]
    a = np.asarray(coeffs)[2 * quad]
    b = np.asarray(coeffs)[2 * quad + 1]
    ks = kappa * s
    val = a * np.cos(ks) + b * s * np.sinc(ks / math.pi)
    der = -a * kappa * np.sin(ks) + b * np.cos(ks)
    return val, der


@dataclass(frozen=True)
class ExponentReport:
    ratio: float
    kappa_ring: float
    kappa_bar: float
    kappa_1: float
    kappa_2: float
    predicted_regularity: float
    predicted_order_cap: float = ORDER_CAP
    eps_config: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    outside_assumptions: bool = False
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0.0 <= self.kappa_ring < 1.0 / 3.0:
            raise ValueError(f"kappa_ring={self.kappa_ring} outside [0, 1/3)")
        if not 2.0 / 3.0 < self.kappa_bar <= 1.0:
            raise ValueError(f"kappa_bar={self.kappa_bar} outside (2/3, 1]")
        if self.ratio > 0.0 and not (
            self.kappa_1 <= self.kappa_ring + ORDERING_TOL
            and self.kappa_ring < 1.0 <= self.kappa_2 + ORDERING_TOL
        ):
            raise ValueError(
                f"eigenvalue ordering violated: kappa_1={self.kappa_1}, "
                f"kappa_ring={self.kappa_ring}, kappa_2={self.kappa_2}"
            )

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("ratio", self.ratio),
            ("kappa_ring", self.kappa_ring),
            ("kappa_bar", self.kappa_bar),
            ("kappa_1", self.kappa_1),
            ("kappa_2", self.kappa_2),
            ("predicted_regularity", self.predicted_regularity),
            ("predicted_order_cap", self.predicted_order_cap),
        ]


def exponents_for_pair(eps_background: float, eps_inclusion: float) -> ExponentReport:
    """Report for a single background / inclusion permittivity pair."""
    ratio = (eps_inclusion - eps_background) ** 2 / (eps_inclusion * eps_background)
    config = QuarterCircleConfig((eps_background,) * 3 + (eps_inclusion,))
    k_ring = solve_kappa_ring(ratio)
    k_bar = solve_kappa_bar(ratio)
    k1, k2 = eigenvalues_quarter_circle(config, 2)
    notes = []
    outside = not config.strong_discontinuity
    if outside:
        notes.append(
            "uniform permittivity: no edge singularity, the classical order 2 applies; "
            "kappa_bar = 1 is the limit value"
        )
    return ExponentReport(
        ratio=ratio,
        kappa_ring=k_ring,
        kappa_bar=k_bar,
        kappa_1=k1,
        kappa_2=k2,
        predicted_regularity=2.0 - (1.0 - k_bar + 1e-6),
        eps_config=config.eps,
        outside_assumptions=outside,
        notes=tuple(notes),
    )


def report(material) -> ExponentReport:
    """Exponent report for the worst permittivity jump of a material map."""
    from .materials import worst_jump

    _, e0, el = worst_jump(material)
    return exponents_for_pair(e0, el)
