"""Discrete splitting operators A and B on the Yee grid.

The curl is split as ``curl = C1 - C2`` with

    C1 H = (d2 H3, d3 H1, d1 H2),    C2 E = (d3 E2, d1 E3, d2 E1),

and the Maxwell operator ``M = A + B`` with

    A (E, H) = ( (1/eps) C1 H,  (1/mu) C2 E),
    B (E, H) = (-(1/eps) C2 H, -(1/mu) C1 E).

Each operator decouples into three independent (E_j, H_k) pairs that only
differentiate along a single axis:

    A:  (E1, H3) along x2,  (E2, H1) along x3,  (E3, H2) along x1   (sign +)
    B:  (E1, H2) along x3,  (E2, H3) along x1,  (E3, H1) along x2   (sign -)

Within a pair, with ``s`` the sign, ``E' = s (1/eps) D H`` and
``H' = s (1/mu) D* E``, where ``D`` differences the half-point H values onto
the integer-point E positions and ``D*`` differences E onto the H positions.
``D*`` is exactly ``-D^T`` once the boundary E entries are pinned to zero, so
each pair is skew-adjoint in the (eps, mu)-weighted inner product.

Row structure at the boundary: E rows at index 0 and n along the pairing
axis are tangential and produce zero output; the full E lines lying on a
boundary face normal to the third axis are pinned as well.  The H rows read
only E values, with all pinned entries taken as zero, so no stencil reaches
outside the cuboid.

The implicit solve ``(I - c L) w = r`` (``c = tau/2``) eliminates H from each
pair, ``H = r_H + c s (1/mu) D* E``, which leaves per line

    E_m - c^2 (1/eps_m) [ (E_{m+1} - E_m)/mu_{m+1/2} - (E_m - E_{m-1})/mu_{m-1/2} ] / h^2
        = r_E,m + c s (1/eps_m) (r_H,m+1/2 - r_H,m-1/2) / h

with Dirichlet ends ``E_0 = E_n = 0``.  The diagonal is ``1 + (positive)``,
so the Thomas algorithm runs without pivoting.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .grid import COMPONENTS, E_COMPONENTS, FieldState, GridError, YeeGrid, check_same_grid
from .materials import MaterialMap
from .tridiag import ThomasFactors, thomas_factor, thomas_substitute

# (E component, H component, differentiation axis, sign)
PAIRS: dict[str, tuple[tuple[str, str, int, int], ...]] = {
    "A": (("e1", "h3", 1, 1), ("e2", "h1", 2, 1), ("e3", "h2", 0, 1)),
    "B": (("e1", "h2", 2, -1), ("e2", "h3", 0, -1), ("e3", "h1", 1, -1)),
}
SPLIT_OPERATORS = tuple(PAIRS)


def _check_op(op: str) -> None:
    if op not in PAIRS:
        raise ValueError(f"split operator must be 'A' or 'B', got {op!r}")


def _check_state(state: FieldState, material: MaterialMap) -> None:
    if state.grid != material.grid:
        raise GridError("field state and material map live on different grids")


def _free_mask(grid: YeeGrid, component: str, cache: dict) -> NDArray[np.float64]:
    key = ("free", component)
    if key not in cache:
        cache[key] = (~grid.pec_mask(component)).astype(float)
    return cache[key]


def _sl(axis: int, s: slice) -> tuple:
    out = [slice(None)] * 3
    out[axis] = s
    return tuple(out)


def diff_to_nodes(h: NDArray, axis: int, step: float) -> NDArray:
    """Difference half-point values onto integer points; both end rows are zero."""
    shape = list(h.shape)
    shape[axis] += 1
    out = np.zeros(shape)
    out[_sl(axis, slice(1, -1))] = np.diff(h, axis=axis) / step
    return out


def diff_to_halves(e: NDArray, axis: int, step: float) -> NDArray:
    """Difference integer-point values onto the half points between them."""
    return np.diff(e, axis=axis) / step


def apply_split(op: str, state: FieldState, material: MaterialMap) -> FieldState:
    """Return ``L state`` for ``L`` = A or B."""
    _check_op(op)
    _check_state(state, material)
    grid = state.grid
    cache = material._cache
    out: dict[str, NDArray] = {}
    for ec, hc, axis, sign in PAIRS[op]:
        step = grid.h[axis]
        free = _free_mask(grid, ec, cache)
        e = state[ec] * free
        out[ec] = sign * material.inv_eps_at[ec] * diff_to_nodes(state[hc], axis, step) * free
        out[hc] = sign * material.inv_mu_at[hc] * diff_to_halves(e, axis, step)
    return FieldState(grid, *(out[c] for c in COMPONENTS), time=state.time)


def curl_h(grid: YeeGrid, h1, h2, h3) -> tuple[NDArray, NDArray, NDArray]:
    """Discrete curl of a magnetic-type field, evaluated at the E points."""
    hx, hy, hz = grid.h
    c1 = diff_to_nodes(h3, 1, hy) - diff_to_nodes(h2, 2, hz)
    c2 = diff_to_nodes(h1, 2, hz) - diff_to_nodes(h3, 0, hx)
    c3 = diff_to_nodes(h2, 0, hx) - diff_to_nodes(h1, 1, hy)
    return c1, c2, c3


def curl_e(grid: YeeGrid, e1, e2, e3) -> tuple[NDArray, NDArray, NDArray]:
    """Discrete curl of an electric-type field, evaluated at the H points."""
    hx, hy, hz = grid.h
    c1 = diff_to_halves(e3, 1, hy) - diff_to_halves(e2, 2, hz)
    c2 = diff_to_halves(e1, 2, hz) - diff_to_halves(e3, 0, hx)
    c3 = diff_to_halves(e2, 0, hx) - diff_to_halves(e1, 1, hy)
    return c1, c2, c3


def apply_maxwell(state: FieldState, material: MaterialMap) -> FieldState:
    """``M state = ((1/eps) curl H, -(1/mu) curl E)`` assembled from the full curl."""
    _check_state(state, material)
    grid = state.grid
    cache = material._cache
    e = [state[c] * _free_mask(grid, c, cache) for c in E_COMPONENTS]
    ce = curl_e(grid, *e)
    ch = curl_h(grid, state.h1, state.h2, state.h3)
    e_out = [
        material.inv_eps_at[c] * v * _free_mask(grid, c, cache) for c, v in zip(E_COMPONENTS, ch)
    ]
    h_out = [-material.inv_mu_at[c] * v for c, v in zip(("h1", "h2", "h3"), ce)]
    return FieldState(grid, *e_out, *h_out, time=state.time)


def _pair_factors(
    material: MaterialMap, ec: str, hc: str, axis: int, coef: float
) -> ThomasFactors:
    """Thomas factors of the reduced E system for one pair, ``coef = c**2``."""
    key = ("tri", ec, hc, axis, coef)
    cached = material._cache.get(key)
    if cached is not None:
        return cached
    step = material.grid.h[axis]
    inv_eps = np.moveaxis(material.inv_eps_at[ec], axis, 0)[1:-1]
    inv_mu = np.moveaxis(material.inv_mu_at[hc], axis, 0)
    w = coef / step**2 * inv_eps
    lower = -w * inv_mu[:-1]
    upper = -w * inv_mu[1:]
    diag = 1.0 - lower - upper
    if not np.all(diag >= 1.0):
        raise AssertionError("reduced resolvent system lost its unit diagonal bound")
    factors = thomas_factor(lower, diag, upper)
    material._cache[key] = factors
    return factors


def resolve(op: str, half_step: float, rhs: FieldState, material: MaterialMap) -> FieldState:
    """Solve ``(I - half_step * L) w = rhs`` for any real ``half_step``.

    :func:`solve_implicit` is the public, positive-step entry point; the
    stepper calls this directly to run the scheme backwards in time.
    """
    _check_op(op)
    _check_state(rhs, material)
    grid = rhs.grid
    cache = material._cache
    out: dict[str, NDArray] = {}
    for ec, hc, axis, sign in PAIRS[op]:
        step = grid.h[axis]
        c = sign * half_step
        factors = _pair_factors(material, ec, hc, axis, half_step * half_step)
        inv_eps = np.moveaxis(material.inv_eps_at[ec], axis, 0)[1:-1]
        r_e = np.moveaxis(rhs[ec], axis, 0)[1:-1]
        r_h = np.moveaxis(rhs[hc], axis, 0)
        line_rhs = r_e + (c / step) * inv_eps * (r_h[1:] - r_h[:-1])
        e = np.zeros(grid.shape(ec))
        e_lines = np.moveaxis(e, axis, 0)
        e_lines[1:-1] = thomas_substitute(factors, line_rhs, out=line_rhs)
        e *= _free_mask(grid, ec, cache)
        out[ec] = e
        out[hc] = rhs[hc] + c * material.inv_mu_at[hc] * diff_to_halves(e, axis, step)
    return FieldState(grid, *(out[k] for k in COMPONENTS), time=rhs.time)


def solve_implicit(op: str, tau: float, rhs: FieldState, material: MaterialMap) -> FieldState:
    """Return ``w`` with ``(I - (tau/2) L) w = rhs`` for ``L`` = A or B.

    ``rhs`` must respect the boundary condition (tangential E zero); the
    returned state does.
    """
    if not (np.isfinite(tau) and tau > 0.0):
        raise ValueError(f"tau must be positive, got {tau}")
    return resolve(op, 0.5 * tau, rhs, material)


def apply_shifted(op: str, half_step: float, state: FieldState, material: MaterialMap) -> FieldState:
    """Return ``(I + half_step * L) state``."""
    return state.linear_combination(1.0, apply_split(op, state, material), half_step)


def weighted_dot(a: FieldState, b: FieldState, material: MaterialMap) -> float:
    """Inner product with weight eps on E and mu on H, times the cell volume."""
    check_same_grid(a, b)
    _check_state(a, material)
    total = 0.0
    for c in COMPONENTS:
        total += float(np.sum(material.weight(c) * (a[c] * b[c])))
    return total * a.grid.cell_volume


def weighted_norm(a: FieldState, material: MaterialMap) -> float:
    return float(np.sqrt(weighted_dot(a, a, material)))
