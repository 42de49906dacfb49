"""Energies, discrete divergences, charge-law residuals and error norms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .grid import COMPONENTS, E_COMPONENTS, FieldState, YeeGrid, check_same_grid
from .materials import MaterialMap
from .operators import apply_shifted, weighted_dot


@dataclass(frozen=True)
class DiagnosticRecord:
    time: float
    energy: float
    div_muH_l2: float
    charge_residual: float
    l2_error: float | None = None

    def __post_init__(self) -> None:
        for name in ("energy", "div_muH_l2"):
            v = getattr(self, name)
            if not (math.isnan(v) or v >= 0.0):
                raise ValueError(f"{name} must be nonnegative, got {v}")


def energy(state: FieldState, material: MaterialMap) -> float:
    """Squared weighted norm ``(state, state)``."""
    return weighted_dot(state, state, material)


def splitting_energy(state: FieldState, material: MaterialMap, tau: float) -> float:
    """Squared weighted norm of ``(I - tau/2 B) state``.

    This is the quantity the Peaceman-Rachford step preserves exactly when
    J = 0: with ``z = (I - tau/2 B) w`` one step maps ``z`` through the
    product of the two Cayley transforms of A and B.
    """
    z = apply_shifted("B", -0.5 * tau, state, material)
    return weighted_dot(z, z, material)


def divergence_nodes(grid: YeeGrid, f1: NDArray, f2: NDArray, f3: NDArray) -> NDArray:
    """Divergence of an E-located vector field at the interior grid nodes.

    Returns shape ``(nx-1, ny-1, nz-1)``; node ``(i, j, k)`` of the result is
    grid node ``(i+1, j+1, k+1)``.
    """
    hx, hy, hz = grid.h
    d1 = np.diff(f1, axis=0)[:, 1:-1, 1:-1] / hx
    d2 = np.diff(f2, axis=1)[1:-1, :, 1:-1] / hy
    d3 = np.diff(f3, axis=2)[1:-1, 1:-1, :] / hz
    return d1 + d2 + d3


def divergence_cells(grid: YeeGrid, g1: NDArray, g2: NDArray, g3: NDArray) -> NDArray:
    """Divergence of an H-located vector field at the cell centres.

    The normal components on the boundary faces are taken as zero.
    """
    hx, hy, hz = grid.h
    out = np.zeros(grid.n)
    for axis, (g, step) in enumerate(zip((g1, g2, g3), (hx, hy, hz))):
        g = g.copy()
        sl = [slice(None)] * 3
        sl[axis] = 0
        g[tuple(sl)] = 0.0
        sl[axis] = -1
        g[tuple(sl)] = 0.0
        out += np.diff(g, axis=axis) / step
    return out


def discrete_div(state: FieldState, which: str, material: MaterialMap) -> NDArray:
    """``div(eps E)`` at interior nodes or ``div(mu H)`` at cell centres."""
    grid = state.grid
    if which == "epsE":
        return divergence_nodes(grid, *(material.eps_at[c] * state[c] for c in E_COMPONENTS))
    if which == "muH":
        return divergence_cells(grid, *(material.mu_at[c] * state[c] for c in ("h1", "h2", "h3")))
    raise ValueError(f"which must be 'epsE' or 'muH', got {which!r}")


def grid_l2(grid: YeeGrid, values: NDArray) -> float:
    return float(np.sqrt(np.sum(values * values) * grid.cell_volume))


def l2_error(a: FieldState, b: FieldState, material: MaterialMap | None = None) -> float:
    """Unweighted discrete L2 norm of ``a - b`` (cell-volume quadrature)."""
    check_same_grid(a, b)
    total = 0.0
    for c in COMPONENTS:
        d = a[c] - b[c]
        total += float(np.sum(d * d))
    return math.sqrt(total * a.grid.cell_volume)


def _probe_energy(state, material, tau, reference):
    return energy(state, material)


def _probe_splitting_energy(state, material, tau, reference):
    return splitting_energy(state, material, tau)


def _probe_div_muH(state, material, tau, reference):
    return grid_l2(state.grid, discrete_div(state, "muH", material))


def _probe_div_epsE(state, material, tau, reference):
    return grid_l2(state.grid, discrete_div(state, "epsE", material))


def _probe_l2_error(state, material, tau, reference):
    if reference is None:
        return math.nan
    return l2_error(state, reference)


PROBES = {
    "energy": _probe_energy,
    "splitting_energy": _probe_splitting_energy,
    "div_muH_l2": _probe_div_muH,
    "div_epsE_l2": _probe_div_epsE,
    "l2_error": _probe_l2_error,
}


def evaluate_probes(
    probes: Sequence[str],
    state: FieldState,
    material: MaterialMap,
    tau: float,
    reference: FieldState | None = None,
) -> dict[str, float]:
    out = {}
    for name in probes:
        try:
            fn = PROBES[name]
        except KeyError:
            raise ValueError(f"unknown probe {name!r}; known: {sorted(PROBES)}") from None
        out[name] = fn(state, material, tau, reference)
    return out


def charge_law_residuals(traj, source, material: MaterialMap) -> list[float]:
    """``|| div(eps E)(t) - div(eps E0) + int_0^t div J ds ||`` at each record.

    The time integral uses the trapezoidal rule on the recorded times.
    """
    if not traj.snapshots:
        raise ValueError("charge-law residual needs a trajectory recorded with snapshots")
    grid = material.grid
    rho0 = discrete_div(traj.snapshots[0], "epsE", material)

    def div_j(t: float) -> NDArray:
        j = source.sample(grid, t)
        return divergence_nodes(grid, *(j[c] for c in E_COMPONENTS))

    integral = np.zeros_like(rho0)
    prev_t = traj.snapshots[0].time
    prev_q = div_j(prev_t)
    out = []
    for snap in traj.snapshots:
        if snap.time != prev_t:
            q = div_j(snap.time)
            integral += 0.5 * (snap.time - prev_t) * (q + prev_q)
            prev_t, prev_q = snap.time, q
        rho = discrete_div(snap, "epsE", material)
        out.append(grid_l2(grid, rho - rho0 + integral))
    return out


def charge_law_residual(traj, source, material: MaterialMap) -> float:
    return max(charge_law_residuals(traj, source, material))


def diagnostic_records(traj, source=None, material: MaterialMap | None = None) -> list[DiagnosticRecord]:
    """Tabulate a trajectory; missing quantities are NaN."""
    charge = [math.nan] * len(traj.times)
    if traj.snapshots and source is not None and material is not None:
        charge = charge_law_residuals(traj, source, material)
    rows = []
    for t, diag, q in zip(traj.times, traj.diagnostics, charge):
        rows.append(
            DiagnosticRecord(
                time=t,
                energy=diag.get("energy", math.nan),
                div_muH_l2=diag.get("div_muH_l2", math.nan),
                charge_residual=q,
                l2_error=diag.get("l2_error"),
            )
        )
    return rows
