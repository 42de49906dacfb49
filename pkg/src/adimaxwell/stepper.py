"""Peaceman-Rachford ADI time stepping with a trapezoidal current source."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .grid import E_COMPONENTS, FieldState, YeeGrid
from .materials import MaterialMap
from .operators import apply_shifted, resolve

# evaluator(t, component, x1, x2, x3) -> current density J_component at the points
CurrentFunction = Callable[[float, str, NDArray, NDArray, NDArray], NDArray]


@dataclass(frozen=True)
class SourceTerm:
    """External current density J(t, x), sampled at the E points."""

    evaluator: CurrentFunction | None = None
    description: str = "J = 0"

    @property
    def is_zero(self) -> bool:
        return self.evaluator is None

    def sample(self, grid: YeeGrid, t: float) -> dict[str, NDArray]:
        out = {}
        for c in E_COMPONENTS:
            if self.evaluator is None:
                out[c] = np.zeros(grid.shape(c))
            else:
                x, y, z = grid.mesh(c)
                out[c] = np.broadcast_to(
                    np.asarray(self.evaluator(t, c, x, y, z), dtype=float), grid.shape(c)
                ).copy()
        return out


NO_SOURCE = SourceTerm()


@dataclass(frozen=True)
class StepConfig:
    tau: float
    t_final: float
    record_every: int = 1

    def __post_init__(self) -> None:
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.t_final >= self.tau:
            raise ValueError(f"need tau <= t_final, got tau={self.tau}, t_final={self.t_final}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        # largest n with n * tau <= t_final, forgiving round-off in the ratio
        ratio = self.t_final / self.tau
        n = math.floor(ratio)
        if ratio - n > 1.0 - 1e-9:
            n += 1
        return n


def pr_step(
    state: FieldState,
    tau: float,
    t_prev: float | None = None,
    source: SourceTerm = NO_SOURCE,
    material: MaterialMap | None = None,
) -> FieldState:
    """Advance ``state`` by one Peaceman-Rachford step of size ``tau``.

    The order of operations is

        u = (I + tau/2 B) w
        u = (I - tau/2 A)^{-1} u
        u_E -= tau/(2 eps) (J(t_prev + tau) + J(t_prev))
        u = (I + tau/2 A) u
        w = (I - tau/2 B)^{-1} u

    A negative ``tau`` runs the same scheme backwards in time, which inverts
    a forward step exactly when J = 0.
    """
    if material is None:
        raise ValueError("pr_step needs a material map")
    if tau == 0.0 or not math.isfinite(tau):
        raise ValueError(f"tau must be finite and nonzero, got {tau}")
    if t_prev is None:
        t_prev = state.time
    half = 0.5 * tau
    u = apply_shifted("B", half, state, material)
    u = resolve("A", half, u, material)
    if not source.is_zero:
        grid = state.grid
        j_new = source.sample(grid, t_prev + tau)
        j_old = source.sample(grid, t_prev)
        for c in E_COMPONENTS:
            u[c][...] -= half * material.inv_eps_at[c] * (j_new[c] + j_old[c])
        u.enforce_pec()
    u = apply_shifted("A", half, u, material)
    w = resolve("B", half, u, material)
    w.time = t_prev + tau
    return w


@dataclass
class Trajectory:
    """Recorded times, diagnostics and optional snapshots of a run."""

    times: list[float] = field(default_factory=list)
    diagnostics: list[dict[str, float]] = field(default_factory=list)
    snapshots: list[FieldState] = field(default_factory=list)
    final: FieldState | None = None
    tau: float = 0.0
    steps: int = 0

    @property
    def end_time(self) -> float:
        return self.final.time if self.final is not None else 0.0


def run(
    initial: FieldState,
    config: StepConfig,
    source: SourceTerm,
    material: MaterialMap,
    probes: Sequence[str] = (),
    keep_snapshots: bool = False,
    reference: FieldState | None = None,
) -> Trajectory:
    """Step ``initial`` to the last multiple of ``tau`` not exceeding ``t_final``.

    ``probes`` names diagnostics from :data:`adimaxwell.diagnostics.PROBES`
    evaluated at t = 0 and every ``record_every`` steps; the final state is
    always recorded.
    """
    from .diagnostics import evaluate_probes

    traj = Trajectory(tau=config.tau)
    state = initial.copy()
    n_steps = config.n_steps

    def record(s: FieldState) -> None:
        traj.times.append(s.time)
        traj.diagnostics.append(evaluate_probes(probes, s, material, config.tau, reference))
        if keep_snapshots:
            traj.snapshots.append(s.copy())

    record(state)
    t0 = state.time
    for n in range(1, n_steps + 1):
        state = pr_step(state, config.tau, t0 + (n - 1) * config.tau, source, material)
        state.time = t0 + n * config.tau
        if n % config.record_every == 0 or n == n_steps:
            record(state)
    traj.final = state
    traj.steps = n_steps
    return traj
