"""Experiment configurations, convergence studies and file output."""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .diagnostics import diagnostic_records, l2_error
from .exponents import ExponentReport
from .grid import COMPONENTS, FieldState, GridError, YeeGrid, half_offsets, make_grid, zero_state
from .materials import MaterialBox, MaterialError, MaterialMap, build_material_map, validate_partition
from .operators import curl_e
from .stepper import NO_SOURCE, SourceTerm, StepConfig, Trajectory, run

log = logging.getLogger(__name__)

DESK_TAUS = (1 / 10, 1 / 20, 1 / 40, 1 / 80, 1 / 160)
DESK_REFERENCE_FACTOR = 16
FULL_N = (150, 150, 75)
FULL_TAUS = (1 / 10, 1 / 20, 1 / 50, 1 / 100, 1 / 200, 1 / 500, 1 / 1000)
FULL_TAU_REF = 1e-4
KNEE_WINDOW = 0.5
TAU_DIVIDES_RTOL = 1e-12


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# -- initial conditions ------------------------------------------------------


def order_reduction_initial(grid: YeeGrid, material: MaterialMap, params: dict) -> FieldState:
    """E0 = (1/eps) (x1 - 1/2) x1^2 (x1 - 1)^2 (x2 - 1/2)^2 sin(pi x2) sin(pi x3) e_1, H0 = 0."""
    state = zero_state(grid)
    x, y, z = grid.mesh("e1")
    profile = (x - 0.5) * x**2 * (x - 1.0) ** 2 * (y - 0.5) ** 2 * np.sin(np.pi * y) * np.sin(np.pi * z)
    state.e1[...] = material.inv_eps_at["e1"] * profile
    return state.enforce_pec()


def _mode_wavenumbers(grid: YeeGrid, mode) -> tuple[np.ndarray, np.ndarray]:
    k = np.array([m * math.pi / e for m, e in zip(mode, grid.extent)])
    k_disc = np.array([2.0 / h * math.sin(kk * h / 2.0) for kk, h in zip(k, grid.h)])
    return k, k_disc


def cavity_mode_state(grid: YeeGrid, material: MaterialMap, params: dict, t: float = 0.0) -> FieldState:
    """Exact solution of the semi-discrete system for one cavity mode.

    Requires uniform eps and mu.  ``E_j ~ a_j cos(k_j x_j) prod_{l != j} sin(k_l x_l)``
    with the amplitude ``a`` projected orthogonal to the discrete wavenumber,
    so the sampled field is an eigenvector of the discrete curl-curl operator.
    """
    mode = tuple(int(v) for v in params.get("mode", (1, 1, 1)))
    amp = np.array(params.get("amplitude", (1.0, -2.0, 1.0)), dtype=float)
    eps = float(material.eps_at["e1"].flat[0])
    mu = float(material.mu_at["h1"].flat[0])
    k, k_disc = _mode_wavenumbers(grid, mode)
    amp = amp - k_disc * (amp @ k_disc) / (k_disc @ k_disc)
    omega = math.sqrt(k_disc @ k_disc / (eps * mu))
    state = zero_state(grid, time=t)
    lo = grid.origin
    for j, c in enumerate(("e1", "e2", "e3")):
        x = grid.mesh(c)
        prod = amp[j] * np.ones(grid.shape(c))
        for axis in range(3):
            arg = k[axis] * (x[axis] - lo[axis])
            prod = prod * (np.cos(arg) if axis == j else np.sin(arg))
        state[c][...] = prod
    state.enforce_pec()
    h = curl_e(grid, state.e1, state.e2, state.e3)
    for c, v in zip(("h1", "h2", "h3"), h):
        state[c][...] = -v / mu * math.sin(omega * t) / omega
    for c in ("e1", "e2", "e3"):
        state[c][...] *= math.cos(omega * t)
    return state


def _zero_initial(grid, material, params):
    return zero_state(grid)


INITIAL_CONDITIONS = {
    "order_reduction": order_reduction_initial,
    "cavity_mode": cavity_mode_state,
    "zero": _zero_initial,
}


# -- sources -----------------------------------------------------------------


def polynomial_ramp_source(params: dict) -> SourceTerm:
    """J = (amplitude * t * x1^2 (1 - x1) sin(pi x2) sin(pi x3), 0, 0) on the unit cube.

    The tangential traces vanish on every face, so pinning E to zero there
    does not clip the source.
    """
    amp = float(params.get("amplitude", 1.0))

    def evaluator(t, component, x, y, z):
        if component != "e1":
            return 0.0
        return amp * t * x**2 * (1.0 - x) * np.sin(np.pi * y) * np.sin(np.pi * z)

    return SourceTerm(evaluator, f"J1 = {amp} t x1^2 (1-x1) sin(pi x2) sin(pi x3)")


SOURCES = {
    "none": lambda params: NO_SOURCE,
    "polynomial_ramp": polynomial_ramp_source,
}

ANALYTIC_REFERENCES = {"cavity_mode": cavity_mode_state}


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class ReferencePolicy:
    kind: str = "self_refined"
    factor: int = DESK_REFERENCE_FACTOR
    analytic_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "self_refined":
            if int(self.factor) != self.factor or self.factor < 4:
                raise ConfigError(f"reference factor must be an integer >= 4, got {self.factor}")
        elif self.kind == "analytic":
            if self.analytic_id not in ANALYTIC_REFERENCES:
                raise ConfigError(
                    f"unknown analytic reference {self.analytic_id!r}; known: {sorted(ANALYTIC_REFERENCES)}"
                )
        else:
            raise ConfigError(f"reference policy must be self_refined or analytic, got {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "analytic":
            return f"analytic({self.analytic_id})"
        return f"self_refined({self.factor})"


def _divides(tau: float, total: float) -> bool:
    ratio = total / tau
    return abs(ratio - round(ratio)) <= TAU_DIVIDES_RTOL * ratio and round(ratio) >= 1


@dataclass(frozen=True)
class ExperimentConfig:
    n: tuple[int, int, int]
    boxes: tuple[MaterialBox, ...]
    taus: tuple[float, ...]
    t_final: float = 1.0
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    extent: tuple[float, float, float] = (1.0, 1.0, 1.0)
    initial: str = "order_reduction"
    initial_params: dict = field(default_factory=dict)
    source: str = "none"
    source_params: dict = field(default_factory=dict)
    reference: ReferencePolicy = field(default_factory=ReferencePolicy)
    output_dir: str = "out"
    name: str = "experiment"
    record_every: int = 1
    snapshots: bool = False

    def __post_init__(self) -> None:
        if not self.taus:
            raise ConfigError("tau list is empty")
        if any(not t > 0.0 for t in self.taus):
            raise ConfigError(f"step sizes must be positive: {self.taus}")
        if list(self.taus) != sorted(self.taus, reverse=True) or len(set(self.taus)) != len(self.taus):
            raise ConfigError(f"tau list must be strictly descending: {self.taus}")
        for tau in self.taus:
            if not _divides(tau, self.t_final):
                raise ConfigError(f"tau={tau!r} does not divide t_final={self.t_final!r}")
        if self.initial not in INITIAL_CONDITIONS:
            raise ConfigError(f"unknown initial condition {self.initial!r}; known: {sorted(INITIAL_CONDITIONS)}")
        if self.source not in SOURCES:
            raise ConfigError(f"unknown source {self.source!r}; known: {sorted(SOURCES)}")
        try:
            validate_partition(self.grid(), sorted(self.boxes, key=MaterialBox.sort_key))
        except (GridError, MaterialError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def reference_tau(self) -> float | None:
        if self.reference.kind != "self_refined":
            return None
        return min(self.taus) / self.reference.factor

    def grid(self) -> YeeGrid:
        return make_grid(self.n, self.origin, self.extent)

    def material(self, grid: YeeGrid | None = None) -> MaterialMap:
        return build_material_map(grid or self.grid(), self.boxes)

    def make_source(self) -> SourceTerm:
        return SOURCES[self.source](self.source_params)

    def initial_state(self, grid: YeeGrid, material: MaterialMap) -> FieldState:
        return INITIAL_CONDITIONS[self.initial](grid, material, self.initial_params)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "grid": {"n": list(self.n), "origin": list(self.origin), "extent": list(self.extent)},
            "materials": [
                {
                    "lo": list(b.lo),
                    "hi": list(b.hi),
                    "epsilon": b.epsilon,
                    "mu": b.mu,
                    "coarse_id": b.coarse_id,
                    "sub_id": b.sub_id,
                }
                for b in self.boxes
            ],
            "initial": {"id": self.initial, **self.initial_params},
            "source": {"id": self.source, **self.source_params},
            "taus": list(self.taus),
            "t_final": self.t_final,
            "reference": (
                {"policy": "analytic", "id": self.reference.analytic_id}
                if self.reference.kind == "analytic"
                else {"policy": "self_refined", "factor": self.reference.factor}
            ),
            "record_every": self.record_every,
            "snapshots": self.snapshots,
            "output_dir": self.output_dir,
        }


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Build a config from the JSON data model documented in the README."""
    try:
        grid = data["grid"]
        boxes = tuple(
            MaterialBox(
                lo=tuple(b["lo"]),
                hi=tuple(b["hi"]),
                epsilon=float(b["epsilon"]),
                mu=float(b.get("mu", 1.0)),
                coarse_id=int(b.get("coarse_id", 0)),
                sub_id=int(b.get("sub_id", 0)),
            )
            for b in data["materials"]
        )
        initial = dict(data.get("initial", {"id": "order_reduction"}))
        source = dict(data.get("source", {"id": "none"}))
        ref = dict(data.get("reference", {"policy": "self_refined", "factor": DESK_REFERENCE_FACTOR}))
        policy = ref.pop("policy", "self_refined")
        reference = ReferencePolicy(
            kind=policy,
            factor=int(ref.get("factor", DESK_REFERENCE_FACTOR)),
            analytic_id=ref.get("id"),
        )
        if "tau" in data and "taus" not in data:
            taus = (float(data["tau"]),)
        else:
            taus = tuple(float(t) for t in data["taus"])
        return ExperimentConfig(
            n=tuple(int(v) for v in grid["n"]),
            origin=tuple(float(v) for v in grid.get("origin", (0.0, 0.0, 0.0))),
            extent=tuple(float(v) for v in grid.get("extent", (1.0, 1.0, 1.0))),
            boxes=boxes,
            taus=taus,
            t_final=float(data.get("t_final", 1.0)),
            initial=initial.pop("id", "order_reduction"),
            initial_params=initial,
            source=source.pop("id", "none"),
            source_params=source,
            reference=reference,
            output_dir=str(data.get("output_dir", "out")),
            name=str(data.get("name", "experiment")),
            record_every=int(data.get("record_every", 1)),
            snapshots=bool(data.get("snapshots", False)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from exc


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(data)


def corner_inclusion_boxes(homogeneous: bool = False) -> tuple[MaterialBox, ...]:
    """Unit-cube layout: eps = 1.1 where x1 > 0.5 and x2 > 0.5, else 0.1; mu = 1."""
    if homogeneous:
        return (MaterialBox((0, 0, 0), (1, 1, 1), 1.0, 1.0),)
    return (
        MaterialBox((0.0, 0.0, 0.0), (0.5, 1.0, 1.0), 0.1, 1.0, 0, 0),
        MaterialBox((0.5, 0.0, 0.0), (1.0, 0.5, 1.0), 0.1, 1.0, 0, 0),
        MaterialBox((0.5, 0.5, 0.0), (1.0, 1.0, 1.0), 1.1, 1.0, 0, 1),
    )


def builtin_section7(
    scale: str = "desk", n: Sequence[int] = (48, 48, 24), homogeneous: bool = False
) -> ExperimentConfig:
    """The order-reduction experiment on the unit cube over [0, 1].

    ``scale="paper"`` uses the 150 x 150 x 75 grid with reference step 1e-4;
    ``scale="desk"`` uses ``n`` with steps 1/10 ... 1/160 and a reference 16
    times finer than the smallest step.  ``homogeneous=True`` replaces the
    permittivity by 1 everywhere.
    """
    if scale == "paper":
        taus = FULL_TAUS
        factor = round(min(FULL_TAUS) / FULL_TAU_REF)
        n = FULL_N
    elif scale == "desk":
        n = tuple(int(v) for v in n)
        if len(n) != 3 or any(v < 8 for v in n):
            raise ConfigError(f"desk grid needs at least 8 cells per axis, got {n}")
        taus = DESK_TAUS
        factor = DESK_REFERENCE_FACTOR
    else:
        raise ConfigError(f"scale must be 'desk' or 'paper', got {scale!r}")
    return ExperimentConfig(
        n=tuple(n),  # type: ignore[arg-type]
        boxes=corner_inclusion_boxes(homogeneous),
        taus=tuple(taus),
        t_final=1.0,
        initial="order_reduction",
        source="none",
        reference=ReferencePolicy("self_refined", factor),
        name=f"order-reduction-{scale}{'-homogeneous' if homogeneous else ''}",
    )


# -- convergence study -------------------------------------------------------


@dataclass
class ConvergenceReport:
    taus: list[float]
    errors: list[float]
    pairwise_orders: list[float | None]
    fitted_order: float | None
    knee_tau: float | None
    knee_policy: str
    reference: str
    status: str = "ok"

    @property
    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.taus, self.errors))


def pairwise_orders(taus: Sequence[float], errors: Sequence[float]) -> list[float | None]:
    """``log(e_i / e_{i+1}) / log(tau_i / tau_{i+1})`` per row; None on the last row."""
    out: list[float | None] = []
    for i in range(len(taus) - 1):
        out.append(math.log(errors[i] / errors[i + 1]) / math.log(taus[i] / taus[i + 1]))
    if taus:
        out.append(None)
    return out


def fit_order(
    taus: Sequence[float], errors: Sequence[float], window: float = KNEE_WINDOW
) -> tuple[float | None, float | None, str]:
    """Least-squares log-log slope over the rows below the preasymptotic knee.

    The knee is the largest step whose pairwise order, together with all
    smaller steps, lies within ``window`` of the pairwise order at the
    smallest step.  Returns ``(order, knee_tau, status)``.
    """
    if len(taus) < 2:
        return None, None, "insufficient rows"
    orders = pairwise_orders(taus, errors)
    last = orders[-2]
    start = len(taus) - 2
    while start > 0 and abs(orders[start - 1] - last) <= window:  # type: ignore[operator]
        start -= 1
    x = np.log(np.asarray(taus[start:]))
    y = np.log(np.asarray(errors[start:]))
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, float(taus[start]), "ok"


def _run_to_final(config: ExperimentConfig, tau: float, initial: FieldState, material: MaterialMap,
                  source: SourceTerm) -> FieldState:
    step = StepConfig(tau=tau, t_final=config.t_final, record_every=10**9)
    traj = run(initial, step, source, material)
    return traj.final  # type: ignore[return-value]


def convergence_study(config: ExperimentConfig, threads: int = 1) -> ConvergenceReport:
    """Errors at ``t_final`` for every step size against one shared reference."""
    grid = config.grid()
    material = config.material(grid)
    source = config.make_source()
    initial = config.initial_state(grid, material)
    if config.reference.kind == "analytic":
        reference = ANALYTIC_REFERENCES[config.reference.analytic_id](
            grid, material, config.initial_params, t=config.t_final
        )
    else:
        tau_ref = config.reference_tau
        log.info("reference run with tau=%g", tau_ref)
        try:
            reference = _run_to_final(config, tau_ref, initial, material, source)
        except Exception as exc:
            raise RuntimeError(f"reference run (tau={tau_ref}) failed: {exc}") from exc
    for _, arr in reference.items():
        arr.setflags(write=False)

    def one(tau: float) -> float:
        final = _run_to_final(config, tau, initial, material, source)
        err = l2_error(final, reference)
        log.info("tau=%g error=%.6e", tau, err)
        return err

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(one, config.taus))
    else:
        errors = [one(t) for t in config.taus]
    if any(not (math.isfinite(e) and e > 0.0) for e in errors):
        raise RuntimeError(f"non-finite or zero errors in study: {errors}")
    taus = list(config.taus)
    fitted, knee, status = fit_order(taus, errors)
    return ConvergenceReport(
        taus=taus,
        errors=errors,
        pairwise_orders=pairwise_orders(taus, errors),
        fitted_order=fitted,
        knee_tau=knee,
        knee_policy=(
            f"rows with tau <= knee; knee = largest tau whose pairwise order and those of all "
            f"smaller steps lie within {KNEE_WINDOW} of the smallest-step pairwise order"
        ),
        reference=config.reference.describe(),
        status=status,
    )


# -- output ------------------------------------------------------------------


def fmt(value: float | None) -> str:
    """Fixed 17-significant-digit rendering; empty for missing values."""
    if value is None:
        return ""
    return format(float(value), ".17g")


def _write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


def write_vtk_component(path: Path, grid: YeeGrid, name: str, values: np.ndarray, title: str) -> Path:
    """Legacy-VTK STRUCTURED_POINTS file for one staggered component."""
    offs = half_offsets(name)
    origin = [grid.origin[a] + 0.5 * offs[a] * grid.h[a] for a in range(3)]
    nx, ny, nz = values.shape
    body = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN " + " ".join(fmt(v) for v in origin),
        "SPACING " + " ".join(fmt(v) for v in grid.h),
        f"POINT_DATA {values.size}",
        f"SCALARS {name} double 1",
        "LOOKUP_TABLE default",
    ]
    body.extend(fmt(v) for v in values.ravel(order="F"))
    return _write_text(path, "\n".join(body) + "\n")


def emit(report, directory: str | os.PathLike, source: SourceTerm | None = None,
         material: MaterialMap | None = None, snapshots: bool = True) -> list[Path]:
    """Write ``report`` (convergence, exponents or trajectory) as CSV files.

    For a trajectory, ``source`` and ``material`` enable the charge-law
    column and ``snapshots`` controls the per-component VTK files.
    """
    out = Path(directory)
    written: list[Path] = []
    if isinstance(report, ConvergenceReport):
        rows = [
            (fmt(t), fmt(e), fmt(p))
            for t, e, p in zip(report.taus, report.errors, report.pairwise_orders)
        ]
        written.append(_write_text(out / "convergence.csv", _csv(("tau", "error", "pairwise_order"), rows)))
        summary = [
            ("fitted_order", fmt(report.fitted_order)),
            ("knee_tau", fmt(report.knee_tau)),
            ("status", report.status),
            ("reference", report.reference),
            ("knee_policy", '"' + report.knee_policy + '"'),
        ]
        written.append(_write_text(out / "convergence_fit.csv", _csv(("name", "value"), summary)))
    elif isinstance(report, ExponentReport):
        rows = [(name, fmt(v)) for name, v in report.rows()]
        written.append(_write_text(out / "exponents.csv", _csv(("name", "value"), rows)))
    elif isinstance(report, Trajectory):
        records = diagnostic_records(report, source, material)
        rows = [
            (fmt(r.time), fmt(r.energy), fmt(r.div_muH_l2), fmt(r.charge_residual), fmt(r.l2_error))
            for r in records
        ]
        written.append(
            _write_text(
                out / "diagnostics.csv",
                _csv(("time", "energy", "div_muH_l2", "charge_residual", "l2_error"), rows),
            )
        )
        for idx, snap in enumerate(report.snapshots if snapshots else ()):
            for name in COMPONENTS:
                written.append(
                    write_vtk_component(
                        out / f"snapshot_{idx:05d}_{name}.vtk",
                        snap.grid,
                        name,
                        snap[name],
                        f"{name} at t={fmt(snap.time)}",
                    )
                )
    else:
        raise TypeError(f"cannot emit object of type {type(report).__name__}")
    return written


def format_exponent_report(rep: ExponentReport) -> str:
    width = max(len(name) for name, _ in rep.rows())
    lines = [f"{name:<{width}}  {fmt(v)}" for name, v in rep.rows()]
    lines.append(f"{'eps_config':<{width}}  {tuple(rep.eps_config)}")
    if rep.outside_assumptions:
        lines.append(f"{'note':<{width}}  outside the strong-discontinuity assumption")
    for note in rep.notes:
        lines.append(f"{'note':<{width}}  {note}")
    return "\n".join(lines)


def with_overrides(config: ExperimentConfig, **kwargs) -> ExperimentConfig:
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    return replace(config, **kwargs) if kwargs else config
