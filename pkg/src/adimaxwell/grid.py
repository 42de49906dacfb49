"""Staggered Yee grid geometry and field storage.

All field arrays are indexed ``[i, j, k]`` with ``i`` along x1, ``j`` along x2
and ``k`` along x3 (C order, x3 fastest).  With cell counts ``(nx, ny, nz)``
and spacings ``(hx, hy, hz)`` the six components live at

=========  ======================  ==========================================
component  shape                   physical location of entry ``[i, j, k]``
=========  ======================  ==========================================
E1         (nx,   ny+1, nz+1)      ((i+1/2) hx,  j hy,        k hz)
E2         (nx+1, ny,   nz+1)      (i hx,        (j+1/2) hy,  k hz)
E3         (nx+1, ny+1, nz)        (i hx,        j hy,        (k+1/2) hz)
H1         (nx+1, ny,   nz)        (i hx,        (j+1/2) hy,  (k+1/2) hz)
H2         (nx,   ny+1, nz)        ((i+1/2) hx,  j hy,        (k+1/2) hz)
H3         (nx,   ny,   nz+1)      ((i+1/2) hx,  (j+1/2) hy,  k hz)
=========  ======================  ==========================================

(locations are relative to the grid origin).  E_j sits on cell edges parallel
to axis j, H_j on cell faces normal to axis j.  Tangential electric entries on
the boundary of the cuboid are stored but pinned to zero (perfect conductor).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numpy.typing import NDArray

COMPONENTS: tuple[str, ...] = ("e1", "e2", "e3", "h1", "h2", "h3")
E_COMPONENTS: tuple[str, ...] = ("e1", "e2", "e3")
H_COMPONENTS: tuple[str, ...] = ("h1", "h2", "h3")


class GridError(ValueError):
    """Invalid grid parameters or out-of-range grid queries."""


def _axis_of(component: str) -> int:
    return int(component[1]) - 1


def half_offsets(component: str) -> tuple[int, int, int]:
    """Return 1 for every axis along which ``component`` is shifted by h/2."""
    axis = _axis_of(component)
    if component[0] == "e":
        return tuple(int(a == axis) for a in range(3))  # type: ignore[return-value]
    return tuple(int(a != axis) for a in range(3))  # type: ignore[return-value]


@dataclass(frozen=True)
class YeeGrid:
    """Uniform staggered grid on the cuboid ``origin + [0, extent]``."""

    n: tuple[int, int, int]
    origin: tuple[float, float, float]
    extent: tuple[float, float, float]

    @property
    def nx(self) -> int:
        return self.n[0]

    @property
    def ny(self) -> int:
        return self.n[1]

    @property
    def nz(self) -> int:
        return self.n[2]

    @property
    def h(self) -> tuple[float, float, float]:
        return tuple(e / n for e, n in zip(self.extent, self.n))  # type: ignore[return-value]

    @property
    def hx(self) -> float:
        return self.h[0]

    @property
    def hy(self) -> float:
        return self.h[1]

    @property
    def hz(self) -> float:
        return self.h[2]

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.h
        return hx * hy * hz

    @property
    def upper(self) -> tuple[float, float, float]:
        return tuple(o + e for o, e in zip(self.origin, self.extent))  # type: ignore[return-value]

    def shape(self, component: str) -> tuple[int, int, int]:
        """Array shape of ``component`` (see the module table)."""
        offs = half_offsets(component)
        return tuple(n + 1 - o for n, o in zip(self.n, offs))  # type: ignore[return-value]

    def dof_count(self, components: tuple[str, ...] = COMPONENTS) -> int:
        return sum(int(np.prod(self.shape(c))) for c in components)

    def coordinates(self, component: str) -> tuple[NDArray, NDArray, NDArray]:
        """1D coordinate vectors of the entries of ``component`` along each axis."""
        offs = half_offsets(component)
        out = []
        for axis, (o, n_pts) in enumerate(zip(offs, self.shape(component))):
            idx = np.arange(n_pts, dtype=float) + 0.5 * o
            out.append(self.origin[axis] + idx * self.h[axis])
        return tuple(out)  # type: ignore[return-value]

    def mesh(self, component: str) -> tuple[NDArray, NDArray, NDArray]:
        """Broadcastable coordinate arrays of ``component`` (``ij`` indexing)."""
        x, y, z = self.coordinates(component)
        return x[:, None, None], y[None, :, None], z[None, None, :]

    def pec_mask(self, component: str) -> NDArray[np.bool_]:
        """True where an electric entry is tangential on the boundary.

        Magnetic components have no pinned entries; an all-False mask is
        returned for them.
        """
        mask = np.zeros(self.shape(component), dtype=bool)
        if component[0] != "e":
            return mask
        own = _axis_of(component)
        for axis in range(3):
            if axis == own:
                continue
            sl = [slice(None)] * 3
            sl[axis] = 0
            mask[tuple(sl)] = True
            sl[axis] = -1
            mask[tuple(sl)] = True
        return mask


def make_grid(n, origin=(0.0, 0.0, 0.0), extent=(1.0, 1.0, 1.0)) -> YeeGrid:
    """Validate and build a :class:`YeeGrid`.

    Raises
    ------
    GridError
        If fewer than two cells are requested along an axis or an extent is
        not strictly positive.
    """
    n = tuple(int(v) for v in n)
    origin = tuple(float(v) for v in origin)
    extent = tuple(float(v) for v in extent)
    if len(n) != 3 or len(origin) != 3 or len(extent) != 3:
        raise GridError("n, origin and extent must all have three entries")
    for axis, v in enumerate(n):
        if v < 2:
            raise GridError(f"cell count along axis {axis + 1} must be >= 2, got {v}")
    for axis, v in enumerate(extent):
        if not np.isfinite(v) or v <= 0.0:
            raise GridError(f"extent along axis {axis + 1} must be > 0, got {v}")
    return YeeGrid(n=n, origin=origin, extent=extent)  # type: ignore[arg-type]


def staggered_location(grid: YeeGrid, component: str, index) -> tuple[float, float, float]:
    """Physical position of the degree of freedom ``component[index]``."""
    if component not in COMPONENTS:
        raise GridError(f"unknown component {component!r}")
    shape = grid.shape(component)
    index = tuple(int(i) for i in index)
    if len(index) != 3 or any(i < 0 or i >= s for i, s in zip(index, shape)):
        raise GridError(f"index {index} outside {component} shape {shape}")
    offs = half_offsets(component)
    return tuple(
        grid.origin[a] + (index[a] + 0.5 * offs[a]) * grid.h[a] for a in range(3)
    )  # type: ignore[return-value]


@dataclass(eq=False)
class FieldState:
    """The six staggered field components at a given time."""

    grid: YeeGrid
    e1: NDArray[np.float64]
    e2: NDArray[np.float64]
    e3: NDArray[np.float64]
    h1: NDArray[np.float64]
    h2: NDArray[np.float64]
    h3: NDArray[np.float64]
    time: float = 0.0

    def __post_init__(self) -> None:
        for name in COMPONENTS:
            arr = getattr(self, name)
            if arr.shape != self.grid.shape(name):
                raise GridError(
                    f"{name} has shape {arr.shape}, expected {self.grid.shape(name)}"
                )

    def __getitem__(self, component: str) -> NDArray[np.float64]:
        return getattr(self, component)

    def items(self) -> Iterator[tuple[str, NDArray[np.float64]]]:
        for name in COMPONENTS:
            yield name, getattr(self, name)

    def copy(self) -> "FieldState":
        return FieldState(self.grid, *(getattr(self, c).copy() for c in COMPONENTS), time=self.time)

    def enforce_pec(self) -> "FieldState":
        """Zero the tangential electric entries on the boundary, in place."""
        for name in E_COMPONENTS:
            getattr(self, name)[self.grid.pec_mask(name)] = 0.0
        return self

    def flat(self) -> NDArray[np.float64]:
        return np.concatenate([getattr(self, c).ravel() for c in COMPONENTS])

    @classmethod
    def from_flat(cls, grid: YeeGrid, vec: NDArray, time: float = 0.0) -> "FieldState":
        parts = []
        start = 0
        for name in COMPONENTS:
            shape = grid.shape(name)
            size = int(np.prod(shape))
            parts.append(np.array(vec[start:start + size], dtype=float).reshape(shape))
            start += size
        if start != len(vec):
            raise GridError(f"vector of length {len(vec)} does not match {start} dofs")
        return cls(grid, *parts, time=time)

    def linear_combination(self, a: float, other: "FieldState", b: float) -> "FieldState":
        """Return ``a * self + b * other`` (time of ``self``)."""
        check_same_grid(self, other)
        return FieldState(
            self.grid,
            *(a * getattr(self, c) + b * getattr(other, c) for c in COMPONENTS),
            time=self.time,
        )


def check_same_grid(a: FieldState, b: FieldState) -> None:
    if a.grid != b.grid:
        raise GridError("field states live on different grids")


def zero_state(grid: YeeGrid, time: float = 0.0) -> FieldState:
    return FieldState(grid, *(np.zeros(grid.shape(c)) for c in COMPONENTS), time=time)


def random_state(grid: YeeGrid, rng: np.random.Generator, pec: bool = True) -> FieldState:
    """Standard-normal entries, with boundary tangential E zeroed unless ``pec`` is False."""
    state = FieldState(grid, *(rng.standard_normal(grid.shape(c)) for c in COMPONENTS))
    return state.enforce_pec() if pec else state


def state_from_functions(grid: YeeGrid, funcs: dict, time: float = 0.0) -> FieldState:
    """Sample ``funcs[component](x1, x2, x3)`` at the staggered points.

    Missing components are zero.  Callables must broadcast over the
    ``ij``-indexed coordinate arrays returned by :meth:`YeeGrid.mesh`.
    """
    arrays = []
    for name in COMPONENTS:
        f = funcs.get(name)
        if f is None:
            arrays.append(np.zeros(grid.shape(name)))
        else:
            x, y, z = grid.mesh(name)
            arrays.append(np.broadcast_to(np.asarray(f(x, y, z), dtype=float), grid.shape(name)).copy())
    return FieldState(grid, *arrays, time=time).enforce_pec()
