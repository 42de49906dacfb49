"""Piecewise-constant permittivity and permeability on a box partition."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
from numpy.typing import NDArray

from .grid import E_COMPONENTS, H_COMPONENTS, YeeGrid

PARTITION_RTOL = 1e-12


class MaterialError(ValueError):
    """Base class for invalid material layouts."""


class CoverageGap(MaterialError):
    pass


class Overlap(MaterialError):
    pass


class MuVariesWithinCoarseCell(MaterialError):
    pass


class MissingBackground(MaterialError):
    pass


@dataclass(frozen=True)
class MaterialBox:
    """Axis-aligned box of homogeneous material.

    ``coarse_id`` names the coarse cuboid the box belongs to, ``sub_id`` the
    subdomain inside it; ``sub_id == 0`` is the background of that cuboid.
    """

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    epsilon: float
    mu: float = 1.0
    coarse_id: int = 0
    sub_id: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != 3 or len(self.hi) != 3:
            raise MaterialError(f"box corners must be 3-vectors: {self}")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise MaterialError(f"box needs lo < hi componentwise: {self}")
        if not (self.epsilon > 0.0 and self.mu > 0.0):
            raise MaterialError(f"epsilon and mu must be positive: {self}")

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    def label(self) -> str:
        return f"box(coarse={self.coarse_id}, sub={self.sub_id}, lo={self.lo}, hi={self.hi})"

    def sort_key(self):
        return (self.coarse_id, self.sub_id, self.lo, self.hi, self.epsilon, self.mu)


def _intersection_volume(a: MaterialBox, b: MaterialBox) -> float:
    vol = 1.0
    for lo1, hi1, lo2, hi2 in zip(a.lo, a.hi, b.lo, b.hi):
        width = min(hi1, hi2) - max(lo1, lo2)
        if width <= 0.0:
            return 0.0
        vol *= width
    return vol


def validate_partition(grid: YeeGrid, boxes: list[MaterialBox]) -> None:
    """Check containment, pairwise overlap, total coverage and per-cell mu.

    Overlap and coverage are measured by volume, relative to the domain
    volume, with tolerance ``PARTITION_RTOL``.
    """
    domain_vol = float(np.prod(grid.extent))
    tol = PARTITION_RTOL * domain_vol
    len_tol = PARTITION_RTOL * max(grid.extent)
    for box in boxes:
        for a in range(3):
            if box.lo[a] < grid.origin[a] - len_tol or box.hi[a] > grid.upper[a] + len_tol:
                raise MaterialError(f"{box.label()} extends outside the domain")
    for a, b in combinations(boxes, 2):
        if _intersection_volume(a, b) > tol:
            raise Overlap(f"{a.label()} overlaps {b.label()}")
    covered = sum(box.volume for box in boxes)
    if abs(covered - domain_vol) > tol:
        raise CoverageGap(
            f"boxes cover volume {covered!r} of domain volume {domain_vol!r}; "
            f"uncovered {domain_vol - covered!r}"
        )
    by_coarse: dict[int, list[MaterialBox]] = {}
    for box in boxes:
        by_coarse.setdefault(box.coarse_id, []).append(box)
    for cid, members in by_coarse.items():
        ref = members[0]
        for other in members[1:]:
            if abs(other.mu - ref.mu) > PARTITION_RTOL * ref.mu:
                raise MuVariesWithinCoarseCell(
                    f"coarse cell {cid}: mu={ref.mu} in {ref.label()} but "
                    f"mu={other.mu} in {other.label()}"
                )


def _sample_boxes(
    boxes: list[MaterialBox], grid: YeeGrid, which: str, x, y, z
) -> NDArray[np.float64]:
    """Mean of ``which`` over the cells adjacent to each point.

    A point strictly inside a box gets that box's value.  A point on one or
    more box faces is nudged by a tiny offset into each neighbouring orthant
    (only along the axes whose faces it touches), and the values found there
    are averaged; orthants outside the domain are skipped.
    """
    pts = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
    scale = max(grid.extent)
    face_tol = PARTITION_RTOL * scale
    nudge = 1e-9 * scale
    on_face = []
    for a in range(3):
        faces = np.unique([b.lo[a] for b in boxes] + [b.hi[a] for b in boxes])
        hit = np.zeros(pts[a].shape, dtype=bool)
        for f in faces:
            hit |= np.abs(pts[a] - f) <= face_tol
        on_face.append(hit)

    total = np.zeros(pts[0].shape)
    count = np.zeros(pts[0].shape)
    for signs in product((-1.0, 1.0), repeat=3):
        q = [pts[a] + signs[a] * nudge * on_face[a] for a in range(3)]
        inside = np.ones(pts[0].shape, dtype=bool)
        for a in range(3):
            inside &= (q[a] > grid.origin[a]) & (q[a] < grid.upper[a])
        value = np.zeros(pts[0].shape)
        found = np.zeros(pts[0].shape, dtype=bool)
        for box in boxes:
            m = inside.copy()
            for a in range(3):
                m &= (q[a] > box.lo[a]) & (q[a] < box.hi[a])
            value[m] = getattr(box, which)
            found |= m
        total += value
        count += found
    if np.any(count == 0):
        raise CoverageGap("a sample point is not adjacent to any material box")
    return total / count


@dataclass(frozen=True, eq=False)
class MaterialMap:
    """Validated box layout plus coefficients sampled at the staggered points.

    ``eps_at[c]`` holds epsilon at the points of electric component ``c``,
    ``mu_at[c]`` holds mu at the points of magnetic component ``c``.
    """

    grid: YeeGrid
    boxes: tuple[MaterialBox, ...]
    eps_at: dict[str, NDArray[np.float64]]
    mu_at: dict[str, NDArray[np.float64]]
    inv_eps_at: dict[str, NDArray[np.float64]] = field(repr=False)
    inv_mu_at: dict[str, NDArray[np.float64]] = field(repr=False)
    # Cached resolvent factorizations, keyed by (operator, tau).
    _cache: dict = field(default_factory=dict, repr=False)

    def weight(self, component: str) -> NDArray[np.float64]:
        return self.eps_at[component] if component[0] == "e" else self.mu_at[component]

    def inverse_weight(self, component: str) -> NDArray[np.float64]:
        return self.inv_eps_at[component] if component[0] == "e" else self.inv_mu_at[component]


def build_material_map(grid: YeeGrid, boxes) -> MaterialMap:
    """Validate ``boxes`` against ``grid`` and sample epsilon and mu.

    Raises
    ------
    Overlap, CoverageGap, MuVariesWithinCoarseCell, MaterialError
    """
    boxes = sorted(boxes, key=MaterialBox.sort_key)
    if not boxes:
        raise CoverageGap("no material boxes given")
    validate_partition(grid, boxes)
    eps_at = {c: _sample_boxes(boxes, grid, "epsilon", *grid.mesh(c)) for c in E_COMPONENTS}
    mu_at = {c: _sample_boxes(boxes, grid, "mu", *grid.mesh(c)) for c in H_COMPONENTS}
    for arr in (*eps_at.values(), *mu_at.values()):
        arr.setflags(write=False)
    inv_eps = {c: 1.0 / v for c, v in eps_at.items()}
    inv_mu = {c: 1.0 / v for c, v in mu_at.items()}
    return MaterialMap(grid, tuple(boxes), eps_at, mu_at, inv_eps, inv_mu)


def uniform_map(grid: YeeGrid, epsilon: float = 1.0, mu: float = 1.0) -> MaterialMap:
    return build_material_map(grid, [MaterialBox(grid.origin, grid.upper, epsilon, mu)])


def sample_coefficient(material: MaterialMap, which: str, location) -> float:
    """Value of ``which`` ("epsilon" or "mu") at a point of the closed domain."""
    if which not in ("epsilon", "mu"):
        raise ValueError(f"which must be 'epsilon' or 'mu', got {which!r}")
    grid = material.grid
    tol = PARTITION_RTOL * max(grid.extent)
    loc = [float(v) for v in location]
    for a in range(3):
        if loc[a] < grid.origin[a] - tol or loc[a] > grid.upper[a] + tol:
            raise MaterialError(f"point {tuple(loc)} lies outside the domain")
    return float(_sample_boxes(list(material.boxes), grid, which, *loc))


def _background_eps(material: MaterialMap) -> dict[int, float]:
    background: dict[int, float] = {}
    for box in material.boxes:
        if box.sub_id != 0:
            continue
        prev = background.setdefault(box.coarse_id, box.epsilon)
        if prev != box.epsilon:
            raise MaterialError(
                f"background of coarse cell {box.coarse_id} is not homogeneous "
                f"(epsilon {prev} and {box.epsilon})"
            )
    for box in material.boxes:
        if box.coarse_id not in background:
            raise MissingBackground(f"coarse cell {box.coarse_id} has no sub_id 0 region")
    return background


def worst_jump(material: MaterialMap) -> tuple[float, float, float]:
    """Return ``(ratio, eps_background, eps_inclusion)`` of the largest jump.

    Without inclusions the ratio is 0 and both epsilons equal the background
    value of the first coarse cell.
    """
    background = _background_eps(material)
    best = None
    for box in material.boxes:
        if box.sub_id == 0:
            continue
        e0 = background[box.coarse_id]
        el = box.epsilon
        r = (el - e0) ** 2 / (el * e0)
        if best is None or r > best[0]:
            best = (r, e0, el)
    if best is None:
        e0 = background[min(background)]
        return 0.0, e0, e0
    return best


def jump_ratio(material: MaterialMap) -> float:
    """Largest ``(eps_l - eps_0)**2 / (eps_l * eps_0)`` over all inclusions."""
    return worst_jump(material)[0]
