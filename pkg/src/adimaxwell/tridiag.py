"""Batched tridiagonal solves (Thomas algorithm, no pivoting).

Arrays are laid out with the position along a line on axis 0 and any number
of trailing axes indexing independent lines, so every elimination step is a
single vectorized operation over all lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


class ZeroPivotError(RuntimeError):
    """Raised when elimination meets a zero pivot (an assembly bug)."""


@dataclass
class TridiagonalBatch:
    """``lower[m] x[m-1] + diag[m] x[m] + upper[m] x[m+1] = rhs[m]`` per line.

    ``lower[0]`` and ``upper[-1]`` are ignored.
    """

    lower: NDArray[np.float64]
    diag: NDArray[np.float64]
    upper: NDArray[np.float64]
    rhs: NDArray[np.float64]

    def __post_init__(self) -> None:
        shape = self.diag.shape
        for name in ("lower", "upper", "rhs"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def line_length(self) -> int:
        return self.diag.shape[0]

    @property
    def line_count(self) -> int:
        return int(np.prod(self.diag.shape[1:]))


@dataclass
class ThomasFactors:
    """Forward-elimination coefficients reusable for many right-hand sides."""

    lower: NDArray[np.float64]
    inv_pivot: NDArray[np.float64]
    upper_mod: NDArray[np.float64]


def thomas_factor(lower, diag, upper) -> ThomasFactors:
    n = diag.shape[0]
    inv_pivot = np.empty_like(diag, dtype=float)
    upper_mod = np.empty_like(diag, dtype=float)
    pivot = np.asarray(diag[0], dtype=float)
    for m in range(n):
        if m > 0:
            pivot = diag[m] - lower[m] * upper_mod[m - 1]
        if np.any(pivot == 0.0):
            raise ZeroPivotError(f"zero pivot at line position {m}")
        inv_pivot[m] = 1.0 / pivot
        upper_mod[m] = upper[m] * inv_pivot[m] if m < n - 1 else 0.0
    return ThomasFactors(np.asarray(lower, dtype=float), inv_pivot, upper_mod)


def thomas_substitute(factors: ThomasFactors, rhs, out=None) -> NDArray[np.float64]:
    """Solve with precomputed factors; ``out`` may alias ``rhs``."""
    lower, inv_pivot, upper_mod = factors.lower, factors.inv_pivot, factors.upper_mod
    n = inv_pivot.shape[0]
    x = np.array(rhs, dtype=float) if out is None else out
    if out is not None and out is not rhs:
        x[...] = rhs
    x[0] *= inv_pivot[0]
    for m in range(1, n):
        x[m] -= lower[m] * x[m - 1]
        x[m] *= inv_pivot[m]
    for m in range(n - 2, -1, -1):
        x[m] -= upper_mod[m] * x[m + 1]
    return x


def thomas_solve(batch: TridiagonalBatch) -> NDArray[np.float64]:
    """Solve every line of ``batch``; returns an array shaped like ``batch.rhs``."""
    factors = thomas_factor(batch.lower, batch.diag, batch.upper)
    return thomas_substitute(factors, batch.rhs)
