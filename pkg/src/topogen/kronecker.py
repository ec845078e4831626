"""Kronecker's criterion on the n-torus.

A point ``(a_1, ..., a_n)`` generates a dense subgroup of ``T^n`` iff
``1, a_1, ..., a_n`` are linearly independent over Q.  Coordinates are given
as rational rows over a declared basis ``1, alpha_1, ..., alpha_d`` whose
Q-independence is taken on trust, which turns the criterion into an exact
rank computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "CoordVector",
    "CoveringEstimate",
    "rational_rank",
    "is_topological_generator",
    "orbit_covering_radius",
    "parse_basis",
]

_NAMED_CONSTANTS = {
    "1": 1.0,
    "pi": math.pi,
    "e": math.e,
    "phi": (1 + math.sqrt(5)) / 2,
    "golden": (1 + math.sqrt(5)) / 2,
}


def _basis_value(sym: str) -> float:
    sym = sym.strip()
    if sym in _NAMED_CONSTANTS:
        return _NAMED_CONSTANTS[sym]
    if sym.startswith("sqrt"):
        return math.sqrt(float(sym[4:]))
    try:
        return float(sym)
    except ValueError:
        raise ValueError(f"unknown basis symbol {sym!r}") from None


def parse_basis(text: str) -> tuple[list[str], list[float]]:
    """Split ``"1,sqrt2,pi"`` into symbols and float values; the first must be ``1``."""
    syms = [s.strip() for s in text.split(",") if s.strip()]
    if not syms or syms[0] != "1":
        raise ValueError("basis must start with the constant 1")
    return syms, [_basis_value(s) for s in syms]


@dataclass(frozen=True)
class CoordVector:
    """Torus point whose coordinate ``j`` equals ``sum(rows[j][t] * basis[t])``."""

    basis: tuple[str, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        d = len(self.basis)
        if d == 0 or self.basis[0] != "1":
            raise ValueError("basis must start with the constant 1")
        rows = tuple(tuple(Fraction(c) for c in row) for row in self.rows)
        for row in rows:
            if len(row) != d:
                raise ValueError(f"coordinate row {row} has length {len(row)}, basis has {d}")
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def matrix(self) -> list[list[Fraction]]:
        one = [Fraction(1)] + [Fraction(0)] * (len(self.basis) - 1)
        return [one] + [list(r) for r in self.rows]

    def approximate(self) -> np.ndarray:
        vals = np.array([_basis_value(s) for s in self.basis])
        return np.array([float(sum(float(c) * v for c, v in zip(row, vals))) for row in self.rows])


def rational_rank(matrix: Sequence[Sequence]) -> int:
    """Rank over Q by fraction-exact Gaussian elimination."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for r in range(rank + 1, len(rows)):
            f = rows[r][col] / p[col]
            if f:
                rows[r] = [x - f * y for x, y in zip(rows[r], p)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def is_topological_generator(cv: CoordVector) -> bool:
    return rational_rank(cv.matrix()) == cv.dim + 1


@dataclass(frozen=True)
class CoveringEstimate:
    radius: float
    cell_diameter: float
    coarse: bool  # True when the grid cannot resolve the reported radius


def _exact_gaps(a: Fraction, K: int) -> Fraction:
    pts = sorted({(k * a) % 1 for k in range(K)})
    if len(pts) == 1:
        return Fraction(1)
    gaps = [y - x for x, y in zip(pts, pts[1:])]
    gaps.append(1 - pts[-1] + pts[0])
    return max(gaps)


def orbit_covering_radius(a, K: int, resolution: int = 64):
    """Largest hole left by the first ``K`` orbit points ``{k a mod 1}``.

    In one dimension this is the maximum circular gap between sorted points
    (exact for a :class:`~fractions.Fraction`, double precision otherwise); a
    single point leaves a gap of 1.  For ``n >= 2`` coordinates it returns a
    :class:`CoveringEstimate`: the largest distance from a grid-cell centre to
    the nearest orbit point under the flat torus metric.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if isinstance(a, (Fraction, int)):
        return _exact_gaps(Fraction(a), K)
    vec = np.atleast_1d(np.asarray(a, dtype=float))
    k = np.arange(K, dtype=float)
    if vec.size == 1:
        pts = np.unique(np.mod(k * vec[0], 1.0))
        if pts.size == 1:
            return 1.0
        gaps = np.diff(pts)
        return float(max(gaps.max(), 1.0 - pts[-1] + pts[0]))

    n = vec.size
    pts = np.mod(np.outer(k, vec), 1.0)
    tree = cKDTree(pts, boxsize=1.0)
    axis = (np.arange(resolution) + 0.5) / resolution
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    dist, _ = tree.query(grid)
    radius = float(dist.max())
    cell = math.sqrt(n) / resolution
    return CoveringEstimate(radius, cell, cell > radius)


def orbit_radius_series(a, Ks: Sequence[int], resolution: int = 64) -> list[tuple[int, object]]:
    return [(K, orbit_covering_radius(a, K, resolution)) for K in Ks]


def parse_coords(text: str, d: int) -> list[list[Fraction]]:
    """``"0,1;1,1"`` -> two coordinate rows over a basis of size ``d``."""
    rows = []
    for chunk in text.split(";"):
        row = [Fraction(c.strip()) for c in chunk.split(",") if c.strip()]
        if len(row) != d:
            raise ValueError(f"coordinate row {chunk!r} needs {d} entries")
        rows.append(row)
    return rows
