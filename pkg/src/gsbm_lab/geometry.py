"""Torus geometry: metric, ball volumes, block partition and block visibility.

The region is the cube ``[-L/2, L/2]^d`` with ``L = n**(1/d)``, glued into a
torus. Internally block coordinates are measured from the lower corner, so
block ``k`` along an axis spans ``[k*s, min((k+1)*s, L)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

# Relative slack on closed-form distance comparisons; absorbs float rounding
# in quantities that are exact in real arithmetic (e.g. 2 * (log n / 2)).
REL_TOL = 1e-10


def side_length(n: float, d: int) -> float:
    """Side ``n**(1/d)`` of the region."""
    return float(n) ** (1.0 / d)


def visibility_radius(n: float, d: int) -> float:
    """Radius ``(log n)**(1/d)`` within which vertices may share an edge."""
    return math.log(n) ** (1.0 / d)


def _check_dim(d: int) -> None:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")


def wrapped_delta(u: np.ndarray, v: np.ndarray, side: float) -> np.ndarray:
    """Per-coordinate toroidal differences ``min(|u-v|, side-|u-v|)``."""
    diff = np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))
    return np.minimum(diff, side - diff)


def torus_distance(u, v, n: float, d: int) -> float:
    """Toroidal Euclidean distance between two points of the region."""
    _check_dim(d)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if u.shape != (d,) or v.shape != (d,):
        raise ValueError(f"points must have {d} coordinates, got {u.shape} and {v.shape}")
    return float(np.sqrt(np.sum(wrapped_delta(u, v, side_length(n, d)) ** 2)))


def torus_distances(points: np.ndarray, u, n: float, d: int) -> np.ndarray:
    """Distances from ``u`` to every row of ``points``."""
    points = np.asarray(points, dtype=float).reshape(-1, d)
    return np.sqrt(np.sum(wrapped_delta(points, np.asarray(u, dtype=float), side_length(n, d)) ** 2, axis=1))


def unit_ball_volume(d: int) -> float:
    """Volume of the unit Euclidean ball in ``d`` dimensions."""
    _check_dim(d)
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _ceil_ratio(x: float, y: float) -> int:
    q = x / y
    r = round(q)
    if abs(q - r) <= 1e-9 * max(1.0, abs(q)):
        return max(1, int(r))
    return max(1, math.ceil(q))


@dataclass(frozen=True, eq=False)
class BlockGrid:
    """Partition of the region into hypercube blocks of volume ``chi * log n``.

    Block ids enumerate the multi-index in C order (axis 0 most significant).
    ``members[ptr[i]:ptr[i+1]]`` holds the vertex ids of block ``i`` in
    ascending order.
    """

    d: int
    n: float
    chi: float
    block_side: float
    side_count: int
    block_of: np.ndarray
    ptr: np.ndarray
    members: np.ndarray
    _extent: np.ndarray = field(repr=False)

    @property
    def num_blocks(self) -> int:
        return self.side_count**self.d

    @property
    def region_side(self) -> float:
        return side_length(self.n, self.d)

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.ptr)

    def vertices(self, block_id: int) -> np.ndarray:
        return self.members[self.ptr[block_id] : self.ptr[block_id + 1]]

    @property
    def block_vertex_lists(self) -> dict[int, list[int]]:
        return {i: self.vertices(i).tolist() for i in range(self.num_blocks)}

    def multi_index(self, block_ids) -> np.ndarray:
        """``(k, d)`` array of per-axis indices for the given block ids."""
        ids = np.atleast_1d(np.asarray(block_ids, dtype=np.int64))
        return np.stack(np.unravel_index(ids, (self.side_count,) * self.d), axis=1)

    def block_id(self, multi) -> np.ndarray:
        multi = np.asarray(multi, dtype=np.int64).reshape(-1, self.d)
        return np.ravel_multi_index(tuple(multi.T % self.side_count), (self.side_count,) * self.d)

    def axis_extent(self, k) -> np.ndarray:
        """Length along one axis of the blocks with per-axis index ``k``."""
        return self._extent[np.asarray(k, dtype=np.int64)]


def build_block_grid(points, n: float, d: int, chi: float) -> BlockGrid:
    """Assign every point to the block containing it.

    Points on an interior block boundary go to the block with the larger
    index; the region's upper face maps into the last block.
    """
    _check_dim(d)
    if chi <= 0:
        raise ValueError("chi must be positive")
    logn = math.log(n)
    if logn <= 0:
        raise ValueError("need log n > 0")
    side = side_length(n, d)
    block_side = (chi * logn) ** (1.0 / d)
    count = _ceil_ratio(side, block_side)
    extent = np.full(count, block_side)
    extent[-1] = side - (count - 1) * block_side
    if extent[-1] <= 0:  # ceil snapped down onto an exact fit
        extent[-1] = block_side

    pts = np.asarray(points, dtype=float).reshape(-1, d)
    idx = np.floor((pts + side / 2) / block_side).astype(np.int64)
    np.clip(idx, 0, count - 1, out=idx)
    if len(pts):
        block_of = np.ravel_multi_index(tuple(idx.T), (count,) * d).astype(np.int64)
    else:
        block_of = np.zeros(0, dtype=np.int64)
    members = np.argsort(block_of, kind="stable").astype(np.int64)
    ptr = np.zeros(count**d + 1, dtype=np.int64)
    np.cumsum(np.bincount(block_of, minlength=count**d), out=ptr[1:])
    return BlockGrid(
        d=d,
        n=float(n),
        chi=float(chi),
        block_side=block_side,
        side_count=count,
        block_of=block_of,
        ptr=ptr,
        members=members,
        _extent=extent,
    )


def _circular_sup(lo: np.ndarray, hi: np.ndarray, side: float) -> np.ndarray:
    """Max of the circular distance over ``x in [lo, hi]`` on a circle of length ``side``."""
    half = side / 2
    k = np.floor((lo + half) / side)
    lo_s = lo - k * side
    hi_s = hi - k * side
    return np.where(hi_s >= half, half, np.maximum(np.abs(lo_s), np.abs(hi_s)))


def block_sup_distance(grid: BlockGrid, i, j) -> np.ndarray:
    """Supremum of torus distances between points of blocks ``i`` and ``j`` (vectorised)."""
    mi = grid.multi_index(i)
    mj = grid.multi_index(j)
    s = grid.block_side
    lo = (mi - mj - 1) * s + (s - grid.axis_extent(mj))  # lo_i - hi_j
    hi = (mi - mj + 1) * s - (s - grid.axis_extent(mi))  # hi_i - lo_j
    per_axis = _circular_sup(lo.astype(float), hi.astype(float), grid.region_side)
    return np.sqrt(np.sum(per_axis**2, axis=1))


def blocks_mutually_visible(i: int, j: int, grid: BlockGrid, n: float | None = None, d: int | None = None) -> bool:
    """Whether every pair of points in the two closed blocks is within the visibility radius."""
    n = grid.n if n is None else n
    d = grid.d if d is None else d
    r = visibility_radius(n, d)
    return bool(block_sup_distance(grid, i, j)[0] <= r * (1 + REL_TOL))


def visible_offsets(chi: float, d: int) -> list[tuple[int, ...]]:
    """Non-zero integer offsets between full-size blocks that are mutually visible.

    Scale free: two blocks at offset ``o`` are visible iff
    ``|| |o| + 1 || * chi**(1/d) <= 1``.
    """
    s = chi ** (1.0 / d)
    reach = int(math.floor(1.0 / s)) + 1
    out = []
    for o in product(range(-reach, reach + 1), repeat=d):
        if any(o) and math.sqrt(sum((abs(k) + 1) ** 2 for k in o)) * s <= 1 + REL_TOL:
            out.append(o)
    return out
