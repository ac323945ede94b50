"""Occupied blocks, the block visibility graph and its propagation schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .geometry import REL_TOL, BlockGrid, block_sup_distance, visibility_radius


class DisconnectedError(RuntimeError):
    """The visibility graph has more than one component; propagation cannot reach every block."""


def occupied_blocks(grid: BlockGrid, delta: float, n: float | None = None) -> np.ndarray:
    """Ids of blocks holding strictly more than ``delta * log n`` vertices, ascending."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = grid.n if n is None else n
    return np.flatnonzero(grid.counts > delta * math.log(n))


@dataclass(frozen=True, eq=False)
class VisibilityGraph:
    occupied: np.ndarray
    edges: np.ndarray  # (m, 2), i < j, sorted
    delta: float
    num_blocks: int
    order: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    parent: dict = field(default_factory=dict)

    def adjacency(self) -> csr_matrix:
        m = self.num_blocks
        e = self.edges
        data = np.ones(2 * len(e), dtype=np.int8)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = coo_matrix((data, (rows, cols)), shape=(m, m)).tocsr()
        adj.sort_indices()
        return adj

    def neighbors(self, block: int) -> np.ndarray:
        adj = self.adjacency()
        return adj.indices[adj.indptr[block] : adj.indptr[block + 1]]


def _candidate_offsets(grid: BlockGrid, radius: float) -> np.ndarray:
    reach = min(int(math.ceil(radius / grid.block_side)) + 1, grid.side_count // 2 + 1)
    offs = [o for o in product(range(-reach, reach + 1), repeat=grid.d) if any(o)]
    return np.array(offs, dtype=np.int64).reshape(-1, grid.d)


def build_visibility_graph(grid: BlockGrid, delta: float, n: float | None = None, d: int | None = None) -> VisibilityGraph:
    """Graph on occupied blocks joining mutually visible pairs.

    Candidates come from a bounded stencil of block offsets around each
    occupied block; each is confirmed by the exact sup-distance test.
    """
    n = grid.n if n is None else n
    d = grid.d if d is None else d
    radius = visibility_radius(n, d)
    occ = occupied_blocks(grid, delta, n)
    is_occ = np.zeros(grid.num_blocks, dtype=bool)
    is_occ[occ] = True
    mi = grid.multi_index(occ) if len(occ) else np.zeros((0, d), dtype=np.int64)
    pairs = []
    for off in _candidate_offsets(grid, radius):
        j = grid.block_id(mi + off) if len(occ) else np.zeros(0, dtype=np.int64)
        keep = (j != occ) & is_occ[j] & (occ < j)
        if not keep.any():
            continue
        i_k, j_k = occ[keep], j[keep]
        vis = block_sup_distance(grid, i_k, j_k) <= radius * (1 + REL_TOL)
        if vis.any():
            pairs.append(np.stack([i_k[vis], j_k[vis]], axis=1))
    if pairs:
        edges = np.unique(np.concatenate(pairs), axis=0)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    return VisibilityGraph(occupied=occ, edges=edges, delta=delta, num_blocks=grid.num_blocks)


def connected(vg: VisibilityGraph) -> bool:
    if len(vg.occupied) <= 1:
        return True
    _, labels = connected_components(vg.adjacency(), directed=False)
    return bool(np.all(labels[vg.occupied] == labels[vg.occupied[0]]))


def bfs_order(vg: VisibilityGraph, root: int | None = None) -> tuple[np.ndarray, dict[int, int]]:
    """Breadth-first order from ``root`` (default: lowest occupied id).

    Neighbours are enqueued in ascending block id.
    """
    if len(vg.occupied) == 0:
        return np.zeros(0, dtype=np.int64), {}
    if root is None:
        root = int(vg.occupied[0])
    if root not in set(vg.occupied.tolist()):
        raise ValueError(f"root {root} is not an occupied block")
    if not connected(vg):
        raise DisconnectedError("visibility graph is disconnected")
    order, pred = breadth_first_order(vg.adjacency(), root, directed=True, return_predecessors=True)
    order = order.astype(np.int64)
    parent = {int(b): int(pred[b]) for b in order[1:]}
    return order, parent


def with_schedule(vg: VisibilityGraph, root: int | None = None) -> VisibilityGraph:
    """Copy of ``vg`` carrying its BFS order and parent map (empty if disconnected)."""
    if not connected(vg) or len(vg.occupied) == 0:
        return vg
    order, parent = bfs_order(vg, root)
    return VisibilityGraph(vg.occupied, vg.edges, vg.delta, vg.num_blocks, order, parent)


def max_unoccupied_cluster(grid: BlockGrid, delta: float, n: float | None = None, d: int | None = None) -> int:
    """Size of the largest set of unoccupied blocks connected by edge/corner adjacency (toroidal)."""
    n = grid.n if n is None else n
    d = grid.d if d is None else d
    un = np.ones(grid.num_blocks, dtype=bool)
    un[occupied_blocks(grid, delta, n)] = False
    ids = np.flatnonzero(un)
    if len(ids) == 0:
        return 0
    mi = grid.multi_index(ids)
    rows, cols = [], []
    for off in product((-1, 0, 1), repeat=d):
        if not any(off):
            continue
        j = grid.block_id(mi + np.array(off))
        keep = un[j] & (j != ids)
        rows.append(ids[keep])
        cols.append(j[keep])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    adj = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(grid.num_blocks,) * 2).tocsr()
    _, labels = connected_components(adj, directed=False)
    return int(np.bincount(labels[ids]).max())
