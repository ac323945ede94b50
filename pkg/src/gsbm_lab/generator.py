"""Sampling of GSBM(lambda, n, a, b, d) instances and the text dump format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import _kernels
from .geometry import side_length, visibility_radius, wrapped_delta


@dataclass(frozen=True)
class ModelParams:
    lam: float
    n: float
    a: float
    b: float
    d: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.n >= 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        for name in ("a", "b"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))

    @property
    def radius(self) -> float:
        return visibility_radius(self.n, self.d)

    @property
    def side(self) -> float:
        return side_length(self.n, self.d)


def stream_seeds(seed: int | None) -> tuple[np.random.SeedSequence, ...]:
    """Independent (points, labels, edges) streams derived from one master seed."""
    return tuple(np.random.SeedSequence(seed).spawn(3))


@dataclass(frozen=True, eq=False)
class SpatialIndex:
    """Uniform cell grid over the torus with cells no smaller than the radius.

    ``order[cell_start[c]:cell_start[c+1]]`` are the vertices of cell ``c``;
    ``cell_nbrs[c]`` lists the distinct cells of the 3^d stencil around ``c``
    (padded with -1 where wraparound folds the stencil onto itself).
    """

    cells_per_axis: int
    cell_side: float
    cell_of: np.ndarray
    order: np.ndarray
    cell_start: np.ndarray
    cell_nbrs: np.ndarray

    def candidates(self, u_cell: int) -> np.ndarray:
        out = [self.order[self.cell_start[c] : self.cell_start[c + 1]] for c in self.cell_nbrs[u_cell] if c >= 0]
        return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def build_spatial_index(positions: np.ndarray, n: float, d: int) -> SpatialIndex:
    side = side_length(n, d)
    radius = visibility_radius(n, d)
    c = max(1, int(math.floor(side / radius)))
    cell_side = side / c
    pos = np.asarray(positions, dtype=float).reshape(-1, d)
    idx = np.floor((pos + side / 2) / cell_side).astype(np.int64)
    np.clip(idx, 0, c - 1, out=idx)
    shape = (c,) * d
    cell_of = np.ravel_multi_index(tuple(idx.T), shape).astype(np.int64) if len(pos) else np.zeros(0, np.int64)
    order = np.argsort(cell_of, kind="stable").astype(np.int64)
    cell_start = np.zeros(c**d + 1, dtype=np.int64)
    np.cumsum(np.bincount(cell_of, minlength=c**d), out=cell_start[1:])

    all_cells = np.stack(np.unravel_index(np.arange(c**d), shape), axis=1)
    cols = []
    for off in product((-1, 0, 1), repeat=d):
        cols.append(np.ravel_multi_index(tuple(((all_cells + np.array(off)) % c).T), shape))
    nbrs = np.sort(np.stack(cols, axis=1), axis=1)
    dup = np.zeros_like(nbrs, dtype=bool)
    dup[:, 1:] = nbrs[:, 1:] == nbrs[:, :-1]
    nbrs[dup] = -1
    return SpatialIndex(c, cell_side, cell_of, order, cell_start, nbrs.astype(np.int64))


@dataclass(frozen=True, eq=False)
class GeometricGraph:
    """A sampled instance: positions, ground truth and CSR adjacency.

    ``indices[indptr[u]:indptr[u+1]]`` are the neighbours of ``u`` in
    ascending order.
    """

    positions: np.ndarray
    truth: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    n: float
    d: int
    params: ModelParams | None = None
    seed: int | None = None
    index: SpatialIndex = field(default=None, repr=False)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", build_spatial_index(self.positions, self.n, self.d))

    @property
    def num_vertices(self) -> int:
        return len(self.truth)

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def radius(self) -> float:
        return visibility_radius(self.n, self.d)

    @property
    def side(self) -> float:
        return side_length(self.n, self.d)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        k = np.searchsorted(nb, v)
        return bool(k < len(nb) and nb[k] == v)

    def edge_list(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.num_vertices), np.diff(self.indptr))
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def visible_from(self, u: int) -> np.ndarray:
        """Ids of vertices other than ``u`` within the visibility radius, ascending."""
        cand = self.index.candidates(self.index.cell_of[u])
        cand = cand[cand != u]
        dist2 = np.sum(wrapped_delta(self.positions[cand], self.positions[u], self.side) ** 2, axis=1)
        return np.sort(cand[dist2 <= self.radius**2])

    def visible_counts(self, cats: np.ndarray, ncat: int, include_self: bool = False) -> np.ndarray:
        """Per-vertex counts of visible vertices by category (negative = skipped)."""
        ix = self.index
        return _kernels.visible_category_counts(
            self.positions,
            np.asarray(cats, dtype=np.int64),
            ncat,
            ix.cell_of,
            ix.order,
            ix.cell_start,
            ix.cell_nbrs,
            self.side,
            self.radius**2,
            include_self,
        )


def _csr_from_edges(num_vertices: int, eu: np.ndarray, ev: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    eu = np.ascontiguousarray(eu, dtype=np.int64)
    ev = np.ascontiguousarray(ev, dtype=np.int64)
    if len(eu) and (np.any(eu == ev) or min(eu.min(), ev.min()) < 0 or max(eu.max(), ev.max()) >= num_vertices):
        raise ValueError("edges must join two distinct existing vertices")
    return _kernels.csr_from_pairs(num_vertices, eu, ev)


def sample_point_process(params: ModelParams, seed) -> np.ndarray:
    """Homogeneous Poisson process of intensity lambda on the region, shape ``(N, d)``."""
    rng = np.random.default_rng(seed)
    count = rng.poisson(params.lam * params.n)
    half = params.side / 2
    return rng.uniform(-half, half, size=(count, params.d))


def sample_labels(count: int, seed) -> np.ndarray:
    """I.i.d. uniform +-1 labels as ``int8``."""
    rng = np.random.default_rng(seed)
    return (2 * rng.integers(0, 2, size=count) - 1).astype(np.int8)


def sample_edges(positions, truth, params: ModelParams, seed, index: SpatialIndex | None = None) -> GeometricGraph:
    positions = np.ascontiguousarray(positions, dtype=float).reshape(-1, params.d)
    truth = np.asarray(truth, dtype=np.int8)
    if len(positions) != len(truth):
        raise ValueError("positions and labels differ in length")
    if index is None:
        index = build_spatial_index(positions, params.n, params.d)
    if isinstance(seed, np.random.SeedSequence):
        kseed = int(seed.generate_state(1)[0])
    else:
        kseed = int(np.random.SeedSequence(seed).generate_state(1)[0])
    eu, ev = _kernels.sample_edges_grid(
        positions,
        truth,
        index.order,
        index.cell_start,
        index.cell_nbrs,
        params.side,
        params.radius**2,
        float(params.a),
        float(params.b),
        kseed,
    )
    indptr, indices = _csr_from_edges(len(truth), eu, ev)
    return GeometricGraph(positions, truth, indptr, indices, params.n, params.d, params, index=index)


def sample_gsbm(params: ModelParams, seed: int | None) -> GeometricGraph:
    """Sample a full instance; the three stages draw from independent child streams."""
    s_pts, s_lab, s_edge = stream_seeds(seed)
    positions = sample_point_process(params, s_pts)
    truth = sample_labels(len(positions), s_lab)
    g = sample_edges(positions, truth, params, s_edge)
    object.__setattr__(g, "seed", seed)
    return g


def common_neighbor_count(g: GeometricGraph, u0: int, u: int, S) -> int:
    """Number of ``v`` in ``S`` other than ``u, u0`` adjacent to both."""
    if u0 == u:
        raise ValueError("u0 and u must differ")
    s = np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64)
    s = s[(s != u) & (s != u0)]
    both = np.intersect1d(g.neighbors(u0), g.neighbors(u), assume_unique=True)
    return int(np.isin(s, both).sum())


def with_edges(g: GeometricGraph, edges: np.ndarray) -> GeometricGraph:
    """Same points and labels with a different edge set (``(m, 2)`` array)."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    indptr, indices = _csr_from_edges(g.num_vertices, edges[:, 0], edges[:, 1])
    return GeometricGraph(g.positions, g.truth, indptr, indices, g.n, g.d, g.params, g.seed, g.index)


def dump_instance(g: GeometricGraph, path) -> None:
    """Write the line-oriented ``gsbm v1`` text format."""
    p = g.params
    lam = repr(float(p.lam)) if p else "nan"
    a = repr(float(p.a)) if p else "nan"
    b = repr(float(p.b)) if p else "nan"
    seed = str(g.seed) if g.seed is not None else "-"
    lines = [f"gsbm v1 {g.d} {lam} {float(g.n)!r} {a} {b} {seed}"]
    for i, (x, lab) in enumerate(zip(g.positions, g.truth)):
        coords = " ".join(format(c, ".17g") for c in x)
        lines.append(f"v {i} {coords} {int(lab)}")
    for u, v in g.edge_list():
        lines.append(f"e {u} {v}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path) -> GeometricGraph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 8 or header[:2] != ["gsbm", "v1"]:
            raise ValueError(f"not a gsbm v1 file: {path}")
        d = int(header[2])
        lam, n, a, b = (float(x) for x in header[3:7])
        seed = None if header[7] == "-" else int(header[7])
        ids, coords, labels, edges = [], [], [], []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                ids.append(int(parts[1]))
                coords.append([float(c) for c in parts[2 : 2 + d]])
                labels.append(int(parts[2 + d]))
            elif parts[0] == "e":
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise ValueError(f"bad record {parts[0]!r}")
    if ids != list(range(len(ids))):
        raise ValueError("vertex ids must be 0..N-1 in order")
    params = None if math.isnan(lam) else ModelParams(lam, n, a, b, d)
    positions = np.array(coords, dtype=float).reshape(-1, d)
    e = np.array(edges, dtype=np.int64).reshape(-1, 2)
    indptr, indices = _csr_from_edges(len(ids), e[:, 0], e[:, 1])
    return GeometricGraph(positions, np.array(labels, dtype=np.int8), indptr, indices, n, d, params, seed)
