"""Almost-exact labeling: classify the root block, then propagate along the BFS tree.

Thresholds are compared in exact rational arithmetic. ``a`` and ``b`` may be
given as decimal strings, ``Fraction`` or float; floats are read through their
shortest decimal repr, so ``0.7`` means exactly 7/10.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernels
from .generator import GeometricGraph
from .geometry import BlockGrid
from .visibility import DisconnectedError, VisibilityGraph, bfs_order, connected


def exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(repr(float(x)))


@dataclass(frozen=True, eq=False)
class Phase1Result:
    sigma_hat: np.ndarray
    root_vertex: int
    per_block_mistakes: dict[int, int] | None = None


def pairwise_classify(g: GeometricGraph, S, a, b) -> dict[int, int]:
    """Label ``S`` relative to its lowest-id vertex by counting common neighbours.

    ``u`` joins ``u0``'s side iff ``#common > (a+b)^2 (|S|-2) / 4``.
    """
    fa, fb = exact(a), exact(b)
    if fa == fb:
        raise ValueError("a and b must differ")
    S = np.unique(np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64))
    if len(S) == 0:
        raise ValueError("cannot classify an empty vertex set")
    u0 = int(S[0])
    s = fa + fb
    rhs = s.numerator**2 * (len(S) - 2)
    scale = 4 * s.denominator**2
    in_s = np.zeros(g.num_vertices, dtype=bool)
    in_s[S] = True
    mark = np.zeros(g.num_vertices, dtype=bool)
    nb0 = g.neighbors(u0)
    mark[nb0[in_s[nb0]]] = True
    out = {u0: 1}
    for u in S[1:]:
        nb = g.neighbors(int(u))
        common = int(np.count_nonzero(mark[nb]))  # u and u0 are never marked for themselves
        out[int(u)] = 1 if scale * common > rhs else -1
    return out


def propagate(g: GeometricGraph, S_ref, S_new, sigma_hat, a, b, trace: list | None = None) -> dict[int, int]:
    """Label ``S_new`` from the labeled reference set ``S_ref``.

    Uses edges from each ``u`` to the more numerous reference class ``m``
    (ties go to +1): ``u`` gets ``m`` iff ``d_m(u) >= (a+b) k_m / 2`` when
    a > b, iff ``d_m(u) < (a+b) k_m / 2`` when a < b. ``trace``, when given,
    collects every ``(u, v)`` edge read.
    """
    fa, fb = exact(a), exact(b)
    if fa == fb:
        raise ValueError("a and b must differ")
    S_ref = np.asarray(list(S_ref) if not isinstance(S_ref, np.ndarray) else S_ref, dtype=np.int64)
    S_new = np.asarray(list(S_new) if not isinstance(S_new, np.ndarray) else S_new, dtype=np.int64)
    sigma_hat = np.asarray(sigma_hat)
    ref_lab = sigma_hat[S_ref]
    if np.any((ref_lab != 1) & (ref_lab != -1)):
        raise ValueError("reference set must be fully labeled with +-1")
    kp = int(np.sum(ref_lab == 1))
    km = int(np.sum(ref_lab == -1))
    m = 1 if kp >= km else -1
    k = kp if m == 1 else km
    thr = (fa + fb) / 2
    in_class = np.zeros(g.num_vertices, dtype=bool)
    in_class[S_ref[ref_lab == m]] = True
    out = {}
    for u in S_new:
        u = int(u)
        nb = g.neighbors(u)
        hits = nb[in_class[nb]]
        if trace is not None:
            trace.extend((u, int(v)) for v in nb[np.isin(nb, S_ref)])
        above = len(hits) * thr.denominator >= thr.numerator * k
        hit = above if fa > fb else not above
        out[u] = m if hit else -m
    return out


def run_phase1(g: GeometricGraph, grid: BlockGrid, vg: VisibilityGraph, params=None, a=None, b=None) -> Phase1Result:
    """Root-block classification followed by tree propagation; unoccupied blocks get 0.

    ``a``/``b`` default to ``params.a``/``params.b``. Raises
    ``DisconnectedError`` when ``vg`` is disconnected.
    """
    a = params.a if a is None else a
    b = params.b if b is None else b
    fa, fb = exact(a), exact(b)
    if fa == fb:
        raise ValueError("a and b must differ")
    if not connected(vg):
        raise DisconnectedError("visibility graph is disconnected")
    sigma = np.zeros(g.num_vertices, dtype=np.int8)
    if len(vg.occupied) == 0:
        return Phase1Result(sigma, -1, _mistakes(g, grid, sigma, -1))
    if len(vg.order):
        order, parent = vg.order, vg.parent
    else:
        order, parent = bfs_order(vg)
    root = int(order[0])
    root_vertices = grid.vertices(root)
    for u, lab in pairwise_classify(g, root_vertices, fa, fb).items():
        sigma[u] = lab
    parent_arr = np.full(grid.num_blocks, -1, dtype=np.int64)
    for blk, par in parent.items():
        parent_arr[blk] = par
    thr = (fa + fb) / 2
    _kernels.propagate_blocks(
        g.indptr,
        g.indices,
        grid.block_of,
        grid.ptr,
        grid.members,
        np.asarray(order, dtype=np.int64),
        parent_arr,
        sigma,
        bool(fa > fb),
        int(thr.numerator),
        int(thr.denominator),
    )
    u0 = int(root_vertices[0])
    return Phase1Result(sigma, u0, _mistakes(g, grid, sigma, u0))


def _mistakes(g: GeometricGraph, grid: BlockGrid, sigma: np.ndarray, u0: int) -> dict[int, int] | None:
    if g.truth is None or u0 < 0:
        return None
    wrong = sigma != g.truth[u0] * g.truth
    per_block = np.bincount(grid.block_of[wrong], minlength=grid.num_blocks)
    return {int(i): int(c) for i, c in enumerate(per_block) if grid.ptr[i + 1] > grid.ptr[i]}


def dump_phase1(result: Phase1Result, grid: BlockGrid, path) -> None:
    """Text dump: one ``<block_id> <vid>:<label> ...`` line per nonempty block."""
    lines = [f"phase1 root {result.root_vertex}"]
    for i in np.flatnonzero(grid.counts):
        vs = grid.vertices(int(i))
        lines.append(f"{int(i)} " + " ".join(f"{int(v)}:{int(result.sigma_hat[v])}" for v in vs))
    Path(path).write_text("\n".join(lines) + "\n")


def load_phase1(path, num_vertices: int) -> Phase1Result:
    with open(path) as fh:
        head = fh.readline().split()
        if head[:2] != ["phase1", "root"]:
            raise ValueError("not a phase1 dump")
        sigma = np.zeros(num_vertices, dtype=np.int8)
        for line in fh:
            parts = line.split()
            for tok in parts[1:]:
                v, lab = tok.split(":")
                sigma[int(v)] = int(lab)
    return Phase1Result(sigma, int(head[2]))
