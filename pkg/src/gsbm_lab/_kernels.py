"""Compiled inner loops. Callers own validation; these assume consistent inputs."""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _dist2(pos, u, v, side):
    acc = 0.0
    for k in range(pos.shape[1]):
        t = abs(pos[u, k] - pos[v, k])
        if side - t < t:
            t = side - t
        acc += t * t
    return acc


@njit(cache=True)
def sample_edges_grid(pos, labels, order, cell_start, cell_nbrs, side, r2, a, b, seed):
    """Bernoulli-sample every visible unordered pair exactly once.

    Cell ``A`` is paired with each distinct neighbour cell ``B`` (including
    itself) and only ``u < v`` is kept, so each unordered pair is seen once.
    """
    np.random.seed(seed)
    cap = 1024
    eu = np.empty(cap, dtype=np.int64)
    ev = np.empty(cap, dtype=np.int64)
    m = 0
    ncell = cell_start.shape[0] - 1
    for ca in range(ncell):
        for t in range(cell_nbrs.shape[1]):
            cb = cell_nbrs[ca, t]
            if cb < 0:
                continue
            for ia in range(cell_start[ca], cell_start[ca + 1]):
                u = order[ia]
                for ib in range(cell_start[cb], cell_start[cb + 1]):
                    v = order[ib]
                    if u >= v:
                        continue
                    if _dist2(pos, u, v, side) > r2:
                        continue
                    p = a if labels[u] == labels[v] else b
                    if np.random.random() < p:
                        if m == cap:
                            cap *= 2
                            nu = np.empty(cap, dtype=np.int64)
                            nv = np.empty(cap, dtype=np.int64)
                            nu[:m] = eu[:m]
                            nv[:m] = ev[:m]
                            eu = nu
                            ev = nv
                        eu[m] = u
                        ev[m] = v
                        m += 1
    return eu[:m].copy(), ev[:m].copy()


@njit(cache=True)
def visible_category_counts(pos, cats, ncat, cell_of, order, cell_start, cell_nbrs, side, r2, include_self):
    """``out[u, c]`` = number of vertices ``v`` with ``cats[v] == c`` within the radius of ``u``.

    Vertices with a negative category are ignored.
    """
    nv = pos.shape[0]
    out = np.zeros((nv, ncat), dtype=np.int64)
    for u in range(nv):
        cu = cell_of[u]
        for t in range(cell_nbrs.shape[1]):
            cb = cell_nbrs[cu, t]
            if cb < 0:
                continue
            for ib in range(cell_start[cb], cell_start[cb + 1]):
                v = order[ib]
                c = cats[v]
                if c < 0:
                    continue
                if v == u:
                    if include_self:
                        out[u, c] += 1
                    continue
                if _dist2(pos, u, v, side) <= r2:
                    out[u, c] += 1
    return out


@njit(cache=True)
def neighbor_label_counts(indptr, indices, sigma):
    """Per vertex: number of neighbours labelled +1 and -1 in ``sigma``."""
    nv = indptr.shape[0] - 1
    out = np.zeros((nv, 2), dtype=np.int64)
    for u in range(nv):
        for k in range(indptr[u], indptr[u + 1]):
            s = sigma[indices[k]]
            if s == 1:
                out[u, 0] += 1
            elif s == -1:
                out[u, 1] += 1
    return out


@njit(cache=True)
def propagate_blocks(indptr, indices, block_of, bptr, bmembers, order, parent, sigma, a_gt_b, thr_num, thr_den):
    """Label blocks ``order[1:]`` from their parents, in place on ``sigma``.

    Decision for ``u``: with ``m`` the majority reference class and ``k`` its
    size, compare ``thr_den * d_m(u) >= thr_num * k`` where
    ``thr_num / thr_den == (a + b) / 2``.
    """
    for j in range(1, order.shape[0]):
        blk = order[j]
        ref = parent[blk]
        kp = 0
        km = 0
        for t in range(bptr[ref], bptr[ref + 1]):
            s = sigma[bmembers[t]]
            if s == 1:
                kp += 1
            elif s == -1:
                km += 1
        m = 1 if kp >= km else -1
        k = kp if m == 1 else km
        for t in range(bptr[blk], bptr[blk + 1]):
            u = bmembers[t]
            cnt = 0
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if block_of[v] == ref and sigma[v] == m:
                    cnt += 1
            above = thr_den * cnt >= thr_num * k
            hit = above if a_gt_b else not above
            sigma[u] = m if hit else -m


@njit(cache=True)
def csr_from_pairs(nv, eu, ev):
    """Symmetric CSR with per-row ascending neighbour ids."""
    deg = np.zeros(nv, dtype=np.int64)
    for k in range(eu.shape[0]):
        deg[eu[k]] += 1
        deg[ev[k]] += 1
    indptr = np.zeros(nv + 1, dtype=np.int64)
    for u in range(nv):
        indptr[u + 1] = indptr[u] + deg[u]
    fill = indptr[:-1].copy()
    indices = np.empty(indptr[nv], dtype=np.int64)
    for k in range(eu.shape[0]):
        u = eu[k]
        v = ev[k]
        indices[fill[u]] = v
        fill[u] += 1
        indices[fill[v]] = u
        fill[v] += 1
    for u in range(nv):
        indices[indptr[u] : indptr[u + 1]] = np.sort(indices[indptr[u] : indptr[u + 1]])
    return indptr, indices
