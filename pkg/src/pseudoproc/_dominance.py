"""Counting reference points dominated by query points.

``count(q) = sum_j w_j 1{p_j <= q}`` (componentwise) is the workhorse behind
joint ECDFs, Kendall pseudo-observations and the level-set conditional
expectations.  In two dimensions a merge-sort tree answers a batch of queries in
O((M + Q) log^2 M); other dimensions fall back to chunked broadcasting.
"""

from __future__ import annotations

import numpy as np

_CHUNK_ELEMS = 2_000_000


class DominanceCounter:
    """Weighted dominance counts for a fixed planar point set.

    Ties are inclusive on both coordinates (``<=``), which is the ECDF
    convention.
    """

    def __init__(self, points, weights=None):
        p = np.asarray(points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("DominanceCounter needs an (M, 2) array")
        m = p.shape[0]
        self.size = m
        w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (m,):
            raise ValueError("weights must have one entry per point")

        order = np.argsort(p[:, 0], kind="stable")
        self._x = p[order, 0]
        y = p[order, 1]
        w = w[order]
        y_order = np.argsort(y, kind="stable")
        self._y_sorted = y[y_order]
        rank = np.empty(m, dtype=np.int64)
        rank[y_order] = np.arange(m, dtype=np.int64)
        self.total = float(w.sum())

        pos = np.arange(m, dtype=np.int64)
        self._levels = []
        for level in range(max(1, m.bit_length())):
            key = (pos >> level) * m + rank
            o = np.argsort(key, kind="stable")
            cw = np.concatenate(([0.0], np.cumsum(w[o])))
            self._levels.append((key[o], cw))

    def __call__(self, queries) -> np.ndarray:
        q = np.asarray(queries, dtype=float).reshape(-1, 2)
        out = np.zeros(q.shape[0])
        m = self.size
        if m == 0 or q.shape[0] == 0:
            return out
        i = np.searchsorted(self._x, q[:, 0], side="right").astype(np.int64)
        r = np.searchsorted(self._y_sorted, q[:, 1], side="right").astype(np.int64)
        for level, (keys, cw) in enumerate(self._levels):
            sel = np.flatnonzero((i >> level) & 1)
            if sel.size == 0:
                continue
            node = (i[sel] >> (level + 1)) << 1
            lo = np.searchsorted(keys, node * m, side="left")
            hi = np.searchsorted(keys, node * m + r[sel], side="left")
            out[sel] += cw[hi] - cw[lo]
        return out


def dominance_counts(points, queries, weights=None) -> np.ndarray:
    """``sum_j w_j 1{points_j <= query}`` for every query row."""
    p = np.asarray(points, dtype=float)
    q = np.asarray(queries, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    if q.ndim == 1:
        q = q[:, None] if p.shape[1] == 1 else q[None, :]
    d = p.shape[1]
    if q.shape[1] != d:
        raise ValueError(f"dimension mismatch: points have d={d}, queries d={q.shape[1]}")
    w = None if weights is None else np.asarray(weights, dtype=float)

    if d == 1:
        order = np.argsort(p[:, 0], kind="stable")
        xs = p[order, 0]
        cw = np.concatenate(([0.0], np.cumsum(np.ones(len(xs)) if w is None else w[order])))
        return cw[np.searchsorted(xs, q[:, 0], side="right")]
    if d == 2 and p.shape[0] * q.shape[0] > 50_000:
        return DominanceCounter(p, w)(q)

    out = np.empty(q.shape[0])
    step = max(1, _CHUNK_ELEMS // max(1, p.shape[0] * d))
    for start in range(0, q.shape[0], step):
        block = q[start:start + step]
        dom = np.all(p[None, :, :] <= block[:, None, :], axis=2)
        out[start:start + step] = dom.sum(axis=1) if w is None else dom @ w
    return out
