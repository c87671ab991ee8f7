"""Vietoris-Rips persistence in dimensions 0 and 1.

Simplices are ordered by (filtration value, dimension, vertex tuple).  H0 is
read off a union-find pass over the edges, which yields exactly the pairs of
the reduced edge boundary matrix.  H1 comes from a Z2 column reduction of the
triangle boundary matrix whose columns are generated on demand, grouped by
their diameter edge, so the sweep can stop as soon as every cycle-creating
edge has been paired.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.spatial.distance import pdist, squareform

from .errors import EmptyCloud, EmptyInput

DEFAULT_POINT_CAP = 600


@dataclass
class PersistenceDiagram:
    hom_dim: int
    pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    essential: np.ndarray = field(default_factory=lambda: np.empty(0))
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=float).reshape(-1, 2)
        self.essential = np.asarray(self.essential, dtype=float).reshape(-1)

    def __len__(self):
        return len(self.pairs)

    @property
    def births(self):
        return self.pairs[:, 0]

    @property
    def deaths(self):
        return self.pairs[:, 1]

    @property
    def persistence(self):
        return self.pairs[:, 1] - self.pairs[:, 0]

    def off_diagonal(self) -> "PersistenceDiagram":
        """Copy with diagonal (zero-persistence) points dropped."""
        keep = self.pairs[:, 1] > self.pairs[:, 0]
        return PersistenceDiagram(self.hom_dim, self.pairs[keep], self.essential,
                                  dict(self.provenance))

    def sorted_pairs(self):
        return sorted(map(tuple, self.pairs.tolist()))

    def to_dict(self) -> dict:
        return {
            "hom_dim": int(self.hom_dim),
            "pairs": self.pairs.tolist(),
            "essential": self.essential.tolist(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PersistenceDiagram":
        return cls(int(d["hom_dim"]), d["pairs"], d["essential"], dict(d.get("provenance", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "PersistenceDiagram":
        return cls.from_dict(json.loads(s))


def distance_matrix(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise EmptyCloud("point cloud has no points")
    if pts.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(pts))


def enclosing_radius(dist: np.ndarray) -> float:
    return float(np.min(np.max(dist, axis=1)))


def farthest_point_subsample(points, cap: int, start: int = 0) -> np.ndarray:
    """Indices of a greedy max-min subsample of size ``cap`` (deterministic)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n <= cap:
        return np.arange(n)
    chosen = np.empty(cap, dtype=np.int64)
    chosen[0] = start
    mind = np.linalg.norm(pts - pts[start], axis=1)
    for m in range(1, cap):
        nxt = int(np.argmax(mind))
        chosen[m] = nxt
        np.minimum(mind, np.linalg.norm(pts - pts[nxt], axis=1), out=mind)
    return np.sort(chosen)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # keep the smaller index as representative so the result is order-stable
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def _sorted_edges(dist, max_radius):
    n = dist.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    vals = dist[iu, ju]
    keep = vals <= max_radius
    iu, ju, vals = iu[keep], ju[keep], vals[keep]
    order = np.lexsort((ju, iu, vals))
    return iu[order], ju[order], vals[order]


def rips_persistence(dist, max_hom_dim: int = 1, max_radius: float | None = None,
                     compiled: bool = True) -> dict:
    """H0 (and H1) Rips diagrams of a distance matrix.

    Returns ``{0: PersistenceDiagram, 1: PersistenceDiagram}`` (H1 only when
    ``max_hom_dim == 1``).  ``max_radius`` defaults to the enclosing radius,
    past which the complex is a cone and carries no H1.  ``compiled=False``
    runs the reference pure-Python sweep (same pairs, slower).
    """
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.shape[0] == 0:
        raise EmptyInput("distance matrix is empty")
    if dist.shape[0] != dist.shape[1]:
        raise EmptyInput(f"distance matrix must be square, got {dist.shape}")
    if max_hom_dim not in (0, 1):
        raise ValueError("max_hom_dim must be 0 or 1")
    n = dist.shape[0]
    if max_radius is None:
        max_radius = enclosing_radius(dist)

    ei, ej, ev = _sorted_edges(dist, max_radius)
    n_edges = len(ev)

    uf = _UnionFind(n)
    h0_deaths = []
    positive = np.zeros(n_edges, dtype=bool)
    for e in range(n_edges):
        if uf.union(int(ei[e]), int(ej[e])):
            h0_deaths.append(ev[e])
        else:
            positive[e] = True
    n_components = sum(1 for v in range(n) if uf.find(v) == v)
    h0_pairs = [(0.0, d) for d in h0_deaths if d > 0.0]
    diagrams = {0: PersistenceDiagram(0, np.array(h0_pairs).reshape(-1, 2), np.zeros(n_components))}
    if max_hom_dim == 0:
        return diagrams

    reduce = _reduce_triangles_compiled if compiled else _reduce_triangles
    h1_pairs, h1_essential = reduce(n, ei, ej, ev, positive)
    diagrams[1] = PersistenceDiagram(1, np.array(h1_pairs).reshape(-1, 2), np.array(h1_essential))
    return diagrams


def _edge_tables(n, ei, ej, ev, positive):
    n_edges = len(ev)
    # filtration rank of every edge; n_edges marks "absent" so it never wins a max
    rank = np.full((n, n), n_edges, dtype=np.int64)
    rank[ei, ej] = np.arange(n_edges)
    rank[ej, ei] = np.arange(n_edges)
    # rows of the triangle boundary matrix are the cycle-creating edges only;
    # a component-merging edge's row is a sum of later rows (coboundary of
    # its component), so dropping it leaves every pivot unchanged
    row_of_edge = np.full(n_edges + 1, -1, dtype=np.int64)
    pos_ids = np.flatnonzero(positive)
    row_of_edge[pos_ids] = np.arange(len(pos_ids))
    return rank, row_of_edge, pos_ids


def _reduce_triangles(n, ei, ej, ev, positive):
    n_edges = len(ev)
    rank, row_of_edge, pos_ids = _edge_tables(n, ei, ej, ev, positive)
    n_rows = len(pos_ids)

    pivots = {}
    pairs = []
    if n_rows == 0:
        return pairs, []
    paired = 0
    verts = np.arange(n)

    e = 0
    while e < n_edges and paired < n_rows:
        # group of edges sharing one filtration value: their cofacets share
        # that value and are ordered lexicographically by vertex tuple
        e_end = e + 1
        while e_end < n_edges and ev[e_end] == ev[e]:
            e_end += 1
        tris = []
        for f in range(e, e_end):
            i, j = int(ei[f]), int(ej[f])
            ks = verts[(rank[i] < f) & (rank[j] < f)]
            if len(ks) == 0:
                continue
            rik = row_of_edge[rank[i, ks]]
            rjk = row_of_edge[rank[j, ks]]
            rf = int(row_of_edge[f])
            for k, a, b in zip(ks.tolist(), rik.tolist(), rjk.tolist()):
                tris.append((tuple(sorted((i, j, k))), rf, a, b))
        if len(tris) > 1:
            tris.sort(key=lambda t: t[0])
        value = ev[e]
        for _, rf, a, b in tris:
            col = 0
            if rf >= 0:
                col ^= 1 << rf
            if a >= 0:
                col ^= 1 << a
            if b >= 0:
                col ^= 1 << b
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    paired += 1
                    birth = ev[pos_ids[low]]
                    if value > birth:
                        pairs.append((float(birth), float(value)))
                    break
                col ^= other
            if paired == n_rows:
                break
        e = e_end

    essential = [float(ev[pos_ids[r]]) for r in range(n_rows) if r not in pivots]
    return pairs, essential


def _reduce_triangles_compiled(n, ei, ej, ev, positive):
    rank, row_of_edge, pos_ids = _edge_tables(n, ei, ej, ev, positive)
    if len(pos_ids) == 0:
        return [], []
    birth_rows, death_vals, has_pivot = _sweep(
        n, ei.astype(np.int64), ej.astype(np.int64), ev, rank, row_of_edge, len(pos_ids))
    births = ev[pos_ids[birth_rows]]
    keep = death_vals > births
    pairs = list(zip(births[keep].tolist(), death_vals[keep].tolist()))
    essential = ev[pos_ids[~has_pivot]].tolist()
    return pairs, essential


@njit(cache=True)
def _sym_diff_desc(a, b):
    out = np.empty(len(a) + len(b), np.int64)
    i = 0
    j = 0
    m = 0
    while i < len(a) and j < len(b):
        if a[i] > b[j]:
            out[m] = a[i]
            i += 1
            m += 1
        elif a[i] < b[j]:
            out[m] = b[j]
            j += 1
            m += 1
        else:
            i += 1
            j += 1
    while i < len(a):
        out[m] = a[i]
        i += 1
        m += 1
    while j < len(b):
        out[m] = b[j]
        j += 1
        m += 1
    return out[:m]


@njit(cache=True)
def _sweep(n, ei, ej, ev, rank, row_of_edge, n_rows):
    # compiled twin of _reduce_triangles; columns are descending row arrays
    n_edges = len(ev)
    slot = np.full(n_rows, -1, np.int64)
    cols = [np.empty(0, np.int64)]
    birth_rows = np.empty(n_rows, np.int64)
    death_vals = np.empty(n_rows, np.float64)
    paired = 0
    cap = 1024
    keys = np.empty(cap, np.int64)
    trows = np.empty((cap, 3), np.int64)
    work = np.empty(3, np.int64)
    e = 0
    while e < n_edges and paired < n_rows:
        e_end = e + 1
        while e_end < n_edges and ev[e_end] == ev[e]:
            e_end += 1
        m = 0
        for f in range(e, e_end):
            i = ei[f]
            j = ej[f]
            for k in range(n):
                if rank[i, k] < f and rank[j, k] < f:
                    if m == cap:
                        cap *= 2
                        nk = np.empty(cap, np.int64)
                        nk[:m] = keys[:m]
                        keys = nk
                        nr = np.empty((cap, 3), np.int64)
                        nr[:m] = trows[:m]
                        trows = nr
                    a, b, c = i, j, k
                    if c < a:
                        a, b, c = c, a, b
                    elif c < b:
                        b, c = c, b
                    keys[m] = (a * n + b) * n + c
                    trows[m, 0] = row_of_edge[f]
                    trows[m, 1] = row_of_edge[rank[i, k]]
                    trows[m, 2] = row_of_edge[rank[j, k]]
                    m += 1
        order = np.argsort(keys[:m], kind="mergesort")
        value = ev[e]
        for t in range(m):
            r = trows[order[t]]
            w = 0
            for q in range(3):
                if r[q] >= 0:
                    work[w] = r[q]
                    w += 1
            col = -np.sort(-work[:w])
            while len(col) > 0:
                low = col[0]
                s = slot[low]
                if s < 0:
                    slot[low] = len(cols)
                    cols.append(col)
                    birth_rows[paired] = low
                    death_vals[paired] = value
                    paired += 1
                    break
                col = _sym_diff_desc(col, cols[s])
            if paired == n_rows:
                break
        e = e_end
    return birth_rows[:paired], death_vals[:paired], slot >= 0


def cloud_persistence(points, max_hom_dim: int = 1, point_cap: int | None = DEFAULT_POINT_CAP,
                      provenance: dict | None = None) -> dict:
    """Distance matrix plus Rips persistence, subsampling clouds above ``point_cap``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) == 0:
        raise EmptyCloud("point cloud has no points")
    subsampled = point_cap is not None and len(pts) > point_cap
    if subsampled:
        pts = pts[farthest_point_subsample(pts, point_cap)]
    diagrams = rips_persistence(distance_matrix(pts), max_hom_dim=max_hom_dim)
    prov = dict(provenance or {})
    prov["subsampled"] = bool(subsampled)
    prov["n_points"] = int(len(pts))
    for dgm in diagrams.values():
        dgm.provenance = dict(prov)
    return diagrams
