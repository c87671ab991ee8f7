"""Slow, obviously-correct references used only by the test-suite."""
from __future__ import annotations

from collections import Counter
from itertools import combinations

import numpy as np


# -- persistence: persistent Betti numbers by Z2 rank --------------------------

def _rank_z2(rows) -> int:
    """Rank over Z2 of vectors given as python-int bitmasks."""
    basis = {}
    rank = 0
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                rank += 1
                break
    return rank


def brute_force_rips_diagrams(dist) -> dict:
    """H0/H1 diagrams of the full Rips complex as Counters of (birth, death).

    Persistent Betti numbers beta^{s,t} are computed from ranks of boundary
    maps, then multiplicities follow by inclusion-exclusion on the grid of
    distinct filtration values.  Essential classes use death = inf.
    """
    dist = np.asarray(dist, dtype=float)
    n = len(dist)
    edges = [(dist[i, j], (i, j)) for i, j in combinations(range(n), 2)]
    tris = [(max(dist[a, b], dist[a, c], dist[b, c]), (a, b, c))
            for a, b, c in combinations(range(n), 3)]
    edge_index = {e: k for k, (_, e) in enumerate(edges)}
    vals = sorted({0.0} | {v for v, _ in edges} | {v for v, _ in tris})
    grid = vals + [np.inf]

    def d1(e):
        i, j = e
        return (1 << i) | (1 << j)

    def d2(t):
        a, b, c = t
        return (1 << edge_index[(a, b)]) | (1 << edge_index[(a, c)]) | (1 << edge_index[(b, c)])

    def beta0(s, t):
        if s < 0:
            return 0
        return n - _rank_z2(d1(e) for v, e in edges if v <= t)

    def beta1(s, t):
        if s < 0:
            return 0
        es = [e for v, e in edges if v <= s]
        z = len(es) - _rank_z2(d1(e) for e in es)
        bd = [d2(tr) for v, tr in tris if v <= t]
        outside = 0
        for v, e in edges:
            if v > s:
                outside |= 1 << edge_index[e]
        b = _rank_z2(bd)
        b_out = _rank_z2(x & outside for x in bd)
        return z - (b - b_out)

    out = {}
    for dim, beta in ((0, beta0), (1, beta1)):
        table = {}

        def B(i, j):
            if i < 0:
                return 0
            key = (i, j)
            if key not in table:
                table[key] = beta(grid[i], grid[j])
            return table[key]

        c = Counter()
        m = len(grid)
        for i in range(m - 1):
            for j in range(i + 1, m):
                mu = B(i, j - 1) - B(i, j) - B(i - 1, j - 1) + B(i - 1, j)
                if j == m - 1:
                    # death at infinity: classes alive in the full complex
                    mu = B(i, j - 1) - B(i - 1, j - 1)
                    if mu:
                        c[(grid[i], np.inf)] += mu
                    continue
                if mu:
                    c[(grid[i], grid[j])] += mu
        out[dim] = c
    return out


def diagram_counter(dgm) -> Counter:
    c = Counter((float(b), float(d)) for b, d in dgm.pairs)
    for b in dgm.essential:
        c[(float(b), np.inf)] += 1
    return c


# -- landscapes -----------------------------------------------------------------

def landscape_on_grid(points, k: int, grid) -> np.ndarray:
    """k-th largest tent value at every grid point (0 when fewer than k tents)."""
    grid = np.asarray(grid, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < k:
        return np.zeros_like(grid)
    tents = np.maximum(0.0, np.minimum(grid[None, :] - pts[:, :1], pts[:, 1:] - grid[None, :]))
    return -np.sort(-tents, axis=0)[k - 1]


# -- signatures -----------------------------------------------------------------

def signature_by_quadrature(nodes, n: int = 10_000) -> np.ndarray:
    """(S1, S2, S11, S12, S21, S22) of t -> (t, y(t)) on a uniform grid of n intervals."""
    nodes = np.asarray(nodes, dtype=float)
    t = np.linspace(nodes[0, 0], nodes[-1, 0], n + 1)
    y = np.interp(t, nodes[:, 0], nodes[:, 1])
    x = t - t[0]
    y = y - y[0]
    dx = np.diff(x)
    dy = np.diff(y)
    s12 = np.sum(0.5 * (x[:-1] + x[1:]) * dy)
    s21 = np.sum(0.5 * (y[:-1] + y[1:]) * dx)
    return np.array([x[-1], y[-1], np.sum(x[:-1] * dx + 0.5 * dx * dx),
                     s12, s21, np.sum(y[:-1] * dy + 0.5 * dy * dy)])


# -- filtering ------------------------------------------------------------------

def tone_amplitude(x, fs: float, freq: float) -> float:
    """Amplitude of a sinusoid at ``freq`` read off a single-bin DFT projection."""
    x = np.asarray(x, dtype=float)
    t = np.arange(len(x)) / fs
    c = np.exp(-2j * np.pi * freq * t)
    return float(2 * abs(np.dot(x, c)) / len(x))


# -- false nearest neighbours -----------------------------------------------------

def fnn_fraction_loop(x, tau: int, dim: int, r_tol: float, a_tol: float | None) -> float:
    """Textbook false-nearest-neighbour fraction, one point at a time."""
    x = [float(v) for v in x]
    m = len(x) - dim * tau
    sigma = float(np.std(x))
    false = 0
    for i in range(m):
        best, best_j = None, None
        for j in range(m):
            if j == i:
                continue
            d2 = sum((x[i + k * tau] - x[j + k * tau]) ** 2 for k in range(dim))
            if best is None or d2 < best:
                best, best_j = d2, j
        dist = best ** 0.5
        extra = abs(x[i + dim * tau] - x[best_j + dim * tau])
        is_false = extra > r_tol * dist if dist > 0 else extra > 0
        if a_tol is not None and sigma > 0 and (dist ** 2 + extra ** 2) ** 0.5 > a_tol * sigma:
            is_false = True
        false += is_false
    return false / m
