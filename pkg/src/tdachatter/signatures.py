"""Level-1 and level-2 signatures of landscape paths t -> (t, lambda_k(t)).

On a piecewise-linear path every iterated integral reduces to a sum of
per-segment polynomials in the node coordinates, so the values below are
exact (no quadrature).
"""
from __future__ import annotations

import warnings

import numpy as np

from .featurize import DEFAULT_K_SET, FeatureMatrix, Landscape, compute_landscapes

SIGNATURE_NAMES = ("S1", "S2", "S11", "S12", "S21", "S22")


class DegeneratePath(UserWarning):
    """Path with fewer than two nodes; its signature is taken as zero."""


def landscape_path(ls: Landscape | np.ndarray, k: int | None = None) -> np.ndarray:
    nodes = ls.nodes(k) if isinstance(ls, Landscape) else np.asarray(ls, dtype=float)
    nodes = nodes.reshape(-1, 2)
    if len(nodes) < 2:
        return np.empty((0, 2))
    if np.any(np.diff(nodes[:, 0]) <= 0):
        raise ValueError("landscape nodes must have strictly increasing x")
    return nodes


def _check(path):
    path = np.asarray(path, dtype=float).reshape(-1, 2)
    if len(path) < 2:
        warnings.warn("path has fewer than two nodes; signature set to zero",
                      DegeneratePath, stacklevel=3)
        return None
    return path


def signature_level1(path) -> tuple:
    path = _check(path)
    if path is None:
        return 0.0, 0.0
    return float(path[-1, 0] - path[0, 0]), float(path[-1, 1] - path[0, 1])


def signature_level2(path) -> tuple:
    """(S11, S12, S21, S22) with S^{ij} = int (P^i_t - P^i_start) dP^j_t."""
    path = _check(path)
    if path is None:
        return 0.0, 0.0, 0.0, 0.0
    x = path[:, 0] - path[0, 0]
    y = path[:, 1] - path[0, 1]
    dx = np.diff(x)
    dy = np.diff(y)
    s11 = 0.5 * x[-1] ** 2
    s22 = 0.5 * y[-1] ** 2
    # on a segment x runs linearly from x[i] to x[i+1], so the integrand is
    # linear and its integral is the segment mean times the increment
    s12 = np.sum(0.5 * (x[:-1] + x[1:]) * dy)
    s21 = np.sum(0.5 * (y[:-1] + y[1:]) * dx)
    return float(s11), float(s12), float(s21), float(s22)


def path_signature(path) -> np.ndarray:
    path = np.asarray(path, dtype=float).reshape(-1, 2)
    if len(path) < 2:
        return np.zeros(6)
    return np.array(signature_level1(path) + signature_level2(path))


def landscape_signatures(ls: Landscape, k_set=DEFAULT_K_SET) -> np.ndarray:
    return np.concatenate([path_signature(landscape_path(ls, k)) for k in k_set])


def signature_column_names(k_set=DEFAULT_K_SET) -> list:
    return [f"L{k}_{name}" for k in k_set for name in SIGNATURE_NAMES]


def signature_features(diagrams, labels, k_set=DEFAULT_K_SET, row_ids=None) -> FeatureMatrix:
    k_set = tuple(k_set)
    k_max = max(k_set) if k_set else 1
    rows = [landscape_signatures(compute_landscapes(dg, k_max), k_set) for dg in diagrams]
    vectors = np.array(rows).reshape(len(rows), 6 * len(k_set))
    return FeatureMatrix(labels, vectors, signature_column_names(k_set), list(row_ids or []))
