"""Persistence scale-space kernel and Gram matrices."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NonPositiveSigma
from .featurize import finite_points

KERNEL_SIGMAS = (0.2, 0.25)


class PairCounter:
    """Counts point-pair terms evaluated; used to check the |X|*|Y| cost."""

    def __init__(self):
        self.pairs = 0

    def add(self, n):
        self.pairs += int(n)


def scale_space_kernel(X, Y, sigma: float, counter: PairCounter | None = None) -> float:
    """kappa_sigma(X, Y): heat-diffusion kernel with the mirrored-point correction.

    Only finite off-diagonal points enter the sum; essential classes have no
    death coordinate and are ignored.
    """
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    P = finite_points(X)
    Q = finite_points(Y)
    if counter is not None:
        counter.add(len(P) * len(Q))
    if len(P) == 0 or len(Q) == 0:
        return 0.0
    diff = P[:, None, :] - Q[None, :, :]
    d_direct = np.sum(diff * diff, axis=-1)
    mirr = P[:, None, :] - Q[None, :, ::-1]
    d_mirror = np.sum(mirr * mirr, axis=-1)
    s = np.sum(np.exp(-d_direct / (8.0 * sigma)) - np.exp(-d_mirror / (8.0 * sigma)))
    return float(s / (8.0 * np.pi * sigma))


@dataclass
class KernelMatrix:
    values: np.ndarray
    row_ids: list = field(default_factory=list)
    col_ids: list = field(default_factory=list)
    sigma: float = 0.0

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, path, config_hash: str | None = None):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if config_hash:
                fh.write(f"# config_hash: {config_hash}\n")
            w = csv.writer(fh)
            w.writerow([f"sigma={self.sigma!r}"] + list(self.col_ids))
            for rid, row in zip(self.row_ids, self.values):
                w.writerow([rid] + [repr(float(v)) for v in row])
        return path

    @classmethod
    def from_csv(cls, path) -> "KernelMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(line for line in fh if not line.startswith("#")))
        head = rows[0]
        sigma = float(head[0].split("=", 1)[1]) if head[0].startswith("sigma=") else 0.0
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]]).reshape(len(rows) - 1, -1)
        return cls(values, [r[0] for r in rows[1:]], head[1:], sigma)


def kernel_matrix(rows, cols=None, sigma: float = 0.25, row_ids=None, col_ids=None,
                  counter: PairCounter | None = None) -> KernelMatrix:
    """Gram matrix; with ``cols`` omitted the square symmetric case fills the
    upper triangle and mirrors it."""
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    rows = list(rows)
    square = cols is None
    cols = rows if square else list(cols)
    row_ids = list(row_ids) if row_ids is not None else [str(i) for i in range(len(rows))]
    col_ids = (row_ids if square else
               list(col_ids) if col_ids is not None else [str(i) for i in range(len(cols))])
    K = np.zeros((len(rows), len(cols)))
    for i, X in enumerate(rows):
        start = i if square else 0
        for j in range(start, len(cols)):
            K[i, j] = scale_space_kernel(X, cols[j], sigma, counter)
            if square:
                K[j, i] = K[i, j]
    return KernelMatrix(K, row_ids, col_ids, sigma)


def diagrams_digest(diagrams, ids=None) -> str:
    """Content hash of a diagram list (order-sensitive) for cache keys."""
    h = hashlib.sha256()
    for i, dg in enumerate(diagrams):
        h.update(str(ids[i] if ids is not None else i).encode())
        h.update(np.ascontiguousarray(finite_points(dg), dtype=np.float64).tobytes())
    return h.hexdigest()[:16]


def cached_kernel_matrix(diagrams, ids, sigma: float, cache_dir, config_hash=None) -> KernelMatrix:
    """Square Gram matrix, read from / written to ``cache_dir`` keyed by (dataset hash, sigma)."""
    cache_dir = Path(cache_dir)
    key = f"gram_{diagrams_digest(diagrams, ids)}_{sigma!r}.csv"
    path = cache_dir / key
    if path.exists():
        km = KernelMatrix.from_csv(path)
        if km.row_ids == list(ids):
            return km
    km = kernel_matrix(diagrams, sigma=sigma, row_ids=ids)
    km.to_csv(path, config_hash)
    return km
