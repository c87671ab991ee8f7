"""Vector summaries of H1 diagrams: landscapes, persistence images and
Carlsson coordinates, plus the labelled feature-matrix container."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateBounds, MeshMissingForK
from .persistence import PersistenceDiagram

DEFAULT_K_SET = (1, 2, 3, 4, 5)
IMAGE_SIGMA = 1.0
PIXEL_SIZES = (0.01, 0.1)


def finite_points(diag) -> np.ndarray:
    """Off-diagonal finite (birth, death) rows of a diagram or raw array."""
    pairs = diag.pairs if isinstance(diag, PersistenceDiagram) else np.asarray(diag, float)
    pairs = pairs.reshape(-1, 2)
    return pairs[pairs[:, 1] > pairs[:, 0]]


# ---------------------------------------------------------------- landscapes

@dataclass
class Landscape:
    """``functions[k-1]`` holds the (m, 2) node array of lambda_k."""
    functions: list = field(default_factory=list)

    @property
    def k_max(self) -> int:
        return len(self.functions)

    def nodes(self, k: int) -> np.ndarray:
        if k < 1:
            raise ValueError("landscape index starts at 1")
        if k > len(self.functions):
            return np.empty((0, 2))
        return self.functions[k - 1]

    def __call__(self, k: int, x):
        nodes = self.nodes(k)
        x = np.asarray(x, dtype=float)
        if len(nodes) == 0:
            return np.zeros_like(x)
        return np.interp(x, nodes[:, 0], nodes[:, 1], left=0.0, right=0.0)


def tent_values(points: np.ndarray, x) -> np.ndarray:
    """g_(b,d)(x) for every point (rows) at every x (columns)."""
    x = np.asarray(x, dtype=float)
    b = points[:, :1]
    d = points[:, 1:]
    return np.maximum(0.0, np.minimum(x[None, :] - b, d - x[None, :]))


def _simplify(xs, ys, atol):
    """Drop collinear interior nodes and flat zero runs at either end."""
    nz = np.flatnonzero(ys > 0)
    if len(nz) == 0:
        return np.empty((0, 2))
    lo = max(nz[0] - 1, 0)
    hi = min(nz[-1] + 1, len(xs) - 1)
    xs, ys = xs[lo:hi + 1], ys[lo:hi + 1]
    keep = [0]
    for i in range(1, len(xs) - 1):
        a = keep[-1]
        # cross product of (a -> i) and (i -> i+1); zero means no kink at i
        cross = (xs[i] - xs[a]) * (ys[i + 1] - ys[i]) - (ys[i] - ys[a]) * (xs[i + 1] - xs[i])
        if abs(cross) > atol * max(1.0, xs[i + 1] - xs[a]):
            keep.append(i)
    keep.append(len(xs) - 1)
    return np.column_stack([xs[keep], ys[keep]])


def compute_landscapes(diag, k_max: int = max(DEFAULT_K_SET)) -> Landscape:
    """Exact landscapes lambda_1..lambda_{k_max} as node lists.

    Between consecutive critical abscissae (births, deaths, peaks and the
    crossings (b_i + d_j)/2 of a rising and a falling edge) no two tent
    functions swap order, so the k-th largest value is linear there and the
    nodes at those abscissae describe lambda_k exactly.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    pts = finite_points(diag)
    if len(pts) == 0:
        return Landscape([np.empty((0, 2)) for _ in range(k_max)])
    b, d = pts[:, 0], pts[:, 1]
    cross = 0.5 * (b[:, None] + d[None, :])
    valid = (cross > b[:, None]) & (cross < d[None, :]) & (cross > b[None, :]) & (cross < d[:, None])
    xs = np.unique(np.concatenate([b, d, 0.5 * (b + d), cross[valid]]))
    vals = tent_values(pts, xs)
    kk = min(k_max, len(pts))
    top = -np.sort(-vals, axis=0)[:kk]
    atol = 1e-12 * max(1.0, float(np.max(np.abs(pts))))
    functions = [_simplify(xs, top[k], atol) for k in range(kk)]
    functions += [np.empty((0, 2)) for _ in range(k_max - kk)]
    return Landscape(functions)


def build_mesh(training_landscapes, k: int) -> np.ndarray:
    """Sorted, deduplicated node abscissae of lambda_k over a training set.

    When every training lambda_k is identically zero the mesh is the single
    point 0, so feature vectors keep a fixed length.
    """
    training_landscapes = list(training_landscapes)
    if not training_landscapes:
        raise ValueError("need at least one training landscape")
    xs = [ls.nodes(k)[:, 0] for ls in training_landscapes]
    mesh = np.unique(np.concatenate(xs)) if xs else np.empty(0)
    return mesh if len(mesh) else np.zeros(1)


def build_meshes(training_landscapes, k_set=DEFAULT_K_SET) -> dict:
    training_landscapes = list(training_landscapes)
    return {k: build_mesh(training_landscapes, k) for k in k_set}


def landscape_features(ls: Landscape, mesh: dict, k_set=DEFAULT_K_SET) -> np.ndarray:
    parts = []
    for k in k_set:
        if k not in mesh:
            raise MeshMissingForK(f"no mesh for landscape {k}")
        parts.append(ls(k, mesh[k]))
    return np.concatenate(parts) if parts else np.empty(0)


# ---------------------------------------------------------- persistence images

@dataclass
class ImageBounds:
    birth_min: float
    birth_max: float
    pers_min: float
    pers_max: float
    weight_cutoff: float

    def grid(self, pixel_size: float):
        """Pixel edges along birth (columns) and persistence (rows)."""
        nb = max(1, int(np.ceil((self.birth_max - self.birth_min) / pixel_size - 1e-9)))
        npers = max(1, int(np.ceil((self.pers_max - self.pers_min) / pixel_size - 1e-9)))
        bx = self.birth_min + pixel_size * np.arange(nb + 1)
        py = self.pers_min + pixel_size * np.arange(npers + 1)
        return bx, py


@dataclass
class PersistenceImage:
    grid: np.ndarray
    bounds: ImageBounds
    pixel_size: float
    sigma: float


def fit_image_bounds(training_diagrams, sigma: float = IMAGE_SIGMA) -> ImageBounds:
    """[0, max birth] x [0, max persistence] over the training set, padded by 3 sigma.

    The weight ramp's cutoff is the (unpadded) training maximum persistence.
    """
    pts = [finite_points(dg) for dg in training_diagrams]
    pts = np.concatenate(pts) if pts else np.empty((0, 2))
    max_b = float(pts[:, 0].max()) if len(pts) else 0.0
    min_b = min(0.0, float(pts[:, 0].min())) if len(pts) else 0.0
    max_p = float((pts[:, 1] - pts[:, 0]).max()) if len(pts) else 0.0
    pad = 3.0 * sigma
    return ImageBounds(min_b - pad, max_b + pad, -pad, max_p + pad,
                       weight_cutoff=max_p if max_p > 0 else 1.0)


def persistence_weight(pers, cutoff: float) -> np.ndarray:
    """0 on the diagonal, linear up to ``cutoff``, 1 beyond."""
    p = np.asarray(pers, dtype=float)
    return np.clip(p / cutoff, 0.0, 1.0)


def persistence_image(diag, pixel_size: float = 0.1, sigma: float = IMAGE_SIGMA,
                      bounds: ImageBounds | None = None) -> PersistenceImage:
    """Pixel integrals of the weighted Gaussian surface in (birth, persistence).

    Each pixel is integrated exactly: the Gaussian is separable, so a
    pixel's mass is a product of two normal-CDF differences.
    """
    if pixel_size <= 0 or sigma <= 0:
        raise ValueError("pixel_size and sigma must be positive")
    if bounds is None:
        bounds = fit_image_bounds([diag], sigma)
    if not (bounds.birth_max > bounds.birth_min and bounds.pers_max > bounds.pers_min):
        raise DegenerateBounds(f"empty image window {bounds}")
    if bounds.weight_cutoff <= 0:
        raise DegenerateBounds("weight cutoff must be positive")
    bx, py = bounds.grid(pixel_size)
    pts = finite_points(diag)
    grid = np.zeros((len(py) - 1, len(bx) - 1))
    if len(pts):
        births = pts[:, 0]
        pers = pts[:, 1] - pts[:, 0]
        w = persistence_weight(pers, bounds.weight_cutoff)
        cx = np.diff(ndtr((bx[None, :] - births[:, None]) / sigma), axis=1)
        cy = np.diff(ndtr((py[None, :] - pers[:, None]) / sigma), axis=1)
        grid = np.einsum("k,ki,kj->ij", w, cy, cx)
    return PersistenceImage(grid, bounds, pixel_size, sigma)


def image_features(img: PersistenceImage) -> np.ndarray:
    return np.asarray(img.grid).reshape(-1)


# ------------------------------------------------------- Carlsson coordinates

def carlsson_coordinates(diag) -> np.ndarray:
    """(f1..f5); the last is the maximum persistence.  Empty diagram gives zeros."""
    pts = finite_points(diag)
    if len(pts) == 0:
        return np.zeros(5)
    # canonical order makes the floating-point sums exactly permutation-invariant
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    b, d = pts[:, 0], pts[:, 1]
    p = d - b
    dmax = d.max()
    return np.array([
        np.sum(b * p),
        np.sum((dmax - d) * p),
        np.sum(b ** 2 * p ** 4),
        np.sum((dmax - d) ** 2 * p ** 4),
        p.max(),
    ])


def coordinate_subsets(n: int = 5) -> list:
    """All non-empty subsets of 1..n, ordered by size then lexicographically."""
    return [c for r in range(1, n + 1) for c in itertools.combinations(range(1, n + 1), r)]


# ------------------------------------------------------------ feature matrix

@dataclass
class FeatureMatrix:
    labels: np.ndarray
    vectors: np.ndarray
    column_names: list
    row_ids: list = field(default_factory=list)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        self.vectors = np.asarray(self.vectors, dtype=float).reshape(len(self.labels), -1)
        if len(self.column_names) != self.vectors.shape[1]:
            raise ValueError("column_names does not match vector length")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("feature matrix holds non-finite entries")
        if not self.row_ids:
            self.row_ids = [str(i) for i in range(len(self.labels))]

    def __len__(self):
        return len(self.labels)

    def to_csv(self, path, config_hash: str | None = None):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if config_hash:
                fh.write(f"# config_hash: {config_hash}\n")
            w = csv.writer(fh)
            w.writerow(["label"] + list(self.column_names))
            for lab, vec in zip(self.labels, self.vectors):
                w.writerow([int(lab)] + [repr(float(v)) for v in vec])
        return path

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
        header, body = rows[0], rows[1:]
        labels = [int(r[0]) for r in body]
        vectors = np.array([[float(v) for v in r[1:]] for r in body]).reshape(len(body), -1)
        return cls(labels, vectors, header[1:])


def landscape_column_names(mesh: dict, k_set=DEFAULT_K_SET) -> list:
    return [f"L{k}_{i}" for k in k_set for i in range(len(mesh[k]))]


def image_column_names(shape) -> list:
    return [f"I_{i + 1}_{j + 1}" for i in range(shape[0]) for j in range(shape[1])]
