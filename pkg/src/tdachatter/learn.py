"""Binary SVM (RBF or precomputed kernel) and the repeated split/train/test protocol."""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (AsymmetricGram, DimensionMismatch, EmptyClassAfterSplit,
                     SingleClassTrainingSet)
from .featurize import (DEFAULT_K_SET, IMAGE_SIGMA, FeatureMatrix, build_meshes,
                        carlsson_coordinates, compute_landscapes, coordinate_subsets,
                        fit_image_bounds, image_column_names, image_features,
                        landscape_column_names, landscape_features, persistence_image)
from .signatures import landscape_signatures, signature_column_names

KKT_TOL = 1e-3
METHODS = ("landscapes", "images", "carlsson", "kernel", "signatures")
DEFAULT_SPLITS = {"landscapes": 0.67, "carlsson": 0.67, "kernel": 0.67,
                  "images": 0.75, "signatures": 0.75}
MAX_RESAMPLES = 100
_TAU = 1e-12


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(np.atleast_2d(A), np.atleast_2d(B), "sqeuclidean"))


def default_gamma(X) -> float:
    """1 / (n_features * mean per-feature variance); 1.0 for constant data."""
    X = np.asarray(X, dtype=float)
    v = float(np.mean(X.var(axis=0))) if X.size else 0.0
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0


def class_weighted_C(y, C: float, balanced: bool = True) -> np.ndarray:
    y = np.asarray(y)
    if not balanced:
        return np.full(len(y), float(C))
    n = len(y)
    out = np.empty(len(y))
    for cls in (-1, 1):
        mask = y == cls
        out[mask] = C * n / (2.0 * mask.sum())
    return out


def _to_signed(labels) -> np.ndarray:
    labels = np.asarray(labels).reshape(-1)
    y = np.where(labels == 1, 1.0, -1.0)
    if np.all(y == y[0]):
        raise SingleClassTrainingSet("training labels hold a single class")
    return y


def _violation(alpha, G, y, Cvec):
    """(m, M, i) for the maximal violating pair test, LIBSVM style."""
    up = ((y > 0) & (alpha < Cvec)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < Cvec))
    score = -y * G
    m = score[up].max() if up.any() else -np.inf
    M = score[low].min() if low.any() else np.inf
    return m, M, up, low, score


def smo_solve(K, y, Cvec, tol: float = KKT_TOL, max_iter: int | None = None):
    """Dual C-SVC by sequential minimal optimisation with second-order pair choice.

    Returns (alpha, rho, iterations); decision = sum a_i y_i K(x_i, .) - rho.
    """
    n = len(y)
    max_iter = max_iter or max(100_000, 100 * n)
    Kd = np.diag(K)
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    while it < max_iter:
        m, M, up, low, score = _violation(alpha, G, y, Cvec)
        if m - M < tol:
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        cand = low & (score < m)
        b = m - score
        a = Kd[i] + Kd - 2.0 * K[i]
        a = np.where(a > 0, a, _TAU)
        gain = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(gain))
        Ci, Cj = Cvec[i], Cvec[j]
        ai_old, aj_old = alpha[i], alpha[j]
        quad = Kd[i] + Kd[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = _TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > Ci - Cj:
                if ai > Ci:
                    ai, aj = Ci, Ci - diff
            elif aj > Cj:
                aj, ai = Cj, Cj + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > Ci:
                if ai > Ci:
                    ai, aj = Ci, total - Ci
            elif aj < 0:
                aj, ai = 0.0, total
            if total > Cj:
                if aj > Cj:
                    aj, ai = Cj, total - Cj
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        # Q = y y^T * K
        G += y * (K[:, i] * (y[i] * (ai - ai_old)) + K[:, j] * (y[j] * (aj - aj_old)))
        it += 1
    rho = _rho(alpha, G, y, Cvec)
    return alpha, rho, it


def _rho(alpha, G, y, Cvec):
    yG = y * G
    free = (alpha > 0) & (alpha < Cvec)
    if free.any():
        return float(yG[free].mean())
    at_ub = alpha >= Cvec
    ub_mask = (at_ub & (y < 0)) | (~at_ub & (y > 0))
    lb_mask = (at_ub & (y > 0)) | (~at_ub & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)


@dataclass
class SvmModel:
    kernel: str
    alpha: np.ndarray
    y: np.ndarray
    rho: float
    C: np.ndarray
    gamma: float | None = None
    train_X: np.ndarray | None = None
    n_features: int = 0
    iterations: int = 0

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0)

    @property
    def support_vectors(self):
        return None if self.train_X is None else self.train_X[self.support]

    @property
    def dual_coef(self) -> np.ndarray:
        return (self.alpha * self.y)[self.support]

    @property
    def bias(self) -> float:
        return -self.rho

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} columns, got {X.shape[1]}")
        sv = self.support
        if self.kernel == "rbf":
            Kx = rbf_kernel(X, self.train_X[sv], self.gamma)
        else:
            Kx = X[:, sv]
        return Kx @ (self.alpha[sv] * self.y[sv]) - self.rho

    def predict(self, X) -> np.ndarray:
        # a decision value of exactly 0 goes to class 1
        return (self.decision_function(X) >= 0).astype(int)


def kkt_violation(model: SvmModel, K) -> float:
    """Maximal-violating-pair gap m - M at the returned solution."""
    G = model.y * (K @ (model.alpha * model.y)) - 1.0
    m, M, *_ = _violation(model.alpha, G, model.y, model.C)
    return float(max(0.0, m - M))


def train_svm(features, labels=None, C: float = 1.0, gamma: float | None = None,
              balanced: bool = True, tol: float = KKT_TOL) -> SvmModel:
    """RBF C-SVC.  ``features`` is a FeatureMatrix or an array with ``labels``."""
    if isinstance(features, FeatureMatrix):
        X, labels = features.vectors, features.labels
    else:
        X = np.atleast_2d(np.asarray(features, dtype=float))
    if not C > 0:
        raise ValueError("C must be positive")
    y = _to_signed(labels)
    gamma = default_gamma(X) if gamma is None else gamma
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    K = rbf_kernel(X, X, gamma)
    Cvec = class_weighted_C(y, C, balanced)
    alpha, rho, it = smo_solve(K, y, Cvec, tol)
    return SvmModel("rbf", alpha, y, rho, Cvec, gamma, X.copy(), X.shape[1], it)


def train_svm_precomputed(gram, labels, C: float = 1.0, balanced: bool = True,
                          tol: float = KKT_TOL) -> SvmModel:
    K = np.asarray(getattr(gram, "values", gram), dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise AsymmetricGram(f"Gram matrix must be square, got {K.shape}")
    if len(np.asarray(labels).reshape(-1)) != K.shape[0]:
        raise DimensionMismatch(f"{K.shape[0]} Gram rows but {len(labels)} labels")
    scale = max(1.0, float(np.abs(K).max()))
    if not np.allclose(K, K.T, rtol=0, atol=1e-10 * scale):
        raise AsymmetricGram("Gram matrix is not symmetric")
    y = _to_signed(labels)
    Cvec = class_weighted_C(y, C, balanced)
    alpha, rho, it = smo_solve(K, y, Cvec, tol)
    return SvmModel("precomputed", alpha, y, rho, Cvec, None, None, K.shape[0], it)


def predict(model: SvmModel, X) -> np.ndarray:
    return model.predict(X)


# ------------------------------------------------------------------ protocol

@dataclass
class LabeledDiagram:
    id: str
    parent_id: str
    label: int
    diagram: object


@dataclass
class MethodConfig:
    name: str = "landscapes"
    k_set: tuple = DEFAULT_K_SET
    pixel_size: float = 0.1
    image_sigma: float = IMAGE_SIGMA
    kernel_sigma: float = 0.25
    carlsson_subset: tuple = (1, 2, 3, 4, 5)
    C: float = 1.0
    gamma: float | None = None
    standardize: bool = True
    balanced: bool = True

    def __post_init__(self):
        if self.name not in METHODS:
            raise ValueError(f"unknown method {self.name!r}; expected one of {METHODS}")
        self.k_set = tuple(self.k_set)
        self.carlsson_subset = tuple(self.carlsson_subset)


@dataclass
class EvalReport:
    method: str
    train_acc: list = field(default_factory=list)
    test_acc: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    resamples: int = 0
    params: dict = field(default_factory=dict)

    @property
    def train_mean(self):
        return float(np.mean(self.train_acc)) if self.train_acc else float("nan")

    @property
    def train_std(self):
        return float(np.std(self.train_acc)) if self.train_acc else float("nan")

    @property
    def test_mean(self):
        return float(np.mean(self.test_acc)) if self.test_acc else float("nan")

    @property
    def test_std(self):
        return float(np.std(self.test_acc)) if self.test_acc else float("nan")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(train_mean=self.train_mean, train_std=self.train_std,
                 test_mean=self.test_mean, test_std=self.test_std)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def numeric_summary(self) -> dict:
        """Everything except wall-clock timings (those are not reproducible)."""
        d = self.to_dict()
        d.pop("timings")
        return d


def format_reports(reports) -> str:
    """Plain-text table, one row per method: test and train mean +/- std in percent."""
    lines = [f"{'method':<28}{'test acc (%)':>18}{'train acc (%)':>18}{'seconds':>10}",
             "-" * 74]
    for name, rep in reports.items():
        secs = sum(rep.timings.values())
        lines.append(f"{name:<28}{100 * rep.test_mean:>10.1f} ± {100 * rep.test_std:<5.1f}"
                     f"{100 * rep.train_mean:>10.1f} ± {100 * rep.train_std:<5.1f}{secs:>10.2f}")
    return "\n".join(lines)


class _Featurizer:
    """Training-time fit (meshes / image bounds) and matching transform."""

    def __init__(self, cfg: MethodConfig):
        self.cfg = cfg
        self.state = None

    def fit(self, diagrams):
        cfg = self.cfg
        if cfg.name == "landscapes":
            lss = [compute_landscapes(d, max(cfg.k_set)) for d in diagrams]
            self.state = build_meshes(lss, cfg.k_set)
        elif cfg.name == "images":
            self.state = fit_image_bounds(diagrams, cfg.image_sigma)
        return self

    def transform(self, diagrams):
        cfg = self.cfg
        if cfg.name == "landscapes":
            rows = [landscape_features(compute_landscapes(d, max(cfg.k_set)), self.state, cfg.k_set)
                    for d in diagrams]
            names = landscape_column_names(self.state, cfg.k_set)
        elif cfg.name == "images":
            imgs = [persistence_image(d, cfg.pixel_size, cfg.image_sigma, self.state)
                    for d in diagrams]
            rows = [image_features(im) for im in imgs]
            names = image_column_names(imgs[0].grid.shape) if imgs else []
        elif cfg.name == "carlsson":
            cols = [c - 1 for c in cfg.carlsson_subset]
            rows = [carlsson_coordinates(d)[cols] for d in diagrams]
            names = [f"f{c}" for c in cfg.carlsson_subset]
        elif cfg.name == "signatures":
            k_max = max(cfg.k_set)
            rows = [landscape_signatures(compute_landscapes(d, k_max), cfg.k_set) for d in diagrams]
            names = signature_column_names(cfg.k_set)
        else:
            raise ValueError("kernel method has no explicit features")
        return np.array(rows).reshape(len(rows), len(names)), names


def split_by_parent(samples, split: float, rng) -> tuple:
    """Random train/test index split that keeps all chunks of a parent together."""
    parents = sorted({s.parent_id for s in samples})
    perm = rng.permutation(len(parents))
    n_train = int(round(split * len(parents)))
    n_train = min(max(n_train, 1), len(parents) - 1)
    train_parents = {parents[i] for i in perm[:n_train]}
    train = np.array([i for i, s in enumerate(samples) if s.parent_id in train_parents], dtype=int)
    test = np.array([i for i, s in enumerate(samples) if s.parent_id not in train_parents], dtype=int)
    return train, test


def _standardize(Xtr, Xte):
    mu = Xtr.mean(axis=0)
    sd = Xtr.std(axis=0)
    sd[sd == 0] = 1.0
    return (Xtr - mu) / sd, (Xte - mu) / sd


def _run_iteration(samples, cfg, split, seed, iteration, gram):
    rng = np.random.default_rng([seed, iteration])
    labels = np.array([s.label for s in samples])
    resamples = 0
    while True:
        train, test = split_by_parent(samples, split, rng)
        if (len(test) and len(set(labels[train])) == 2 and len(set(labels[test])) == 2):
            break
        resamples += 1
        if resamples >= MAX_RESAMPLES:
            raise EmptyClassAfterSplit(f"no split with both classes after {MAX_RESAMPLES} tries")
    timings = {}
    t0 = time.perf_counter()
    ytr, yte = labels[train], labels[test]
    if cfg.name == "kernel":
        Ktr = gram[np.ix_(train, train)]
        Kte = gram[np.ix_(test, train)]
        timings["featurization"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        model = train_svm_precomputed(Ktr, ytr, cfg.C, cfg.balanced)
        pred_tr, pred_te = model.predict(Ktr), model.predict(Kte)
    else:
        diags = [s.diagram for s in samples]
        feat = _Featurizer(cfg).fit([diags[i] for i in train])
        Xtr, _ = feat.transform([diags[i] for i in train])
        Xte, _ = feat.transform([diags[i] for i in test])
        if cfg.standardize:
            Xtr, Xte = _standardize(Xtr, Xte)
        timings["featurization"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        model = train_svm(Xtr, ytr, cfg.C, cfg.gamma, cfg.balanced)
        pred_tr, pred_te = model.predict(Xtr), model.predict(Xte)
    timings["training"] = time.perf_counter() - t0
    return (float(np.mean(pred_tr == ytr)), float(np.mean(pred_te == yte)), timings, resamples)


def evaluate(samples, method: MethodConfig | str = "landscapes", split: float | None = None,
             iterations: int = 10, seed: int = 0, gram=None, jobs: int = 1) -> EvalReport:
    """Repeated random record-level split, fit on train only, score both sides.

    ``gram`` (kernel method only) is the square Gram matrix over ``samples``;
    it is computed here when omitted.
    """
    cfg = method if isinstance(method, MethodConfig) else MethodConfig(method)
    split = DEFAULT_SPLITS[cfg.name] if split is None else split
    if not 0 < split < 1:
        raise ValueError("split must lie in (0, 1)")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    samples = list(samples)
    timings = {"featurization": 0.0, "training": 0.0}
    if cfg.name == "kernel":
        t0 = time.perf_counter()
        if gram is None:
            from .kernel import kernel_matrix
            gram = kernel_matrix([s.diagram for s in samples], sigma=cfg.kernel_sigma).values
        gram = np.asarray(getattr(gram, "values", gram), dtype=float)
        timings["kernel_matrix"] = time.perf_counter() - t0

    def one(it):
        return _run_iteration(samples, cfg, split, seed, it, gram)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(one, range(iterations)))
    else:
        results = [one(it) for it in range(iterations)]
    report = EvalReport(cfg.name, params={**asdict(cfg), "split": split,
                                          "iterations": iterations, "seed": seed})
    for tr, te, tm, rs in results:
        report.train_acc.append(tr)
        report.test_acc.append(te)
        report.resamples += rs
        for k, v in tm.items():
            timings[k] = timings.get(k, 0.0) + v
    report.timings = timings
    return report


def carlsson_subset_search(samples, split: float = 0.67, iterations: int = 10, seed: int = 0,
                           base: MethodConfig | None = None, jobs: int = 1) -> dict:
    """One report per non-empty subset of the five coordinates, same splits for all."""
    base = base or MethodConfig("carlsson")
    out = {}
    for subset in coordinate_subsets():
        cfg = MethodConfig(**{**asdict(base), "name": "carlsson", "carlsson_subset": subset})
        out[subset] = evaluate(samples, cfg, split, iterations, seed, jobs=jobs)
    return out


def best_subset(reports: dict):
    """Subset with the highest mean test accuracy (first in subset order on ties)."""
    return max(reports, key=lambda s: (reports[s].test_mean, -coordinate_subsets().index(s)))
