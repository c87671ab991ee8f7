"""End-to-end orchestration: ingest -> embed -> persistence -> featurize -> SVM.

Artifacts written under ``out``::

    diagrams/<chunk>.json       H1 diagram with provenance
    cache/diagrams/<key>.json   diagram cache keyed by (chunk hash, tau, dim, radius, cap)
    cache/gram_*.csv            Gram cache keyed by (dataset hash, sigma)
    features/<method>.csv       feature matrix over the whole dataset (inspection only)
    report_<method>.json/.txt   EvalReport(s)
    timing_<method>.json        per-stage wall-clock seconds
"""
from __future__ import annotations

import hashlib
import json
import logging
import time
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import embedding, ingest
from .errors import ChatterError, ConfigError, EmptyInput, NoSignificantFrequency
from .featurize import (DEFAULT_K_SET, IMAGE_SIGMA, FeatureMatrix, coordinate_subsets)
from .kernel import cached_kernel_matrix
from .learn import (DEFAULT_SPLITS, METHODS, LabeledDiagram, MethodConfig, _Featurizer,
                    best_subset, carlsson_subset_search, evaluate, format_reports)
from .persistence import DEFAULT_POINT_CAP, PersistenceDiagram, cloud_persistence

log = logging.getLogger(__name__)

STAGES = ("ingest", "embedding", "persistence", "featurization", "training")


class StageError(ChatterError):
    def __init__(self, stage: str, err: Exception):
        self.stage = stage
        self.cause = err
        self.exit_code = getattr(err, "exit_code", 1)
        super().__init__(f"[{stage}] {err}")


@dataclass
class PipelineConfig:
    dataset: str = ""
    method: str = "landscapes"
    chunk_len: int | None = None
    target_rate: float = 10_000.0
    cutoff: float = 5_000.0
    tau: int | None = None
    dim: int | None = None
    dim_cap: int = embedding.DIM_CAP
    point_cap: int = DEFAULT_POINT_CAP
    split: float | None = None
    iterations: int = 10
    seed: int = 0
    sigma: float = 0.25
    image_sigma: float = IMAGE_SIGMA
    pixel_size: float = 0.1
    k_set: tuple = DEFAULT_K_SET
    C: float = 1.0
    merge_mild: bool = True
    out: str = "out"
    jobs: int = 1
    cache: bool = True

    def __post_init__(self):
        self.k_set = tuple(int(k) for k in self.k_set)
        self.validate()

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.split is not None and not 0 < self.split < 1:
            raise ConfigError("split must lie in (0, 1)")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.chunk_len is not None and self.chunk_len < 2:
            raise ConfigError("chunk_len must be >= 2")
        if self.tau is not None and self.tau < 1:
            raise ConfigError("tau must be >= 1")
        if self.dim is not None and not 1 <= self.dim <= self.dim_cap:
            raise ConfigError(f"dim must lie in [1, {self.dim_cap}]")
        if self.sigma <= 0 or self.image_sigma <= 0 or self.pixel_size <= 0 or self.C <= 0:
            raise ConfigError("sigma, image_sigma, pixel_size and C must be positive")
        if not self.k_set or min(self.k_set) < 1:
            raise ConfigError("k_set must hold positive landscape indices")
        if self.point_cap < 3:
            raise ConfigError("point_cap must be >= 3")

    # knobs that cannot change any number in the outputs
    _NON_NUMERIC = ("out", "jobs", "cache", "method")

    def config_hash(self) -> str:
        d = {k: v for k, v in asdict(self).items() if k not in self._NON_NUMERIC}
        d["k_set"] = list(d["k_set"])
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    def method_config(self, name: str | None = None) -> MethodConfig:
        return MethodConfig(name or self.method, k_set=self.k_set, pixel_size=self.pixel_size,
                            image_sigma=self.image_sigma, kernel_sigma=self.sigma, C=self.C)


@dataclass
class ChunkResult:
    chunk_id: str
    parent_id: str
    label: int
    tau: int
    dim: int
    diagram: PersistenceDiagram
    cached: bool = False


@dataclass
class PipelineState:
    config: PipelineConfig
    chunks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def samples(self) -> list:
        return [LabeledDiagram(c.chunk_id, c.parent_id, c.label, c.diagram) for c in self.chunks]


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except ChatterError as err:
                raise StageError(name, err) from err
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner
    return wrap


@_stage("ingest")
def ingest_stage(cfg: PipelineConfig) -> list:
    """Load, drop unknown tags, resample to the working rate, normalise and chunk."""
    records = ingest.load_dataset(cfg.dataset)
    mapping = dict(ingest.DEFAULT_BINARY_MAP)
    if not cfg.merge_mild:
        mapping.pop(ingest.Label.MILD_CHATTER)
    chunks = []
    for rec in records:
        y = ingest.binary_label(rec.label, mapping)
        if y is None:
            log.info("skipping %s (label %s)", rec.id, rec.label.value)
            continue
        if rec.sample_rate != cfg.target_rate:
            rec = ingest.lowpass_decimate(rec, cfg.target_rate, cfg.cutoff)
        rec = ingest.TimeSeriesRecord(ingest.normalize(rec.samples), rec.sample_rate,
                                      rec.label, rec.meta)
        # records shorter than the default window become a single chunk
        chunk_len = cfg.chunk_len or min(ingest.default_chunk_len(rec.sample_rate),
                                         len(rec.samples))
        chunks.extend((c, y) for c in ingest.split_chunks(rec, chunk_len))
    if not chunks:
        raise EmptyInput(f"no trainable records in {cfg.dataset}")
    return chunks


@_stage("embedding")
def embed_chunk(chunk, cfg: PipelineConfig):
    x = chunk.samples
    tau = cfg.tau
    if tau is None:
        try:
            tau = embedding.estimate_delay_fft_lms(x, chunk.sample_rate)
        except NoSignificantFrequency:
            log.warning("%s: no significant spectral line, using tau=1", chunk.id)
            tau = 1
    dim = cfg.dim
    if dim is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", embedding.FnnSaturated)
            dim = embedding.estimate_dim_fnn(x, tau, cfg.dim_cap)
    cloud = embedding.delay_embed(x, embedding.EmbeddingParams(tau, dim, cfg.dim_cap))
    return tau, dim, cloud


def _diagram_key(chunk, tau, dim, cfg) -> str:
    h = hashlib.sha256(np.ascontiguousarray(chunk.samples, dtype=np.float64).tobytes())
    h.update(f"{tau}|{dim}|enclosing|{cfg.point_cap}".encode())
    return h.hexdigest()[:24]


@_stage("persistence")
def persistence_chunk(chunk, tau, dim, cloud, cfg: PipelineConfig, cache_dir: Path | None):
    path = cache_dir / f"{_diagram_key(chunk, tau, dim, cfg)}.json" if cache_dir else None
    if path is not None and path.exists():
        return PersistenceDiagram.from_json(path.read_text()), True
    prov = {"chunk_id": chunk.id, "tau": int(tau), "dim": int(dim)}
    dgm = cloud_persistence(cloud, max_hom_dim=1, point_cap=cfg.point_cap, provenance=prov)[1]
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dgm.to_json())
    return dgm, False


def compute_diagrams(cfg: PipelineConfig) -> PipelineState:
    state = PipelineState(cfg)
    out = Path(cfg.out)
    cache_dir = out / "cache" / "diagrams" if cfg.cache else None
    t = {s: 0.0 for s in ("ingest", "embedding", "persistence")}
    t0 = time.perf_counter()
    chunks = ingest_stage(cfg)
    t["ingest"] = time.perf_counter() - t0
    chash = cfg.config_hash()
    for chunk, y in chunks:
        t0 = time.perf_counter()
        tau, dim, cloud = embed_chunk(chunk, cfg)
        t1 = time.perf_counter()
        dgm, cached = persistence_chunk(chunk, tau, dim, cloud, cfg, cache_dir)
        t["embedding"] += t1 - t0
        t["persistence"] += time.perf_counter() - t1
        dgm.provenance.update(chunk_id=chunk.id, tau=int(tau), dim=int(dim), config_hash=chash)
        state.chunks.append(ChunkResult(chunk.id, chunk.parent_id, y, tau, dim, dgm, cached))
    state.timings = t
    ddir = out / "diagrams"
    ddir.mkdir(parents=True, exist_ok=True)
    for c in state.chunks:
        (ddir / f"{_safe(c.chunk_id)}.json").write_text(c.diagram.to_json())
    log.info("%d diagrams (%d from cache)", len(state.chunks), sum(c.cached for c in state.chunks))
    return state


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def _write_json(path: Path, payload: dict, chash: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"config_hash": chash, **payload}, indent=1))


@_stage("featurization")
def export_features(state: PipelineState, method: str) -> Path:
    """Feature matrix over the whole dataset, fitted on all of it (not used for scoring)."""
    cfg = state.config
    out = Path(cfg.out)
    samples = state.samples()
    diags = [s.diagram for s in samples]
    ids = [s.id for s in samples]
    labels = [s.label for s in samples]
    chash = cfg.config_hash()
    if method == "kernel":
        km = cached_kernel_matrix(diags, ids, cfg.sigma, out / "cache", chash)
        return km.to_csv(out / "features" / "kernel_gram.csv", chash)
    mcfg = cfg.method_config(method)
    if method == "carlsson":
        mcfg.carlsson_subset = (1, 2, 3, 4, 5)
    X, names = _Featurizer(mcfg).fit(diags).transform(diags)
    fm = FeatureMatrix(labels, X, names, ids)
    return fm.to_csv(out / "features" / f"{method}.csv", chash)


def evaluate_method(state: PipelineState, method: str) -> dict:
    """Reports for one method; Carlsson expands into its 31 coordinate subsets."""
    cfg = state.config
    samples = state.samples()
    split = cfg.split if cfg.split is not None else DEFAULT_SPLITS[method]
    mcfg = cfg.method_config(method)
    try:
        if method == "carlsson":
            reps = carlsson_subset_search(samples, split, cfg.iterations, cfg.seed, mcfg, cfg.jobs)
            return {"f" + "".join(map(str, k)): v for k, v in reps.items()}
        gram = None
        if method == "kernel":
            t0 = time.perf_counter()
            gram = cached_kernel_matrix([s.diagram for s in samples], [s.id for s in samples],
                                        cfg.sigma, Path(cfg.out) / "cache",
                                        cfg.config_hash()) if cfg.cache else None
            rep = evaluate(samples, mcfg, split, cfg.iterations, cfg.seed, gram=gram, jobs=cfg.jobs)
            if gram is not None:
                rep.timings["kernel_matrix"] = time.perf_counter() - t0
            return {method: rep}
        return {method: evaluate(samples, mcfg, split, cfg.iterations, cfg.seed, jobs=cfg.jobs)}
    except StageError:
        raise
    except ChatterError as err:
        raise StageError("training", err) from err


def stage_totals(state: PipelineState, reports: dict) -> dict:
    """Seconds per stage; featurization includes Gram construction for the kernel method."""
    tot = dict(state.timings)
    feat = sum(r.timings.get("featurization", 0.0) + r.timings.get("kernel_matrix", 0.0)
               for r in reports.values())
    train = sum(r.timings.get("training", 0.0) for r in reports.values())
    tot["featurization"] = feat
    tot["training"] = train
    return tot


def write_reports(state: PipelineState, method: str, reports: dict) -> dict:
    cfg = state.config
    out = Path(cfg.out)
    chash = cfg.config_hash()
    payload = {"method": method, "reports": {k: r.to_dict() for k, r in reports.items()}}
    if method == "carlsson":
        subsets = {("f" + "".join(map(str, s))): s for s in coordinate_subsets()}
        best = best_subset({subsets[k]: v for k, v in reports.items()})
        payload["best_subset"] = "f" + "".join(map(str, best))
    _write_json(out / f"report_{method}.json", payload, chash)
    table = format_reports(reports)
    (out / f"report_{method}.txt").write_text(f"# config_hash: {chash}\n{table}\n")
    totals = stage_totals(state, reports)
    _write_json(out / f"timing_{method}.json", {"seconds": totals, "total": sum(totals.values())},
                chash)
    return payload


def run(cfg: PipelineConfig, state: PipelineState | None = None) -> dict:
    """Full pipeline for ``cfg.method``; returns the EvalReport map."""
    state = state or compute_diagrams(cfg)
    export_features(state, cfg.method)
    reports = evaluate_method(state, cfg.method)
    write_reports(state, cfg.method, reports)
    return reports


def bench(cfg: PipelineConfig, methods) -> dict:
    """Run every method on one set of diagrams; one timing row per method.

    Each row's total charges the shared embedding and persistence time to
    every method, matching how per-method totals are usually reported.
    """
    methods = list(methods)
    if not methods:
        raise ConfigError("bench needs at least one method")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    state = compute_diagrams(cfg)
    shared = sum(state.timings.values())
    rows = {}
    for m in methods:
        t0 = time.perf_counter()
        reps = evaluate_method(state, m)
        write_reports(state, m, reps)
        elapsed = time.perf_counter() - t0
        best = max(reps.values(), key=lambda r: r.test_mean)
        rows[m] = {"total_seconds": shared + elapsed, "method_seconds": elapsed,
                   "test_mean": best.test_mean, "test_std": best.test_std}
    if "kernel" in rows:
        others = [r["total_seconds"] for k, r in rows.items() if k != "kernel"]
        kernel_slowest = all(rows["kernel"]["total_seconds"] >= t for t in others)
        if not kernel_slowest:
            log.info("kernel method was not the slowest at this scale")
    else:
        kernel_slowest = None
    result = {"rows": rows, "shared_seconds": state.timings, "kernel_slowest": kernel_slowest}
    _write_json(Path(cfg.out) / "bench.json", result, cfg.config_hash())
    (Path(cfg.out) / "bench.txt").write_text(format_bench(result) + "\n")
    return result


def format_bench(result: dict) -> str:
    lines = [f"{'method':<14}{'total s':>10}{'method s':>10}{'test acc (%)':>18}", "-" * 52]
    for m, r in result["rows"].items():
        lines.append(f"{m:<14}{r['total_seconds']:>10.2f}{r['method_seconds']:>10.2f}"
                     f"{100 * r['test_mean']:>10.1f} ± {100 * r['test_std']:<5.1f}")
    if result.get("kernel_slowest") is not None:
        lines.append(f"kernel slowest: {result['kernel_slowest']}")
    return "\n".join(lines)
