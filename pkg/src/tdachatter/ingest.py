"""Loading, conditioning and chunking of labelled acceleration signals.

On-disk layout: one CSV per signal (a single column of samples, or two
columns ``time,sample``) next to a JSON sidecar with the same stem carrying
``sample_rate``, ``label``, ``stickout_cm``, ``rpm`` and ``depth_of_cut_cm``.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import (ChunkLongerThanSignal, ConstantSignal, CutoffAboveNyquist, DataError,
                     MalformedCsv, MissingMetadata, NonIntegerDecimation, UnknownLabelString)

METADATA_KEYS = ("sample_rate", "label", "stickout_cm", "rpm", "depth_of_cut_cm")
DEFAULT_CHUNK_SECONDS = 1.0
FILTER_ORDER = 100


class Label(enum.Enum):
    STABLE = "stable"
    MILD_CHATTER = "mild"
    CHATTER = "chatter"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, text: str) -> "Label":
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise UnknownLabelString(f"unknown label {text!r}; expected one of "
                                     f"{[m.value for m in cls]}") from None


# MildChatter is grouped with Chatter by default; pass a different mapping to
# binary_label to change that.
DEFAULT_BINARY_MAP = {Label.STABLE: 0, Label.MILD_CHATTER: 1, Label.CHATTER: 1}


def binary_label(label: Label, mapping: dict | None = None) -> int | None:
    """0/1 class of a tag, ``None`` for tags excluded from training."""
    return (mapping or DEFAULT_BINARY_MAP).get(label)


@dataclass(frozen=True)
class TimeSeriesRecord:
    samples: np.ndarray
    sample_rate: float
    label: Label
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float).reshape(-1)
        object.__setattr__(self, "samples", samples)
        if samples.size == 0:
            raise DataError("record has no samples")
        if not self.sample_rate > 0:
            raise DataError(f"sample_rate must be positive, got {self.sample_rate}")
        if not isinstance(self.label, Label):
            object.__setattr__(self, "label", Label.parse(self.label))

    @property
    def id(self) -> str:
        return str(self.meta.get("id", ""))

    @property
    def excluded(self) -> bool:
        """Unknown-tagged records are kept for inspection but never trained on."""
        return self.label is Label.UNKNOWN

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class Chunk:
    samples: np.ndarray
    parent_id: str
    index: int
    label: Label
    sample_rate: float = 0.0

    @property
    def id(self) -> str:
        return f"{self.parent_id}#{self.index}"


def _read_samples(path: Path) -> np.ndarray:
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row_no, row in enumerate(csv.reader(fh)):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            if len(cells) > 2:
                raise MalformedCsv(path, row_no, f"expected 1 or 2 columns, got {len(cells)}")
            try:
                nums = [float(c) for c in cells]
            except ValueError:
                # a single header line is tolerated
                if row_no == 0 and not values:
                    continue
                raise MalformedCsv(path, row_no) from None
            if not all(math.isfinite(v) for v in nums):
                raise MalformedCsv(path, row_no, "non-finite value")
            values.append(nums[-1])
    if not values:
        raise MalformedCsv(path, 0, "no samples")
    return np.asarray(values, dtype=float)


def load_record(csv_path) -> TimeSeriesRecord:
    csv_path = Path(csv_path)
    meta_path = csv_path.with_suffix(".json")
    if not meta_path.exists():
        raise MissingMetadata(f"no metadata sidecar {meta_path.name} for {csv_path.name}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    missing = [k for k in METADATA_KEYS if k not in meta]
    if missing:
        raise MissingMetadata(f"{meta_path.name}: missing keys {missing}")
    label = Label.parse(meta["label"])
    samples = _read_samples(csv_path)
    info = {k: float(meta[k]) for k in ("stickout_cm", "rpm", "depth_of_cut_cm")}
    info["id"] = str(meta.get("id", csv_path.stem))
    return TimeSeriesRecord(samples, float(meta["sample_rate"]), label, info)


def load_dataset(path) -> list[TimeSeriesRecord]:
    """One record per CSV in ``path``, sorted by file name."""
    path = Path(path)
    if not path.is_dir():
        raise DataError(f"dataset directory not found: {path}")
    return [load_record(p) for p in sorted(path.glob("*.csv"))]


def write_record(rec: TimeSeriesRecord, directory, name: str | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = name or rec.id or "signal"
    csv_path = directory / f"{name}.csv"
    np.savetxt(csv_path, rec.samples, fmt="%.17g")
    meta = {
        "sample_rate": rec.sample_rate,
        "label": rec.label.value,
        "stickout_cm": rec.meta.get("stickout_cm", 0.0),
        "rpm": rec.meta.get("rpm", 0.0),
        "depth_of_cut_cm": rec.meta.get("depth_of_cut_cm", 0.0),
        "id": name,
    }
    csv_path.with_suffix(".json").write_text(json.dumps(meta, indent=1), encoding="utf-8")
    return csv_path


def design_lowpass(cutoff: float, sample_rate: float, order: int = FILTER_ORDER) -> np.ndarray:
    """Butterworth low-pass as second-order sections."""
    return signal.butter(order, cutoff, btype="low", fs=sample_rate, output="sos")


def lowpass_decimate(rec: TimeSeriesRecord, target_rate: float, cutoff: float,
                     order: int = FILTER_ORDER) -> TimeSeriesRecord:
    """Zero-phase low-pass at the input rate, then keep every ``factor``-th sample."""
    ratio = rec.sample_rate / target_rate
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9 * ratio:
        raise NonIntegerDecimation(f"{rec.sample_rate} Hz -> {target_rate} Hz is not an integer factor")
    if not 0 < cutoff <= target_rate / 2:
        raise CutoffAboveNyquist(f"cutoff {cutoff} Hz must lie in (0, {target_rate / 2}] Hz")
    x = rec.samples
    if factor > 1 or cutoff < rec.sample_rate / 2:
        sos = design_lowpass(cutoff, rec.sample_rate, order)
        padlen = min(len(x) - 1, 3 * (2 * len(sos) + 1))
        x = signal.sosfiltfilt(sos, x, padlen=padlen)
    return replace(rec, samples=np.ascontiguousarray(x[::factor]), sample_rate=float(target_rate))


def normalize(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ConstantSignal("need at least two samples to normalize")
    centred = x - x.mean()
    std = np.sqrt(np.mean(centred * centred))
    if std == 0 or not np.isfinite(std):
        raise ConstantSignal("signal has zero variance")
    out = centred / std
    # one refinement pass absorbs the rounding left by the first
    out -= out.mean()
    return out / np.sqrt(np.mean(out * out))


def split_chunks(rec: TimeSeriesRecord, chunk_len: int) -> list[Chunk]:
    """Contiguous non-overlapping chunks; a tail shorter than ``chunk_len`` is dropped."""
    if chunk_len < 2:
        raise ValueError("chunk_len must be >= 2")
    n_chunks = len(rec.samples) // chunk_len
    if n_chunks == 0:
        raise ChunkLongerThanSignal(f"chunk_len {chunk_len} exceeds signal length {len(rec.samples)}")
    return [Chunk(rec.samples[i * chunk_len:(i + 1) * chunk_len], rec.id, i, rec.label,
                  rec.sample_rate)
            for i in range(n_chunks)]


def default_chunk_len(sample_rate: float) -> int:
    return int(round(DEFAULT_CHUNK_SECONDS * sample_rate))
