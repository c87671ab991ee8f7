"""Synthetic stable / chatter signals with a known topological contrast.

Stable cuts are a faint spindle-frequency tone buried in sensor noise, so
after normalisation the delay embedding is a noise cloud.  Chatter cuts add
a strong limit-cycle tone whose embedding is a clean loop.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidSpec
from .ingest import Label, TimeSeriesRecord, write_record

SPINDLE_AMPLITUDE = 0.1
CHATTER_AMPLITUDE = 2.0


@dataclass(frozen=True)
class SynthSpec:
    cls: str = "stable"
    fs: float = 10_000.0
    duration: float = 0.1
    spindle_freq: float = 10.0
    chatter_freq: float = 300.0
    noise_sigma: float = 0.05
    seed: int = 0
    spindle_amplitude: float = SPINDLE_AMPLITUDE
    chatter_amplitude: float = CHATTER_AMPLITUDE

    def validate(self):
        if self.cls not in ("stable", "chatter"):
            raise InvalidSpec(f"class must be 'stable' or 'chatter', got {self.cls!r}")
        if self.fs <= 0 or self.duration <= 0 or self.noise_sigma < 0:
            raise InvalidSpec("fs and duration must be positive, noise_sigma non-negative")
        if self.chatter_freq == self.spindle_freq:
            raise InvalidSpec("chatter_freq must differ from spindle_freq")
        if self.fs <= 4 * max(self.spindle_freq, self.chatter_freq):
            raise InvalidSpec("fs must exceed four times the highest tone frequency")
        if self.chatter_amplitude < 5 * self.spindle_amplitude:
            raise InvalidSpec("chatter tone must be at least 5x the spindle tone")


def generate(spec: SynthSpec, record_id: str | None = None) -> TimeSeriesRecord:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.fs * spec.duration))
    t = np.arange(n) / spec.fs
    x = spec.spindle_amplitude * np.sin(2 * np.pi * spec.spindle_freq * t + rng.uniform(0, 2 * np.pi))
    if spec.cls == "chatter":
        x = x + spec.chatter_amplitude * np.sin(2 * np.pi * spec.chatter_freq * t
                                                + rng.uniform(0, 2 * np.pi))
    x = x + rng.normal(0.0, spec.noise_sigma, n)
    label = Label.CHATTER if spec.cls == "chatter" else Label.STABLE
    meta = {"stickout_cm": 0.0, "rpm": 60.0 * spec.spindle_freq, "depth_of_cut_cm": 0.0,
            "id": record_id or f"{spec.cls}_{spec.seed}"}
    return TimeSeriesRecord(x, spec.fs, label, meta)


def generate_dataset(n_stable: int = 40, n_chatter: int = 40, noise_sigma: float = 0.05,
                     seed: int = 0, fs: float = 10_000.0, duration: float = 0.1,
                     freq_jitter: float = 0.1) -> list:
    """Balanced synthetic set; tone frequencies vary by +/- ``freq_jitter`` per record."""
    rng = np.random.default_rng(seed)
    records = []
    for cls, count in (("stable", n_stable), ("chatter", n_chatter)):
        for i in range(count):
            jitter = rng.uniform(1 - freq_jitter, 1 + freq_jitter, size=2)
            spec = SynthSpec(cls, fs, duration, spindle_freq=10.0 * jitter[0],
                             chatter_freq=300.0 * jitter[1], noise_sigma=noise_sigma,
                             seed=int(rng.integers(2**31)))
            records.append(generate(spec, f"{cls}_{i:03d}"))
    return records


def write_dataset(records, directory) -> Path:
    directory = Path(directory)
    for rec in records:
        write_record(rec, directory, rec.id)
    return directory
