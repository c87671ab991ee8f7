import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import tone_amplitude
from tdachatter.errors import (ChunkLongerThanSignal, ConstantSignal, CutoffAboveNyquist,
                               DataError, MalformedCsv, MissingMetadata, NonIntegerDecimation,
                               UnknownLabelString)
from tdachatter.ingest import (Label, TimeSeriesRecord, binary_label, load_dataset, load_record,
                               lowpass_decimate, normalize, split_chunks, write_record)

META = {"sample_rate": 160000, "label": "chatter", "stickout_cm": 5.08, "rpm": 570,
        "depth_of_cut_cm": 0.0127}


def _write(tmp_path, name, rows, meta=META):
    (tmp_path / f"{name}.csv").write_text("\n".join(rows) + "\n")
    if meta is not None:
        (tmp_path / f"{name}.json").write_text(json.dumps(meta))
    return tmp_path / f"{name}.csv"


def tone(freq, fs, n, amp=1.0):
    return amp * np.sin(2 * np.pi * freq * np.arange(n) / fs)


def test_load_ten_values(tmp_path):
    _write(tmp_path, "a", [str(v) for v in range(10)])
    recs = load_dataset(tmp_path)
    assert len(recs) == 1
    assert len(recs[0]) == 10 and recs[0].label is Label.CHATTER
    assert recs[0].sample_rate == 160000 and recs[0].id == "a"


def test_two_column_csv_with_header(tmp_path):
    p = _write(tmp_path, "b", ["time,accel", "0,1.5", "0.1,2.5"])
    assert np.array_equal(load_record(p).samples, [1.5, 2.5])


def test_unknown_label_is_flagged(tmp_path):
    p = _write(tmp_path, "u", ["1", "2"], {**META, "label": "Unknown"})
    rec = load_record(p)
    assert rec.excluded and binary_label(rec.label) is None


def test_malformed_row_is_named(tmp_path):
    p = _write(tmp_path, "m", ["1", "2", "oops", "4"])
    with pytest.raises(MalformedCsv, match="row 2"):
        load_record(p)


def test_missing_metadata(tmp_path):
    p = _write(tmp_path, "x", ["1", "2"], meta=None)
    with pytest.raises(MissingMetadata):
        load_record(p)
    bad = {k: v for k, v in META.items() if k != "rpm"}
    p = _write(tmp_path, "y", ["1", "2"], bad)
    with pytest.raises(MissingMetadata, match="rpm"):
        load_record(p)


def test_bad_label_string(tmp_path):
    p = _write(tmp_path, "z", ["1", "2"], {**META, "label": "wobbly"})
    with pytest.raises(UnknownLabelString):
        load_record(p)


def test_missing_directory(tmp_path):
    with pytest.raises(DataError):
        load_dataset(tmp_path / "nope")


def test_labels_case_insensitive_and_binary_map():
    assert Label.parse(" MILD ") is Label.MILD_CHATTER
    assert [binary_label(Label.parse(s)) for s in ("stable", "mild", "chatter")] == [0, 1, 1]


def test_write_then_load_round_trip(tmp_path):
    rec = TimeSeriesRecord(np.random.default_rng(0).normal(size=50), 10000.0, Label.STABLE,
                           {"stickout_cm": 1.0, "rpm": 2.0, "depth_of_cut_cm": 3.0, "id": "r"})
    back = load_record(write_record(rec, tmp_path))
    assert np.array_equal(back.samples, rec.samples)
    assert back.meta == rec.meta and back.label is rec.label


def test_decimate_length_and_rate():
    rec = TimeSeriesRecord(np.random.default_rng(0).normal(size=16001), 160000.0, Label.STABLE)
    out = lowpass_decimate(rec, 10000.0, 5000.0)
    assert out.sample_rate == 10000.0
    assert len(out) == int(np.ceil(16001 / 16))


def test_passband_tone_survives():
    fs, n = 160000.0, 32000
    out = lowpass_decimate(TimeSeriesRecord(tone(1000, fs, n), fs, Label.STABLE), 10000.0, 5000.0)
    assert tone_amplitude(out.samples, 10000.0, 1000) == pytest.approx(1.0, rel=0.01)
    spec = np.abs(np.fft.rfft(out.samples))
    freqs = np.fft.rfftfreq(len(out), 1 / 10000.0)
    assert freqs[np.argmax(spec)] == pytest.approx(1000.0)


@pytest.mark.parametrize("freq", [6000.0, 7000.0, 9000.0])
def test_stopband_tone_suppressed(freq):
    fs, n = 160000.0, 32000
    out = lowpass_decimate(TimeSeriesRecord(tone(freq, fs, n), fs, Label.STABLE), 10000.0, 5000.0)
    alias = abs(freq - 10000.0 * round(freq / 10000.0))
    assert tone_amplitude(out.samples, 10000.0, alias) < 1e-3
    # away from the start-up transients of a tone that switches on at t=0
    assert np.max(np.abs(out.samples[100:-100])) < 1e-3


def test_decimation_errors():
    rec = TimeSeriesRecord(np.ones(100), 160000.0, Label.STABLE)
    with pytest.raises(NonIntegerDecimation):
        lowpass_decimate(rec, 30000.0, 5000.0)
    with pytest.raises(CutoffAboveNyquist):
        lowpass_decimate(rec, 10000.0, 6000.0)


def test_normalize_examples():
    assert np.allclose(normalize([0, 2]), [-1, 1], atol=1e-15)
    x = normalize([1, 2, 3, 4])
    assert abs(x.mean()) < 1e-12 and abs(x.std() - 1) < 1e-12
    with pytest.raises(ConstantSignal):
        normalize([1, 1, 1])


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=200))
def test_normalize_moments_and_idempotence(values):
    x = np.array(values)
    if np.std(x) < 1e-6 * max(1.0, np.max(np.abs(x))):
        return
    y = normalize(x)
    assert abs(y.mean()) < 1e-12
    assert abs(y.std() - 1) < 1e-12
    assert np.max(np.abs(normalize(y) - y)) < 1e-9


def test_split_chunks_examples():
    rec = TimeSeriesRecord(np.arange(10.0), 1.0, Label.CHATTER, {"id": "p"})
    chunks = split_chunks(rec, 4)
    assert [c.samples.tolist() for c in chunks] == [[0, 1, 2, 3], [4, 5, 6, 7]]
    assert [c.id for c in chunks] == ["p#0", "p#1"]
    assert all(c.label is Label.CHATTER for c in chunks)
    assert len(split_chunks(TimeSeriesRecord(np.arange(4.0), 1.0, Label.STABLE), 4)) == 1
    with pytest.raises(ChunkLongerThanSignal):
        split_chunks(TimeSeriesRecord(np.arange(3.0), 1.0, Label.STABLE), 4)


@given(st.integers(1, 500), st.integers(2, 60))
def test_split_chunks_count_and_concatenation(n, chunk_len):
    rec = TimeSeriesRecord(np.arange(float(n)), 1.0, Label.STABLE)
    if n < chunk_len:
        with pytest.raises(ChunkLongerThanSignal):
            split_chunks(rec, chunk_len)
        return
    chunks = split_chunks(rec, chunk_len)
    assert len(chunks) == n // chunk_len
    joined = np.concatenate([c.samples for c in chunks])
    assert np.array_equal(joined, rec.samples[:len(joined)])
    assert n - len(joined) < chunk_len
