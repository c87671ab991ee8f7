import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import fnn_fraction_loop
from tdachatter.embedding import (EmbeddingParams, FnnSaturated, delay_embed,
                                  estimate_delay_fft_lms, estimate_delay_mutual_info,
                                  estimate_dim_fnn, false_neighbor_fraction, linear_binned_histogram2d,
                                  lms_floor, mutual_information,
                                  mutual_information_curve, significant_frequencies)
from tdachatter.errors import (ConstantSignal, NoMinimumFound, NoSignificantFrequency,
                               SignalTooShort, TooShort)

FS = 1000.0
T = np.arange(1000) / FS
SINE50 = np.sin(2 * np.pi * 50 * T)


def test_delay_embed_examples():
    assert delay_embed([1, 2, 3, 4, 5], tau=1, dim=2).tolist() == [[1, 2], [2, 3], [3, 4], [4, 5]]
    assert delay_embed(range(7), EmbeddingParams(2, 3)).tolist() == [[0, 2, 4], [1, 3, 5],
                                                                     [2, 4, 6]]
    with pytest.raises(SignalTooShort):
        delay_embed(range(5), tau=2, dim=4)
    assert delay_embed(range(7), tau=2, dim=4).tolist() == [[0, 2, 4, 6]]


@given(st.integers(1, 300), st.integers(1, 20), st.integers(1, 10))
def test_delay_embed_count(n, tau, dim):
    x = np.arange(n, dtype=float)
    if n <= (dim - 1) * tau:
        with pytest.raises(SignalTooShort):
            delay_embed(x, tau=tau, dim=dim)
        return
    pts = delay_embed(x, tau=tau, dim=dim)
    assert pts.shape == (n - (dim - 1) * tau, dim)
    assert np.array_equal(pts[:, -1] - pts[:, 0], np.full(len(pts), (dim - 1) * tau))


def test_delay_embed_dim_one_is_identity():
    x = np.random.default_rng(0).normal(size=37)
    assert np.array_equal(delay_embed(x, tau=3, dim=1)[:, 0], x)


def test_params_validation():
    with pytest.raises(ValueError):
        EmbeddingParams(0, 2)
    with pytest.raises(ValueError):
        EmbeddingParams(1, 11)


def test_lms_floor_ignores_outliers():
    v = np.concatenate([np.full(60, -30.0), [0.0, -1.0, -2.0]])
    assert lms_floor(v) == -30.0
    assert lms_floor([1.0, 2.0, 3.0]) == 1.5


def test_delay_fft_examples():
    assert estimate_delay_fft_lms(SINE50, FS) == 5
    two = np.sin(2 * np.pi * 50 * T) + np.sin(2 * np.pi * 120 * T)
    assert estimate_delay_fft_lms(two, FS) == 2
    assert 120.0 in significant_frequencies(two, FS)
    with pytest.raises(ConstantSignal):
        estimate_delay_fft_lms(np.full(100, 3.0), FS)
    with pytest.raises(TooShort):
        estimate_delay_fft_lms(SINE50[:63], FS)


def test_white_noise_has_no_significant_line():
    x = np.random.default_rng(0).normal(size=1000)
    with pytest.raises(NoSignificantFrequency):
        estimate_delay_fft_lms(x, FS)


@given(st.floats(1e-6, 1e6))
def test_delay_fft_scale_invariant(c):
    two = np.sin(2 * np.pi * 50 * T) + 0.3 * np.sin(2 * np.pi * 120 * T)
    assert estimate_delay_fft_lms(c * two, FS) == estimate_delay_fft_lms(two, FS)


@pytest.mark.parametrize("period", [8.0, 12.0, 20.0, 37.3, 64.0, 80.5, 100.0])
def test_mutual_info_quarter_period(period):
    x = np.sin(2 * np.pi * np.arange(3000) / period)
    assert abs(estimate_delay_mutual_info(x, int(period)) - period / 4) <= 1


def test_mutual_info_errors():
    with pytest.raises(ValueError):
        estimate_delay_mutual_info(SINE50, 1)
    slow = np.sin(2 * np.pi * np.arange(2000) / 2000)
    with pytest.raises(NoMinimumFound):
        estimate_delay_mutual_info(slow, 5)


def test_linear_binning_conserves_mass_and_splits_between_centres():
    rng = np.random.default_rng(2)
    x, y = rng.uniform(0, 1, 300), rng.uniform(0, 1, 300)
    h = linear_binned_histogram2d(x, y, 16, [[0, 1], [0, 1]])
    assert h.sum() == pytest.approx(300.0, abs=1e-9)
    # a value halfway between the first two bin centres splits evenly
    h = linear_binned_histogram2d([1 / 16], [1 / 32], 16, [[0, 1], [0, 1]])
    assert h[0, 0] == pytest.approx(0.5) and h[1, 0] == pytest.approx(0.5)


def test_independent_noise_has_small_information():
    rng = np.random.default_rng(3)
    assert mutual_information(rng.normal(size=5000), rng.normal(size=5000)) < 0.05


def test_mutual_info_curve_starts_at_entropy():
    x = np.random.default_rng(1).normal(size=500)
    mi = mutual_information_curve(x, 4)
    assert len(mi) == 6 and np.argmax(mi) == 0


def test_fnn_sine_is_two():
    assert estimate_dim_fnn(SINE50, tau=5) == 2


def test_fnn_fraction_nonincreasing_on_sine():
    fr = [false_neighbor_fraction(SINE50, 5, d) for d in range(1, 6)]
    assert all(a >= b for a, b in zip(fr, fr[1:]))
    assert fr[0] > 0.5


def test_fnn_constant_signal():
    assert estimate_dim_fnn(np.ones(200), tau=1) == 1


def test_fnn_white_noise_saturates():
    x = np.random.default_rng(0).normal(size=1000)
    with pytest.warns(FnnSaturated):
        assert estimate_dim_fnn(x, tau=1, dim_cap=10) == 10


def test_fnn_stops_at_feasible_dimension():
    x = np.random.default_rng(0).normal(size=60)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        d = estimate_dim_fnn(x, tau=10)
    assert d <= 5 and any(issubclass(i.category, FnnSaturated) for i in w)


def test_fnn_errors():
    with pytest.raises(TooShort):
        estimate_dim_fnn(np.arange(9.0), tau=1)
    with pytest.raises(ValueError):
        estimate_dim_fnn(SINE50, tau=1, pct_threshold=1.5)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("a_tol", [None, 2.0])
def test_fnn_fraction_matches_loop_oracle(seed, a_tol):
    rng = np.random.default_rng(seed)
    x = np.cumsum(rng.normal(size=120))  # random walk: no exact distance ties
    for dim in (1, 2, 3):
        ours = false_neighbor_fraction(x, 2, dim, 10.0, a_tol)
        assert ours == fnn_fraction_loop(x, 2, dim, 10.0, a_tol)
