"""Delay reconstruction: delay and dimension estimates plus the delay map."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (ConstantSignal, NoMinimumFound, NoSignificantFrequency, SignalTooShort,
                     TooShort)

DIM_CAP = 10
FNN_RTOL = 10.0
FNN_PCT = 0.1
FNN_ATOL = 2.0
NOISE_MARGIN_DB = 20.0
MI_BINS = 16
MIN_FNN_POINTS = 10


class FnnSaturated(UserWarning):
    """FNN never dropped below threshold; the dimension cap was returned."""


@dataclass(frozen=True)
class EmbeddingParams:
    tau: int
    dim: int
    dim_cap: int = DIM_CAP

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if not 1 <= self.dim <= self.dim_cap:
            raise ValueError(f"dim must lie in [1, {self.dim_cap}], got {self.dim}")


def delay_embed(samples, params: EmbeddingParams | None = None, *, tau: int | None = None,
                dim: int | None = None) -> np.ndarray:
    """Point cloud of shape ``(n - (dim-1)*tau, dim)``; row i is (x_i, x_{i+tau}, ...)."""
    if params is None:
        params = EmbeddingParams(tau, dim, max(DIM_CAP, dim))
    x = np.asarray(samples, dtype=float).reshape(-1)
    span = (params.dim - 1) * params.tau
    n_points = len(x) - span
    if n_points < 1:
        raise SignalTooShort(f"need more than {span} samples for tau={params.tau}, "
                             f"dim={params.dim}; got {len(x)}")
    idx = np.arange(n_points)[:, None] + params.tau * np.arange(params.dim)[None, :]
    return x[idx]


def lms_floor(values) -> float:
    """Least-median-of-squares constant fit.

    The minimiser of ``median((v - c)^2)`` is the midpoint of the shortest
    interval holding ``floor(n/2) + 1`` of the sorted values.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    h = n // 2 + 1
    widths = v[h - 1:] - v[:n - h + 1]
    i = int(np.argmin(widths))
    return 0.5 * (v[i] + v[i + h - 1])


def significant_frequencies(samples, fs: float, margin_db: float = NOISE_MARGIN_DB):
    """Spectral lines (Hz, DC excluded) clearing the LMS noise floor by ``margin_db``.

    Only local maxima of the magnitude spectrum count, so the leakage skirt
    of a strong off-bin tone does not register as higher frequencies.
    """
    x = np.asarray(samples, dtype=float)
    mag = np.abs(np.fft.rfft(x - x.mean()))[1:]
    freqs = np.fft.rfftfreq(len(x), 1.0 / fs)[1:]
    peak = mag.max()
    if peak == 0:
        raise ConstantSignal("signal is constant")
    # relative dB keeps the decision invariant to amplitude scaling; the
    # -240 dB clamp keeps FFT round-off from posing as spectral lines
    db = 20.0 * np.log10(mag / peak + 1e-12)
    floor = lms_floor(db)
    padded = np.concatenate([[-np.inf], db, [-np.inf]])
    peak_mask = (db >= padded[:-2]) & (db >= padded[2:])
    return freqs[peak_mask & (db > floor + margin_db)]


def estimate_delay_fft_lms(samples, fs: float, margin_db: float = NOISE_MARGIN_DB) -> int:
    """tau = floor(fs / (4 f_max)), f_max the highest significant spectral line."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 64:
        raise TooShort(f"need at least 64 samples, got {len(x)}")
    if np.ptp(x) == 0:
        raise ConstantSignal("signal is constant")
    sig = significant_frequencies(x, fs, margin_db)
    if len(sig) == 0:
        raise NoSignificantFrequency("no spectral line clears the noise floor")
    f_max = float(sig.max())
    return max(1, int(np.floor(fs / (4.0 * f_max))))


def _linear_bin(v, bins: int, lo: float, hi: float):
    """Lower bin-centre index and weight of the upper neighbour for each value."""
    u = np.clip((v - lo) / (hi - lo) * bins - 0.5, 0.0, bins - 1.0)
    i0 = np.minimum(np.floor(u).astype(np.int64), bins - 2)
    return i0, u - i0


def linear_binned_histogram2d(x, y, bins: int, value_range) -> np.ndarray:
    """Joint histogram on equal-width bins with bilinear assignment to bin centres.

    Hard bin edges make the estimate jump whenever a sample crosses an edge;
    splitting each sample across the four nearest centres keeps it
    continuous in the data, so the curve over lags is free of lattice noise.
    """
    (xlo, xhi), (ylo, yhi) = value_range
    ix, fx = _linear_bin(np.asarray(x, float), bins, xlo, xhi)
    iy, fy = _linear_bin(np.asarray(y, float), bins, ylo, yhi)
    h = np.zeros(bins * bins)
    for dx, wx in ((0, 1.0 - fx), (1, fx)):
        for dy, wy in ((0, 1.0 - fy), (1, fy)):
            h += np.bincount((ix + dx) * bins + iy + dy, weights=wx * wy, minlength=bins * bins)
    return h.reshape(bins, bins)


def mutual_information(x, y, bins: int = MI_BINS, value_range=None) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if value_range is None:
        value_range = [[x.min(), x.max()], [y.min(), y.max()]]
    if bins < 2 or any(hi <= lo for lo, hi in value_range):
        raise ValueError("need bins >= 2 and a non-degenerate value range")
    joint = linear_binned_histogram2d(x, y, bins, value_range)
    p = joint / joint.sum()
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / (px @ py)[nz])))


def mutual_information_curve(samples, max_tau: int, bins: int = MI_BINS) -> np.ndarray:
    """I(x_t; x_{t+tau}) for tau = 0 .. max_tau + 1 with a fixed binning."""
    x = np.asarray(samples, dtype=float)
    lo, hi = x.min(), x.max()
    rng = [[lo, hi], [lo, hi]]
    return np.array([mutual_information(x[:len(x) - t], x[t:], bins, rng)
                     for t in range(max_tau + 2)])


def estimate_delay_mutual_info(samples, max_tau: int, bins: int = MI_BINS) -> int:
    """First strict local minimum of the binned mutual information."""
    if max_tau < 2:
        raise ValueError("max_tau must be >= 2")
    x = np.asarray(samples, dtype=float)
    if len(x) <= max_tau + 2:
        raise TooShort("signal shorter than max_tau")
    if np.ptp(x) == 0:
        raise ConstantSignal("signal is constant")
    mi = mutual_information_curve(x, max_tau, bins)
    for t in range(1, max_tau + 1):
        if mi[t] < mi[t - 1] and mi[t] < mi[t + 1]:
            return t
    raise NoMinimumFound(f"mutual information has no minimum in [1, {max_tau}]")


def _nearest_neighbors(points: np.ndarray, block: int = 512):
    """Index of and distance to each point's nearest other point (brute force)."""
    n = len(points)
    sq = np.einsum("ij,ij->i", points, points)
    idx = np.empty(n, dtype=np.int64)
    for start in range(0, n, block):
        stop = min(n, start + block)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * points[start:stop] @ points.T
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        idx[start:stop] = np.argmin(d2, axis=1)
    # exact distances for the chosen neighbours; the expansion above only ranks
    dist = np.linalg.norm(points - points[idx], axis=1)
    return idx, dist


def false_neighbor_fraction(samples, tau: int, dim: int, r_tol: float = FNN_RTOL,
                            a_tol: float | None = FNN_ATOL) -> float:
    """Fraction of dim-space nearest neighbours torn apart by coordinate dim+1.

    A pair is false when the added coordinate separates it by more than
    ``r_tol`` times its dim-space distance, or (unless ``a_tol`` is None)
    when its (dim+1)-space distance exceeds ``a_tol`` signal standard
    deviations.  Coincident pairs that stay coincident are not false, so a
    constant signal scores 0.
    """
    x = np.asarray(samples, dtype=float)
    n_points = len(x) - dim * tau
    if n_points < 2:
        raise TooShort(f"too few points to test dimension {dim}")
    pts = delay_embed(x, tau=tau, dim=dim)[:n_points]
    nxt = x[dim * tau: dim * tau + n_points]
    idx, dist = _nearest_neighbors(pts)
    extra = np.abs(nxt - nxt[idx])
    false = np.where(dist > 0, extra > r_tol * dist, extra > 0)
    sigma = x.std()
    if a_tol is not None and sigma > 0:
        false |= np.hypot(dist, extra) > a_tol * sigma
    return float(false.mean())


def estimate_dim_fnn(samples, tau: int, dim_cap: int = DIM_CAP, r_tol: float = FNN_RTOL,
                     pct_threshold: float = FNN_PCT, a_tol: float | None = FNN_ATOL) -> int:
    """Smallest dimension whose false-neighbour fraction is below ``pct_threshold``.

    Returns the largest dimension tried (``dim_cap``, or less when the signal
    is too short to embed further) with an ``FnnSaturated`` warning if none
    qualifies.
    """
    if tau < 1 or dim_cap < 1 or r_tol <= 0 or not 0 < pct_threshold < 1:
        raise ValueError("invalid FNN parameters")
    x = np.asarray(samples, dtype=float)
    if len(x) < 10:
        raise TooShort(f"need at least 10 samples, got {len(x)}")
    tried = 1
    for d in range(1, dim_cap + 1):
        # testing d needs the (d+1)-dimensional cloud to keep MIN_FNN_POINTS
        if len(x) - d * tau < MIN_FNN_POINTS:
            break
        tried = d
        if false_neighbor_fraction(x, tau, d, r_tol, a_tol) < pct_threshold:
            return d
    warnings.warn(f"false-neighbour fraction never fell below {pct_threshold}; "
                  f"returning dim={tried}", FnnSaturated, stacklevel=2)
    return tried
