"""Data model and simulators for one-bit threshold-sampled UWB radar data.

A capture is an N x M matrix: N fast-time samples per pulse repetition
interval (PRI), M PRIs per coherent processing interval (CPI).  The receiver
compares the analog signal against a threshold that ramps linearly over
slow-time and records only the sign, so the raw data is a matrix of +/-1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import rfft, rfftfreq
from scipy.optimize import minimize_scalar

# Deterministic counter-based generator used everywhere randomness is needed.
# The name is recorded in run metadata so outputs can be reproduced exactly.
RNG_NAME = "numpy.random.Philox"

# Table of simulated narrowband interferer settings: carrier frequencies in
# MHz at an 8 GHz sampling rate, and amplitudes relative to the first source.
TABLE5_FREQS_MHZ = (500.0, 350.0, 700.0, 900.0, 1050.0)
TABLE5_AMP_RATIOS = (1.0, 0.95, 0.8, 0.87, 0.9)
TABLE5_FS_HZ = 8e9


def make_rng(seed) -> np.random.Generator:
    """Counter-based deterministic generator (Philox) from a seed or SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def sinusoid_matrix(freqs, amps_a, amps_b, n_fast: int) -> np.ndarray:
    """Evaluate sum_k a[k,m]*cos(w_k*(n-1)) + b[k,m]*sin(w_k*(n-1)) as an N x M matrix.

    ``freqs`` is length K in rad/sample, ``amps_a``/``amps_b`` are K x M.
    K = 0 yields an all-zero matrix.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    amps_a = np.atleast_2d(np.asarray(amps_a, dtype=float))
    amps_b = np.atleast_2d(np.asarray(amps_b, dtype=float))
    if freqs.size == 0:
        return np.zeros((n_fast, amps_a.shape[1] if amps_a.size else 0))
    ang = np.outer(np.arange(n_fast), freqs)  # N x K
    return np.cos(ang) @ amps_a + np.sin(ang) @ amps_b


@dataclass(frozen=True)
class SignedMatrix:
    """N x M matrix of one-bit measurements, every element exactly +1 or -1."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("signed matrix must be two-dimensional and non-empty")
        if not np.all(np.abs(d) == 1.0):
            raise ValueError("signed matrix elements must be exactly +1 or -1")
        object.__setattr__(self, "data", d)

    @property
    def n_fast(self) -> int:
        return self.data.shape[0]

    @property
    def m_slow(self) -> int:
        return self.data.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


@dataclass(frozen=True)
class ThresholdMatrix:
    """Known comparison thresholds: constant along fast-time, linear ramp over slow-time.

    Column m (1-based) holds -h + 2*(m-1)*h/(M-1), so the ramp runs from -h to +h.
    """

    h: float
    n_fast: int
    m_slow: int

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("threshold half-range h must be positive")
        if self.n_fast < 1 or self.m_slow < 2:
            raise ValueError("threshold ramp requires N >= 1 and M >= 2")

    @property
    def delta_h(self) -> float:
        return 2.0 * self.h / (self.m_slow - 1)

    @property
    def column_values(self) -> np.ndarray:
        """Length-M vector of per-PRI threshold levels."""
        return -self.h + (2.0 * self.h / (self.m_slow - 1)) * np.arange(self.m_slow)

    def full(self) -> np.ndarray:
        return np.broadcast_to(self.column_values, (self.n_fast, self.m_slow)).copy()

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.full(), dtype=dtype)


@dataclass(frozen=True)
class RfiParams:
    """Sum-of-sinusoids interference model with per-PRI quadrature amplitudes.

    ``freqs`` (K,) in [0, pi) rad/sample; ``amps_a``/``amps_b`` (K, M); ``sigma``
    is the scale of the Gaussian background the one-bit likelihood assumes.
    """

    freqs: np.ndarray
    amps_a: np.ndarray
    amps_b: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        a = np.atleast_2d(np.asarray(self.amps_a, dtype=float))
        b = np.atleast_2d(np.asarray(self.amps_b, dtype=float))
        if freqs.size and (a.shape[0] != freqs.size or b.shape != a.shape):
            raise ValueError("amplitude matrices must be K x M with K = len(freqs)")
        if np.any(freqs < 0) or np.any(freqs >= np.pi):
            raise ValueError("frequencies must lie in [0, pi)")
        if not (np.isfinite(freqs).all() and np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("RFI parameters must be finite")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "amps_a", a)
        object.__setattr__(self, "amps_b", b)

    @property
    def n_components(self) -> int:
        return self.freqs.size

    @property
    def m_slow(self) -> int:
        return self.amps_a.shape[1]

    def synthesize(self, n_fast: int) -> np.ndarray:
        return sinusoid_matrix(self.freqs, self.amps_a, self.amps_b, n_fast)


@dataclass(frozen=True)
class Pulse:
    """Transmitted impulse samples with the index of the (zero-valued) center."""

    samples: np.ndarray
    center: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if not np.isfinite(s).all():
            raise ValueError("pulse samples must be finite")
        if np.max(np.abs(s)) <= 0:
            raise ValueError("pulse must be nonzero")
        if not 0 <= self.center < s.size:
            raise ValueError("center index out of range")
        object.__setattr__(self, "samples", s)

    @property
    def length(self) -> int:
        return self.samples.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)


@dataclass(frozen=True)
class Dictionary:
    """N x N shift dictionary: column j is the pulse centered on row j, border-truncated."""

    matrix: np.ndarray
    pulse: Pulse

    @property
    def n_fast(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def sign_sample(signal, thresholds) -> SignedMatrix:
    """One-bit sample ``signal`` against per-PRI thresholds: +1 where signal >= threshold.

    Ties quantize to +1 (sign(0) = +1).
    """
    sig = np.asarray(signal, dtype=float)
    thr = np.asarray(thresholds, dtype=float)
    if sig.shape != thr.shape:
        raise ValueError(f"signal shape {sig.shape} does not match thresholds {thr.shape}")
    return SignedMatrix(np.where(sig >= thr, 1.0, -1.0))


def synthesize_rfi(params: RfiParams, n_fast: int, m_slow: int | None = None) -> np.ndarray:
    """Materialize the interference matrix for ``params`` (exact two-term sum)."""
    out = params.synthesize(n_fast)
    if m_slow is not None and out.shape[1] != m_slow:
        raise ValueError(f"params describe M={out.shape[1]} PRIs, requested {m_slow}")
    return out


def simulate_table5_rfi(a1: float, m_slow: int, n_fast: int, seed,
                        sigma: float = 1.0) -> RfiParams:
    """Five fixed-frequency interferers with amplitudes constant over slow-time.

    Source amplitudes are the tabulated ratios times ``a1``; phases are i.i.d.
    uniform on [0, 2*pi) per source and PRI, drawn from a Philox stream.
    """
    if a1 <= 0:
        raise ValueError("a1 must be positive")
    if m_slow < 1 or n_fast < 1:
        raise ValueError("m_slow and n_fast must be >= 1")
    freqs = 2.0 * np.pi * np.asarray(TABLE5_FREQS_MHZ) * 1e6 / TABLE5_FS_HZ
    amps = a1 * np.asarray(TABLE5_AMP_RATIOS)
    phases = make_rng(seed).uniform(0.0, 2.0 * np.pi, size=(len(freqs), m_slow))
    # A*sin(w*(n-1) + phi) = A*sin(phi)*cos(w*(n-1)) + A*cos(phi)*sin(w*(n-1))
    amps_a = amps[:, None] * np.sin(phases)
    amps_b = amps[:, None] * np.cos(phases)
    return RfiParams(freqs=freqs, amps_a=amps_a, amps_b=amps_b, sigma=sigma)


def _band_edges_10db(samples: np.ndarray, fs_hz: float, n_fft: int = 1 << 16):
    """(-10 dB) band edges of the magnitude spectrum around its peak, via DFT."""
    mag = np.abs(rfft(samples, n=n_fft))
    freqs = rfftfreq(n_fft, d=1.0 / fs_hz)
    peak = int(np.argmax(mag))
    level = mag[peak] / np.sqrt(10.0)
    lo = peak
    while lo > 0 and mag[lo - 1] >= level:
        lo -= 1
    hi = peak
    while hi < mag.size - 1 and mag[hi + 1] >= level:
        hi += 1
    return freqs[lo], freqs[hi], freqs[peak]


def _derivative_gaussian(length: int, sigma_samples: float) -> np.ndarray:
    c = length // 2
    t = np.arange(length, dtype=float) - c
    x = -t * np.exp(-0.5 * (t / sigma_samples) ** 2)
    return x / np.max(np.abs(x))


def make_pulse(fs_hz: float, length: int = 21,
               band_hz: tuple[float, float] = (300e6, 1100e6)) -> Pulse:
    """First-derivative-of-Gaussian impulse whose -10 dB band covers ``band_hz``.

    The Gaussian width is fixed by a deterministic search so that the -10 dB
    band of the DFT magnitude covers the target band with its geometric center
    matched to sqrt(f_lo*f_hi) within 15%.  Raises ValueError when the band is
    infeasible for the given length and sampling rate.
    """
    f_lo, f_hi = band_hz
    if length % 2 == 0 or length < 3:
        raise ValueError("pulse length must be odd and >= 3")
    if not 0 < f_lo < f_hi:
        raise ValueError("band must satisfy 0 < f_lo < f_hi")
    if fs_hz <= 2.0 * f_hi:
        raise ValueError("sampling rate must exceed twice the upper band edge")
    f_center = np.sqrt(f_lo * f_hi)
    # Peak of |f*exp(-2*pi^2*sigma^2*f^2)| sits at 1/(2*pi*sigma); start there.
    sigma0 = fs_hz / (2.0 * np.pi * f_center)

    def center_mismatch(log_sigma):
        lo, hi, _ = _band_edges_10db(_derivative_gaussian(length, np.exp(log_sigma)), fs_hz)
        if lo <= 0:
            lo = fs_hz / (1 << 16)
        return abs(np.log(np.sqrt(lo * hi) / f_center))

    res = minimize_scalar(center_mismatch,
                          bounds=(np.log(sigma0 / 8.0), np.log(sigma0 * 8.0)),
                          method="bounded", options={"xatol": 1e-6})
    sigma = float(np.exp(res.x))
    samples = _derivative_gaussian(length, sigma)
    lo, hi, _ = _band_edges_10db(samples, fs_hz)
    if not (lo <= f_lo and hi >= f_hi):
        raise ValueError(
            f"-10 dB band [{lo/1e6:.0f}, {hi/1e6:.0f}] MHz cannot cover "
            f"[{f_lo/1e6:.0f}, {f_hi/1e6:.0f}] MHz with length={length}, fs={fs_hz/1e9:g} GHz")
    if abs(np.sqrt(lo * hi) / f_center - 1.0) > 0.15:
        raise ValueError("band center off by more than 15%: infeasible band")
    return Pulse(samples=samples, center=length // 2)


def build_dictionary(pulse: Pulse, n_fast: int) -> Dictionary:
    """Stack border-truncated shifted copies of the pulse as dictionary columns."""
    p = pulse.samples
    if n_fast < p.size:
        raise ValueError("dictionary size must be at least the pulse length")
    d = np.zeros((n_fast, n_fast))
    for j in range(n_fast):
        start = j - pulse.center
        r0, r1 = max(0, start), min(n_fast, start + p.size)
        d[r0:r1, j] = p[r0 - start:r1 - start]
    return Dictionary(matrix=d, pulse=pulse)


@dataclass(frozen=True)
class Scenario:
    """Reproducible capture: a fixed echo plus optional interference and noise."""

    echo: np.ndarray
    rfi: RfiParams | None = None
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        e = np.asarray(self.echo, dtype=float)
        if e.ndim != 1 or not np.isfinite(e).all():
            raise ValueError("echo must be a finite 1-D vector")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        object.__setattr__(self, "echo", e)

    def components(self, m_slow: int):
        """(S, R, E) matrices; elements are generated in fixed row-major order."""
        n = self.echo.size
        s = np.tile(self.echo[:, None], (1, m_slow))
        r = self.rfi.synthesize(n) if self.rfi is not None else np.zeros((n, m_slow))
        if r.shape[1] != m_slow:
            raise ValueError("RFI params PRI count does not match m_slow")
        if self.noise_std > 0:
            e = self.noise_std * make_rng(self.seed).standard_normal((n, m_slow))
        else:
            e = np.zeros((n, m_slow))
        return s, r, e

    def sample(self, thresholds: ThresholdMatrix) -> SignedMatrix:
        s, r, e = self.components(thresholds.m_slow)
        return sign_sample(s + r + e, thresholds)


def _l2(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float).ravel()))


def sinr(signal, rfi, noise=None) -> float:
    """20*log10(||S|| / ||R+E||) in dB; uses ||R|| alone when no noise matrix is given."""
    denom = _l2(np.asarray(rfi, float) + np.asarray(noise, float)) if noise is not None else _l2(rfi)
    if denom == 0:
        raise ValueError("interference-plus-noise norm is zero")
    return 20.0 * np.log10(_l2(signal) / denom)


def inr(rfi, noise) -> float:
    """20*log10(||R|| / ||E||) in dB."""
    denom = _l2(noise)
    if denom == 0:
        raise ValueError("noise norm is zero")
    return 20.0 * np.log10(_l2(rfi) / denom)


def nre(echo_true, echo_hat) -> float:
    """Normalized recovery error 20*log10(||s - s_hat|| / ||s||) in dB.

    Exact recovery returns -inf.
    """
    denom = _l2(echo_true)
    if denom == 0:
        raise ValueError("true echo norm is zero")
    num = _l2(np.asarray(echo_true, float) - np.asarray(echo_hat, float))
    if num == 0:
        return float("-inf")
    return 20.0 * np.log10(num / denom)
