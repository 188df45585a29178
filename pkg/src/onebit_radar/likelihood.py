"""Numerically stable one-bit Gaussian likelihood primitives shared by all solvers.

The negative log-likelihood of a signed matrix under the sinusoid-plus-Gaussian
model is sum(-log Phi(Y * (R_scaled - lambda*H))) where the amplitudes and the
threshold scale are divided by the unknown noise deviation sigma
(lambda = 1/sigma).  Everything here is elementwise and pure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import log_ndtr

from .signal_model import RfiParams, sinusoid_matrix

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

# Beyond |x| = 40 the likelihood gradient correction is irrelevant at double
# precision (Phi(-40) underflows), so inputs are clipped there.
F_PRIME_CLIP = 40.0


def log_Phi(x):
    """log of the standard normal CDF, elementwise; never -inf for finite input."""
    return log_ndtr(np.asarray(x, dtype=float))


def f_prime(x):
    """Derivative of f(x) = -log Phi(x), i.e. -phi(x)/Phi(x).

    Evaluated as -exp(log phi - log Phi) after clipping to +/-40, which keeps
    the deep left tail (f'(x) ~ x + 1/x) free of overflow.
    """
    xc = np.clip(np.asarray(x, dtype=float), -F_PRIME_CLIP, F_PRIME_CLIP)
    return -np.exp(-0.5 * xc * xc - _LOG_SQRT_2PI - log_ndtr(xc))


def f_second(x):
    """Second derivative of -log Phi(x); lies in (0, 1) for all real x."""
    xc = np.clip(np.asarray(x, dtype=float), -F_PRIME_CLIP, F_PRIME_CLIP)
    r = -f_prime(xc)  # phi/Phi > 0
    return r * (xc + r)


@dataclass(frozen=True)
class ScaledParams:
    """Sinusoid parameters divided by sigma, plus lam = 1/sigma >= 0.

    The likelihood depends on (amps/sigma, 1/sigma) only, so solvers work in
    this parameterization and unscale at the end.
    """

    freqs: np.ndarray
    amps_a: np.ndarray
    amps_b: np.ndarray
    lam: float

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        a = np.asarray(self.amps_a, dtype=float)
        b = np.asarray(self.amps_b, dtype=float)
        if freqs.size:
            a = np.atleast_2d(a)
            b = np.atleast_2d(b)
            if a.shape[0] != freqs.size or b.shape != a.shape:
                raise ValueError("amplitude matrices must be K x M")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "amps_a", a)
        object.__setattr__(self, "amps_b", b)

    @property
    def n_components(self) -> int:
        return self.freqs.size

    @classmethod
    def empty(cls, m_slow: int, lam: float) -> "ScaledParams":
        return cls(freqs=np.zeros(0), amps_a=np.zeros((0, m_slow)),
                   amps_b=np.zeros((0, m_slow)), lam=lam)

    @classmethod
    def from_unscaled(cls, rfi: RfiParams) -> "ScaledParams":
        lam = 1.0 / rfi.sigma
        return cls(freqs=rfi.freqs.copy(), amps_a=rfi.amps_a * lam,
                   amps_b=rfi.amps_b * lam, lam=lam)

    def to_unscaled(self) -> RfiParams:
        if self.lam <= 0:
            raise ValueError("lam = 0: scale is unidentifiable, cannot unscale")
        sigma = 1.0 / self.lam
        return RfiParams(freqs=self.freqs.copy(), amps_a=self.amps_a * sigma,
                         amps_b=self.amps_b * sigma, sigma=sigma)

    def with_component(self, omega: float, a, b) -> "ScaledParams":
        m = self.amps_a.shape[1]
        a = np.asarray(a, dtype=float).reshape(1, m)
        b = np.asarray(b, dtype=float).reshape(1, m)
        return ScaledParams(freqs=np.append(self.freqs, omega),
                            amps_a=np.vstack([self.amps_a, a]),
                            amps_b=np.vstack([self.amps_b, b]),
                            lam=self.lam)

    def with_lam(self, lam: float) -> "ScaledParams":
        return replace(self, lam=lam)

    def model_matrix(self, n_fast: int) -> np.ndarray:
        """Scaled sinusoid sum R_scaled as an N x M matrix."""
        if self.n_components == 0:
            return np.zeros((n_fast, self.amps_a.shape[1]))
        return sinusoid_matrix(self.freqs, self.amps_a, self.amps_b, n_fast)


def _shapes(y, h):
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    if y.shape != h.shape:
        raise ValueError(f"signed matrix shape {y.shape} does not match thresholds {h.shape}")
    return y, h


def neg_log_likelihood(y, h, params: ScaledParams) -> float:
    """Negative log-likelihood sum(-log Phi(Y * (R_scaled - lam*H)))."""
    y, h = _shapes(y, h)
    r = params.model_matrix(y.shape[0])
    x = y * (r - params.lam * h)
    return float(np.sum(-log_ndtr(x)))


def majorizer_aux(y, h, params: ScaledParams) -> np.ndarray:
    """Auxiliary matrix Z = Y * (X - f'(X)) with X = Y * (R_scaled - lam*H).

    Minimizing ||R' - lam'*H - Z||^2 over new parameters decreases the
    likelihood objective (quadratic tangent bound at the current point).
    """
    y, h = _shapes(y, h)
    r = params.model_matrix(y.shape[0])
    x = y * (r - params.lam * h)
    return y * (x - f_prime(x))


def scale_ls_update(t, model, z) -> float:
    """Nonnegative least-squares scale: max(0, sum(T*(model-Z)) / sum(T^2)).

    Shared closed form of the lambda subproblem in all three MM/ADMM solvers,
    with T the threshold-like matrix multiplying lambda.
    """
    t = np.asarray(t, dtype=float)
    den = float(np.sum(t * t))
    if den == 0.0:
        raise ValueError("scale update undefined: threshold matrix is all zero")
    num = float(np.sum(t * (np.asarray(model, float) - np.asarray(z, float))))
    return max(0.0, num / den)
