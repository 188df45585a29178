"""One-bit information criterion for choosing the number of interferers,
plus numerical checks of the large-N Fisher-information limits behind its
penalty term."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .likelihood import ScaledParams, majorizer_aux, neg_log_likelihood, scale_ls_update
from .mmrelax import MmConfig, MmrelaxResult, mmrelax_full
from .signal_model import RfiParams


@dataclass(frozen=True)
class BicScore:
    """Fit term (twice the negative log-likelihood) plus K*(3+2M)*ln(N)."""

    k: int
    nll_term: float
    penalty: float

    @property
    def total(self) -> float:
        return self.nll_term + self.penalty


def penalty_term(k: int, n_fast: int, m_slow: int) -> float:
    """Model complexity charge K*(3 + 2M)*ln(N) (natural logarithm)."""
    return k * (3 + 2 * m_slow) * float(np.log(n_fast))


def bic_score(y, h, fitted: ScaledParams, k: int | None = None) -> BicScore:
    """Score a fitted model; a zero scale makes the model unusable (+inf)."""
    y = np.asarray(y, dtype=float)
    k = fitted.n_components if k is None else k
    if k != fitted.n_components:
        raise ValueError("k does not match the fitted component count")
    if fitted.lam == 0.0:
        return BicScore(k=k, nll_term=np.inf, penalty=penalty_term(k, *y.shape))
    nll_term = 2.0 * neg_log_likelihood(y, h, fitted)
    return BicScore(k=k, nll_term=nll_term, penalty=penalty_term(k, *y.shape))


def fit_scale_only(y, h, lam_init: float | None = None, max_iter: int = 50,
                   tol: float = 1e-9) -> ScaledParams:
    """Maximum-likelihood scale with no sinusoids (the K = 0 candidate).

    Alternates the auxiliary-matrix rebuild with the closed-form scale update;
    the one-dimensional problem is convex, so this converges to the optimum.
    """
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    lam = 1.0 / float(np.max(np.abs(h))) if lam_init is None else lam_init
    params = ScaledParams.empty(y.shape[1], lam)
    nll = neg_log_likelihood(y, h, params)
    for _ in range(max_iter):
        z = majorizer_aux(y, h, params)
        lam = scale_ls_update(h, np.zeros_like(h), z)
        params = params.with_lam(lam)
        nll_new = neg_log_likelihood(y, h, params)
        if abs(nll - nll_new) <= tol * max(abs(nll), 1e-300):
            nll = nll_new
            break
        nll = nll_new
    return params


def select_order(y, h, k_max: int, cfg: MmConfig | None = None,
                 freq_inits=None, lam_init: float | None = None,
                 fit: MmrelaxResult | None = None):
    """Pick the component count 0..k_max minimizing the information criterion.

    Candidate fits come from the staged solver (one stage per order); a
    dedicated scale-only fit supplies the no-interference candidate, which
    lets the pipeline skip subtraction on clean data.  Ties go to the smaller
    order.  Returns (k_hat, params, scores).
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if fit is None:
        fit = mmrelax_full(y, h, k_max, freq_inits, cfg, lam_init=lam_init)
    candidates = [fit_scale_only(y, h, lam_init)] + [s.params for s in fit.stages]
    scores = [bic_score(y, h, p) for p in candidates]
    totals = [s.total for s in scores]
    k_hat = int(np.argmin(totals))  # argmin takes the first minimum: smaller k wins ties
    return k_hat, candidates[k_hat], scores


def xi(x):
    """Fisher-information weight [1/Phi(x) + 1/Phi(-x)] * exp(-x^2).

    Evaluated through the log-CDF so neither reciprocal overflows for
    |x| <= 40; symmetric in x.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 40.0):
        raise ValueError("xi is supported on |x| <= 40")
    return np.exp(-x * x - log_ndtr(x)) + np.exp(-x * x - log_ndtr(-x))


@dataclass(frozen=True)
class FimEntry:
    """One normalized information-matrix entry against its closed-form limit."""

    name: str
    block: str
    n_fast: int
    finite_value: float
    limit_value: float

    @property
    def rel_error(self) -> float | None:
        if self.limit_value == 0.0:
            return None
        return abs(self.finite_value - self.limit_value) / abs(self.limit_value)


def _fim_entries_at(params: RfiParams, thresholds: np.ndarray, n: int):
    """Normalized finite-N information sums for one data length."""
    freqs = params.freqs
    k = freqs.size
    m = params.amps_a.shape[1]
    amp = np.hypot(params.amps_a, params.amps_b)            # K x M
    phase = np.arctan2(params.amps_a, params.amps_b)        # K x M
    sigma = params.sigma
    t = np.arange(n, dtype=float)                            # (n-1) values
    arg = freqs[:, None, None] * t[None, :, None] + phase[:, None, :]  # K x N x M
    cos_t, sin_t = np.cos(arg), np.sin(arg)
    d_omega = t[None, :, None] * amp[:, None, :] * cos_t     # dR/dw_k  (K x N x M)
    d_amp = sin_t                                            # dR/dA_{k,m}
    d_phase = amp[:, None, :] * cos_t                        # dR/dphi_{k,m}
    r = np.einsum("km,knm->nm", amp, sin_t)
    resid = (r - thresholds[None, :]) / sigma                # (R - H)/sigma

    entries = []

    def add(name, block, finite, limit):
        entries.append(FimEntry(name=name, block=block, n_fast=n,
                                finite_value=float(finite), limit_value=float(limit)))

    s2 = sigma * sigma
    for i in range(k):
        for j in range(i, k):
            fin = np.sum(d_omega[i] * d_omega[j]) / (s2 * n ** 3)
            lim = (np.sum(amp[i] ** 2) / (6.0 * s2)) if i == j else 0.0
            add(f"omega{i + 1}-omega{j + 1}", "omega-omega", fin, lim)
    for i in range(k):
        for j in range(k):
            for mp in range(m):
                fin = np.sum(d_omega[i][:, mp] * d_amp[j][:, mp]) / (s2 * n ** 2)
                add(f"omega{i + 1}-A{j + 1},{mp + 1}", "omega-amp", fin, 0.0)
                fin = np.sum(d_omega[i][:, mp] * d_phase[j][:, mp]) / (s2 * n ** 2)
                lim = amp[i, mp] ** 2 / (4.0 * s2) if i == j else 0.0
                add(f"omega{i + 1}-phi{j + 1},{mp + 1}", "omega-phase", fin, lim)
        fin = -np.sum(d_omega[i] * resid) / (s2 * n ** 2)
        add(f"omega{i + 1}-sigma", "omega-sigma", fin, 0.0)
    for i in range(k):
        for j in range(k):
            for mp in range(m):
                fin = np.sum(d_amp[i][:, mp] * d_amp[j][:, mp]) / (s2 * n)
                lim = 0.5 / s2 if i == j else 0.0
                add(f"A{i + 1},{mp + 1}-A{j + 1},{mp + 1}", "amp-amp", fin, lim)
                fin = np.sum(d_amp[i][:, mp] * d_phase[j][:, mp]) / (s2 * n)
                add(f"A{i + 1},{mp + 1}-phi{j + 1},{mp + 1}", "amp-phase", fin, 0.0)
                fin = np.sum(d_phase[i][:, mp] * d_phase[j][:, mp]) / (s2 * n)
                lim = amp[i, mp] ** 2 / (2.0 * s2) if i == j else 0.0
                add(f"phi{i + 1},{mp + 1}-phi{j + 1},{mp + 1}", "phase-phase", fin, lim)
        for mp in range(m):
            fin = -np.sum(d_amp[i][:, mp] * resid[:, mp]) / (s2 * n)
            add(f"A{i + 1},{mp + 1}-sigma", "amp-sigma", fin,
                -amp[i, mp] / (2.0 * sigma ** 3))
            fin = -np.sum(d_phase[i][:, mp] * resid[:, mp]) / (s2 * n)
            add(f"phi{i + 1},{mp + 1}-sigma", "phase-sigma", fin, 0.0)
    sigma_h2 = float(np.sum(thresholds ** 2))  # (1/N)*sum_{n,m} H^2, H constant in n
    fin = np.sum(resid ** 2) / (s2 * n)
    lim = (0.5 * np.sum(amp ** 2) + sigma_h2) / sigma ** 4
    add("sigma-sigma", "sigma-sigma", fin, lim)
    return entries


def fim_limit_check(params: RfiParams, thresholds, n_list):
    """Compare normalized finite-N information sums against their limits.

    ``thresholds`` is the length-M vector of per-PRI threshold levels (the
    ramp is constant along fast-time).  Frequencies must sit away from 0 and
    pi by at least 16*pi/min(n_list) for the averaged cross terms to decay.
    Returns a list of FimEntry rows over every n in ``n_list``.
    """
    thresholds = np.atleast_1d(np.asarray(thresholds, dtype=float))
    if thresholds.size != params.amps_a.shape[1]:
        raise ValueError("thresholds must supply one level per PRI")
    n_list = sorted(int(n) for n in n_list)
    margin = 2.0 * np.pi * 8.0 / n_list[0]
    if np.any(params.freqs < margin) or np.any(params.freqs > np.pi - margin):
        raise ValueError("frequencies too close to 0 or pi for the limit check")
    out = []
    for n in n_list:
        out.extend(_fim_entries_at(params, thresholds, n))
    return out
