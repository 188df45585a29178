"""Slow exhaustive-search maximum-likelihood reference for a single sinusoid.

Grids the frequency axis and solves the remaining convex problem (per-PRI
quadrature amplitudes plus the threshold scale) by damped Newton at every grid
point.  Exponential in the number of sinusoids if extended, so this exists
only as an oracle for small problems and as the optional exhaustive
initializer the fast pipeline replaces.
"""

from __future__ import annotations

import numpy as np

from .likelihood import ScaledParams, f_prime, f_second, log_Phi


def _nll_and_derivs(y, h, c, s, coef, want_hessian=True):
    """Value, gradient and Hessian of the likelihood in (a_1..a_M, b_1..b_M, lam)."""
    m = y.shape[1]
    a, b, lam = coef[:m], coef[m:2 * m], coef[-1]
    model = np.outer(c, a) + np.outer(s, b) - lam * h
    x = y * model
    val = float(np.sum(-log_Phi(x)))
    fp = f_prime(x)
    gy = fp * y
    grad = np.concatenate([c @ gy, s @ gy, [-np.sum(gy * h)]])
    if not want_hessian:
        return val, grad, None
    fpp = f_second(x)
    haa = fpp.T @ (c * c)
    hbb = fpp.T @ (s * s)
    hab = fpp.T @ (c * s)
    hal = -(c[:, None] * fpp * h).sum(axis=0)
    hbl = -(s[:, None] * fpp * h).sum(axis=0)
    hll = float(np.sum(fpp * h * h))
    hess = np.zeros((2 * m + 1, 2 * m + 1))
    idx = np.arange(m)
    hess[idx, idx] = haa
    hess[m + idx, m + idx] = hbb
    hess[idx, m + idx] = hess[m + idx, idx] = hab
    hess[idx, -1] = hess[-1, idx] = hal
    hess[m + idx, -1] = hess[-1, m + idx] = hbl
    hess[-1, -1] = hll
    return val, grad, hess


def ml_fixed_freq(y, h, omega: float, init: np.ndarray | None = None,
                  max_iter: int = 100, grad_tol: float = 1e-9):
    """Global minimum of the signed-data likelihood at a fixed frequency.

    The problem is convex in the amplitudes and the scale, so damped Newton
    with backtracking converges to the optimum.  Returns (coef, nll) with
    coef = (a_1..a_M, b_1..b_M, lam >= 0).
    """
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    n, m = y.shape
    ang = omega * np.arange(n)
    c, s = np.cos(ang), np.sin(ang)
    coef = np.zeros(2 * m + 1) if init is None else init.copy()
    if init is None:
        coef[-1] = 1.0 / max(np.max(np.abs(h)), 1e-12)
    val, grad, hess = _nll_and_derivs(y, h, c, s, coef)
    for _ in range(max_iter):
        step = np.linalg.solve(hess + 1e-12 * np.eye(hess.shape[0]), -grad)
        t = 1.0
        improved = False
        for _ in range(60):
            cand = coef + t * step
            cand[-1] = max(cand[-1], 0.0)
            cand_val, cand_grad, cand_hess = _nll_and_derivs(y, h, c, s, cand)
            if cand_val <= val + 1e-4 * t * float(grad @ step):
                stalled = val - cand_val < 1e-13 * max(1.0, abs(val))
                coef, val, grad, hess = cand, cand_val, cand_grad, cand_hess
                improved = not stalled
                break
            t *= 0.5
        if not improved or float(np.max(np.abs(grad))) < grad_tol * max(1.0, abs(val)):
            break
    return coef, val


def grid_ml_single(y, h, n_grid: int = 4096, polish: bool = True):
    """Brute-force single-sinusoid ML: convex solves on an ``n_grid`` frequency grid.

    Consecutive grid points warm-start each other.  With ``polish`` the
    profile likelihood is minimized over one grid cell around the best point,
    removing the frequency quantization of the grid.  Returns the best
    ScaledParams and its likelihood value.
    """
    from scipy.optimize import minimize_scalar

    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    m = y.shape[1]
    omegas = np.pi * np.arange(1, n_grid) / n_grid
    best = (np.inf, None, None)
    coef = None
    for omega in omegas:
        coef, val = ml_fixed_freq(y, h, omega, init=coef)
        if val < best[0]:
            best = (val, omega, coef.copy())
    val, omega, coef = best
    if polish:
        cell = np.pi / n_grid
        warm = {"coef": coef}

        def profile(w):
            warm["coef"], v = ml_fixed_freq(y, h, w, init=warm["coef"])
            return v

        res = minimize_scalar(profile, bounds=(max(omega - cell, 1e-9),
                                               min(omega + cell, np.pi - 1e-9)),
                              method="bounded", options={"xatol": 1e-10})
        if res.fun < val:
            omega = float(res.x)
            coef, val = ml_fixed_freq(y, h, omega, init=warm["coef"])
    params = ScaledParams(freqs=np.array([omega]), amps_a=coef[:m][None, :],
                          amps_b=coef[m:2 * m][None, :], lam=float(coef[-1]))
    return params, float(val)
