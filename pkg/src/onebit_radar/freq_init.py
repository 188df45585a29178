"""Fast frequency initialization: group-sparse fit of the signed data on a
fixed frequency grid, solved by MM around an ADMM consensus loop.

The grid dictionary stacks cosine and sine atoms for Q frequencies covering
[0, pi); joint sparsity of each atom's per-PRI amplitudes is enforced by the
l1,2 norm, and the strongest grid rows seed the maximum-likelihood solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import log_ndtr

from .likelihood import f_prime, scale_ls_update


@dataclass(frozen=True)
class GridDictionary:
    """N x 2Q matrix [cos block | sin block] on the grid w_q = (q-1)*pi/Q."""

    f: np.ndarray
    grid: np.ndarray

    @classmethod
    def build(cls, n_fast: int, q: int | None = None) -> "GridDictionary":
        q = n_fast if q is None else q
        if q < 2:
            raise ValueError("grid size must be at least 2")
        w = np.pi * np.arange(q) / q
        ang = np.outer(np.arange(n_fast), w)
        return cls(f=np.hstack([np.cos(ang), np.sin(ang)]), grid=w)

    @property
    def q(self) -> int:
        return self.grid.size


@dataclass
class FiConfig:
    """Tolerances and caps for the frequency-initialization solver."""

    zeta1: float = 1.0
    eps_abs: float = 1e-3
    eps_rel: float = 1e-7
    eps_lambda: float = 1e-3
    admm_cap: int = 10
    mm_cap: int = 5
    mm_tol: float = 1e-7
    rho_init: float = 1.0
    grid_size: int | None = None   # None tracks N (Q = N)

    def __post_init__(self):
        if min(self.eps_abs, self.eps_rel, self.eps_lambda, self.mm_tol,
               self.rho_init) <= 0 or min(self.admm_cap, self.mm_cap) < 1:
            raise ValueError("tolerances, caps and rho_init must be positive")
        if self.zeta1 < 0:
            raise ValueError("zeta1 must be nonnegative")


@dataclass
class FiResult:
    """Ordered coarse frequencies plus the fitted scale and diagnostics."""

    omegas: np.ndarray
    lam: float
    amp_rows: np.ndarray           # Q x M quadrature magnitudes (unscaled when lam > 0)
    row_l1: np.ndarray             # per-grid-row l1 norm over slow time
    objective_history: list = field(default_factory=list)
    admm_iterations: list = field(default_factory=list)
    admm_converged: list = field(default_factory=list)
    cap_hit: bool = False


def update_A(b, upsilon, rho: float, zeta1: float) -> np.ndarray:
    """Row-wise group soft threshold of (rho*B - Upsilon)/rho.

    Row n is scaled by max(0, 1 - zeta1/||rho*B[n,:] - Upsilon[n,:]||); rows
    with zero norm map to zero rows.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    r = rho * np.asarray(b, float) - np.asarray(upsilon, float)
    norms = np.linalg.norm(r, axis=1)
    with np.errstate(divide="ignore"):
        scale = np.where(norms > 0, np.maximum(0.0, 1.0 - zeta1 / norms), 0.0)
    if zeta1 == 0:
        scale = np.ones_like(norms)
    return (scale / rho)[:, None] * r


def update_lambda_fi(h, fb, z_tilde) -> float:
    """Scale update with the grid reconstruction F@B in place of the sinusoid model."""
    return scale_ls_update(h, fb, z_tilde)


def update_B(f, h, z_tilde, upsilon, a, lam: float, rho: float,
             factor_cache: dict | None = None) -> np.ndarray:
    """Solve (F^T F + rho*I) B = lam*F^T H + F^T Z + Upsilon + rho*A.

    The Cholesky factor is cached per rho value (the adaptive penalty moves by
    powers of two, so a handful of factors is reused across iterations).
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    f = np.asarray(f, float)
    rhs = f.T @ (lam * np.asarray(h, float) + np.asarray(z_tilde, float))
    rhs += np.asarray(upsilon, float) + rho * np.asarray(a, float)
    if factor_cache is None:
        factor_cache = {}
    fac = factor_cache.get(rho)
    if fac is None:
        gram = factor_cache.get("gram")
        if gram is None:
            gram = f.T @ f
            factor_cache["gram"] = gram
        fac = cho_factor(gram + rho * np.eye(gram.shape[0]), lower=True)
        factor_cache[rho] = fac
    return cho_solve(fac, rhs)


def update_upsilon(upsilon, a, b, rho: float) -> np.ndarray:
    """Dual ascent step Upsilon + rho*(A - B)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return np.asarray(upsilon, float) + rho * (np.asarray(a, float) - np.asarray(b, float))


def lambda_residual(lam_new: float, lam_old: float) -> float:
    """|lam+ - lam| / lam+, with the 0/0 fixed point mapped to 0."""
    if lam_new == 0.0:
        return 0.0 if lam_old == 0.0 else 1.0
    return abs(lam_new - lam_old) / lam_new


def residuals_and_rho(a, b, b_prev, lam_new: float, lam_old: float, upsilon,
                      rho: float, eps_abs: float, eps_rel: float):
    """Primal/dual/scale residuals, their tolerances, and the adapted penalty.

    rho doubles when the primal residual dominates the dual by 10x, halves in
    the reverse case, and is otherwise unchanged.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    r_pri = float(np.linalg.norm(a - b))
    r_dual = float(rho * np.linalg.norm(b - np.asarray(b_prev, float)))
    r_lam = lambda_residual(lam_new, lam_old)
    root = np.sqrt(a.size)
    eps_pri = root * eps_abs + eps_rel * max(np.linalg.norm(a), np.linalg.norm(b))
    eps_dual = root * eps_abs + eps_rel * float(np.linalg.norm(np.asarray(upsilon, float)))
    if r_pri > 10.0 * r_dual:
        rho_next = 2.0 * rho
    elif r_dual > 10.0 * r_pri:
        rho_next = 0.5 * rho
    else:
        rho_next = rho
    return r_pri, r_dual, r_lam, eps_pri, eps_dual, rho_next


def _objective(y, h, f, a, lam, zeta1) -> float:
    x = y * (f @ a - lam * h)
    return zeta1 * float(np.sum(np.linalg.norm(a, axis=1))) + float(np.sum(-log_ndtr(x)))


def fast_freq_init(y, h, cfg: FiConfig | None = None, k_max: int = 5,
                   grid: GridDictionary | None = None) -> FiResult:
    """Group-sparse grid fit of the signed data, returning ordered coarse frequencies.

    Runs an MM loop (auxiliary matrix rebuilt from the current grid fit) around
    capped ADMM passes; an MM step that raises the printed objective is
    rejected and iteration stops, so the recorded objective never increases.
    Frequencies are read off the grid rows with the largest l1 magnitude over
    slow time, DC row excluded, strongest first (ties to the lower index).
    """
    cfg = cfg or FiConfig()
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    n, m = y.shape
    if grid is None:
        grid = GridDictionary.build(n, cfg.grid_size)
    if not 1 <= k_max < grid.q:
        raise ValueError("k_max must satisfy 1 <= k_max < Q")
    f = grid.f
    two_q = f.shape[1]

    a = np.zeros((two_q, m))
    b = np.zeros((two_q, m))
    ups = np.zeros((two_q, m))
    lam = 1.0 / float(np.max(np.abs(h)))
    cache: dict = {}

    obj = _objective(y, h, f, a, lam, cfg.zeta1)
    history = [obj]
    admm_iters: list = []
    admm_ok: list = []
    cap_hit = False
    for _ in range(cfg.mm_cap):
        x = y * (f @ a - lam * h)
        z = y * (x - f_prime(x))
        rho = cfg.rho_init
        a_prev_mm, lam_prev_mm = a, lam
        lam_old = lam
        converged = False
        iters = 0
        for iters in range(1, cfg.admm_cap + 1):
            a = update_A(b, ups, rho, cfg.zeta1)
            lam = update_lambda_fi(h, f @ b, z)
            b_prev = b
            b = update_B(f, h, z, ups, a, lam, rho, cache)
            ups = update_upsilon(ups, a, b, rho)
            r_pri, r_dual, r_lam, eps_pri, eps_dual, rho = residuals_and_rho(
                a, b, b_prev, lam, lam_old, ups, rho, cfg.eps_abs, cfg.eps_rel)
            lam_old = lam
            if r_pri <= eps_pri and r_dual <= eps_dual and r_lam <= cfg.eps_lambda:
                converged = True
                break
        admm_iters.append(iters)
        admm_ok.append(converged)
        cap_hit = cap_hit or not converged
        obj_new = _objective(y, h, f, a, lam, cfg.zeta1)
        if obj_new > obj:
            a, lam = a_prev_mm, lam_prev_mm  # reject the non-descending step
            break
        history.append(obj_new)
        if abs(obj - obj_new) <= cfg.mm_tol * max(abs(obj), 1e-300):
            obj = obj_new
            break
        obj = obj_new

    amp = a / lam if lam > 0 else a.copy()
    rows = np.sqrt(amp[:grid.q] ** 2 + amp[grid.q:] ** 2)
    row_l1 = np.abs(rows).sum(axis=1)
    if not np.any(row_l1 > 0):
        return FiResult(omegas=np.zeros(0), lam=lam, amp_rows=rows, row_l1=row_l1,
                        objective_history=history, admm_iterations=admm_iters,
                        admm_converged=admm_ok, cap_hit=cap_hit)
    order = np.argsort(-row_l1[1:], kind="stable")[:k_max] + 1  # DC row excluded
    return FiResult(omegas=grid.grid[order], lam=lam, amp_rows=rows, row_l1=row_l1,
                    objective_history=history, admm_iterations=admm_iters,
                    admm_converged=admm_ok, cap_hit=cap_hit)
