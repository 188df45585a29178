"""Order-selection cost, the information weight, and the large-N limit table."""

import mpmath
import numpy as np
import pytest

from onebit_radar.bic import (BicScore, bic_score, fim_limit_check, fit_scale_only,
                              penalty_term, select_order, xi)
from onebit_radar.likelihood import ScaledParams, neg_log_likelihood
from onebit_radar.signal_model import (RfiParams, ThresholdMatrix, make_rng,
                                       sign_sample, sinusoid_matrix)

mpmath.mp.dps = 50


def test_penalty_arithmetic():
    # k=1, M=2, N=100: (3 + 2*2) * ln 100
    assert penalty_term(1, 100, 2) == pytest.approx(7 * np.log(100.0))
    assert penalty_term(1, 100, 2) == pytest.approx(32.2361913, abs=1e-6)


def test_penalty_linear_in_k_and_m():
    for k in range(4):
        for m in (1, 8, 64):
            assert penalty_term(k, 512, m) == pytest.approx(
                k * (3 + 2 * m) * np.log(512.0))


def test_bic_score_zero_order():
    rng = make_rng(0)
    n, m = 32, 4
    t = ThresholdMatrix(1.0, n, m)
    y = sign_sample(rng.standard_normal((n, m)), t).data
    params = fit_scale_only(y, t.full())
    score = bic_score(y, t.full(), params)
    assert score.k == 0
    assert score.penalty == 0.0
    assert score.total == pytest.approx(2 * neg_log_likelihood(y, t.full(), params))


def test_bic_equal_nll_prefers_smaller_order():
    s1 = BicScore(k=1, nll_term=100.0, penalty=penalty_term(1, 64, 4))
    s2 = BicScore(k=2, nll_term=100.0, penalty=penalty_term(2, 64, 4))
    assert s1.total < s2.total


def test_bic_zero_scale_is_infinite():
    y = np.ones((8, 2))
    h = ThresholdMatrix(1.0, 8, 2).full()
    params = ScaledParams.empty(2, 0.0)
    assert bic_score(y, h, params).total == np.inf


def test_xi_at_zero():
    assert float(xi(0.0)) == pytest.approx(4.0, abs=1e-14)


def test_xi_against_mpmath():
    for x in (0.5, 1.3, 5.0, 12.0, 30.0):
        exact = float((1 / mpmath.ncdf(x) + 1 / mpmath.ncdf(-x)) * mpmath.exp(-x * x))
        assert float(xi(x)) == pytest.approx(exact, rel=1e-8)


def test_xi_symmetry_and_domain():
    assert float(xi(1.3)) == pytest.approx(float(xi(-1.3)), rel=1e-13)
    with pytest.raises(ValueError):
        xi(41.0)


def single_tone_params(amp=1.0, sigma=1.0, omega=0.7, phases=(0.3,)):
    phases = np.asarray(phases)
    return RfiParams(freqs=[omega], amps_a=(amp * np.sin(phases))[None, :],
                     amps_b=(amp * np.cos(phases))[None, :], sigma=sigma)


def test_fim_limits_small_n_against_python_loop_oracle():
    # independent slow recomputation of every normalized sum at N=64
    params = RfiParams(freqs=[1.1, 1.9],
                       amps_a=[[0.9, -0.4], [0.2, 1.1]],
                       amps_b=[[0.5, 1.2], [-0.7, 0.3]], sigma=0.8)
    thr = np.array([-0.5, 0.5])
    n = 64
    entries = {e.name: e for e in fim_limit_check(params, thr, [n])}
    amp = np.hypot(params.amps_a, params.amps_b)
    phase = np.arctan2(params.amps_a, params.amps_b)
    sig = params.sigma

    def d_omega(k, nn, mm):
        return nn * amp[k, mm] * np.cos(params.freqs[k] * nn + phase[k, mm])

    def r_of(nn, mm):
        return sum(amp[k, mm] * np.sin(params.freqs[k] * nn + phase[k, mm])
                   for k in range(2))

    slow = 0.0
    for nn in range(n):
        for mm in range(2):
            slow += d_omega(0, nn, mm) * d_omega(1, nn, mm)
    slow /= sig ** 2 * n ** 3
    assert entries["omega1-omega2"].finite_value == pytest.approx(slow, rel=1e-12)

    slow = 0.0
    for nn in range(n):
        for mm in range(2):
            slow += (r_of(nn, mm) - thr[mm]) ** 2 / sig ** 2
    slow /= sig ** 2 * n
    assert entries["sigma-sigma"].finite_value == pytest.approx(slow, rel=1e-12)

    slow = 0.0
    for nn in range(n):
        slow += d_omega(0, nn, 1) * np.sin(params.freqs[1] * nn + phase[1, 1])
    slow /= sig ** 2 * n ** 2
    assert entries["omega1-A2,2"].finite_value == pytest.approx(slow, rel=1e-12)


def test_fim_limit_values_at_large_n():
    params = single_tone_params(amp=1.0, sigma=1.0, omega=0.7)
    entries = {e.name: e for e in fim_limit_check(params, [-1.0], [8192])}
    assert entries["omega1-omega1"].limit_value == pytest.approx(1.0 / 6.0)
    assert entries["omega1-omega1"].rel_error < 0.01
    assert entries["A1,1-A1,1"].rel_error < 0.01
    assert entries["phi1,1-phi1,1"].rel_error < 0.01
    assert entries["sigma-sigma"].rel_error < 0.01
    assert abs(entries["omega1-A1,1"].finite_value) < 1e-2  # limit is zero


def test_fim_sigma_block_with_threshold_ramp():
    params = single_tone_params(amp=1.0, sigma=1.0, omega=0.7, phases=(0.3, 1.1))
    thr = ThresholdMatrix(1.0, 4, 2).column_values  # [-1, 1]
    entries = {e.name: e for e in fim_limit_check(params, thr, [8192])}
    sigma_h2 = float(np.sum(thr ** 2))
    expected = 0.5 * np.sum(np.hypot(params.amps_a, params.amps_b) ** 2) + sigma_h2
    assert entries["sigma-sigma"].limit_value == pytest.approx(expected)
    assert entries["sigma-sigma"].rel_error < 0.01


def test_fim_omega_errors_decrease_with_n():
    params = single_tone_params(amp=1.0, sigma=1.0, omega=0.7)
    rows = fim_limit_check(params, [-1.0], [512, 2048, 8192])
    errs = [e.rel_error for e in rows if e.name == "omega1-omega1"]
    assert len(errs) == 3
    assert errs[0] > errs[1] > errs[2]


def test_fim_rejects_boundary_frequencies():
    params = single_tone_params(omega=0.001)
    with pytest.raises(ValueError):
        fim_limit_check(params, [-1.0], [512])


def make_capture(rng, n, m, freqs, amps, sigma, h):
    k = len(freqs)
    ph = rng.uniform(0, 2 * np.pi, (k, m))
    amps = np.asarray(amps)
    r = sinusoid_matrix(freqs, amps[:, None] * np.sin(ph),
                        amps[:, None] * np.cos(ph), n)
    e = sigma * rng.standard_normal((n, m))
    t = ThresholdMatrix(h, n, m)
    return sign_sample(r + e, t).data, t.full()


def test_select_order_single_tone_smoke():
    from onebit_radar.freq_init import fast_freq_init

    hits = 0
    for seed in range(10):
        rng = make_rng(300 + seed)
        y, h = make_capture(rng, 256, 16, [rng.uniform(0.4, 2.6)], [8.0], 1.0, 8.0)
        fi = fast_freq_init(y, h, k_max=3)
        k_hat, params, scores = select_order(y, h, 3, freq_inits=fi.omegas,
                                             lam_init=fi.lam)
        hits += k_hat == 1
    assert hits >= 9


def test_select_order_pure_noise_smoke():
    from onebit_radar.freq_init import fast_freq_init

    hits = 0
    for seed in range(10):
        rng = make_rng(400 + seed)
        n, m = 256, 16
        t = ThresholdMatrix(2.0, n, m)
        y = sign_sample(rng.standard_normal((n, m)), t).data
        fi = fast_freq_init(y, t.full(), k_max=3)
        if fi.omegas.size == 0:
            hits += 1
            continue
        k_hat, _, _ = select_order(y, t.full(), min(3, fi.omegas.size),
                                   freq_inits=fi.omegas, lam_init=fi.lam)
        hits += k_hat == 0
    assert hits >= 8
