"""Data types, simulators, and metrics."""

import numpy as np
import pytest
from scipy.fft import rfft, rfftfreq

from onebit_radar.signal_model import (Dictionary, Pulse, RfiParams, Scenario,
                                       SignedMatrix, ThresholdMatrix,
                                       build_dictionary, inr, make_pulse,
                                       make_rng, nre, sign_sample,
                                       simulate_table5_rfi, sinr,
                                       sinusoid_matrix, synthesize_rfi)


def test_signed_matrix_validation():
    SignedMatrix(np.array([[1.0, -1.0]]))
    with pytest.raises(ValueError):
        SignedMatrix(np.array([[1.0, 0.5]]))
    with pytest.raises(ValueError):
        SignedMatrix(np.ones(3))


def test_threshold_matrix_ramp():
    t = ThresholdMatrix(400.0, 3, 5)
    assert np.allclose(t.column_values, [-400, -200, 0, 200, 400])
    assert t.delta_h == pytest.approx(200.0)
    full = t.full()
    assert np.all(full[0] == full[1])  # constant along fast-time
    assert np.all(np.diff(t.column_values) > 0)
    with pytest.raises(ValueError):
        ThresholdMatrix(400.0, 3, 1)
    with pytest.raises(ValueError):
        ThresholdMatrix(-1.0, 3, 5)


def test_sign_sample_zero_signal_ramp():
    # thresholds -400,-200,0,200,400; sign(0)=+1 on the middle column
    t = ThresholdMatrix(400.0, 2, 5)
    out = sign_sample(np.zeros((2, 5)), t)
    assert np.array_equal(out.data[0], [1, 1, 1, -1, -1])


def test_sign_sample_ties_are_plus_one():
    t = ThresholdMatrix(1.0, 4, 3)
    out = sign_sample(t.full(), t)
    assert np.all(out.data == 1.0)


def test_sign_sample_strict_dominance():
    t = ThresholdMatrix(1.0, 4, 3)
    assert np.all(sign_sample(t.full() + 1.0, t).data == 1.0)
    assert np.all(sign_sample(t.full() - 1.0, t).data == -1.0)


def test_sign_sample_shape_mismatch():
    with pytest.raises(ValueError):
        sign_sample(np.zeros((2, 3)), ThresholdMatrix(1.0, 3, 3))


def test_sign_sample_idempotent_under_rethresholding():
    rng = make_rng(0)
    t = ThresholdMatrix(1.0, 6, 8)
    y = sign_sample(rng.standard_normal((6, 8)), t)
    again = np.where(y.data >= 0, 1.0, -1.0)
    assert np.array_equal(again, y.data)


def test_sign_monotone_in_slow_time_for_constant_signal():
    rng = make_rng(3)
    n, m = 10, 17
    sig = np.tile(rng.uniform(-2, 2, n)[:, None], (1, m))
    y = sign_sample(sig, ThresholdMatrix(2.5, n, m)).data
    for row in y:
        flips = np.flatnonzero(row == -1)
        if flips.size:
            assert np.all(row[flips[0]:] == -1)


def test_synthesize_rfi_cos_at_zero_frequency():
    p = RfiParams(freqs=[0.0], amps_a=[[1.0, 1.0]], amps_b=[[0.0, 0.0]])
    assert np.allclose(p.synthesize(4), 1.0)


def test_synthesize_rfi_quarter_period_sine():
    p = RfiParams(freqs=[np.pi / 2], amps_a=[[0.0]], amps_b=[[1.0]])
    col = p.synthesize(8)[:, 0]
    assert np.allclose(col, [0, 1, 0, -1, 0, 1, 0, -1], atol=1e-12)


def test_table5_source_one_period_sixteen():
    # 500 MHz at 8 GHz sampling: omega = 2*pi*500/8000, period 16 samples
    p = simulate_table5_rfi(1.0, 1, 32, seed=0)
    assert p.freqs[0] == pytest.approx(2 * np.pi * 500 / 8000)
    col = sinusoid_matrix(p.freqs[:1], p.amps_a[:1], p.amps_b[:1], 32)[:, 0]
    assert np.allclose(col[:16], col[16:], atol=1e-12)


def test_table5_amplitude_ratios_and_pythagoras():
    a1 = 7.0
    p = simulate_table5_rfi(a1, 5, 64, seed=42)
    amp = np.hypot(p.amps_a, p.amps_b)
    ratios = (1.0, 0.95, 0.8, 0.87, 0.9)
    for k, r in enumerate(ratios):
        assert np.allclose(amp[k], a1 * r, atol=1e-12)


def test_table5_seed_changes_phases_not_amplitudes():
    p1 = simulate_table5_rfi(2.0, 6, 16, seed=1)
    p2 = simulate_table5_rfi(2.0, 6, 16, seed=2)
    assert not np.allclose(p1.amps_a, p2.amps_a)
    assert np.allclose(np.hypot(p1.amps_a, p1.amps_b),
                       np.hypot(p2.amps_a, p2.amps_b))


def test_rfi_params_validation():
    with pytest.raises(ValueError):
        RfiParams(freqs=[3.5], amps_a=[[1.0]], amps_b=[[1.0]])
    with pytest.raises(ValueError):
        RfiParams(freqs=[0.5], amps_a=[[1.0]], amps_b=[[1.0]], sigma=0.0)


def test_make_pulse_odd_symmetry_and_center_zero():
    p = make_pulse(8e9, 21)
    c = p.center
    assert p.samples[c] == 0.0
    for i in range(1, c + 1):
        assert p.samples[c + i] == pytest.approx(-p.samples[c - i], abs=1e-15)


def test_make_pulse_spectrum_peak_in_band():
    p = make_pulse(8e9, 21, (300e6, 1100e6))
    n_fft = 1 << 14
    mag = np.abs(rfft(p.samples, n=n_fft))
    peak = rfftfreq(n_fft, d=1 / 8e9)[np.argmax(mag)]
    assert 300e6 <= peak <= 1100e6


def test_make_pulse_band_coverage():
    p = make_pulse(8e9, 21, (300e6, 1100e6))
    n_fft = 1 << 16
    mag = np.abs(rfft(p.samples, n=n_fft))
    freqs = rfftfreq(n_fft, d=1 / 8e9)
    level = mag.max() / np.sqrt(10)
    band = freqs[mag >= level]
    assert band.min() <= 300e6 and band.max() >= 1100e6


def test_make_pulse_infeasible():
    with pytest.raises(ValueError):
        make_pulse(8e9, 21, (1e6, 2e6))  # band far below what 21 samples support
    with pytest.raises(ValueError):
        make_pulse(8e9, 20)  # even length


def test_build_dictionary_center_column_structure():
    p = make_pulse(8e9, 21)
    d = build_dictionary(p, 64).matrix
    for j in range(30, 34):
        assert d[j, j] == 0.0
    # interior columns are one-row shifts of each other
    assert np.allclose(d[11:53, 32], d[12:54, 33])


def test_build_dictionary_single_target_reproduces_pulse():
    p = make_pulse(8e9, 21)
    n = 64
    d = build_dictionary(p, n).matrix
    j = 30
    gamma = np.zeros(n)
    gamma[j] = 2.5
    echo = d @ gamma
    # direct convolution oracle: impulse at j convolved with the pulse
    expected = np.zeros(n)
    expected[j - p.center:j - p.center + p.length] = 2.5 * p.samples
    assert np.allclose(echo, expected, atol=1e-14)


def test_build_dictionary_too_small():
    p = make_pulse(8e9, 21)
    with pytest.raises(ValueError):
        build_dictionary(p, 20)


def test_interior_column_norms_equal():
    p = make_pulse(8e9, 21)
    d = build_dictionary(p, 64).matrix
    norms = np.linalg.norm(d[:, 10:54], axis=0)
    assert np.allclose(norms, norms[0], atol=1e-12)


def test_sinr_formula():
    s = np.zeros((4, 4))
    s[0, 0] = 1.0
    r = np.zeros((4, 4))
    r[0, 0] = 10.0
    assert sinr(s, r, np.zeros((4, 4))) == pytest.approx(-20.0)
    assert sinr(s, r) == pytest.approx(-20.0)
    with pytest.raises(ValueError):
        sinr(s, np.zeros((4, 4)))


def test_inr_and_errors():
    r = np.full((2, 2), 2.0)
    e = np.full((2, 2), 1.0)
    assert inr(r, e) == pytest.approx(20 * np.log10(2.0))
    with pytest.raises(ValueError):
        inr(r, np.zeros((2, 2)))


def test_nre_sentinels():
    s = np.array([1.0, 2.0])
    assert nre(s, s) == float("-inf")
    assert nre(s, np.zeros(2)) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        nre(np.zeros(2), s)


def test_scenario_determinism():
    rfi = simulate_table5_rfi(3.0, 6, 16, seed=5)
    sc1 = Scenario(echo=np.linspace(-1, 1, 16), rfi=rfi, noise_std=0.5, seed=99)
    sc2 = Scenario(echo=np.linspace(-1, 1, 16), rfi=rfi, noise_std=0.5, seed=99)
    t = ThresholdMatrix(2.0, 16, 6)
    assert np.array_equal(sc1.sample(t).data, sc2.sample(t).data)
    sc3 = Scenario(echo=np.linspace(-1, 1, 16), rfi=rfi, noise_std=0.5, seed=100)
    assert not np.array_equal(sc1.sample(t).data, sc3.sample(t).data)


def test_single_tone_dft_peak_at_nearest_bin():
    n = 128
    omega = 0.9
    col = sinusoid_matrix([omega], [[1.0]], [[0.3]], n)[:, 0]
    spec = np.abs(rfft(col)) ** 2
    peak_bin = int(np.argmax(spec[1:])) + 1
    expected_bin = int(round(omega * n / (2 * np.pi)))
    assert peak_bin == expected_bin
