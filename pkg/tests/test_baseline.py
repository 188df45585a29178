"""Digital-integration baseline against hand-computed oracles."""

import numpy as np
import pytest

from onebit_radar.baseline import digital_integration
from onebit_radar.signal_model import ThresholdMatrix, make_rng, sign_sample


def test_zero_signal_reconstructs_zero():
    # sign pattern [+,+,+,-,-] per row: count 3, 200*3 - 400 - 200 = 0
    t = ThresholdMatrix(400.0, 3, 5)
    y = sign_sample(np.zeros((3, 5)), t)
    assert np.allclose(digital_integration(y.data, t), 0.0)


def test_constant_250_reconstructs_200():
    t = ThresholdMatrix(400.0, 3, 5)
    y = sign_sample(np.full((3, 5), 250.0), t)
    out = digital_integration(y.data, t)
    assert np.allclose(out, 200.0)
    assert np.all(np.abs(out - 250.0) <= t.delta_h)


def test_all_minus_one_floor():
    t = ThresholdMatrix(400.0, 2, 5)
    y = -np.ones((2, 5))
    assert np.allclose(digital_integration(y, t), -t.h - t.delta_h)


def test_requires_two_pris():
    with pytest.raises(ValueError):
        digital_integration(np.ones((3, 1)), ThresholdMatrix(1.0, 3, 2))


def test_accepts_raw_threshold_rows():
    t = ThresholdMatrix(400.0, 3, 5)
    y = sign_sample(np.full((3, 5), 250.0), t)
    assert np.allclose(digital_integration(y.data, t.full()), 200.0)
    assert np.allclose(digital_integration(y.data, t.column_values), 200.0)


def test_quantization_bound_random_signals():
    rng = make_rng(21)
    n, m = 40, 33
    t = ThresholdMatrix(1.0, n, m)
    for _ in range(10):
        s = rng.uniform(-1.0, 1.0, n)
        y = sign_sample(np.tile(s[:, None], (1, m)), t)
        err = digital_integration(y.data, t) - s
        assert np.max(np.abs(err)) <= t.delta_h + 1e-12
        # one-sided: the estimate is the largest threshold not above the signal
        assert np.all(err <= 1e-12)


def test_output_range_bounded():
    t = ThresholdMatrix(1.0, 5, 9)
    rng = make_rng(2)
    y = np.where(rng.standard_normal((5, 9)) > 0, 1.0, -1.0)
    out = digital_integration(y, t)
    assert np.all(out >= -t.h - t.delta_h - 1e-12)
    assert np.all(out <= t.h + 1e-12)
