"""Round-trips and guards for the binary matrix file format."""

import numpy as np
import pytest

from onebit_radar.obm1 import MAGIC, Obm1FormatError, read_obm1, write_obm1
from onebit_radar.pipeline import load_measured_rfi
from onebit_radar.signal_model import SignedMatrix, make_rng


def test_float_roundtrip(tmp_path):
    mat = make_rng(1).standard_normal((7, 5))
    path = tmp_path / "m.obm1"
    write_obm1(path, mat)
    back = read_obm1(path)
    assert isinstance(back, np.ndarray)
    assert np.array_equal(back, mat)


def test_signed_roundtrip(tmp_path):
    y = SignedMatrix(np.where(make_rng(2).standard_normal((4, 6)) > 0, 1.0, -1.0))
    path = tmp_path / "y.obm1"
    write_obm1(path, y)
    back = read_obm1(path)
    assert isinstance(back, SignedMatrix)
    assert np.array_equal(back.data, y.data)


def test_header_layout(tmp_path):
    path = tmp_path / "h.obm1"
    write_obm1(path, np.zeros((2, 3)))
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert raw[4] == 1  # f64 code
    assert int.from_bytes(raw[5:13], "little") == 2
    assert int.from_bytes(raw[13:21], "little") == 3
    assert len(raw) == 21 + 2 * 3 * 8


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.obm1"
    path.write_bytes(b"NOPE" + bytes(17))
    with pytest.raises(Obm1FormatError):
        read_obm1(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.obm1"
    write_obm1(path, np.zeros((2, 3)))
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(Obm1FormatError):
        read_obm1(path)


def test_unknown_dtype_code(tmp_path):
    path = tmp_path / "u.obm1"
    write_obm1(path, np.zeros((1, 1)))
    raw = bytearray(path.read_bytes())
    raw[4] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(Obm1FormatError):
        read_obm1(path)


def test_load_measured_rfi_crop(tmp_path):
    mat = make_rng(3).standard_normal((8, 10))
    path = tmp_path / "rfi.obm1"
    write_obm1(path, mat)
    out = load_measured_rfi(path, n_fast=4, m_slow=6)
    assert np.array_equal(out, mat[:4, :6])
    with pytest.raises(ValueError):
        load_measured_rfi(path, n_fast=9)


def test_load_measured_rfi_rejects_signed(tmp_path):
    path = tmp_path / "y.obm1"
    write_obm1(path, SignedMatrix(np.ones((2, 2))))
    with pytest.raises(ValueError, match="expected real matrix"):
        load_measured_rfi(path)
