import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from platoon.errors import FormatError, TruncationError, UnsupportedError
from platoon.npy import parse_npy, read_npy, serialize_npy, write_npy


def numpy_bytes(arr, **kw):
    buf = io.BytesIO()
    np.save(buf, arr, **kw)
    return buf.getvalue()


def test_single_element():
    arr = parse_npy(numpy_bytes(np.array([[3.0]])))
    assert arr.shape == (1, 1)
    assert arr[0, 0] == 3.0


def test_bad_magic():
    with pytest.raises(FormatError):
        parse_npy(b"NOTNPY" + b"\x00" * 40)


def test_int64_payload():
    src = np.arange(12, dtype="<i8").reshape(3, 4)
    out = parse_npy(numpy_bytes(src))
    assert out.dtype == np.dtype("<i8")
    np.testing.assert_array_equal(out, src)


@pytest.mark.parametrize("arr", [
    np.zeros((2, 2), dtype=np.float32),
    np.zeros((2, 2), dtype=">f8"),
    np.zeros(3),
    np.zeros((2, 2, 2)),
])
def test_unsupported(arr):
    with pytest.raises(UnsupportedError):
        parse_npy(numpy_bytes(arr))


def test_fortran_order_rejected():
    with pytest.raises(UnsupportedError):
        parse_npy(numpy_bytes(np.asfortranarray(np.ones((2, 3)))))


def test_version_2_rejected():
    data = bytearray(numpy_bytes(np.ones((1, 1))))
    data[6] = 2
    with pytest.raises(UnsupportedError):
        parse_npy(bytes(data))


@pytest.mark.parametrize("cut", [7, 12, -1])
def test_truncation(cut):
    data = numpy_bytes(np.ones((4, 5)))
    with pytest.raises(TruncationError):
        parse_npy(data[:cut])


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(
    dtype=st.sampled_from([np.dtype("<f8"), np.dtype("<i8")]),
    shape=hnp.array_shapes(min_dims=2, max_dims=2, min_side=0, max_side=6),
))
def test_matches_numpy_save(arr):
    out = parse_npy(numpy_bytes(arr))
    assert out.shape == arr.shape
    np.testing.assert_array_equal(out, arr)


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(dtype=np.dtype("<f8"), shape=hnp.array_shapes(min_dims=2, max_dims=2, max_side=5),
                  elements=st.floats(allow_nan=False)))
def test_serialize_loads_in_numpy(arr):
    data = serialize_npy(arr)
    back = np.load(io.BytesIO(data))
    np.testing.assert_array_equal(back, arr)
    # payload is 64-byte aligned
    assert (len(data) - arr.nbytes) % 64 == 0


def test_file_round_trip(tmp_path):
    arr = np.array([[1.5, -2.0], [0.0, 7.25]])
    write_npy(tmp_path / "a.npy", arr)
    np.testing.assert_array_equal(read_npy(tmp_path / "a.npy"), arr)
    np.testing.assert_array_equal(np.load(tmp_path / "a.npy"), arr)
