import numpy as np
import pytest
from hypothesis import given, strategies as st

from lrqtc.arrays import QuaternionMatrix, QuaternionTensor
from lrqtc.linalg import qmatmul, singular_values
from lrqtc.tensor import (FormatError, decode_qt1, encode_qt1, fold, load_qt1, save_qt1,
                          tensor_frobenius, tucker_rank, unfold)

from oracles import unfold_loops

shapes = st.lists(st.integers(1, 4), min_size=2, max_size=5).map(tuple)


def numbered_2x2x2():
    # entry (n1, n2, n3) holds 1 + n1 + 2 n2 + 4 n3 in every component
    t = np.zeros((2, 2, 2))
    for n1 in range(2):
        for n2 in range(2):
            for n3 in range(2):
                t[n1, n2, n3] = 1 + n1 + 2 * n2 + 4 * n3
    return QuaternionTensor(np.stack([t, 2 * t, -t, 0 * t]))


class TestUnfold:
    @pytest.mark.parametrize("k, expected", [
        (1, [[1, 3, 5, 7], [2, 4, 6, 8]]),
        (2, [[1, 2, 5, 6], [3, 4, 7, 8]]),
        (3, [[1, 2, 3, 4], [5, 6, 7, 8]]),
    ])
    def test_enumerated(self, k, expected):
        M = unfold(numbered_2x2x2(), k)
        np.testing.assert_array_equal(M.w, expected)
        np.testing.assert_array_equal(M.x, 2 * np.array(expected))

    def test_order_two(self, rng):
        Q = QuaternionTensor.random((3, 5), rng)
        assert unfold(Q, 1).components.tolist() == Q.components.tolist()
        assert unfold(Q, 2) == QuaternionMatrix(Q.components.transpose(0, 2, 1))

    @pytest.mark.parametrize("shape", [(3, 4, 5), (2, 3, 2, 3), (2, 1, 3, 1, 2)])
    def test_matches_index_formula(self, shape, rng):
        T = QuaternionTensor.random(shape, rng)
        for k in range(1, len(shape) + 1):
            np.testing.assert_array_equal(unfold(T, k).components, unfold_loops(T.components, k))

    def test_bad_mode(self, rng):
        T = QuaternionTensor.random((2, 3, 4), rng)
        for k in (0, 4, 1.0):
            with pytest.raises(ValueError):
                unfold(T, k)

    @given(shapes, st.integers(0, 2**32 - 1))
    def test_round_trip_bitwise(self, shape, seed):
        T = QuaternionTensor.random(shape, np.random.default_rng(seed))
        for k in range(1, len(shape) + 1):
            assert fold(unfold(T, k), k, shape) == T

    @given(shapes, st.integers(0, 2**32 - 1))
    def test_frobenius_invariant(self, shape, seed):
        T = QuaternionTensor.random(shape, np.random.default_rng(seed))
        for k in range(1, len(shape) + 1):
            assert unfold(T, k).norm() == pytest.approx(tensor_frobenius(T), rel=1e-14)

    @given(shapes, st.integers(0, 2**32 - 1))
    def test_purity_preserved(self, shape, seed):
        T = QuaternionTensor.random(shape, np.random.default_rng(seed), pure=True)
        assert all(unfold(T, k).is_pure for k in range(1, len(shape) + 1))


class TestFold:
    def test_zero(self):
        assert fold(QuaternionMatrix.zeros((3, 8)), 2, (2, 3, 4)) == QuaternionTensor.zeros((2, 3, 4))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            fold(QuaternionMatrix.zeros((3, 7)), 2, (2, 3, 4))

    def test_order_cap(self):
        with pytest.raises(ValueError):
            fold(QuaternionMatrix.zeros((1, 1)), 1, (1,) * 9)


class TestTuckerRank:
    def test_zero(self):
        assert tucker_rank(QuaternionTensor.zeros((3, 4, 5))) == (0, 0, 0)

    def test_outer_product(self, rng):
        # quaternion a along mode 1, real b and c: every unfolding is a left multiple
        a = QuaternionTensor.random((3,), rng).components
        b = rng.standard_normal(4)
        c = rng.standard_normal(5)
        T = QuaternionTensor(np.einsum("qi,j,k->qijk", a, b, c))
        assert tucker_rank(T) == (1, 1, 1)
        for k in (1, 2, 3):
            s = singular_values(unfold(T, k))
            assert s[1] / s[0] < 1e-10

    def test_noncommutative_outer_product(self, rng):
        # a quaternion factor to the right of the mode-1 factor raises the mode-2 rank
        a = QuaternionMatrix.random((3, 1), rng)
        b = QuaternionMatrix.random((1, 4), rng)
        T = QuaternionTensor(qmatmul(a, b).components[..., None])
        assert tucker_rank(T)[0] == 1
        assert tucker_rank(T)[1] > 1

    def test_generic(self, rng):
        for _ in range(5):
            assert tucker_rank(QuaternionTensor.random((3, 4, 5), rng)) == (3, 4, 5)

    @given(shapes, st.integers(0, 2**32 - 1))
    def test_bounded(self, shape, seed):
        T = QuaternionTensor.random(shape, np.random.default_rng(seed))
        total = int(np.prod(shape))
        for r, n in zip(tucker_rank(T), shape):
            assert r <= min(n, total // n)

    def test_explicit_tol(self, rng):
        T = QuaternionTensor.random((3, 3, 3), rng)
        assert tucker_rank(T, tol=1e12) == (0, 0, 0)


class TestQt1:
    def test_round_trip(self, tmp_path, rng):
        T = QuaternionTensor.random((3, 1, 4), rng)
        save_qt1(tmp_path / "t.qt1", T)
        assert load_qt1(tmp_path / "t.qt1") == T

    def test_layout(self):
        T = QuaternionTensor.from_parts(w=np.array([[1.0, 2.0], [3.0, 4.0]]))
        buf = encode_qt1(T)
        assert buf[:5] == b"QTEN1" and buf[5] == 2
        assert np.frombuffer(buf[6:22], "<u8").tolist() == [2, 2]
        # first-index-fastest flat order
        assert np.frombuffer(buf[22:54], "<f8").tolist() == [1.0, 3.0, 2.0, 4.0]
        assert len(buf) == 22 + 4 * 4 * 8

    def test_decode_offset(self, rng):
        a = QuaternionTensor.random((2, 2), rng)
        b = QuaternionTensor.random((3,), rng)
        buf = encode_qt1(a) + encode_qt1(b)
        ra, end = decode_qt1(buf)
        rb, end2 = decode_qt1(buf, end)
        assert ra == a and rb == b and end2 == len(buf)

    @pytest.mark.parametrize("mutate", [
        lambda b: b"XXXXX" + b[5:],
        lambda b: b[:-1],
        lambda b: b[:8],
        lambda b: b[:5] + bytes([0]) + b[6:],
        lambda b: b[:5] + bytes([9]) + b[6:],
    ])
    def test_corrupt(self, mutate, rng):
        buf = encode_qt1(QuaternionTensor.random((2, 2), rng))
        with pytest.raises(FormatError):
            decode_qt1(mutate(buf))

    def test_zero_dimension(self):
        buf = b"QTEN1" + bytes([2]) + np.array([0, 2], "<u8").tobytes()
        with pytest.raises(FormatError):
            decode_qt1(buf)

    def test_trailing_bytes(self, tmp_path, rng):
        p = tmp_path / "t.qt1"
        p.write_bytes(encode_qt1(QuaternionTensor.random((2, 2), rng)) + b"\0")
        with pytest.raises(FormatError):
            load_qt1(p)
