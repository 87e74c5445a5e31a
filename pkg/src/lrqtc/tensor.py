"""Mode-k unfolding, folding, Tucker rank and the ``qt1`` tensor file format.

Unfolding follows the Kolda-Bader column ordering: with mode ``k`` removed,
the remaining indices enumerate columns first-index-fastest. Tensors are
flattened first-index-fastest (Fortran order) wherever a flat buffer is
involved, so the mode-1 unfolding is a plain reshape.
"""

from __future__ import annotations

import struct

import numpy as np

from .arrays import MAX_ORDER, QuaternionMatrix, QuaternionTensor
from .linalg import _auto_tol, _resolve_tol, singular_values

QT1_MAGIC = b"QTEN1"


def _check_mode(k: int, order: int) -> int:
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= order:
        raise ValueError(f"mode index must be in 1..{order}, got {k!r}")
    return int(k)


def unfold_array(a: np.ndarray, k: int) -> np.ndarray:
    """Unfold a plain N-way array along 1-based mode ``k``."""
    return np.reshape(np.moveaxis(a, k - 1, 0), (a.shape[k - 1], -1), order="F")


def fold_array(m: np.ndarray, k: int, shape) -> np.ndarray:
    """Inverse of :func:`unfold_array`."""
    shape = tuple(shape)
    rest = shape[:k - 1] + shape[k:]
    a = np.reshape(m, (shape[k - 1], *rest), order="F")
    return np.moveaxis(a, 0, k - 1)


def unfold(T: QuaternionTensor, k: int) -> QuaternionMatrix:
    """Mode-k unfolding (1-based ``k``), shape ``N_k x prod(N_m, m != k)``."""
    k = _check_mode(k, T.order)
    c = T.components
    out = np.stack([unfold_array(c[l], k) for l in range(4)])
    return QuaternionMatrix._wrap(np.ascontiguousarray(out))


def fold(M: QuaternionMatrix, k: int, shape) -> QuaternionTensor:
    """Rebuild a tensor of ``shape`` from its mode-k unfolding."""
    shape = tuple(int(n) for n in shape)
    if not 1 <= len(shape) <= MAX_ORDER:
        raise ValueError(f"tensor order must be in 1..{MAX_ORDER}, got {len(shape)}")
    k = _check_mode(k, len(shape))
    expect = (shape[k - 1], int(np.prod(shape)) // shape[k - 1])
    if M.shape != expect:
        raise ValueError(
            f"matrix of shape {M.shape} cannot fold to {shape} along mode {k}; "
            f"expected {expect}")
    c = M.components
    out = np.stack([fold_array(c[l], k, shape) for l in range(4)])
    return QuaternionTensor._wrap(np.ascontiguousarray(out))


def tensor_frobenius(T: QuaternionTensor) -> float:
    return T.norm()


def tucker_rank(T: QuaternionTensor, tol="auto") -> tuple[int, ...]:
    """Ranks of all mode unfoldings.

    With ``tol="auto"`` each mode uses ``1e-10 * sigma_max * max(shape)`` of
    its own unfolding.
    """
    ranks = []
    for k in range(1, T.order + 1):
        Mk = unfold(T, k)
        s = singular_values(Mk)
        smax = float(s[0]) if s.size else 0.0
        t = _auto_tol(smax, Mk.shape) if tol in (None, "auto") else _resolve_tol(tol, smax, Mk.shape)
        ranks.append(int(np.count_nonzero(s > t)))
    return tuple(ranks)


class FormatError(ValueError):
    """A binary file does not follow its declared layout."""


def encode_qt1(T: QuaternionTensor) -> bytes:
    header = QT1_MAGIC + struct.pack("<B", T.order) + struct.pack(f"<{T.order}Q", *T.shape)
    body = b"".join(
        np.asarray(T.components[l], dtype="<f8").tobytes(order="F") for l in range(4))
    return header + body


def decode_qt1(buf: bytes, offset: int = 0) -> tuple[QuaternionTensor, int]:
    """Parse one ``qt1`` record at ``offset``; returns the tensor and the end offset."""
    mv = memoryview(buf)
    if bytes(mv[offset:offset + 5]) != QT1_MAGIC:
        raise FormatError("missing QTEN1 magic")
    pos = offset + 5
    if len(mv) < pos + 1:
        raise FormatError("truncated qt1 header")
    (order,) = struct.unpack_from("<B", mv, pos)
    pos += 1
    if not 1 <= order <= MAX_ORDER:
        raise FormatError(f"unsupported tensor order {order}")
    if len(mv) < pos + 8 * order:
        raise FormatError("truncated qt1 shape")
    shape = struct.unpack_from(f"<{order}Q", mv, pos)
    pos += 8 * order
    if any(n == 0 for n in shape):
        raise FormatError(f"zero-length dimension in shape {shape}")
    count = int(np.prod(shape))
    nbytes = 4 * 8 * count
    if len(mv) < pos + nbytes:
        raise FormatError("truncated qt1 payload")
    flat = np.frombuffer(mv[pos:pos + nbytes], dtype="<f8").reshape(4, count)
    comps = np.stack([flat[l].reshape(shape, order="F") for l in range(4)]).astype(np.float64)
    return QuaternionTensor._wrap(comps), pos + nbytes


def save_qt1(path, T: QuaternionTensor) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_qt1(T))


def load_qt1(path) -> QuaternionTensor:
    with open(path, "rb") as fh:
        buf = fh.read()
    T, end = decode_qt1(buf)
    if end != len(buf):
        raise FormatError(f"{len(buf) - end} trailing bytes after qt1 record")
    return T
