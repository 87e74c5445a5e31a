"""Quaternion-valued arrays stored as four real component planes."""

from __future__ import annotations

import numpy as np

from .quaternion import Quaternion

MAX_ORDER = 8


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class QuaternionTensor:
    """N-way quaternion array ``T0 + T1 i + T2 j + T3 k``.

    ``components`` has shape ``(4, N1, ..., NN)``. Instances are immutable;
    the stored buffer is read-only and arithmetic returns new objects.
    """

    min_order = 1
    max_order = MAX_ORDER

    __slots__ = ("_c",)

    def __init__(self, components, *, copy: bool = True):
        c = np.array(components, dtype=np.float64, copy=copy or None)
        if c.ndim < 1 or c.shape[0] != 4:
            raise ValueError(
                f"components must have a leading axis of length 4, got shape {c.shape}")
        order = c.ndim - 1
        if not self.min_order <= order <= self.max_order:
            raise ValueError(
                f"{type(self).__name__} needs order in "
                f"[{self.min_order}, {self.max_order}], got {order}")
        if any(n < 1 for n in c.shape[1:]):
            raise ValueError(f"all dimensions must be positive, got {c.shape[1:]}")
        if not copy and c.flags.writeable:
            c = c.copy()
        self._c = _frozen(c)

    @classmethod
    def _wrap(cls, components: np.ndarray):
        # takes ownership of a freshly computed buffer, no copy
        obj = cls.__new__(cls)
        c = np.asarray(components, dtype=np.float64)
        if c.shape[0] != 4 or not cls.min_order <= c.ndim - 1 <= cls.max_order:
            raise ValueError(f"bad component shape {c.shape} for {cls.__name__}")
        obj._c = _frozen(c)
        return obj

    @classmethod
    def from_parts(cls, w=None, x=None, y=None, z=None):
        """Build from component planes; missing planes are zero."""
        parts = [p for p in (w, x, y, z) if p is not None]
        if not parts:
            raise ValueError("at least one component is required")
        shape = np.shape(parts[0])
        planes = [np.zeros(shape) if p is None else np.asarray(p, dtype=float)
                  for p in (w, x, y, z)]
        for p in planes:
            if p.shape != shape:
                raise ValueError("all components must share one shape")
        return cls._wrap(np.stack(planes))

    @classmethod
    def from_complex(cls, z1, z2):
        """Build from the Cayley-Dickson planes ``Z1 + Z2 j``."""
        z1 = np.asarray(z1)
        z2 = np.asarray(z2)
        return cls._wrap(np.stack([z1.real, z1.imag, z2.real, z2.imag]).astype(float))

    @classmethod
    def zeros(cls, shape):
        return cls._wrap(np.zeros((4, *tuple(shape))))

    @classmethod
    def random(cls, shape, rng=None, pure: bool = False):
        """Standard normal components; ``pure`` zeroes the real plane."""
        rng = np.random.default_rng(rng)
        c = rng.standard_normal((4, *tuple(shape)))
        if pure:
            c[0] = 0.0
        return cls._wrap(c)

    @property
    def components(self) -> np.ndarray:
        return self._c

    @property
    def w(self) -> np.ndarray:
        return self._c[0]

    @property
    def x(self) -> np.ndarray:
        return self._c[1]

    @property
    def y(self) -> np.ndarray:
        return self._c[2]

    @property
    def z(self) -> np.ndarray:
        return self._c[3]

    @property
    def shape(self) -> tuple:
        return self._c.shape[1:]

    @property
    def order(self) -> int:
        return self._c.ndim - 1

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def is_pure(self) -> bool:
        return not np.any(self._c[0])

    def cd_planes(self) -> tuple[np.ndarray, np.ndarray]:
        """``(Z1, Z2)`` with ``Z1 = T0 + T1 i`` and ``Z2 = T2 + T3 i``."""
        c = self._c
        return c[0] + 1j * c[1], c[2] + 1j * c[3]

    def __getitem__(self, index) -> Quaternion:
        if not isinstance(index, tuple):
            index = (index,)
        if len(index) != self.order or not all(
                isinstance(i, (int, np.integer)) for i in index):
            raise IndexError("quaternion arrays support full integer indexing only")
        return Quaternion.from_array(self._c[(slice(None), *index)])

    def _like(self, components):
        return type(self)._wrap(components)

    def _check_same(self, other):
        if not isinstance(other, QuaternionTensor):
            return False
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return True

    def __add__(self, other):
        if not self._check_same(other):
            return NotImplemented
        return self._like(self._c + other._c)

    def __sub__(self, other):
        if not self._check_same(other):
            return NotImplemented
        return self._like(self._c - other._c)

    def __neg__(self):
        return self._like(-self._c)

    def __mul__(self, s):
        if isinstance(s, (int, float, np.integer, np.floating)):
            return self._like(self._c * float(s))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, s):
        if isinstance(s, (int, float, np.integer, np.floating)):
            return self._like(self._c / float(s))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, QuaternionTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._c, other._c))

    __hash__ = None

    def conj(self):
        """Entrywise quaternion conjugate."""
        c = self._c.copy()
        c[1:] *= -1.0
        return self._like(c)

    def norm(self) -> float:
        """Frobenius norm over all quaternion entries."""
        return float(np.linalg.norm(self._c.ravel()))

    def allclose(self, other, rtol=1e-9, atol=0.0) -> bool:
        return self.shape == other.shape and bool(
            np.allclose(self._c, other._c, rtol=rtol, atol=atol))

    def as_tensor(self) -> "QuaternionTensor":
        return QuaternionTensor._wrap(self._c)

    def __repr__(self):
        return f"{type(self).__name__}(shape={self.shape}, pure={self.is_pure})"


class QuaternionMatrix(QuaternionTensor):
    """Two-way quaternion array ``Q0 + Q1 i + Q2 j + Q3 k``."""

    min_order = 2
    max_order = 2

    __slots__ = ()

    @classmethod
    def identity(cls, n: int):
        c = np.zeros((4, n, n))
        c[0] = np.eye(n)
        return cls._wrap(c)

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def H(self) -> "QuaternionMatrix":
        """Conjugate transpose."""
        c = np.swapaxes(self._c, 1, 2).copy()
        c[1:] *= -1.0
        return QuaternionMatrix._wrap(c)

    @property
    def T(self) -> "QuaternionMatrix":
        return QuaternionMatrix._wrap(np.swapaxes(self._c, 1, 2).copy())

    def __matmul__(self, other):
        from .linalg import qmatmul
        if not isinstance(other, QuaternionMatrix):
            return NotImplemented
        return qmatmul(self, other)


def as_matrix(t: QuaternionTensor) -> QuaternionMatrix:
    if isinstance(t, QuaternionMatrix):
        return t
    if t.order != 2:
        raise ValueError(f"expected an order-2 quaternion array, got order {t.order}")
    return QuaternionMatrix._wrap(t.components)
