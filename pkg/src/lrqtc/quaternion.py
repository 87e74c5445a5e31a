"""Scalar quaternion arithmetic.

A quaternion ``w + x i + y j + z k`` is held as four doubles. The Hamilton
product helper :func:`hamilton` works on stacked component arrays so the
same formula backs scalars, matrices and tensors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def hamilton(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Elementwise Hamilton product of component stacks.

    Both inputs have a leading axis of length 4 (w, x, y, z); the remaining
    axes broadcast.
    """
    p0, p1, p2, p3 = p[0], p[1], p[2], p[3]
    q0, q1, q2, q3 = q[0], q[1], q[2], q[3]
    return np.stack([
        p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
        p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
        p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
        p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
    ])


@dataclass(frozen=True)
class Quaternion:
    """Immutable quaternion ``w + x i + y j + z k``."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("w", "x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        w, x, y, z = np.asarray(a, dtype=float).reshape(4)
        return cls(w, x, y, z)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def real(self) -> float:
        return self.w

    @property
    def is_pure(self) -> bool:
        return self.w == 0.0

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return qadd(self, other)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return qadd(self, -other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return qadd(other, -self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return qmul(self, other)

    def __rmul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return qmul(other, self)

    def __abs__(self):
        return qmodulus(self)

    def conj(self) -> "Quaternion":
        return qconj(self)

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def _coerce(v):
    if isinstance(v, Quaternion):
        return v
    if isinstance(v, (int, float, np.integer, np.floating)):
        return Quaternion(float(v))
    return NotImplemented


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qadd(p: Quaternion, q: Quaternion) -> Quaternion:
    return Quaternion(p.w + q.w, p.x + q.x, p.y + q.y, p.z + q.z)


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q`` (not commutative)."""
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


def qconj(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def qmodulus(q: Quaternion) -> float:
    return float(np.sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z))


def cd_decompose(q: Quaternion) -> tuple[complex, complex]:
    """Cayley-Dickson split ``q = z1 + z2 j``."""
    return complex(q.w, q.x), complex(q.y, q.z)


def cd_compose(z1: complex, z2: complex) -> Quaternion:
    """Inverse of :func:`cd_decompose`."""
    z1, z2 = complex(z1), complex(z2)
    return Quaternion(z1.real, z1.imag, z2.real, z2.imag)
