"""Input coercion for the estimator API."""

from __future__ import annotations

import numpy as np

from .arrays import QuaternionMatrix, QuaternionTensor, as_matrix
from .completion import SamplingMask


def check_quaternion_array(X, *, order=None, min_order=2) -> QuaternionTensor:
    """Return ``X`` as a quaternion array.

    Accepts quaternion arrays, ``ColorImage``/``ColorVideo`` objects, or real
    arrays with a leading component axis of length 4. Non-finite values are
    rejected.
    """
    if isinstance(X, QuaternionTensor):
        T = X
    elif hasattr(X, "pixels"):
        from .media import to_quaternion
        T = to_quaternion(X)
    else:
        a = np.asarray(X, dtype=np.float64)
        if a.ndim < 2 or a.shape[0] != 4:
            raise ValueError(
                "expected a quaternion array or a real array of shape (4, ...), "
                f"got shape {a.shape}")
        T = QuaternionTensor(a)
    if not np.all(np.isfinite(T.components)):
        raise ValueError("input contains NaN or infinity")
    if order is not None and T.order != order:
        raise ValueError(f"expected an order-{order} quaternion array, got order {T.order}")
    if T.order < min_order:
        raise ValueError(f"expected order >= {min_order}, got {T.order}")
    if T.order == 2 and not isinstance(T, QuaternionMatrix):
        T = as_matrix(T)
    return T


def check_mask(mask, shape) -> SamplingMask:
    """Return ``mask`` as a :class:`SamplingMask` of the given shape.

    Boolean arrays are taken as the observed set; ``None`` means fully observed.
    """
    shape = tuple(shape)
    if mask is None:
        return SamplingMask.full(shape)
    if not isinstance(mask, SamplingMask):
        a = np.asarray(mask)
        if a.dtype != bool:
            raise TypeError(f"mask arrays must be boolean, got dtype {a.dtype}")
        mask = SamplingMask(a)
    if mask.shape != shape:
        raise ValueError(f"mask shape {mask.shape} does not match data shape {shape}")
    return mask
