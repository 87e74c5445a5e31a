"""Quaternion matrix algebra through the complex adjoint representation.

A quaternion matrix ``Q = Z1 + Z2 j`` maps to the complex block matrix

    f(Q) = [[ Z1,       Z2      ],
            [ -conj(Z2), conj(Z1)]]

which is a ring homomorphism, so products, SVDs and norms can be computed
with ordinary complex LAPACK kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import QuaternionMatrix, as_matrix
from .quaternion import hamilton

__all__ = [
    "DecompositionError",
    "QsvdResult",
    "complex_adjoint",
    "from_complex_adjoint",
    "qmatmul",
    "qsvd",
    "singular_values",
    "nuclear_norm",
    "qfrobenius",
    "svt",
    "qinner",
    "write_spectrum_csv",
]

# relative gap below which neighbouring singular values share one subspace
_CLUSTER_RTOL = 1e-10


class DecompositionError(np.linalg.LinAlgError):
    """The complex SVD backend failed."""


def complex_adjoint(Q: QuaternionMatrix) -> np.ndarray:
    """Return the ``2N1 x 2N2`` complex representation of ``Q``."""
    Q = as_matrix(Q)
    z1, z2 = Q.cd_planes()
    return np.block([[z1, z2], [-z2.conj(), z1.conj()]])


def from_complex_adjoint(A: np.ndarray) -> QuaternionMatrix:
    """Project a ``2N1 x 2N2`` complex matrix onto quaternion structure.

    For an exact adjoint this inverts :func:`complex_adjoint`; otherwise it
    returns the quaternion matrix whose adjoint is nearest in Frobenius norm.
    """
    A = np.asarray(A)
    m2, n2 = A.shape
    if m2 % 2 or n2 % 2:
        raise ValueError(f"complex adjoint must have even dimensions, got {A.shape}")
    m, n = m2 // 2, n2 // 2
    z1 = 0.5 * (A[:m, :n] + A[m:, n:].conj())
    z2 = 0.5 * (A[:m, n:] - A[m:, :n].conj())
    return QuaternionMatrix.from_complex(z1, z2)


def qmatmul(A: QuaternionMatrix, B: QuaternionMatrix) -> QuaternionMatrix:
    """Quaternion matrix product ``A B``.

    Uses the Cayley-Dickson identity
    ``(A1 + A2 j)(B1 + B2 j) = (A1 B1 - A2 conj(B2)) + (A1 B2 + A2 conj(B1)) j``.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    if A.cols != B.rows:
        raise ValueError(f"shape mismatch for product: {A.shape} @ {B.shape}")
    a1, a2 = A.cd_planes()
    b1, b2 = B.cd_planes()
    return QuaternionMatrix.from_complex(a1 @ b1 - a2 @ b2.conj(),
                                         a1 @ b2 + a2 @ b1.conj())


def _svd(a, full_matrices=True, compute_uv=True):
    try:
        return np.linalg.svd(a, full_matrices=full_matrices, compute_uv=compute_uv)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"complex SVD failed: {exc}") from exc


def _jmap(c: np.ndarray) -> np.ndarray:
    # (c1; c2) -> (-conj c2; conj c1): the partner column of a quaternion vector
    n = c.shape[0] // 2
    return np.concatenate([-c[n:].conj(), c[:n].conj()])


def _to_quaternion_columns(cols: np.ndarray) -> np.ndarray:
    # complex column (c1; c2) -> quaternion vector c1 + (-conj c2) j
    n = cols.shape[0] // 2
    z1 = cols[:n]
    z2 = -cols[n:].conj()
    return np.stack([z1.real, z1.imag, z2.real, z2.imag])


class _StructuredBasis:
    """Orthonormal complex basis closed under the partner map."""

    def __init__(self, dim: int, capacity: int):
        self.B = np.empty((dim, 2 * capacity), dtype=complex)
        self.k = 0

    def project_out(self, V: np.ndarray) -> np.ndarray:
        if self.k == 0:
            return V
        B = self.B[:, :2 * self.k]
        V = V - B @ (B.conj().T @ V)
        # second pass keeps orthogonality at roundoff level
        return V - B @ (B.conj().T @ V)

    def add(self, u: np.ndarray) -> np.ndarray:
        u = self.project_out(u[:, None])[:, 0]
        u = u / np.linalg.norm(u)
        self.B[:, 2 * self.k] = u
        self.B[:, 2 * self.k + 1] = _jmap(u)
        self.k += 1
        return u

    def pick(self, pool: np.ndarray, count: int) -> list[np.ndarray]:
        """Greedily take ``count`` vectors from span(pool), largest residual first."""
        out = []
        R = self.project_out(pool)
        for _ in range(count):
            norms = np.linalg.norm(R, axis=0)
            idx = int(np.argmax(norms))
            if norms[idx] <= 0.0:
                raise DecompositionError("degenerate subspace lost its rank")
            u = self.add(R[:, idx])
            out.append(u)
            j = self.B[:, 2 * self.k - 1]
            R = R - np.outer(u, u.conj() @ R) - np.outer(j, j.conj() @ R)
        return out


def _clusters(lam: np.ndarray, zero_tol: float, gap_tol: float):
    """Split sorted singular values into (start, stop) runs of equal values."""
    nonzero = int(np.count_nonzero(lam > zero_tol))
    runs = []
    start = 0
    for k in range(1, nonzero + 1):
        if k == nonzero or lam[k - 1] - lam[k] > gap_tol:
            runs.append((start, k))
            start = k
    return runs, nonzero


@dataclass(frozen=True)
class QsvdResult:
    """``Q = U diag(singular_values) V^H`` with unitary quaternion factors."""

    U: QuaternionMatrix
    singular_values: np.ndarray
    V: QuaternionMatrix
    rank_estimate: int
    tol: float

    def reconstruct(self) -> QuaternionMatrix:
        k = len(self.singular_values)
        Uk = QuaternionMatrix._wrap(self.U.components[:, :, :k] * self.singular_values)
        Vk = QuaternionMatrix._wrap(self.V.components[:, :, :k])
        return qmatmul(Uk, Vk.H)


def _auto_tol(sigma_max: float, shape) -> float:
    return 1e-10 * sigma_max * max(shape)


def _resolve_tol(tol, sigma_max, shape) -> float:
    if tol is None or tol == "auto":
        return _auto_tol(sigma_max, shape)
    tol = float(tol)
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    return tol


def singular_values(Q: QuaternionMatrix) -> np.ndarray:
    """Quaternion singular values (descending), without factors."""
    s = _svd(complex_adjoint(Q), compute_uv=False)
    return np.ascontiguousarray(s[::2])


def qsvd(Q: QuaternionMatrix, tol="auto", full_matrices: bool = True) -> QsvdResult:
    """Quaternion SVD computed from the SVD of the complex adjoint.

    The quaternion singular values are the odd-indexed (1-based) values of
    the paired complex spectrum. Left vectors are taken from the odd columns
    of the complex factor; inside a cluster of equal values the columns are
    re-selected with a structure-preserving Gram-Schmidt so ``U`` stays
    unitary even when the backend mixes degenerate pairs. Right vectors of
    nonzero values are mapped from the chosen left vectors, right and left
    null spaces are completed independently. Each column pair is rotated by
    a unit quaternion so the largest entry of every left vector is real and
    positive, which makes the factors deterministic.

    Args:
        Q: input matrix, ``N1 x N2``.
        tol: rank threshold, or ``"auto"`` for ``1e-10 * sigma_max * max(N1, N2)``.
        full_matrices: return square ``U`` and ``V``; otherwise ``N x min(N1, N2)``.
    """
    Q = as_matrix(Q)
    n1, n2 = Q.shape
    m = min(n1, n2)
    A = complex_adjoint(Q)
    Uc, s, Vch = _svd(A, full_matrices=full_matrices)
    Vc = Vch.conj().T
    lam = np.ascontiguousarray(s[::2])
    smax = float(lam[0]) if m else 0.0
    tol = _resolve_tol(tol, smax, Q.shape)

    eps_scale = np.finfo(float).eps * max(n1, n2) * smax
    zero_tol = max(4 * eps_scale, 0.0)
    runs, nonzero = _clusters(lam, zero_tol, _CLUSTER_RTOL * smax)

    ucols = n1 if full_matrices else m
    vcols = n2 if full_matrices else m
    left = _StructuredBasis(2 * n1, ucols)
    right = _StructuredBasis(2 * n2, vcols)
    us, vs = [], []
    for a, b in runs:
        pool_u = Uc[:, 2 * a:2 * b]
        pool_v = Vc[:, 2 * a:2 * b]
        for u in left.pick(pool_u, b - a):
            coeff = pool_u.conj().T @ u
            v = right.add(pool_v @ coeff)
            us.append(u)
            vs.append(v)
    if ucols > nonzero:
        us.extend(left.pick(Uc[:, 2 * nonzero:], ucols - nonzero))
    if vcols > nonzero:
        vs.extend(right.pick(Vc[:, 2 * nonzero:], vcols - nonzero))

    Uq = _to_quaternion_columns(np.stack(us, axis=1))
    Vq = _to_quaternion_columns(np.stack(vs, axis=1))
    Uq, Vq = _canonical_phase(Uq, Vq, nonzero)
    return QsvdResult(
        U=QuaternionMatrix._wrap(Uq),
        singular_values=lam,
        V=QuaternionMatrix._wrap(Vq),
        rank_estimate=int(np.count_nonzero(lam > tol)),
        tol=tol,
    )


def _phase_of_largest(cols: np.ndarray) -> np.ndarray:
    # unit quaternion of the largest-modulus entry in each column, (4, k)
    mod = np.sqrt(np.sum(cols ** 2, axis=0))
    idx = np.argmax(mod, axis=0)
    k = np.arange(cols.shape[2])
    q = cols[:, idx, k]
    return q / np.maximum(mod[idx, k], np.finfo(float).tiny)


def _canonical_phase(Uq, Vq, paired):
    """Right-multiply columns by unit quaternions; paired columns share one."""
    conj = np.array([1.0, -1.0, -1.0, -1.0])[:, None]
    pu = _phase_of_largest(Uq) * conj
    Uq = hamilton(Uq, pu[:, None, :])
    pv = _phase_of_largest(Vq) * conj
    pv[:, :paired] = pu[:, :paired]
    Vq = hamilton(Vq, pv[:, None, :])
    return Uq, Vq


def nuclear_norm(Q: QuaternionMatrix) -> float:
    """Sum of the quaternion singular values."""
    return float(np.sum(singular_values(Q)))


def qfrobenius(Q: QuaternionMatrix) -> float:
    return as_matrix(Q).norm()


def svt(Q: QuaternionMatrix, xi: float) -> QuaternionMatrix:
    """Singular value thresholding, the proximal map of ``xi * ||.||_*``.

    Thresholding both members of every singular pair of the complex adjoint
    is the adjoint of ``U_r diag(max(sigma - xi, 0)) V_r^H``; doing it in the
    complex domain avoids building quaternion factors inside solver loops.
    """
    xi = float(xi)
    if xi < 0:
        raise ValueError(f"threshold must be nonnegative, got {xi}")
    Q = as_matrix(Q)
    A = complex_adjoint(Q)
    U, s, Vh = _svd(A, full_matrices=False)
    d = s - xi
    keep = int(np.count_nonzero(d > 0))
    if keep == 0:
        return QuaternionMatrix.zeros(Q.shape)
    X = (U[:, :keep] * d[:keep]) @ Vh[:keep]
    return from_complex_adjoint(X)


def qinner(A: QuaternionMatrix, B: QuaternionMatrix) -> float:
    """Real part of ``tr(A^H B)``; equals the plain dot product of components."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    return float(np.dot(A.components.ravel(), B.components.ravel()))


def write_spectrum_csv(values, path_or_file) -> None:
    """One singular value per line, descending, full double precision."""
    values = np.sort(np.asarray(values, dtype=float))[::-1]
    text = "".join(f"{v:.17g}\n" for v in values)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)
