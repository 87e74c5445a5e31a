"""Low-rank completion of color images and videos as pure quaternion matrices and tensors."""

from .arrays import QuaternionMatrix, QuaternionTensor
from .completion import (SamplingMask, SolverConfig, SolverReport, SolverState,
                         apply_mask, generate_mask, lrc_qm, lrc_qt)
from .estimators import QuaternionMatrixCompletion, QuaternionTensorCompletion
from .linalg import (QsvdResult, complex_adjoint, nuclear_norm, qfrobenius, qinner,
                     qmatmul, qsvd, svt)
from .quaternion import Quaternion
from .tensor import fold, tucker_rank, unfold

__version__ = "0.1.0"

__all__ = [
    "Quaternion", "QuaternionMatrix", "QuaternionTensor", "QsvdResult",
    "complex_adjoint", "qmatmul", "qsvd", "nuclear_norm", "qfrobenius", "qinner", "svt",
    "unfold", "fold", "tucker_rank",
    "SamplingMask", "SolverConfig", "SolverState", "SolverReport",
    "apply_mask", "generate_mask", "lrc_qt", "lrc_qm",
    "QuaternionMatrixCompletion", "QuaternionTensorCompletion",
]
