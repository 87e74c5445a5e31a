"""Low-rank quaternion tensor/matrix completion by ADMM.

The solver minimizes ``sum_n alpha_n ||T_[n]||_*`` subject to the observed
entries, splitting each unfolding into its own variable ``X_n`` with a
multiplier ``F_n`` and an adaptive penalty ``beta_n``. One iteration is

1. ``T <- P_obs^c(mean_n(fold(X_n) - fold(F_n) / beta_n)) + Y``
2. ``X_n <- svt(T_[n] + F_n / beta_n, alpha_n / beta_n)``      (per mode)
3. ``F_n <- F_n - beta_n (X_n - T_[n])``                       (per mode)
4. ``beta_n <- min(beta_max_n, eta * beta_n)``

and stops once ``||T_new - T_old||_F <= epsilon``. The matrix variant is
the same loop with the single mode ``1``.
"""

from __future__ import annotations

import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .arrays import QuaternionMatrix, QuaternionTensor, as_matrix
from .linalg import complex_adjoint, from_complex_adjoint, _svd
from .tensor import FormatError, decode_qt1, encode_qt1, fold, unfold

TRIGGER_MODES = ("absolute", "relative")
CHECKPOINT_MAGIC = b"QCKP1"


class SamplingMask:
    """Set of observed entries of a quaternion array.

    Stored as a read-only boolean array; ``observed[idx]`` is True for every
    multi-index in the observation set.
    """

    __slots__ = ("_obs",)

    def __init__(self, observed):
        obs = np.array(observed, dtype=bool)
        if obs.ndim < 1:
            raise ValueError("mask must have at least one dimension")
        obs.flags.writeable = False
        self._obs = obs

    @classmethod
    def full(cls, shape):
        return cls(np.ones(tuple(shape), dtype=bool))

    @classmethod
    def empty(cls, shape):
        return cls(np.zeros(tuple(shape), dtype=bool))

    @classmethod
    def from_indices(cls, shape, indices):
        """Build from an iterable of multi-indices; rejects out-of-range or repeated ones."""
        shape = tuple(int(n) for n in shape)
        obs = np.zeros(shape, dtype=bool)
        for idx in indices:
            idx = tuple(int(i) for i in idx)
            if len(idx) != len(shape) or any(not 0 <= i < n for i, n in zip(idx, shape)):
                raise IndexError(f"index {idx} outside shape {shape}")
            if obs[idx]:
                raise ValueError(f"duplicate index {idx}")
            obs[idx] = True
        return cls(obs)

    @property
    def observed(self) -> np.ndarray:
        return self._obs

    @property
    def shape(self) -> tuple:
        return self._obs.shape

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self._obs))

    @property
    def total(self) -> int:
        return int(self._obs.size)

    @property
    def sr(self) -> float:
        """Sampling ratio ``|observed| / total``."""
        return self.count / self.total

    def indices(self) -> list[tuple]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self._obs)]

    def complement(self) -> "SamplingMask":
        return SamplingMask(~self._obs)

    def __eq__(self, other):
        if not isinstance(other, SamplingMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._obs, other._obs))

    __hash__ = None

    def __repr__(self):
        return f"SamplingMask(shape={self.shape}, sr={self.sr:.4g})"


def generate_mask(shape, sr: float, seed: Optional[int] = None) -> SamplingMask:
    """Draw ``round(sr * prod(shape))`` distinct entries uniformly, without replacement.

    Deterministic for a given seed; flat positions are drawn in
    first-index-fastest order.
    """
    shape = tuple(int(n) for n in shape)
    sr = float(sr)
    if not 0.0 < sr <= 1.0:
        raise ValueError(f"sampling ratio must lie in (0, 1], got {sr}")
    total = int(np.prod(shape))
    count = max(1, int(np.floor(sr * total + 0.5)))
    rng = np.random.default_rng(seed)
    flat = np.zeros(total, dtype=bool)
    flat[rng.choice(total, size=count, replace=False)] = True
    return SamplingMask(flat.reshape(shape, order="F"))


def apply_mask(T: QuaternionTensor, mask: SamplingMask) -> QuaternionTensor:
    """Keep observed entries, zero all four components elsewhere."""
    if T.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} does not match array shape {T.shape}")
    return type(T)._wrap(T.components * mask.observed)


@dataclass
class SolverConfig:
    """ADMM hyperparameters, one ``alpha``/``beta0``/``beta_max`` slot per mode.

    ``eta_trigger`` and ``epsilon`` are compared with ``||T_new - T_old||_F``
    directly (``trigger_mode="absolute"``) or after scaling by the norm of
    the observed data (``"relative"``).
    """

    alpha: tuple
    beta0: tuple
    beta_max: tuple
    eta0: float = 1.05
    eta_trigger: float = 0.01
    epsilon: float = 1e-3
    max_iter: int = 500
    trigger_mode: str = "relative"

    def __post_init__(self):
        self.alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        n = len(self.alpha)
        self.beta0 = tuple(float(b) for b in np.broadcast_to(np.atleast_1d(self.beta0), n))
        self.beta_max = tuple(
            float(b) for b in np.broadcast_to(np.atleast_1d(self.beta_max), n))
        self.eta0 = float(self.eta0)
        self.eta_trigger = float(self.eta_trigger)
        self.epsilon = float(self.epsilon)
        if int(self.max_iter) != self.max_iter:
            raise ValueError(f"max_iter must be an integer, got {self.max_iter}")
        self.max_iter = int(self.max_iter)
        self.validate()

    def validate(self):
        if any(a < 0 for a in self.alpha):
            raise ValueError("alpha weights must be nonnegative")
        if any(b <= 0 for b in self.beta0) or any(b <= 0 for b in self.beta_max):
            raise ValueError("beta0 and beta_max must be positive")
        if any(b0 > bm for b0, bm in zip(self.beta0, self.beta_max)):
            raise ValueError("beta0 must not exceed beta_max")
        if not self.eta0 > 1.0:
            raise ValueError(f"eta0 must exceed 1, got {self.eta0}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.eta_trigger > 0:
            raise ValueError("eta_trigger must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.trigger_mode not in TRIGGER_MODES:
            raise ValueError(f"trigger_mode must be one of {TRIGGER_MODES}")

    @property
    def n_modes(self) -> int:
        return len(self.alpha)

    @classmethod
    def tensor_defaults(cls, order: int = 3, **overrides) -> "SolverConfig":
        """Color-video settings; only order 3 has defaults."""
        if order != 3 and not {"alpha", "beta0"} <= overrides.keys():
            raise ValueError(
                f"no default alpha/beta0 for order {order}; pass them explicitly")
        params = dict(alpha=(2.0, 2.0, 1e-3), beta0=(0.08, 0.08, 1.0),
                      beta_max=(1e3, 1e3, 1e3))
        if order != 3:
            params["beta_max"] = (1e3,) * order
        params.update(overrides)
        return cls(**params)

    @classmethod
    def matrix_defaults(cls, **overrides) -> "SolverConfig":
        """Color-image settings for the single-mode solver."""
        params = dict(alpha=(2.0,), beta0=(0.08,), beta_max=(1e3,))
        params.update(overrides)
        return cls(**params)

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "beta0": list(self.beta0),
            "beta_max": list(self.beta_max),
            "eta0": self.eta0,
            "eta_trigger": self.eta_trigger,
            "epsilon": self.epsilon,
            "max_iter": self.max_iter,
            "trigger_mode": self.trigger_mode,
        }


@dataclass
class SolverState:
    """Iterate of the ADMM loop.

    ``X[i]`` and ``F[i]`` are the split variable and multiplier for the
    1-based unfolding mode ``modes[i]``.
    """

    T: QuaternionTensor
    X: list
    F: list
    beta: np.ndarray
    tau: int = 0
    modes: tuple = ()

    def __post_init__(self):
        if not self.modes:
            self.modes = tuple(range(1, len(self.X) + 1))
        self.modes = tuple(int(m) for m in self.modes)
        self.beta = np.array(self.beta, dtype=float)
        if not (len(self.X) == len(self.F) == len(self.modes) == len(self.beta)):
            raise ValueError("X, F, modes and beta must have one entry per mode")
        for m, Xn, Fn in zip(self.modes, self.X, self.F):
            expect = (self.T.shape[m - 1], self.T.size // self.T.shape[m - 1])
            if Xn.shape != expect or Fn.shape != expect:
                raise ValueError(
                    f"mode-{m} variables must have shape {expect}, got {Xn.shape}, {Fn.shape}")

    @classmethod
    def initial(cls, shape, cfg: SolverConfig, modes=None) -> "SolverState":
        """Zero split variables and multipliers, ``beta = beta0``."""
        shape = tuple(shape)
        modes = tuple(modes) if modes is not None else tuple(range(1, len(shape) + 1))
        if len(modes) != cfg.n_modes:
            raise ValueError(
                f"config has {cfg.n_modes} parameter slots but the problem has {len(modes)} modes")
        total = int(np.prod(shape))
        zeros = [QuaternionMatrix.zeros((shape[m - 1], total // shape[m - 1])) for m in modes]
        return cls(T=QuaternionTensor.zeros(shape), X=zeros, F=list(zeros),
                   beta=np.array(cfg.beta0), tau=0, modes=modes)

    def save(self, path) -> None:
        """Write a checkpoint: header, then ``qt1`` records for T, each X, each F."""
        n = len(self.modes)
        parts = [CHECKPOINT_MAGIC, struct.pack("<QB", self.tau, n),
                 struct.pack(f"<{n}B", *self.modes),
                 np.asarray(self.beta, dtype="<f8").tobytes(),
                 encode_qt1(self.T)]
        parts += [encode_qt1(x) for x in self.X]
        parts += [encode_qt1(f) for f in self.F]
        with open(path, "wb") as fh:
            fh.write(b"".join(parts))

    @classmethod
    def load(cls, path) -> "SolverState":
        with open(path, "rb") as fh:
            buf = fh.read()
        if buf[:5] != CHECKPOINT_MAGIC:
            raise FormatError("missing QCKP1 magic")
        try:
            tau, n = struct.unpack_from("<QB", buf, 5)
            pos = 5 + 9
            modes = struct.unpack_from(f"<{n}B", buf, pos)
            pos += n
            beta = np.frombuffer(buf, dtype="<f8", count=n, offset=pos).astype(float)
            pos += 8 * n
        except struct.error as exc:
            raise FormatError(f"truncated checkpoint header: {exc}") from exc
        T, pos = decode_qt1(buf, pos)
        mats = []
        for _ in range(2 * n):
            M, pos = decode_qt1(buf, pos)
            mats.append(as_matrix(M))
        if pos != len(buf):
            raise FormatError("trailing bytes after checkpoint")
        return cls(T=T, X=mats[:n], F=mats[n:], beta=beta, tau=int(tau), modes=modes)


@dataclass
class SolverReport:
    iterations: int = 0
    converged: bool = False
    wall_time: float = 0.0
    delta_history: list = field(default_factory=list)
    beta_history: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)


ProgressCallback = Callable[[int, float, tuple], None]


def _as_tensor(T) -> QuaternionTensor:
    return T if isinstance(T, QuaternionTensor) else QuaternionTensor(T)


def update_T(state: SolverState, mask: SamplingMask, Y: QuaternionTensor) -> QuaternionTensor:
    """Step 1: uniform mode average on the unobserved set, data on the observed set."""
    shape = state.T.shape
    acc = np.zeros((4, *shape))
    # fixed mode order keeps serial and threaded runs bit-identical
    for m, Xn, Fn, b in zip(state.modes, state.X, state.F, state.beta):
        acc += fold(Xn, m, shape).components
        acc -= fold(Fn, m, shape).components / b
    acc /= len(state.modes)
    out = np.where(mask.observed, Y.components, acc)
    return QuaternionTensor._wrap(out)


def _svt_with_norm(M: QuaternionMatrix, xi: float):
    # svt plus the nuclear norm of the result (half the thresholded complex spectrum)
    A = complex_adjoint(M)
    U, s, Vh = _svd(A, full_matrices=False)
    d = s - xi
    keep = int(np.count_nonzero(d > 0))
    if keep == 0:
        return QuaternionMatrix.zeros(M.shape), 0.0
    X = from_complex_adjoint((U[:, :keep] * d[:keep]) @ Vh[:keep])
    return X, 0.5 * float(np.sum(d[:keep]))


def _mode_index(state: SolverState, n: int) -> int:
    try:
        return state.modes.index(n)
    except ValueError:
        raise ValueError(f"mode {n} is not part of this problem {state.modes}") from None


def update_X(state: SolverState, n: int, cfg: SolverConfig) -> QuaternionMatrix:
    """Step 2 for 1-based mode ``n``: threshold ``T_[n] + F_n / beta_n`` at ``alpha_n / beta_n``."""
    return _x_step(state, _mode_index(state, n), cfg)[0]


def _x_step(state, i, cfg):
    m = state.modes[i]
    b = state.beta[i]
    if b <= 0:
        raise ValueError("beta must be positive")
    arg = unfold(state.T, m) + state.F[i] / b
    return _svt_with_norm(arg, cfg.alpha[i] / b)


def update_F(state: SolverState, n: int, X_new: Optional[QuaternionMatrix] = None) -> QuaternionMatrix:
    """Step 3: ``F_n - beta_n (X_n - T_[n])``; uses ``state.X`` unless ``X_new`` is given."""
    i = _mode_index(state, n)
    Xn = state.X[i] if X_new is None else X_new
    Tn = unfold(state.T, state.modes[i])
    return state.F[i] - (Xn - Tn) * float(state.beta[i])


def update_beta(beta, delta: float, cfg: SolverConfig, scale: float = 1.0) -> np.ndarray:
    """Step 4: grow beta by ``eta0`` when the last change was small, clamp at ``beta_max``.

    In relative mode the trigger is ``eta_trigger * scale``.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    limit = cfg.eta_trigger * (scale if cfg.trigger_mode == "relative" else 1.0)
    eta = cfg.eta0 if delta <= limit else 1.0
    return np.minimum(np.asarray(cfg.beta_max), eta * np.asarray(beta, dtype=float))


def _solve(Y: QuaternionTensor, mask: SamplingMask, cfg: SolverConfig, modes,
           n_jobs: int = 1, callback: Optional[ProgressCallback] = None,
           state: Optional[SolverState] = None):
    if Y.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} does not match data shape {Y.shape}")
    if len(modes) != cfg.n_modes:
        raise ValueError(
            f"config has {cfg.n_modes} parameter slots, problem needs {len(modes)}")
    Y = apply_mask(Y.as_tensor(), mask)
    if state is None:
        state = SolverState.initial(Y.shape, cfg, modes)
    elif state.T.shape != Y.shape or state.modes != tuple(modes):
        raise ValueError("checkpoint state does not match this problem")
    scale = Y.norm() if cfg.trigger_mode == "relative" else 1.0
    if scale == 0.0:
        scale = 1.0
    stop = cfg.epsilon * scale
    report = SolverReport()
    n_modes = len(modes)
    pool = ThreadPoolExecutor(max_workers=n_jobs) if n_jobs > 1 and n_modes > 1 else None

    def mode_step(i):
        Xi, nuc = _x_step(state, i, cfg)
        Ti = unfold(state.T, state.modes[i])
        Fi = state.F[i] - (Xi - Ti) * float(state.beta[i])
        return Xi, Fi, nuc

    t0 = time.perf_counter()
    try:
        for _ in range(cfg.max_iter):
            T_prev = state.T
            state.T = update_T(state, mask, Y)
            delta = (state.T - T_prev).norm()
            if pool is not None:
                results = list(pool.map(mode_step, range(n_modes)))
            else:
                results = [mode_step(i) for i in range(n_modes)]
            state.X = [r[0] for r in results]
            state.F = [r[1] for r in results]
            state.beta = update_beta(state.beta, delta, cfg, scale)
            state.tau += 1
            report.iterations += 1
            report.delta_history.append(delta)
            report.beta_history.append(tuple(float(b) for b in state.beta))
            report.objective_history.append(
                float(sum(a * r[2] for a, r in zip(cfg.alpha, results))))
            if callback is not None:
                callback(state.tau, delta, tuple(float(b) for b in state.beta))
            if delta <= stop:
                report.converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    report.wall_time = time.perf_counter() - t0
    return state, report


def lrc_qt(Y: QuaternionTensor, mask: SamplingMask, cfg: Optional[SolverConfig] = None,
           n_jobs: int = 1, callback: Optional[ProgressCallback] = None,
           state: Optional[SolverState] = None):
    """Complete a quaternion tensor of order >= 2 (one nuclear-norm term per mode).

    Entries of ``Y`` outside the mask are ignored. ``n_jobs`` threads run the
    per-mode updates concurrently with bit-identical results; ``state``
    resumes from a checkpoint.

    Returns:
        The completed tensor (observed entries equal ``Y`` exactly) and a
        :class:`SolverReport`.
    """
    Y = _as_tensor(Y)
    if Y.order < 2:
        raise ValueError("tensor completion needs order >= 2")
    cfg = cfg or SolverConfig.tensor_defaults(Y.order)
    state, report = _solve(Y, mask, cfg, tuple(range(1, Y.order + 1)), n_jobs, callback, state)
    return state.T, report


def lrc_qm(Y: QuaternionMatrix, mask: SamplingMask, cfg: Optional[SolverConfig] = None,
           callback: Optional[ProgressCallback] = None, state: Optional[SolverState] = None):
    """Complete a quaternion matrix with a single nuclear-norm term."""
    Y = as_matrix(_as_tensor(Y))
    cfg = cfg or SolverConfig.matrix_defaults()
    if cfg.n_modes != 1:
        raise ValueError("matrix completion takes exactly one alpha/beta slot")
    state, report = _solve(Y, mask, cfg, (1,), 1, callback, state)
    return as_matrix(state.T), report


def relative_error(estimate: QuaternionTensor, truth: QuaternionTensor) -> float:
    return (estimate.as_tensor() - truth.as_tensor()).norm() / truth.norm()


def low_rank_tensor(shape: Sequence[int], ranks: Sequence[int], rng=None,
                    pure: bool = True) -> QuaternionTensor:
    """Random tensor with Tucker rank at most ``ranks``.

    A quaternion core multiplied along every mode by real Gaussian factors;
    with ``pure`` the core (and thus the result) has zero real part.
    """
    shape = tuple(int(n) for n in shape)
    ranks = tuple(int(r) for r in ranks)
    if len(shape) != len(ranks):
        raise ValueError("shape and ranks must have the same length")
    total = int(np.prod(shape))
    for k, (n, r) in enumerate(zip(shape, ranks)):
        if not 1 <= r <= min(n, total // n):
            raise ValueError(f"rank {r} for mode {k + 1} exceeds the bound for shape {shape}")
    rng = np.random.default_rng(rng)
    core = rng.standard_normal((4, *ranks))
    if pure:
        core[0] = 0.0
    out = core
    for k, (n, r) in enumerate(zip(shape, ranks)):
        A = rng.standard_normal((n, r))
        out = np.moveaxis(np.tensordot(A, out, axes=([1], [k + 1])), 0, k + 1)
    return QuaternionTensor._wrap(np.ascontiguousarray(out))
