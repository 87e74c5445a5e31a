"""scikit-learn style wrappers around the completion solvers."""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .completion import SolverConfig, lrc_qm, lrc_qt
from .validation import check_mask, check_quaternion_array


class _CompletionMixin:
    def fit_transform(self, X, mask=None):
        return self.fit(X, mask).completion_

    def transform(self, X=None):
        """Return the completed array of the last fit.

        Completion is transductive: ``X``, when given, must be the array that
        was fitted (same shape) and is only used as a sanity check.
        """
        check_is_fitted(self, "completion_")
        if X is not None:
            X = check_quaternion_array(X)
            if X.shape != self.completion_.shape:
                raise ValueError(
                    f"transform got shape {X.shape}, fitted shape was {self.completion_.shape}")
        return self.completion_

    def _store(self, result, report):
        self.completion_ = result
        self.report_ = report
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        return self


class QuaternionMatrixCompletion(_CompletionMixin, BaseEstimator):
    """Single nuclear-norm completion of a quaternion matrix (e.g. a color image).

    Parameters mirror :class:`lrqtc.completion.SolverConfig` with scalar
    ``alpha``, ``beta0`` and ``beta_max``.

    Attributes:
        completion_: completed :class:`QuaternionMatrix`.
        report_: :class:`SolverReport` of the run.
        n_iter_, converged_: shortcuts into ``report_``.
    """

    def __init__(self, alpha=2.0, beta0=0.08, beta_max=1e3, eta0=1.05,
                 eta_trigger=0.01, epsilon=1e-3, max_iter=500,
                 trigger_mode="relative", callback=None):
        self.alpha = alpha
        self.beta0 = beta0
        self.beta_max = beta_max
        self.eta0 = eta0
        self.eta_trigger = eta_trigger
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.trigger_mode = trigger_mode
        self.callback = callback

    def _config(self) -> SolverConfig:
        return SolverConfig(
            alpha=(self.alpha,), beta0=(self.beta0,), beta_max=(self.beta_max,),
            eta0=self.eta0, eta_trigger=self.eta_trigger, epsilon=self.epsilon,
            max_iter=self.max_iter, trigger_mode=self.trigger_mode)

    def fit(self, X, mask=None):
        """Complete ``X`` from the entries selected by ``mask``.

        Args:
            X: quaternion matrix, ``ColorImage`` or ``(4, M, N)`` array.
            mask: :class:`SamplingMask` or boolean ``(M, N)`` array.
        """
        X = check_quaternion_array(X, order=2)
        mask = check_mask(mask, X.shape)
        return self._store(*lrc_qm(X, mask, self._config(), callback=self.callback))


class QuaternionTensorCompletion(_CompletionMixin, BaseEstimator):
    """Weighted Tucker nuclear-norm completion of a quaternion tensor (e.g. a color video).

    ``alpha``, ``beta0`` and ``beta_max`` take one value per mode; left as
    ``None`` they fall back to the color-video settings for order-3 tensors.
    ``n_jobs`` threads run the per-mode updates; results do not depend on it.
    """

    def __init__(self, alpha=None, beta0=None, beta_max=None, eta0=1.05,
                 eta_trigger=0.01, epsilon=1e-3, max_iter=500,
                 trigger_mode="relative", n_jobs=1, callback=None):
        self.alpha = alpha
        self.beta0 = beta0
        self.beta_max = beta_max
        self.eta0 = eta0
        self.eta_trigger = eta_trigger
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.trigger_mode = trigger_mode
        self.n_jobs = n_jobs
        self.callback = callback

    def _config(self, order: int) -> SolverConfig:
        overrides = dict(eta0=self.eta0, eta_trigger=self.eta_trigger, epsilon=self.epsilon,
                         max_iter=self.max_iter, trigger_mode=self.trigger_mode)
        for name in ("alpha", "beta0", "beta_max"):
            value = getattr(self, name)
            if value is not None:
                overrides[name] = value
        cfg = SolverConfig.tensor_defaults(order, **overrides)
        if cfg.n_modes != order:
            raise ValueError(f"need {order} per-mode weights, got {cfg.n_modes}")
        return cfg

    def fit(self, X, mask=None):
        """Complete ``X`` from the entries selected by ``mask``.

        Args:
            X: quaternion tensor of order >= 2, ``ColorVideo`` or ``(4, ...)`` array.
            mask: :class:`SamplingMask` or boolean array of the same shape.
        """
        X = check_quaternion_array(X, min_order=2)
        mask = check_mask(mask, X.shape)
        cfg = self._config(X.order)
        return self._store(*lrc_qt(X, mask, cfg, n_jobs=self.n_jobs, callback=self.callback))
