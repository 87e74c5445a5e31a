"""PSNR, SSIM and frame-averaged SSIM for recovered media."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .arrays import QuaternionTensor


@dataclass(frozen=True)
class MetricConfig:
    """``peakval`` is the dynamic range L; SSIM uses a Gaussian window."""

    peakval: float = 255.0
    ssim_window: int = 11
    ssim_sigma: float = 1.5

    def __post_init__(self):
        if not self.peakval > 0:
            raise ValueError("peakval must be positive")
        if self.ssim_window < 3 or self.ssim_window % 2 == 0:
            raise ValueError("ssim_window must be odd and at least 3")
        if not self.ssim_sigma > 0:
            raise ValueError("ssim_sigma must be positive")

    @property
    def C1(self) -> float:
        return (0.01 * self.peakval) ** 2

    @property
    def C2(self) -> float:
        return (0.03 * self.peakval) ** 2


DEFAULT = MetricConfig()


def _pixels(x) -> np.ndarray:
    if isinstance(x, QuaternionTensor):
        # imaginary planes carry the color channels
        return np.moveaxis(x.components[1:], 0, 2)
    return np.asarray(getattr(x, "pixels", x), dtype=np.float64)


def _pair(X, T):
    x, t = _pixels(X), _pixels(T)
    if x.shape != t.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {t.shape}")
    return x, t


def psnr(X, T, cfg: MetricConfig = DEFAULT) -> float:
    """``10 log10(peak^2 / MSE)`` over every scalar; ``inf`` when identical."""
    x, t = _pair(X, T)
    mse = float(np.mean((x - t) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(cfg.peakval ** 2 / mse)


def ssim_map(x: np.ndarray, t: np.ndarray, cfg: MetricConfig = DEFAULT) -> np.ndarray:
    """Local SSIM of two single-channel images (reflective borders)."""
    truncate = (cfg.ssim_window // 2) / cfg.ssim_sigma

    def blur(a):
        return gaussian_filter(a, cfg.ssim_sigma, mode="reflect", truncate=truncate)

    mu_x, mu_t = blur(x), blur(t)
    var_x = blur(x * x) - mu_x ** 2
    var_t = blur(t * t) - mu_t ** 2
    cov = blur(x * t) - mu_x * mu_t
    num = (2 * mu_t * mu_x + cfg.C1) * (2 * cov + cfg.C2)
    den = (mu_t ** 2 + mu_x ** 2 + cfg.C1) * (var_t + var_x + cfg.C2)
    return num / den


def ssim(X, T, cfg: MetricConfig = DEFAULT) -> float:
    """Mean SSIM of an RGB image pair: per-channel maps, averaged over pixels then channels."""
    x, t = _pair(X, T)
    if x.ndim == 2:
        x, t = x[..., None], t[..., None]
    if x.ndim != 3:
        raise ValueError(f"ssim expects (H, W) or (H, W, C) images, got {x.shape}")
    if min(x.shape[:2]) < cfg.ssim_window:
        raise ValueError(
            f"image {x.shape[:2]} is smaller than the {cfg.ssim_window}x{cfg.ssim_window} window")
    return float(np.mean([ssim_map(x[..., c], t[..., c], cfg).mean()
                          for c in range(x.shape[2])]))


def assim(X, T, cfg: MetricConfig = DEFAULT) -> float:
    """SSIM averaged over frames of ``(H, W, 3, T)`` videos."""
    x, t = _pair(X, T)
    if x.ndim != 4:
        raise ValueError(f"assim expects (H, W, 3, T) videos, got {x.shape}")
    return float(np.mean([ssim(x[..., k], t[..., k], cfg) for k in range(x.shape[3])]))


def frame_ssims(X, T, cfg: MetricConfig = DEFAULT) -> list[float]:
    x, t = _pair(X, T)
    return [ssim(x[..., k], t[..., k], cfg) for k in range(x.shape[3])]
