"""Distortion terms and quality metrics.

Differentiable losses (pixel, perceptual, weighted total, rate-distortion
objective) run on torch tensors; PSNR and MS-SSIM are evaluation metrics
computed in numpy.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import torch
from scipy.ndimage import correlate1d
from torch import nn

from .data import VideoClip
from .errors import ConfigError, ShapeError
from .seeding import torch_generator
from .tensors import as_video_tensor

MSSSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
MSSSIM_WINDOW = 11
MSSSIM_SIGMA = 1.5
MSSSIM_K1 = 0.01
MSSSIM_K2 = 0.03


@dataclass(frozen=True)
class LossWeights:
    """Scalars weighting the total distortion and the rate term."""

    alpha: float = 0.005
    gamma: float = 0.1
    rho: float = 0.0001
    beta: float = 0.3

    def __post_init__(self):
        for name in ("alpha", "gamma", "rho", "beta"):
            if getattr(self, name) < 0:
                raise ConfigError(f"loss weight {name} must be >= 0")


# ---------------------------------------------------------------------------
# pixel metrics


def pixel_distance(x, x_hat, norm: str = "l2") -> torch.Tensor:
    """Mean absolute (l1) or mean squared (l2) difference over all entries."""
    a, b = as_video_tensor(x), as_video_tensor(x_hat)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")
    diff = a - b
    if norm == "l1":
        return diff.abs().mean()
    if norm == "l2":
        return diff.pow(2).mean()
    raise ConfigError(f"unknown pixel norm {norm!r}")


def psnr(x, x_hat) -> float:
    """PSNR in dB for unit-range clips; +inf when the clips are identical."""
    a = np.asarray(x.frames if isinstance(x, VideoClip) else x, dtype=np.float64)
    b = np.asarray(x_hat.frames if isinstance(x_hat, VideoClip) else x_hat, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


# ---------------------------------------------------------------------------
# MS-SSIM


def _gaussian_window(size: int = MSSSIM_WINDOW, sigma: float = MSSSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    w = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return w / w.sum()


def _window_stats(img: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Separable windowed mean over valid positions of a 2-D image."""
    out = correlate1d(img, window, axis=0, mode="constant")
    out = correlate1d(out, window, axis=1, mode="constant")
    r = len(window) // 2
    return out[r:-r, r:-r]


def _ssim_terms(a: np.ndarray, b: np.ndarray, window: np.ndarray):
    """Mean luminance term and mean contrast-structure term on one channel."""
    c1 = MSSSIM_K1**2
    c2 = MSSSIM_K2**2
    mu_a = _window_stats(a, window)
    mu_b = _window_stats(b, window)
    var_a = _window_stats(a * a, window) - mu_a**2
    var_b = _window_stats(b * b, window) - mu_b**2
    cov = _window_stats(a * b, window) - mu_a * mu_b
    lum = (2 * mu_a * mu_b + c1) / (mu_a**2 + mu_b**2 + c1)
    cs = (2 * cov + c2) / (var_a + var_b + c2)
    # Negative covariances can push cs slightly below zero; clamp so the
    # weighted geometric mean stays real.
    return float(lum.mean()), float(np.maximum(cs, 0.0).mean())


def _downsample2(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    h2, w2 = h - h % 2, w - w % 2
    return img[:h2, :w2].reshape(h2 // 2, 2, w2 // 2, 2).mean(axis=(1, 3))


def feasible_msssim_scales(height: int, width: int) -> int:
    """Largest scale count (capped at 5) with frames still >= the window."""
    scales = 0
    size = min(height, width)
    while scales < len(MSSSIM_WEIGHTS) and size >= MSSSIM_WINDOW:
        scales += 1
        size //= 2
    return scales


def ms_ssim_detailed(x, x_hat):
    """MS-SSIM per frame (channel-averaged), averaged over frames.

    Uses the standard 5-scale weights, 11x11 Gaussian window (sigma 1.5),
    K1=0.01, K2=0.03 on unit-range input. When the frames are too small
    for 5 dyadic scales, the maximal feasible count is used with the
    leading weights renormalized. Returns (value, scales_used).
    """
    a = np.asarray(x.frames if isinstance(x, VideoClip) else x, dtype=np.float64)
    b = np.asarray(x_hat.frames if isinstance(x_hat, VideoClip) else x_hat, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    t, h, w, c = a.shape
    scales = feasible_msssim_scales(h, w)
    if scales == 0:
        raise ShapeError(f"frames {h}x{w} smaller than the {MSSSIM_WINDOW}px window")
    weights = np.asarray(MSSSIM_WEIGHTS[:scales])
    weights = weights / weights.sum()
    window = _gaussian_window()

    frame_scores = []
    for ti in range(t):
        channel_scores = []
        for ci in range(c):
            pa, pb = a[ti, :, :, ci], b[ti, :, :, ci]
            score = 1.0
            for level in range(scales):
                lum, cs = _ssim_terms(pa, pb, window)
                if level < scales - 1:
                    score *= cs ** weights[level]
                    pa, pb = _downsample2(pa), _downsample2(pb)
                else:
                    score *= (lum * cs) ** weights[level]
            channel_scores.append(score)
        frame_scores.append(np.mean(channel_scores))
    return float(np.mean(frame_scores)), scales


def ms_ssim(x, x_hat) -> float:
    return ms_ssim_detailed(x, x_hat)[0]


# ---------------------------------------------------------------------------
# perceptual loss


@dataclass(frozen=True)
class FeatureExtractorConfig:
    """Conv-stack recipe mirroring a VGG-19 prefix.

    Stages of 3x3 convs with ReLU, 2x2 max-pool between stages; the
    feature tap is the activation of conv ``tap_conv`` in ``tap_stage``
    (1-indexed). The default taps the 4th conv of the 5th stage, i.e.
    the last conv before the 5th pool would run.
    """

    stage_widths: tuple = (8, 16, 32, 64, 64)
    convs_per_stage: tuple = (2, 2, 4, 4, 4)
    tap_stage: int = 5
    tap_conv: int = 4
    init_seed: int = 0

    def __post_init__(self):
        if len(self.stage_widths) != len(self.convs_per_stage):
            raise ConfigError("stage_widths and convs_per_stage must have equal length")
        if not (1 <= self.tap_stage <= len(self.stage_widths)):
            raise ConfigError("tap_stage out of range")
        if not (1 <= self.tap_conv <= self.convs_per_stage[self.tap_stage - 1]):
            raise ConfigError("tap_conv out of range")

    @classmethod
    def paper_shape(cls) -> "FeatureExtractorConfig":
        """Full-width stack; weight files trained elsewhere drop in here."""
        return cls(stage_widths=(64, 128, 256, 512, 512))

    @property
    def min_input(self) -> int:
        return 2 ** (self.tap_stage - 1)


class FeatureExtractor(nn.Module):
    """Frozen convolutional feature stack used as a perceptual reference.

    Weights come from a fixed seed by default, or from an .npz file whose
    entries match ``state_dict`` names. They never receive gradients.
    """

    def __init__(self, config: FeatureExtractorConfig | None = None, weights_path=None):
        super().__init__()
        self.config = config or FeatureExtractorConfig()
        layers = []
        in_ch = 3
        for stage, (width, n_convs) in enumerate(
            zip(self.config.stage_widths, self.config.convs_per_stage), start=1
        ):
            for conv in range(1, n_convs + 1):
                layers.append(nn.Conv2d(in_ch, width, 3, padding=1).double())
                layers.append(nn.ReLU())
                in_ch = width
                if stage == self.config.tap_stage and conv == self.config.tap_conv:
                    self.stack = nn.Sequential(*layers)
                    self._finalize(weights_path)
                    return
            layers.append(nn.MaxPool2d(2))
        raise AssertionError("tap position not reached")

    def _finalize(self, weights_path):
        gen = torch_generator("feature-extractor", self.config.init_seed)
        with torch.no_grad():
            for name, p in sorted(self.named_parameters()):
                if p.dim() > 1:
                    fan_in = p[0].numel()
                    bound = math.sqrt(6.0 / fan_in)
                    p.uniform_(-bound, bound, generator=gen)
                else:
                    p.zero_()
        if weights_path is not None:
            arrays = np.load(weights_path)
            state = {k: torch.from_numpy(arrays[k]).double() for k in arrays.files}
            self.load_state_dict(state)
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        """(N, 3, H, W) frames -> (N, F, h, w) features."""
        if min(frames.shape[-2:]) < self.config.min_input:
            raise ShapeError(
                f"frames {tuple(frames.shape[-2:])} below extractor minimum "
                f"{self.config.min_input}px"
            )
        return self.stack(frames)


def perceptual_loss(x, x_hat, extractor: FeatureExtractor) -> torch.Tensor:
    """Mean over frames of the mean-l1 feature distance, framewise."""
    a, b = as_video_tensor(x), as_video_tensor(x_hat)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")
    bb, c, t, h, w = a.shape
    fa = extractor(a.permute(0, 2, 1, 3, 4).reshape(bb * t, c, h, w))
    fb = extractor(b.permute(0, 2, 1, 3, 4).reshape(bb * t, c, h, w))
    return (fa - fb).abs().mean()


# ---------------------------------------------------------------------------
# composite objectives


@dataclass
class LossBreakdown:
    """Per-step named scalars; weighted contributions sum to ``total``."""

    pixel: float = 0.0
    perceptual: float = 0.0
    adversarial: float = 0.0
    contrib_pixel: float = 0.0
    contrib_perceptual: float = 0.0
    contrib_adversarial: float = 0.0
    rate_bpp: float = 0.0
    total: float = 0.0
    extras: dict = field(default_factory=dict)


def compose_distortion(pixel, perceptual, adv_term, weights: LossWeights):
    """Weighted sum alpha*pixel + gamma*perceptual + rho*adv_term.

    Accepts tensors (gradients flow) or plain floats. Returns
    (total, LossBreakdown); the breakdown records raw terms and their
    weighted contributions, which sum exactly to the total.
    """
    pixel = torch.as_tensor(pixel, dtype=torch.float64)
    perceptual = torch.as_tensor(perceptual, dtype=torch.float64)
    adv_term = torch.as_tensor(adv_term, dtype=torch.float64)
    cp = weights.alpha * pixel
    cq = weights.gamma * perceptual
    ca = weights.rho * adv_term
    total = cp + cq + ca
    breakdown = LossBreakdown(
        pixel=float(pixel),
        perceptual=float(perceptual),
        adversarial=float(adv_term),
        contrib_pixel=float(cp),
        contrib_perceptual=float(cq),
        contrib_adversarial=float(ca),
        total=float(total),
    )
    return total, breakdown


def total_distortion(
    x,
    x_hat,
    adv_term,
    weights: LossWeights,
    extractor: FeatureExtractor | None = None,
    pixel_norm: str = "l2",
):
    """Full distortion on a clip pair.

    ``adv_term`` is the factorized generator objective already evaluated
    on the reconstruction (for least squares, the mean squared gap of
    discriminator scores from 1). The perceptual term needs ``extractor``
    unless gamma is zero. Returns (scalar tensor, LossBreakdown).
    """
    pixel = pixel_distance(x, x_hat, pixel_norm)
    if weights.gamma > 0:
        if extractor is None:
            raise ConfigError("gamma > 0 requires a feature extractor")
        perc = perceptual_loss(x, x_hat, extractor)
    else:
        perc = pixel.new_zeros(())
    return compose_distortion(pixel, perc, adv_term, weights)


def rd_objective(d, rate_bpp, beta: float):
    """Rate-distortion trade-off: distortion plus beta times bits-per-pixel.

    The rate enters normalized per pixel so a given beta means the same
    trade-off at any resolution.
    """
    return d + beta * rate_bpp
