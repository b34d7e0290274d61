"""Conversions between VideoClip arrays and the (B, C, T, H, W) tensors
the networks consume. All torch math in this package is float64 on CPU."""

import numpy as np
import torch

from .data import VideoClip


def clip_to_tensor(clip: VideoClip) -> torch.Tensor:
    """Unit-range clip -> (1, C, T, H, W) float64 tensor."""
    frames = clip.to_unit().frames  # (T, H, W, C)
    return torch.from_numpy(np.ascontiguousarray(frames.transpose(3, 0, 1, 2)))[None]


def tensor_to_clip(x: torch.Tensor, frame_rate: float = 25.0) -> VideoClip:
    """(1, C, T, H, W) tensor -> unit-range clip, clamped to [0, 1]."""
    arr = x.detach().clamp(0.0, 1.0).squeeze(0).permute(1, 2, 3, 0).numpy()
    return VideoClip(np.ascontiguousarray(arr), "unit", frame_rate)


def as_video_tensor(x) -> torch.Tensor:
    """Accept a VideoClip, (T, H, W, C) array, or (B, C, T, H, W) tensor."""
    if isinstance(x, VideoClip):
        return clip_to_tensor(x)
    if isinstance(x, torch.Tensor):
        if x.ndim != 5:
            raise ValueError(f"expected (B, C, T, H, W) tensor, got shape {tuple(x.shape)}")
        return x.to(torch.float64)
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 4:
        raise ValueError(f"expected (T, H, W, C) array, got shape {arr.shape}")
    return torch.from_numpy(np.ascontiguousarray(arr.transpose(3, 0, 1, 2)))[None]
