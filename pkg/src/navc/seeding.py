"""Deterministic seed derivation for every random draw in the pipeline.

All randomness (corpus content, crop offsets, batch order, quantization
noise, weight init) flows through `derive_seed`, so a run is a pure
function of the user-facing seeds.
"""

import hashlib

import numpy as np
import torch

_U63 = (1 << 63) - 1


def derive_seed(*parts) -> int:
    """Hash a tuple of ints/strings into a stable 63-bit seed."""
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "little") & _U63


def torch_generator(*parts) -> torch.Generator:
    gen = torch.Generator()
    gen.manual_seed(derive_seed(*parts))
    return gen


def numpy_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))


def uniform_noise(shape, *parts) -> torch.Tensor:
    """Uniform(-0.5, 0.5) float64 noise keyed by the given seed parts.

    The draw order over tensor entries is fixed, so each position's noise
    is a deterministic function of (parts, position).
    """
    gen = torch_generator(*parts)
    return torch.rand(shape, generator=gen, dtype=torch.float64) - 0.5
