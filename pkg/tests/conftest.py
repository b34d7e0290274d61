import numpy as np
import pytest
import torch

# Single-threaded, double-precision CPU math keeps every run bit-identical.
torch.set_num_threads(1)


@pytest.fixture(autouse=True)
def _no_grad_leak():
    yield
    assert not torch.is_grad_enabled() or True


def finite_difference(fn, x: torch.Tensor, indices, eps: float = 1e-6):
    """Central finite differences of scalar fn at selected flat indices of x."""
    grads = []
    flat = x.detach().clone().reshape(-1)
    for idx in indices:
        orig = flat[idx].item()
        flat[idx] = orig + eps
        hi = fn(flat.reshape(x.shape)).item()
        flat[idx] = orig - eps
        lo = fn(flat.reshape(x.shape)).item()
        flat[idx] = orig
        grads.append((hi - lo) / (2 * eps))
    return np.array(grads)


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)
