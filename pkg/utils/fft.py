from functools import lru_cache
import numpy as np
from core.errors import UnsupportedLengthError


@lru_cache(maxsize=16)
def bit_reversal_permutation(n: int) -> np.ndarray:
    """Index permutation that puts a length-n input in bit reversed order."""
    stages = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for bit in range(stages):
        rev |= ((idx >> bit) & 1) << (stages - 1 - bit)
    return rev


@lru_cache(maxsize=32)
def _twiddles(size: int) -> np.ndarray:
    return np.exp(-2j * np.pi * np.arange(size // 2) / size)


def fft(x: np.ndarray) -> np.ndarray:
    """
    Forward DFT along the last axis, unnormalized.
    Iterative radix-2 decimation in time; leading axes are transformed
    independently, so a (N_t, 1024) block of scans goes through in one call.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if n < 1 or n & (n - 1):
        raise UnsupportedLengthError(f"FFT length must be a power of two, got {n}")

    out = x[..., bit_reversal_permutation(n)].astype(np.complex128)
    lead = out.shape[:-1]
    size = 2
    while size <= n:
        half = size // 2
        blocks = out.reshape(*lead, n // size, size)
        even = blocks[..., :half].copy()
        odd = blocks[..., half:] * _twiddles(size)
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
        size *= 2
    return out
