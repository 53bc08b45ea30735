import hashlib
import os
import platform
import numpy as np


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """
    Independent generator for (seed, *keys). Streams do not depend on the
    order in which they are requested, so work split across workers
    reproduces the sequential result.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def array_hash(*arrays: np.ndarray) -> str:
    digest = hashlib.sha256()
    for arr in arrays:
        arr = np.ascontiguousarray(arr)
        digest.update(str(arr.dtype).encode())
        digest.update(str(arr.shape).encode())
        digest.update(arr.tobytes())
    return digest.hexdigest()[:16]


def host_info() -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
        "system": f"{platform.system()} {platform.release()}",
        "python": platform.python_version(),
        "numpy": np.__version__,
        "logical_cores": str(os.cpu_count() or 1),
        "precision": "float64",
    }


def split_indices(n: int, val_fraction: float, seed: int):
    """
    Uniform random train/validation split over scan indices.
    Returns sorted (train, val) index arrays; they are disjoint and cover 0..n-1.
    """
    perm = rng_stream(seed, 0).permutation(n)
    n_val = int(round(n * val_fraction))
    n_val = min(max(n_val, 1), n - 1)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])
