import logging
import math
from functools import lru_cache
from typing import Tuple, Union
import numpy as np
from core.errors import InvalidInputError, PhysicalContactError
from models.dataset import SPECTRUM_LEN, MScanDataset, RawSpectrum
from models.needle import ForceProfile, NeedleModel, pixel_wavenumbers
from utils.utils import rng_stream


logger = logging.getLogger(__name__)

DRIFT_LIMIT = 0.1

Force = Union[float, np.ndarray]


def force_to_displacement(force: Force, model: NeedleModel) -> Force:
    """Compression of the epoxy spring under axial force, validated input."""
    f = np.asarray(force, dtype=np.float64)
    if not np.all(np.isfinite(f)):
        raise InvalidInputError("force must be finite")
    if np.any(f < 0):
        raise InvalidInputError("force must be >= 0 N")

    d = np.asarray(model.compression(f))
    return float(d) if d.ndim == 0 else d


@lru_cache(maxsize=32)
def _wavenumbers(coeffs: Tuple[float, ...]) -> np.ndarray:
    k = pixel_wavenumbers(list(coeffs))
    k.flags.writeable = False
    return k


def wavenumbers(model: NeedleModel) -> np.ndarray:
    """Wavenumber seen by each detector pixel, rad/m."""
    return _wavenumbers(tuple(model.chirp_coeffs))


def source_envelope(model: NeedleModel) -> np.ndarray:
    """Gaussian source spectrum S(k_i) per pixel, unit peak."""
    k = wavenumbers(model)
    return np.exp(-0.5 * ((k - model.source_center) / model.source_bandwidth) ** 2)


def drift_factor(scan_index: int, drift_rate: float) -> float:
    return 1.0 + min(max(drift_rate * scan_index, -DRIFT_LIMIT), DRIFT_LIMIT)


def reference_spectrum(model: NeedleModel, scan_index: int = 0) -> RawSpectrum:
    """Fringe-free DC part of the interferogram (what a background scan measures)."""
    r = model.reflectivity
    return source_envelope(model) * drift_factor(scan_index, model.drift_rate) * (1.0 + r * r)


def synthesize_spectrum(displacement: float, model: NeedleModel, scan_index: int,
                        rng: np.random.Generator) -> RawSpectrum:
    """
    Two-beam spectral interferogram of the ferrule/piston cavity:
    I_i = S(k_i) * drift * (1 + r^2 + 2r cos(2 k_i (gap - d))) + noise.
    """
    if not math.isfinite(displacement) or displacement < 0:
        raise InvalidInputError(f"displacement must be finite and >= 0, got {displacement}")
    if displacement >= model.rest_gap:
        raise PhysicalContactError(
            f"displacement {displacement:.3e} m reaches rest gap {model.rest_gap:.3e} m")

    k = wavenumbers(model)
    r = model.reflectivity
    path = model.rest_gap - displacement
    fringe = 1.0 + r * r + 2.0 * r * np.cos(2.0 * k * path)
    drift = drift_factor(scan_index, model.drift_rate)
    noise = rng.normal(0.0, model.noise_sigma, SPECTRUM_LEN)
    return source_envelope(model) * drift * fringe + noise


def fringe_bin(displacement: Force, model: NeedleModel) -> Force:
    """
    Depth bin where a dechirped fringe of this displacement peaks:
    2 * (gap - d) * N * dk / (2 pi), dk the wavenumber step of the uniform grid.
    """
    k = wavenumbers(model)
    dk = (k[-1] - k[0]) / (SPECTRUM_LEN - 1)
    path = model.rest_gap - np.asarray(displacement, dtype=np.float64)
    bins = 2.0 * path * SPECTRUM_LEN * dk / (2.0 * np.pi)
    return float(bins) if bins.ndim == 0 else bins


def generate_dataset(profile: ForceProfile, model: NeedleModel, seed: int,
                     needle_id: str = "needle") -> MScanDataset:
    """
    One spectrum per profile sample. Scan i draws its noise from the
    (seed, i) stream, so the result does not depend on generation order.
    """
    forces = np.asarray(profile.samples, dtype=np.float64)
    if forces.size == 0:
        raise InvalidInputError("force profile is empty")

    displacements = np.atleast_1d(force_to_displacement(forces, model))
    scans = np.empty((forces.size, SPECTRUM_LEN), dtype=np.float32)
    for i, d in enumerate(displacements):
        try:
            scans[i] = synthesize_spectrum(float(d), model, i, rng_stream(seed, i))
        except PhysicalContactError as e:
            raise PhysicalContactError(e.detail, scan_index=i) from e

    logger.info("Generated %d scans for %s (seed %d, forces %.3f..%.3f N)",
                forces.size, needle_id, seed, forces.min(), forces.max())
    return MScanDataset(
        scans=scans,
        forces=forces,
        needle_id=needle_id,
        model_params=model,
        rng_seed=seed,
    )


def make_profile(kind: str, n: int, seed: int = 0, cycles: int = 10,
                 step_sigma: float = 0.01) -> ForceProfile:
    """
    Force profile of n samples in [0, 1] N.
    ramp: 0 -> 1 N; triangle: `cycles` load/unload cycles starting at 0 N;
    sinusoid: raised cosine; random-walk: reflected Gaussian walk.
    """
    if n < 1:
        raise InvalidInputError("profile length must be >= 1")
    t = np.linspace(0.0, 1.0, n)
    if kind == "ramp":
        samples = t
    elif kind == "triangle":
        phase = np.mod(t * cycles, 1.0)
        samples = 1.0 - np.abs(2.0 * phase - 1.0)
    elif kind == "sinusoid":
        samples = 0.5 * (1.0 - np.cos(2.0 * np.pi * cycles * t))
    elif kind == "random-walk":
        steps = rng_stream(seed, n).normal(0.0, step_sigma, n)
        walk = np.mod(0.5 + np.cumsum(steps), 2.0)
        samples = np.where(walk > 1.0, 2.0 - walk, walk)
    else:
        raise InvalidInputError(f"Unknown profile kind '{kind}'")
    return ForceProfile(samples=np.clip(samples, 0.0, 1.0).tolist(), description=kind)
