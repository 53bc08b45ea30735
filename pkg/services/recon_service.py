import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional
import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline
from scipy.signal import windows
from core.errors import ConfigurationError, InvalidInputError, NoPeakError, ShapeError, WorkbenchError
from models.dataset import ASCAN_LEN, SPECTRUM_LEN, AScan, ComplexSpectrum, MScanDataset, RawSpectrum
from models.needle import NeedleModel
from models.recon import DcState, ReconConfig
from services.simulation_service import reference_spectrum, wavenumbers
from utils.fft import fft


logger = logging.getLogger(__name__)

# Residual DC left by the moving average lives in the first bins.
PEAK_MIN_BIN = 3
PEAK_FLOOR = 1e-12

RECON_CHUNK = 2048


def chirp_table_from_model(model: NeedleModel) -> np.ndarray:
    """
    Fractional pixel positions whose wavenumbers are evenly spaced between
    the first and last pixel's wavenumber.
    """
    k = wavenumbers(model)
    target = np.linspace(k[0], k[-1], SPECTRUM_LEN)
    return np.interp(target, k, np.arange(SPECTRUM_LEN, dtype=np.float64))


def resolve_chirp_table(cfg: ReconConfig, model: Optional[NeedleModel] = None) -> np.ndarray:
    if isinstance(cfg.chirp_table, list):
        table = np.asarray(cfg.chirp_table, dtype=np.float64)
    elif cfg.chirp_table == "identity":
        table = np.arange(SPECTRUM_LEN, dtype=np.float64)
    else:
        if model is None:
            raise ConfigurationError("chirp_table 'needle' needs the needle model parameters")
        table = chirp_table_from_model(model)

    if table.shape != (SPECTRUM_LEN,):
        raise ConfigurationError(f"chirp_table must hold {SPECTRUM_LEN} positions")
    if not np.all(np.isfinite(table)) or not np.all(np.diff(table) > 0):
        raise ConfigurationError("chirp_table must be strictly increasing")
    return table


def resample(values: np.ndarray, positions: np.ndarray, kind: str = "linear") -> np.ndarray:
    """
    Samples `values` (indexed 0..n-1) at fractional positions.
    Positions outside [0, n-1] take the edge values.
    """
    values = np.asarray(values, dtype=np.float64)
    grid = np.arange(values.shape[-1], dtype=np.float64)
    positions = np.clip(positions, grid[0], grid[-1])
    if kind == "linear":
        if values.ndim == 1:
            return np.interp(positions, grid, values)
        return np.stack([np.interp(positions, grid, row) for row in values])
    return CubicSpline(grid, values, axis=-1)(positions)


def dechirp(raw: RawSpectrum, cfg: ReconConfig, model: Optional[NeedleModel] = None,
            table: Optional[np.ndarray] = None) -> RawSpectrum:
    """Step 1: resample detector pixels onto a wavenumber-uniform grid."""
    if table is None:
        table = resolve_chirp_table(cfg, model)
    elif not np.all(np.diff(table) > 0):
        raise ConfigurationError("chirp_table must be strictly increasing")
    if cfg.chirp_table == "identity":
        return np.array(raw, dtype=np.float64)
    return resample(raw, table, cfg.interpolation)


def init_dc_state(cfg: ReconConfig, first: RawSpectrum,
                  reference: Optional[RawSpectrum] = None) -> DcState:
    if cfg.dc_init == "first_scan":
        estimate = np.array(first, dtype=np.float64)
    elif cfg.dc_init == "zero":
        estimate = np.zeros_like(first, dtype=np.float64)
    else:
        if reference is None:
            raise ConfigurationError("dc_init 'reference' needs a reference spectrum")
        estimate = np.array(reference, dtype=np.float64)
    return DcState(estimate=estimate, count=0)


def update_and_subtract_dc(spectrum: RawSpectrum, state: DcState, cfg: ReconConfig,
                           reference: Optional[RawSpectrum] = None) -> RawSpectrum:
    """
    Steps 2-3: absorb the scan into the moving average, then subtract it.
    state <- (1 - d) * state + d * spectrum; returns spectrum - state.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if state.estimate is None:
        initial = init_dc_state(cfg, spectrum, reference)
        state.estimate = initial.estimate
    if state.estimate.shape != spectrum.shape:
        raise ShapeError(f"DC state shape {state.estimate.shape} != scan shape {spectrum.shape}")

    d = cfg.damping
    state.estimate = (1.0 - d) * state.estimate + d * spectrum
    state.count += 1
    return spectrum - state.estimate


@lru_cache(maxsize=8)
def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann window 0.5 * (1 - cos(2 pi i / (n - 1)))."""
    w = windows.hann(n, sym=True)
    w.flags.writeable = False
    return w


def apodize(spectrum: RawSpectrum) -> RawSpectrum:
    """Step 4."""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    return spectrum * hann_window(spectrum.shape[-1])


def fourier_transform(spectrum: RawSpectrum) -> ComplexSpectrum:
    """Step 5: unnormalized forward DFT (radix-2)."""
    return fft(spectrum)


def magnitude_ascan(spec: ComplexSpectrum) -> AScan:
    """Step 6: magnitude of the non-negative frequency half."""
    spec = np.asarray(spec)
    return np.abs(spec[..., : spec.shape[-1] // 2])


def reconstruct_mscan(dataset: MScanDataset, cfg: ReconConfig,
                      model: Optional[NeedleModel] = None,
                      reference: Optional[RawSpectrum] = None) -> np.ndarray:
    """
    Full reconstruction of one M-scan, (N_t, 1024) -> (N_t, 512).
    The moving-average pass runs in acquisition order with one DcState;
    the stateless stages run in chunks.
    """
    if dataset.spectrum_len != SPECTRUM_LEN:
        raise ShapeError(f"expected raw spectra of length {SPECTRUM_LEN}, got {dataset.spectrum_len}")
    model = model or dataset.model_params
    if cfg.dc_init == "reference" and reference is None:
        if model is None:
            raise ConfigurationError("dc_init 'reference' needs a reference spectrum or needle model")
        reference = reference_spectrum(model)
    table = resolve_chirp_table(cfg, model)

    state = DcState()
    ascans = np.empty((dataset.n_scans, ASCAN_LEN), dtype=np.float64)
    for start in range(0, dataset.n_scans, RECON_CHUNK):
        stop = min(start + RECON_CHUNK, dataset.n_scans)
        block = dechirp(dataset.scans[start:stop], cfg, table=table)
        for i in range(stop - start):
            try:
                block[i] = update_and_subtract_dc(block[i], state, cfg, reference)
            except WorkbenchError as e:
                raise type(e)(f"scan {start + i}: {e.detail}") from e
        ascans[start:stop] = magnitude_ascan(fourier_transform(apodize(block)))

    logger.info("Reconstructed %d scans of %s (d=%.3f, chirp=%s, dc_init=%s)",
                dataset.n_scans, dataset.needle_id, cfg.damping,
                cfg.chirp_table if isinstance(cfg.chirp_table, str) else "table", cfg.dc_init)
    return ascans


def reconstructed_dataset(dataset: MScanDataset, cfg: ReconConfig,
                          model: Optional[NeedleModel] = None) -> MScanDataset:
    """Raw dataset -> A-scan dataset with the same labels and metadata."""
    ascans = reconstruct_mscan(dataset, cfg, model)
    return MScanDataset(
        scans=ascans.astype(np.float32),
        forces=dataset.forces.copy(),
        needle_id=dataset.needle_id,
        model_params=dataset.model_params,
        rng_seed=dataset.rng_seed,
    )


def peak_displacement(ascan: AScan, min_bin: int = PEAK_MIN_BIN) -> float:
    """
    Fractional depth bin of the dominant peak at or beyond `min_bin`,
    refined by a parabola through the peak and its neighbours.
    """
    ascan = np.asarray(ascan, dtype=np.float64)
    search = ascan[min_bin:]
    if search.size == 0 or search.max() <= PEAK_FLOOR:
        raise NoPeakError("A-scan has no peak above the numeric floor")

    m = int(np.argmax(search)) + min_bin
    if m == 0 or m == ascan.size - 1:
        return float(m)
    alpha, beta, gamma = ascan[m - 1], ascan[m], ascan[m + 1]
    denom = alpha - 2.0 * beta + gamma
    if denom == 0.0:
        return float(m)
    return m + 0.5 * (alpha - gamma) / denom


def peak_trajectory(ascans: np.ndarray, min_bin: int = PEAK_MIN_BIN) -> np.ndarray:
    """Peak depth per scan; NaN where a scan has no peak."""
    depths = np.full(len(ascans), np.nan)
    for i, ascan in enumerate(ascans):
        try:
            depths[i] = peak_displacement(ascan, min_bin)
        except NoPeakError:
            logger.debug("scan %d has no peak", i)
    return depths


def export_mscan_excerpt(dataset: MScanDataset, cfg: ReconConfig, out_dir, start: int = 0,
                         count: int = 200, model: Optional[NeedleModel] = None) -> dict:
    """
    Plot-ready side-by-side view of `count` scans starting at `start`:
    raw.csv (1024 rows x count), recon.csv (512 rows x count) and trace.csv
    (force and peak depth per scan). The whole M-scan is reconstructed so the
    moving average has settled the same way it would in a full run.
    """
    if dataset.spectrum_len != SPECTRUM_LEN:
        raise ShapeError("M-scan export needs raw spectra")
    if start < 0 or count < 1 or start + count > dataset.n_scans:
        raise InvalidInputError(
            f"excerpt [{start}, {start + count}) outside the {dataset.n_scans}-scan M-scan")
    ascans = reconstruct_mscan(dataset, cfg, model)
    window = slice(start, start + count)
    columns = [f"scan_{i}" for i in range(start, start + count)]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"raw": out / "raw.csv", "recon": out / "recon.csv", "trace": out / "trace.csv"}
    pd.DataFrame(dataset.scans[window].T, columns=columns).to_csv(
        paths["raw"], index_label="pixel", float_format="%.6g")
    pd.DataFrame(ascans[window].T, columns=columns).to_csv(
        paths["recon"], index_label="depth_bin", float_format="%.6g")
    pd.DataFrame({
        "scan": np.arange(start, start + count),
        "force_N": dataset.forces[window],
        "peak_bin": peak_trajectory(ascans[window]),
    }).to_csv(paths["trace"], index=False, float_format="%.6g")
    logger.info("Exported scans %d..%d of %s to %s", start, start + count - 1, dataset.needle_id, out)
    return paths
