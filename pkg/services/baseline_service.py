import logging
import numpy as np
from pydantic import BaseModel
from core.errors import DegenerateFitError, InvalidInputError
from models.dataset import MScanDataset
from models.recon import ReconConfig
from utils.metrics import mae
from services.recon_service import peak_trajectory, reconstruct_mscan
from utils.utils import split_indices


logger = logging.getLogger(__name__)


class LinearBaseline(BaseModel):
    """force = slope * depth + intercept"""
    slope: float
    intercept: float

    def predict(self, depths) -> np.ndarray:
        return self.slope * np.asarray(depths, dtype=np.float64) + self.intercept


class BaselineResult(BaseModel):
    fit: LinearBaseline
    val_mae_mN: float
    n_train: int
    n_val: int
    skipped: int


def fit_linear_baseline(depths, forces) -> LinearBaseline:
    """Ordinary least squares line through (depth, force) pairs."""
    depths = np.asarray(depths, dtype=np.float64)
    forces = np.asarray(forces, dtype=np.float64)
    if depths.shape != forces.shape or depths.size < 2:
        raise InvalidInputError("need at least 2 (depth, force) pairs of equal length")
    if np.ptp(depths) == 0.0:
        raise DegenerateFitError("all depths are identical")
    slope, intercept = np.polyfit(depths, forces, 1)
    return LinearBaseline(slope=float(slope), intercept=float(intercept))


def evaluate_baseline(dataset: MScanDataset, cfg: ReconConfig, seed: int = 0,
                      val_fraction: float = 0.2, skip_settling: bool = True) -> BaselineResult:
    """
    Peak tracking + linear fit on the training split, MAE on the hold-out split.
    Accepts raw spectra (reconstructed here) or A-scans. Scans inside the DC
    estimator's settling window and scans without a peak are left out.
    """
    if dataset.representation == "raw":
        ascans = reconstruct_mscan(dataset, cfg)
    else:
        ascans = dataset.scans
    depths = peak_trajectory(ascans)

    usable = np.isfinite(depths)
    if skip_settling:
        usable[: cfg.settle_scans] = False
    skipped = int((~usable).sum())

    train, val = split_indices(dataset.n_scans, val_fraction, seed)
    train = train[usable[train]]
    val = val[usable[val]]
    if val.size == 0:
        raise InvalidInputError("no usable validation scans for the baseline")

    fit = fit_linear_baseline(depths[train], dataset.forces[train])
    val_mae = mae(fit.predict(depths[val]), dataset.forces[val])
    logger.info("Linear baseline on %s: slope %.4g N/bin, val MAE %.3f mN (%d skipped)",
                dataset.needle_id, fit.slope, val_mae, skipped)
    return BaselineResult(fit=fit, val_mae_mN=val_mae, n_train=int(train.size),
                          n_val=int(val.size), skipped=skipped)
