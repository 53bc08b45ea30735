import numpy as np
from core.errors import InvalidInputError


def mae(pred, target) -> float:
    """Mean absolute error in mN for forces given in N."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if pred.size == 0 or target.size == 0:
        raise InvalidInputError("mae needs at least one prediction")
    if pred.shape != target.shape:
        raise InvalidInputError(f"mae: {pred.size} predictions for {target.size} targets")
    return 1000.0 * float(np.mean(np.abs(pred - target)))


def relative_difference(mae_raw: float, mae_recon: float) -> float:
    """(recon - raw) / recon; positive when raw input gives the lower error."""
    if mae_recon == 0:
        raise InvalidInputError("relative difference undefined for zero reconstructed MAE")
    return (mae_recon - mae_raw) / mae_recon
