import logging
import time
from pathlib import Path
from typing import Optional, Tuple
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from core.errors import InvalidInputError, NonFiniteError, RepresentationMismatchError
from core.storage import read_sidecar, read_weights, write_sidecar, write_weights
from engine.ops import mse_loss
from engine.optim import Adam
from engine.tensor import Tensor, no_grad
from models.dataset import MScanDataset
from models.training import ArchSpec, EpochRecord, TrainConfig, TrainHistory
from services.network_service import ResNet1D, build_model
from utils.metrics import mae
from utils.utils import rng_stream, split_indices


logger = logging.getLogger(__name__)

STD_FLOOR = 1e-12


class Normalizer(BaseModel):
    """
    Input standardization fitted on the training split only.
    per_position: mean/std per sample position.
    log_global: log1p, then one mean/std over all positions.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    policy: str
    mean: np.ndarray
    std: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.policy == "log_global":
            x = np.log1p(np.maximum(x, 0.0))
        return (x - self.mean) / self.std


def fit_normalizer(x_train: np.ndarray, policy: str) -> Normalizer:
    x_train = np.asarray(x_train, dtype=np.float64)
    if policy == "per_position":
        mean = x_train.mean(axis=0)
        std = x_train.std(axis=0)
    elif policy == "log_global":
        logged = np.log1p(np.maximum(x_train, 0.0))
        mean = np.array([logged.mean()])
        std = np.array([logged.std()])
    else:
        raise InvalidInputError(f"Unknown normalization policy '{policy}'")
    std = np.where(std < STD_FLOOR, 1.0, std)
    return Normalizer(policy=policy, mean=mean, std=std)


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: ResNet1D
    history: TrainHistory
    normalizer: Normalizer
    train_idx: np.ndarray
    val_idx: np.ndarray


def check_representation(dataset: MScanDataset, spec: ArchSpec, cfg: Optional[TrainConfig] = None):
    if dataset.spectrum_len != spec.input_len:
        raise RepresentationMismatchError(
            f"{spec.variant} takes {spec.input_len}-sample inputs, dataset {dataset.needle_id} "
            f"holds {dataset.spectrum_len}-sample {dataset.representation} scans")
    if cfg is not None and cfg.representation != dataset.representation:
        raise RepresentationMismatchError(
            f"training config expects '{cfg.representation}' data, got '{dataset.representation}'")


def predict(model: ResNet1D, x_norm: np.ndarray, batch_size: int = 512) -> np.ndarray:
    """Forces (N) for normalized inputs (N, L), eval mode, no graph."""
    model.eval()
    preds = []
    with no_grad():
        for start in range(0, len(x_norm), batch_size):
            batch = x_norm[start:start + batch_size]
            preds.append(model(Tensor(batch[:, None, :])).data[:, 0])
    return np.concatenate(preds) if preds else np.empty(0)


def train(dataset: MScanDataset, spec: ArchSpec, cfg: TrainConfig, seed: int) -> TrainResult:
    """
    Seeded split, per-epoch shuffled mini-batches, Adam on MSE in N^2.
    Returns the parameters of the epoch with the best validation MAE.
    """
    check_representation(dataset, spec, cfg)
    if dataset.n_scans < 2 * cfg.batch_size:
        raise InvalidInputError(
            f"dataset of {dataset.n_scans} scans is smaller than 2 x batch size {cfg.batch_size}")

    train_idx, val_idx = split_indices(dataset.n_scans, cfg.val_fraction, seed)
    normalizer = fit_normalizer(dataset.scans[train_idx], cfg.normalization_policy)
    x = normalizer.transform(dataset.scans)
    y = dataset.forces

    model = build_model(spec, rng_stream(seed, 1))
    optimizer = Adam(model.named_parameters(), lr=cfg.learning_rate,
                     beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    shuffle_rng = rng_stream(seed, 2)

    history = TrainHistory(seed=seed)
    best_state = None
    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        model.train()
        order = train_idx[shuffle_rng.permutation(train_idx.size)]
        total, seen = 0.0, 0
        for start in range(0, order.size, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            if batch.size < 2:
                continue
            model.zero_grad()
            pred = model(Tensor(x[batch][:, None, :]))
            loss = mse_loss(pred, Tensor(y[batch][:, None]))
            if not np.isfinite(loss.data):
                raise NonFiniteError(f"loss became non-finite in epoch {epoch}")
            loss.backward()
            optimizer.step()
            total += loss.item() * batch.size
            seen += batch.size

        val_mae = mae(predict(model, x[val_idx], cfg.eval_batch_size), y[val_idx])
        record = EpochRecord(epoch=epoch, train_mse_N2=total / seen, val_mae_mN=val_mae,
                             seconds=time.perf_counter() - started)
        history.records.append(record)
        if history.best_val_mae_mN is None or val_mae < history.best_val_mae_mN:
            history.best_val_mae_mN = val_mae
            history.best_epoch = epoch
            best_state = model.state_dict()
        logger.info("%s %s seed %d epoch %d/%d: train MSE %.3e N^2, val MAE %.3f mN (%.1fs)",
                    dataset.needle_id, spec.variant, seed, epoch, cfg.epochs,
                    record.train_mse_N2, val_mae, record.seconds)

    model.load_state_dict(best_state)
    model.eval()
    return TrainResult(model=model, history=history, normalizer=normalizer,
                       train_idx=train_idx, val_idx=val_idx)


def history_frame(history: TrainHistory) -> pd.DataFrame:
    columns = ["epoch", "train_mse_N2", "val_mae_mN", "seconds"]
    return pd.DataFrame([r.model_dump() for r in history.records], columns=columns)


def write_history(path, history: TrainHistory) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    history_frame(history).to_csv(path, index=False, float_format="%.10g")
    return path


def save_checkpoint(path, result: TrainResult, spec: ArchSpec, cfg: TrainConfig, seed: int,
                    dataset_hash: str = "", config_hash: str = "") -> Path:
    """OCTW file with model state and normalizer, ArchSpec JSON sidecar next to it."""
    arrays = result.model.state_dict()
    arrays["normalizer.mean"] = result.normalizer.mean
    arrays["normalizer.std"] = result.normalizer.std
    path = write_weights(path, arrays)
    write_sidecar(path, {
        "arch": spec.model_dump(mode="json"),
        "train": cfg.model_dump(mode="json"),
        "seed": seed,
        "normalization": result.normalizer.policy,
        "best_epoch": result.history.best_epoch,
        "best_val_mae_mN": result.history.best_val_mae_mN,
        "dataset_hash": dataset_hash,
        "config_hash": config_hash,
        "split_policy": "uniform random over scans",
    })
    return path


def load_checkpoint(path) -> Tuple[ResNet1D, Normalizer, dict]:
    meta = read_sidecar(path)
    if meta is None:
        raise InvalidInputError(f"{path}: checkpoint sidecar missing")
    spec = ArchSpec(**meta["arch"])
    arrays = read_weights(path)
    normalizer = Normalizer(policy=meta["normalization"],
                            mean=arrays.pop("normalizer.mean"),
                            std=arrays.pop("normalizer.std"))
    model = build_model(spec, rng_stream(0))
    model.load_state_dict(arrays)
    model.eval()
    return model, normalizer, meta
