import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional
import numpy as np
import pandas as pd
import pydantic
import scipy
from pydantic import BaseModel, ConfigDict
from core.errors import InvalidInputError, MissingDatasetError
from engine.tensor import Tensor, no_grad
from models.dataset import MScanDataset, Representation
from models.experiment import ExperimentConfig
from models.report import REFERENCE_LATENCY_MS, REFERENCE_MAE_MN, EvalReport, LatencyStats
from models.training import ArchSpec, TrainConfig, Variant
from services.network_service import ResNet1D, build_model
from services.recon_service import reconstructed_dataset
from services.simulation_service import generate_dataset, make_profile
from services.training_service import check_representation, load_checkpoint, predict, train
from utils.metrics import mae, relative_difference
from utils.utils import array_hash, host_info, rng_stream, split_indices


logger = logging.getLogger(__name__)

MIN_BENCH_REPS = 30
SPREAD_LABEL = "standard deviation over seeds (ddof=1)"
SPLIT_POLICY = "uniform random over scans"

__all__ = ["mae", "relative_difference", "benchmark_inference", "evaluate_checkpoint",
           "run_experiment_matrix", "run_experiment", "write_reports"]


def benchmark_inference(model: ResNet1D, batch: int = 1, warmup: int = 10,
                        reps: int = 50, seed: int = 0) -> LatencyStats:
    """
    Median and IQR of the forward wall time for `batch` scans, after
    `warmup` discarded runs. Eval mode, no backward records.
    """
    if reps < MIN_BENCH_REPS:
        raise InvalidInputError(f"benchmark needs at least {MIN_BENCH_REPS} repetitions")
    length = model.spec.input_len
    x = Tensor(rng_stream(seed, length).normal(size=(batch, 1, length)))
    model.eval()
    timings = []
    with no_grad():
        for i in range(warmup + reps):
            started = time.perf_counter()
            model(x)
            elapsed = time.perf_counter() - started
            if i >= warmup:
                timings.append(elapsed * 1000.0)
    p25, median, p75 = np.percentile(timings, [25, 50, 75])
    return LatencyStats(median_ms=float(median), iqr_ms=float(p75 - p25), p25_ms=float(p25),
                        p75_ms=float(p75), reps=reps, warmup=warmup, input_len=length,
                        host=host_info())


def evaluate_checkpoint(path, dataset: MScanDataset) -> dict:
    """Hold-out MAE of a checkpoint on the split it was trained with."""
    model, normalizer, meta = load_checkpoint(path)
    check_representation(dataset, model.spec)
    cfg = TrainConfig(**meta["train"])
    _, val_idx = split_indices(dataset.n_scans, cfg.val_fraction, meta["seed"])
    preds = predict(model, normalizer.transform(dataset.scans[val_idx]), cfg.eval_batch_size)
    return {
        "needle_id": dataset.needle_id,
        "variant": model.spec.variant,
        "representation": dataset.representation,
        "seed": meta["seed"],
        "val_mae_mN": mae(preds, dataset.forces[val_idx]),
        "n_val": int(val_idx.size),
        "dataset_hash": array_hash(dataset.scans, dataset.forces),
        "config_hash": meta.get("config_hash", ""),
    }


class CellJob(BaseModel):
    needle_id: str
    variant: Variant
    representation: Representation
    seed: int
    keep_state: bool = False


class CellOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    job: CellJob
    mae_mN: Optional[float] = None
    error: Optional[str] = None
    state: Optional[dict] = None


_worker_datasets: Dict[str, Dict[str, MScanDataset]] = {}


def _init_worker(datasets):
    global _worker_datasets
    _worker_datasets = datasets


def _run_cell(job: CellJob, spec: ArchSpec, cfg: TrainConfig) -> CellOutcome:
    dataset = _worker_datasets[job.needle_id][job.representation]
    try:
        result = train(dataset, spec, cfg, job.seed)
        val_mae = mae(predict(result.model, result.normalizer.transform(dataset.scans[result.val_idx]),
                              cfg.eval_batch_size), dataset.forces[result.val_idx])
        state = result.model.state_dict() if job.keep_state else None
        return CellOutcome(job=job, mae_mN=val_mae, state=state)
    except Exception as e:
        logger.error("Cell %s/%s/%s seed %d failed: %s", job.needle_id, job.variant,
                     job.representation, job.seed, e)
        return CellOutcome(job=job, error=f"{type(e).__name__}: {e}")


class MatrixResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    reports: List[EvalReport]
    results: pd.DataFrame
    table: pd.DataFrame
    reldiff: pd.DataFrame


def run_experiment_matrix(datasets: Dict[str, Dict[str, MScanDataset]], variants: List[Variant],
                          representations: List[Representation], cfg: TrainConfig,
                          stem_channels: Optional[Dict[str, int]] = None, jobs: int = 1,
                          bench_reps: int = 50, bench_warmup: int = 10,
                          config_hash: str = "") -> MatrixResult:
    """
    Trains every (needle, variant, representation, seed) cell, then
    benchmarks each cell's first-seed model one at a time.
    """
    stem_channels = stem_channels or {}
    for needle_id in datasets:
        for rep in representations:
            if rep not in datasets[needle_id]:
                raise MissingDatasetError(f"no '{rep}' dataset for {needle_id}")

    def spec_for(variant, rep):
        return ArchSpec(variant=variant, input_len=1024 if rep == "raw" else 512,
                        stem_channels=stem_channels.get(variant))

    work = []
    for needle_id in datasets:
        for variant in variants:
            for rep in representations:
                for i, seed in enumerate(cfg.seeds):
                    job = CellJob(needle_id=needle_id, variant=variant, representation=rep,
                                  seed=seed, keep_state=i == 0)
                    work.append((job, spec_for(variant, rep),
                                 cfg.model_copy(update={"representation": rep})))
    logger.info("Experiment matrix: %d training runs on %d worker(s)", len(work), jobs)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(datasets,)) as pool:
            outcomes = list(pool.map(_run_cell, *zip(*work)))
    else:
        _init_worker(datasets)
        outcomes = [_run_cell(*item) for item in work]

    by_cell: Dict[tuple, List[CellOutcome]] = {}
    for outcome in outcomes:
        key = (outcome.job.needle_id, outcome.job.variant, outcome.job.representation)
        by_cell.setdefault(key, []).append(outcome)

    reports = []
    for (needle_id, variant, rep), cell in by_cell.items():
        dataset = datasets[needle_id][rep]
        maes = [o.mae_mN if o.mae_mN is not None else float("nan") for o in cell]
        ok = [m for m in maes if np.isfinite(m)]
        latency = None
        first = cell[0]
        if first.state is not None:
            model = build_model(spec_for(variant, rep), rng_stream(first.job.seed, 1))
            model.load_state_dict(first.state)
            latency = benchmark_inference(model, warmup=bench_warmup, reps=bench_reps)
        errors = [o.error for o in cell if o.error]
        reports.append(EvalReport(
            needle_id=needle_id,
            variant=variant,
            representation=rep,
            seeds=[o.job.seed for o in cell],
            mae_mN=maes,
            mae_mean_mN=float(np.mean(ok)) if ok else float("nan"),
            mae_std_mN=float(np.std(ok, ddof=1)) if len(ok) > 1 else 0.0,
            latency=latency,
            status="ok" if not errors else ("failed" if not ok else "partial"),
            error="; ".join(errors) or None,
            dataset_hash=array_hash(dataset.scans, dataset.forces),
            config_hash=config_hash,
        ))

    needle_ids = list(datasets)
    return MatrixResult(
        reports=reports,
        results=results_frame(reports),
        table=table_frame(reports, needle_ids, variants, representations),
        reldiff=reldiff_frame(reports),
    )


def results_frame(reports: List[EvalReport]) -> pd.DataFrame:
    """One row per cell per seed; latency stays out so reruns compare byte for byte."""
    rows = []
    for report in reports:
        for seed, value in zip(report.seeds, report.mae_mN):
            rows.append({
                "needle_id": report.needle_id,
                "variant": report.variant,
                "representation": report.representation,
                "seed": seed,
                "mae_mN": value,
                "status": "ok" if np.isfinite(value) else "failed",
                "dataset_hash": report.dataset_hash,
                "config_hash": report.config_hash,
            })
    return pd.DataFrame(rows)


def _cell_text(report: Optional[EvalReport]) -> str:
    if report is None:
        return ""
    if not np.isfinite(report.mae_mean_mN):
        return "failed"
    return f"{report.mae_mean_mN:.2f} ± {report.mae_std_mN:.2f}"


def table_frame(reports: List[EvalReport], needle_ids: List[str], variants: List[str],
                representations: List[str]) -> pd.DataFrame:
    """Rows are variants; a raw/recon column pair per needle; one latency column."""
    lookup = {(r.needle_id, r.variant, r.representation): r for r in reports}
    rows = []
    for variant in variants:
        row = {"model": variant}
        for needle_id in needle_ids:
            for rep in ("raw", "recon"):
                if rep in representations:
                    row[f"{needle_id} {rep}"] = _cell_text(lookup.get((needle_id, variant, rep)))
        timed = [r for r in reports if r.variant == variant and r.latency is not None]
        timed.sort(key=lambda r: (r.representation != "raw", needle_ids.index(r.needle_id)))
        row["Inf. time ms"] = (f"{timed[0].latency.median_ms:.2f} ± {timed[0].latency.iqr_ms:.2f}"
                               if timed else "")
        rows.append(row)
    return pd.DataFrame(rows)


def reldiff_frame(reports: List[EvalReport]) -> pd.DataFrame:
    """Relative MAE difference per (needle, variant), with the published value when known."""
    lookup = {(r.needle_id, r.variant, r.representation): r for r in reports}
    rows = []
    for (needle_id, variant, rep), report in lookup.items():
        if rep != "raw" or (needle_id, variant, "recon") not in lookup:
            continue
        recon = lookup[(needle_id, variant, "recon")]
        raw_mae, recon_mae = report.mae_mean_mN, recon.mae_mean_mN
        rel = (relative_difference(raw_mae, recon_mae)
               if np.isfinite(raw_mae) and np.isfinite(recon_mae) and recon_mae > 0 else float("nan"))
        reference = REFERENCE_MAE_MN.get((needle_id, variant))
        rows.append({
            "needle_id": needle_id,
            "variant": variant,
            "mae_raw_mN": raw_mae,
            "mae_recon_mN": recon_mae,
            "rel_diff": rel,
            "raw_better": bool(np.isfinite(rel) and rel > 0),
            "reference_rel_diff": (relative_difference(reference[0][0], reference[1][0])
                                   if reference else float("nan")),
        })
    columns = ["needle_id", "variant", "mae_raw_mN", "mae_recon_mN", "rel_diff",
               "raw_better", "reference_rel_diff"]
    return pd.DataFrame(rows, columns=columns)


def direction_summary(reldiff: pd.DataFrame) -> str:
    valid = reldiff[np.isfinite(reldiff["rel_diff"].astype(float))]
    return f"raw better in {int(valid['raw_better'].sum())} of {len(valid)} setups"


def write_reports(out_dir, result: MatrixResult, config_hash: str = "",
                  dataset_hashes: Optional[Dict[str, str]] = None) -> Dict[str, Path]:
    """results.csv, table.csv, table.md, reldiff.csv and env.json in out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out / "results.csv",
        "table": out / "table.csv",
        "table_md": out / "table.md",
        "reldiff": out / "reldiff.csv",
        "env": out / "env.json",
    }
    result.results.to_csv(paths["results"], index=False, float_format="%.6f")
    result.table.to_csv(paths["table"], index=False)
    table = pd.read_csv(paths["table"], keep_default_na=False)
    paths["table_md"].write_text(
        "Mean absolute error in mN (mean ± " + SPREAD_LABEL + ") and inference time in ms "
        "(median ± IQR)\n\n" + table.to_markdown(index=False) + "\n", encoding="utf-8")
    result.reldiff.to_csv(paths["reldiff"], index=False, float_format="%.6f")

    env = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "host": host_info(),
        "versions": {"numpy": np.__version__, "scipy": scipy.__version__,
                     "pandas": pd.__version__, "pydantic": pydantic.VERSION},
        "config_hash": config_hash,
        "dataset_hashes": dataset_hashes or {},
        "split_policy": SPLIT_POLICY,
        "spread": SPREAD_LABEL,
        "direction": direction_summary(result.reldiff),
        "latency": [
            {"needle_id": r.needle_id, "variant": r.variant, "representation": r.representation,
             **r.latency.model_dump(exclude={"host"})}
            for r in result.reports if r.latency is not None
        ],
        "reference": {
            "latency_ms": REFERENCE_LATENCY_MS,
            "mae_mN": [
                {"needle_id": n, "variant": v, "raw": raw[0], "raw_spread": raw[1],
                 "recon": recon[0], "recon_spread": recon[1]}
                for (n, v), (raw, recon) in REFERENCE_MAE_MN.items()
            ],
        },
        "failures": [
            {"needle_id": r.needle_id, "variant": r.variant, "representation": r.representation,
             "error": r.error}
            for r in result.reports if r.error
        ],
    }
    paths["env"].write_text(json.dumps(env, indent=2) + "\n", encoding="utf-8")
    logger.info("Reports written to %s (%s)", out, env["direction"])
    return paths


def build_datasets(config: ExperimentConfig) -> Dict[str, Dict[str, MScanDataset]]:
    datasets = {}
    for entry in config.needles:
        needle = entry.resolve()
        profile = make_profile(config.profile.kind, config.profile.n_scans,
                               config.dataset_seed, config.profile.cycles)
        raw = generate_dataset(profile, needle, config.dataset_seed, entry.needle_id)
        datasets[entry.needle_id] = {"raw": raw}
        if "recon" in config.representations:
            datasets[entry.needle_id]["recon"] = reconstructed_dataset(raw, config.recon)
    return datasets


def run_experiment(config: ExperimentConfig, out_dir, jobs: int = 1) -> MatrixResult:
    """Simulate, reconstruct, train, evaluate and write every report of one experiment."""
    config_hash = config.config_hash()
    datasets = build_datasets(config)
    dataset_hashes = {
        f"{needle_id}/{rep}": array_hash(ds.scans, ds.forces)
        for needle_id, by_rep in datasets.items() for rep, ds in by_rep.items()
    }
    result = run_experiment_matrix(
        datasets, config.variants, config.representations, config.train,
        stem_channels=config.stem_channels, jobs=jobs,
        bench_reps=config.bench_reps, bench_warmup=config.bench_warmup,
        config_hash=config_hash,
    )
    write_reports(out_dir, result, config_hash, dataset_hashes)
    return result
