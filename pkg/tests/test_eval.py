import json
import numpy as np
import pandas as pd
import pytest
from core.errors import InvalidInputError, MissingDatasetError
from engine.tensor import Node, Tensor
from models.needle import NeedleModel
from models.recon import ReconConfig
from models.report import EvalReport
from models.training import ArchSpec, TrainConfig
from services.eval_service import (benchmark_inference, direction_summary, evaluate_checkpoint,
                                   mae, relative_difference, reldiff_frame, run_experiment_matrix,
                                   table_frame, write_reports)
from services.network_service import build_model
from services.recon_service import reconstructed_dataset
from services.simulation_service import generate_dataset, make_profile
from services.training_service import save_checkpoint, train
from utils.utils import rng_stream

MATRIX_CFG = TrainConfig(epochs=1, batch_size=8, seeds=[0, 1])


def report(needle, variant, rep, maes):
    maes = list(maes)
    return EvalReport(needle_id=needle, variant=variant, representation=rep, seeds=list(range(len(maes))),
                      mae_mN=maes, mae_mean_mN=float(np.mean(maes)),
                      mae_std_mN=float(np.std(maes, ddof=1)) if len(maes) > 1 else 0.0)


def test_mae_in_millinewton():
    assert mae([1.0, 2.0], [1.001, 2.002]) == pytest.approx(1.5)
    assert mae(np.zeros(3), np.zeros(3)) == 0.0


def test_mae_rejects_empty_and_mismatched():
    with pytest.raises(InvalidInputError):
        mae([], [])
    with pytest.raises(InvalidInputError):
        mae([1.0, 2.0], [1.0])


def test_relative_difference():
    assert relative_difference(8.54, 7.22) == pytest.approx((7.22 - 8.54) / 7.22)
    assert relative_difference(4.36, 7.09) > 0
    with pytest.raises(InvalidInputError):
        relative_difference(1.0, 0.0)


def test_table_and_reldiff_layout():
    reports = [report("Needle 1", "ResNet6", "raw", [8.0, 9.0]),
               report("Needle 1", "ResNet6", "recon", [7.0, 7.5]),
               report("Needle 1", "ResNet18", "raw", [4.0, 4.5]),
               report("Needle 1", "ResNet18", "recon", [7.0, 7.0])]
    table = table_frame(reports, ["Needle 1"], ["ResNet6", "ResNet18"], ["raw", "recon"])
    assert list(table.columns) == ["model", "Needle 1 raw", "Needle 1 recon", "Inf. time ms"]
    assert table.loc[0, "Needle 1 raw"] == "8.50 ± 0.71"
    assert table.loc[1, "Needle 1 recon"] == "7.00 ± 0.00"

    reldiff = reldiff_frame(reports)
    assert len(reldiff) == 2
    row = reldiff.set_index("variant").loc["ResNet18"]
    assert row["rel_diff"] == pytest.approx((7.0 - 4.25) / 7.0)
    assert bool(row["raw_better"])
    assert row["reference_rel_diff"] == pytest.approx((7.09 - 4.36) / 7.09)
    assert direction_summary(reldiff) == "raw better in 1 of 2 setups"


def test_benchmark_needs_thirty_reps():
    model = build_model(ArchSpec(variant="ResNet6", stem_channels=4), rng_stream(0, 1))
    with pytest.raises(InvalidInputError):
        benchmark_inference(model, reps=10)


def test_benchmark_statistics():
    model = build_model(ArchSpec(variant="ResNet6", stem_channels=4), rng_stream(0, 1))
    model(Tensor(np.ones((2, 1, 1024))))
    stats = benchmark_inference(model, warmup=2, reps=30)
    assert stats.reps == 30 and stats.warmup == 2 and stats.input_len == 1024
    assert 0 < stats.p25_ms <= stats.median_ms <= stats.p75_ms
    assert stats.iqr_ms == pytest.approx(stats.p75_ms - stats.p25_ms)
    assert stats.host["precision"] == "float64"


@pytest.fixture(scope="module")
def datasets():
    raw = generate_dataset(make_profile("random-walk", 64, seed=3, step_sigma=0.05),
                           NeedleModel(), seed=7, needle_id="Needle T")
    return {"Needle T": {"raw": raw, "recon": reconstructed_dataset(raw, ReconConfig())}}


@pytest.fixture(scope="module")
def matrix(datasets):
    return run_experiment_matrix(datasets, ["ResNet6"], ["raw", "recon"], MATRIX_CFG,
                                 stem_channels={"ResNet6": 4}, jobs=1, bench_reps=30,
                                 bench_warmup=1, config_hash="cafe")


def test_matrix_fills_every_cell(matrix):
    assert len(matrix.reports) == 2
    for r in matrix.reports:
        assert r.status == "ok"
        assert len(r.mae_mN) == 2 and r.seeds == [0, 1]
        assert r.latency is not None and r.latency.reps == 30
        assert r.mae_std_mN == pytest.approx(np.std(r.mae_mN, ddof=1))
    assert len(matrix.results) == 4
    assert set(matrix.results["config_hash"]) == {"cafe"}
    assert "failed" not in matrix.table.to_string()


def test_matrix_reports_written(tmp_path, matrix):
    paths = write_reports(tmp_path, matrix, config_hash="cafe", dataset_hashes={"Needle T/raw": "x"})
    for path in paths.values():
        assert path.exists()
    assert "Needle T raw" in paths["table_md"].read_text(encoding="utf-8")
    env = json.loads(paths["env"].read_text())
    assert env["config_hash"] == "cafe"
    assert env["direction"].startswith("raw better in")
    assert len(env["latency"]) == 2
    assert len(env["reference"]["mae_mN"]) == 9
    results = pd.read_csv(paths["results"])
    assert list(results["seed"]) == [0, 1, 0, 1]


def test_matrix_same_results_across_workers(datasets, matrix):
    parallel = run_experiment_matrix(datasets, ["ResNet6"], ["raw", "recon"], MATRIX_CFG,
                                     stem_channels={"ResNet6": 4}, jobs=2, bench_reps=30,
                                     bench_warmup=1, config_hash="cafe")
    pd.testing.assert_frame_equal(parallel.results, matrix.results)


def test_failed_cell_is_recorded(datasets):
    cfg = TrainConfig(epochs=1, batch_size=64, seeds=[0])
    result = run_experiment_matrix(datasets, ["ResNet6"], ["raw"], cfg,
                                   stem_channels={"ResNet6": 4}, jobs=1)
    (failed,) = result.reports
    assert failed.status == "failed"
    assert "InvalidInputError" in failed.error
    assert failed.latency is None
    assert result.table.loc[0, "Needle T raw"] == "failed"


def test_missing_dataset(datasets):
    with pytest.raises(MissingDatasetError):
        run_experiment_matrix({"Needle T": {"raw": datasets["Needle T"]["raw"]}}, ["ResNet6"],
                              ["raw", "recon"], MATRIX_CFG)


def test_checkpoint_evaluation_reproduces_holdout(tmp_path, datasets):
    ds = datasets["Needle T"]["raw"]
    spec = ArchSpec(variant="ResNet6", stem_channels=4)
    cfg = TrainConfig(epochs=1, batch_size=8, seeds=[2])
    result = train(ds, spec, cfg, seed=2)
    path = save_checkpoint(tmp_path / "m.octw", result, spec, cfg, seed=2)
    row = evaluate_checkpoint(path, ds)
    assert row["val_mae_mN"] == pytest.approx(result.history.best_val_mae_mN, rel=1e-12)
    assert row["n_val"] == result.val_idx.size


def test_mae_invariants():
    rng = np.random.default_rng(3)
    pred, target = rng.uniform(0, 1, 50), rng.uniform(0, 1, 50)
    perm = rng.permutation(50)
    assert mae(pred[perm], target[perm]) == pytest.approx(mae(pred, target))
    assert mae(pred + 0.37, target + 0.37) == pytest.approx(mae(pred, target))


def test_relative_difference_scale_invariant():
    for scale in (0.001, 2.0, 1e4):
        assert relative_difference(8.54 * scale, 7.22 * scale) == pytest.approx(relative_difference(8.54, 7.22))


def test_benchmark_records_no_graph():
    model = build_model(ArchSpec(variant="ResNet6", stem_channels=4), rng_stream(0, 1))
    model(Tensor(np.ones((2, 1, 1024))))
    before = Node.created
    benchmark_inference(model, warmup=0, reps=30)
    assert Node.created == before
    assert not model.training


def test_full_table_shape():
    needles = ["Needle 1", "Needle 2", "Needle 3"]
    variants = ["ResNet6", "ResNet18", "ResNet34"]
    reports = [report(n, v, rep, [5.0, 6.0]) for n in needles for v in variants for rep in ("raw", "recon")]
    table = table_frame(reports, needles, variants, ["raw", "recon"])
    assert table.shape == (3, 8)
    assert list(table["model"]) == variants
    assert len(reldiff_frame(reports)) == 9
