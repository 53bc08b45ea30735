"""Full-size runs; deselected by default, run with `pytest -m slow`."""
import numpy as np
import pytest
from engine.tensor import Tensor
from models.experiment import ExperimentConfig
from models.needle import NeedleModel
from models.training import ArchSpec, TrainConfig
from services.eval_service import benchmark_inference, run_experiment
from services.network_service import build_model
from services.simulation_service import generate_dataset, make_profile
from services.training_service import train
from tests.conftest import uniform_forces
from utils.utils import rng_stream

pytestmark = pytest.mark.slow


def test_desk_scale_calibration_within_ten_millinewton():
    ds = generate_dataset(make_profile("triangle", 20000), NeedleModel(), seed=0, needle_id="Needle 1")
    spec = ArchSpec(variant="ResNet6")
    cfg = TrainConfig(epochs=30, seeds=[0, 1])
    histories = [train(ds, spec, cfg, seed).history for seed in cfg.seeds]
    assert np.mean([h.best_val_mae_mN for h in histories]) <= 10.0
    for history in histories:
        assert history.records[-1].train_mse_N2 <= history.records[0].train_mse_N2


def test_latency_grows_with_depth():
    medians = []
    for variant in ("ResNet6", "ResNet18", "ResNet34"):
        model = build_model(ArchSpec(variant=variant), rng_stream(0, 1))
        model(Tensor(np.random.default_rng(0).normal(size=(4, 1, 1024))))
        medians.append(benchmark_inference(model, warmup=10, reps=50).median_ms)
    assert medians[0] < medians[1] < medians[2]


@pytest.mark.parametrize("variant", ["ResNet6", "ResNet18", "ResNet34"])
def test_capacity_on_small_noiseless_subset(variant):
    ds = generate_dataset(uniform_forces(64, seed=1), NeedleModel(noise_sigma=0.0), seed=0)
    cfg = TrainConfig(epochs=500, batch_size=25, seeds=[0])
    history = train(ds, ArchSpec(variant=variant), cfg, seed=0).history
    assert min(r.train_mse_N2 for r in history.records) <= 1e-6


def test_desk_scale_matrix(tmp_path):
    config = ExperimentConfig(output_dir=str(tmp_path))
    result = run_experiment(config, tmp_path, jobs=2)
    assert all(r.status == "ok" for r in result.reports)
    assert len(result.reports) == 2
    for name in ("results.csv", "table.csv", "table.md", "reldiff.csv", "env.json"):
        assert (tmp_path / name).exists()
