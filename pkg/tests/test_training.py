import numpy as np
import pytest
from core.errors import InvalidInputError, RepresentationMismatchError
from engine.tensor import Node
from models.needle import NeedleModel
from models.recon import ReconConfig
from models.training import ArchSpec, TrainConfig
from services.recon_service import reconstructed_dataset
from services.simulation_service import generate_dataset, make_profile
from services.training_service import (fit_normalizer, load_checkpoint, predict, save_checkpoint,
                                       train, write_history)
from utils.utils import split_indices

SPEC = ArchSpec(variant="ResNet6", stem_channels=4)
CFG = TrainConfig(epochs=2, batch_size=8, seeds=[0])


@pytest.fixture(scope="module")
def trained():
    ds = generate_dataset(make_profile("random-walk", 64, seed=3, step_sigma=0.05),
                          NeedleModel(), seed=7, needle_id="Needle T")
    return ds, train(ds, SPEC, CFG, seed=0)


def test_history_has_one_record_per_epoch(trained):
    _, result = trained
    assert len(result.history) == 2
    assert [r.epoch for r in result.history.records] == [1, 2]
    assert result.history.best_epoch in (1, 2)
    assert result.history.best_val_mae_mN == min(r.val_mae_mN for r in result.history.records)


def test_training_is_deterministic(trained):
    ds, first = trained
    second = train(ds, SPEC, CFG, seed=0)
    a, b = first.model.state_dict(), second.model.state_dict()
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])
    assert [r.train_mse_N2 for r in first.history.records] == \
        [r.train_mse_N2 for r in second.history.records]


def test_split_is_disjoint_and_complete(trained):
    ds, result = trained
    assert np.intersect1d(result.train_idx, result.val_idx).size == 0
    assert np.union1d(result.train_idx, result.val_idx).size == ds.n_scans
    assert result.val_idx.size == round(0.2 * ds.n_scans)


def test_split_depends_only_on_seed():
    a = split_indices(100, 0.2, 5)
    b = split_indices(100, 0.2, 5)
    np.testing.assert_array_equal(a[1], b[1])
    assert not np.array_equal(a[1], split_indices(100, 0.2, 6)[1])


def test_normalizer_sees_training_split_only(trained):
    ds, result = trained
    expected = fit_normalizer(ds.scans[result.train_idx], "per_position")
    np.testing.assert_array_equal(result.normalizer.mean, expected.mean)
    assert not np.allclose(result.normalizer.mean, ds.scans.mean(axis=0))


def test_log_global_normalizer():
    x = np.array([[0.0, 1.0], [3.0, 7.0]])
    norm = fit_normalizer(x, "log_global")
    out = norm.transform(x)
    assert out.mean() == pytest.approx(0.0, abs=1e-12)
    assert out.std() == pytest.approx(1.0)


def test_constant_positions_do_not_divide_by_zero():
    norm = fit_normalizer(np.ones((4, 3)), "per_position")
    np.testing.assert_array_equal(norm.transform(np.ones((2, 3))), np.zeros((2, 3)))


def test_prediction_records_no_graph(trained):
    ds, result = trained
    before = Node.created
    preds = predict(result.model, result.normalizer.transform(ds.scans[:5]))
    assert preds.shape == (5,)
    assert Node.created == before


def test_recon_data_with_raw_network(trained):
    ds, _ = trained
    recon = reconstructed_dataset(ds, ReconConfig())
    with pytest.raises(RepresentationMismatchError):
        train(recon, SPEC, CFG, seed=0)
    with pytest.raises(RepresentationMismatchError):
        train(ds, SPEC, CFG.model_copy(update={"representation": "recon"}), seed=0)


def test_recon_network_trains_on_ascans(trained):
    ds, _ = trained
    recon = reconstructed_dataset(ds, ReconConfig())
    spec = ArchSpec(variant="ResNet6", input_len=512, stem_channels=4)
    cfg = TrainConfig(epochs=1, batch_size=8, representation="recon")
    result = train(recon, spec, cfg, seed=1)
    assert result.normalizer.policy == "log_global"
    assert len(result.history) == 1


def test_dataset_smaller_than_two_batches(trained):
    ds, _ = trained
    with pytest.raises(InvalidInputError):
        train(ds, SPEC, TrainConfig(epochs=1, batch_size=64), seed=0)


def test_checkpoint_round_trip(tmp_path, trained):
    ds, result = trained
    path = save_checkpoint(tmp_path / "m.octw", result, SPEC, CFG, seed=0,
                           dataset_hash="abc", config_hash="def")
    model, normalizer, meta = load_checkpoint(path)
    assert meta["seed"] == 0 and meta["config_hash"] == "def"
    assert meta["best_epoch"] == result.history.best_epoch
    x = result.normalizer.transform(ds.scans[:6])
    np.testing.assert_array_equal(predict(model, normalizer.transform(ds.scans[:6])),
                                  predict(result.model, x))


def test_history_csv(tmp_path, trained):
    _, result = trained
    path = write_history(tmp_path / "h.csv", result.history)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epoch,train_mse_N2,val_mae_mN,seconds"
    assert len(lines) == 3


def test_training_loss_falls_over_epochs():
    ds = generate_dataset(make_profile("triangle", 256, cycles=4), NeedleModel(), seed=1)
    cfg = TrainConfig(epochs=5, batch_size=16, seeds=[0])
    for seed in (0, 1):
        records = train(ds, SPEC, cfg, seed=seed).history.records
        assert records[-1].train_mse_N2 <= records[0].train_mse_N2
