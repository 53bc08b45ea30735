import numpy as np
import pytest
from models.needle import ForceProfile, NeedleModel
from services.simulation_service import generate_dataset, make_profile


@pytest.fixture
def needle():
    return NeedleModel()


@pytest.fixture
def quiet_needle():
    return NeedleModel(noise_sigma=0.0)


@pytest.fixture
def small_raw_dataset(needle):
    return generate_dataset(make_profile("random-walk", 64, seed=3, step_sigma=0.05),
                            needle, seed=7, needle_id="Needle T")


def single_scan_dataset(force: float, model: NeedleModel, seed: int = 0):
    return generate_dataset(ForceProfile(samples=[force]), model, seed)


def uniform_forces(n: int, seed: int = 0) -> ForceProfile:
    return ForceProfile(samples=np.random.default_rng(seed).uniform(0.0, 1.0, n).tolist())
