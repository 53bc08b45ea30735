import struct
import numpy as np
import pytest
from core.errors import FormatError
from core.storage import (MAGIC_RAW, MAGIC_RECON, read_scans, read_sidecar, read_weights,
                          write_scans, write_sidecar, write_weights)
from models.recon import ReconConfig
from services.recon_service import reconstructed_dataset


def test_raw_round_trip(tmp_path, small_raw_dataset):
    path = write_scans(tmp_path / "n.octf", small_raw_dataset)
    assert path.read_bytes()[:4] == MAGIC_RAW
    back = read_scans(path)
    np.testing.assert_array_equal(back.scans, small_raw_dataset.scans)
    np.testing.assert_allclose(back.forces, small_raw_dataset.forces, rtol=1e-6)
    assert back.needle_id == "Needle T"
    assert back.rng_seed == 7
    assert back.model_params is None


def test_ascan_file_uses_its_own_magic(tmp_path, small_raw_dataset):
    recon = reconstructed_dataset(small_raw_dataset, ReconConfig())
    path = write_scans(tmp_path / "n.octa", recon)
    assert path.read_bytes()[:4] == MAGIC_RECON
    assert read_scans(path).scans.shape == (64, 512)
    with pytest.raises(FormatError):
        read_scans(path, expected_magic=MAGIC_RAW)


def test_sidecar_restores_needle(tmp_path, small_raw_dataset, needle):
    path = write_scans(tmp_path / "n.octf", small_raw_dataset)
    write_sidecar(path, {"model_params": needle.model_dump(mode="json")})
    assert read_scans(path).model_params == needle
    assert read_sidecar(tmp_path / "missing.octf") is None


def test_bad_magic_names_file(tmp_path, small_raw_dataset):
    path = write_scans(tmp_path / "n.octf", small_raw_dataset)
    data = bytearray(path.read_bytes())
    data[:4] = b"XXXX"
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="n.octf"):
        read_scans(path)


def test_bad_version(tmp_path, small_raw_dataset):
    path = write_scans(tmp_path / "n.octf", small_raw_dataset)
    data = bytearray(path.read_bytes())
    data[4:8] = struct.pack("<I", 2)
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="version"):
        read_scans(path)


def test_truncated_and_trailing(tmp_path, small_raw_dataset):
    path = write_scans(tmp_path / "n.octf", small_raw_dataset)
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(FormatError, match="truncated"):
        read_scans(path)
    path.write_bytes(data + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        read_scans(path)


def test_weights_round_trip(tmp_path):
    arrays = {"a.weight": np.arange(6.0).reshape(2, 3, 1), "a.bias": np.array([0.5, -1.0]),
              "scalar": np.array(3.25)}
    path = write_weights(tmp_path / "w.octw", arrays)
    back = read_weights(path)
    assert list(back) == list(arrays)
    for name, value in arrays.items():
        np.testing.assert_array_equal(back[name], value)


def test_weights_bad_magic(tmp_path):
    path = tmp_path / "w.octw"
    path.write_bytes(b"OCTF" + struct.pack("<II", 1, 0))
    with pytest.raises(FormatError):
        read_weights(path)
