"""
Binary file formats, all little-endian.

OCTF / OCTA v1 (raw spectra / A-scans):
    magic[4] u32 version u32 N_t u32 spectrum_len
    u32 len + needle_id utf-8, u64 seed
    N_t records of [spectrum_len x f32, f32 force N]
OCTW v1 (named float64 arrays):
    magic[4] u32 version u32 count
    per array: u32 len + name utf-8, u32 rank, rank x u32 dims, f64 data
"""
import json
import logging
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Optional, Tuple
import numpy as np
from pydantic import ValidationError
from core.errors import FormatError
from models.dataset import ASCAN_LEN, SPECTRUM_LEN, MScanDataset
from models.needle import NeedleModel


logger = logging.getLogger(__name__)

VERSION = 1
MAGIC_RAW = b"OCTF"
MAGIC_RECON = b"OCTA"
MAGIC_WEIGHTS = b"OCTW"

_SCAN_MAGICS = {MAGIC_RAW: SPECTRUM_LEN, MAGIC_RECON: ASCAN_LEN}


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_sidecar(path, payload: dict) -> Path:
    target = sidecar_path(path)
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def read_sidecar(path) -> Optional[dict]:
    target = sidecar_path(path)
    if not target.exists():
        return None
    try:
        return json.loads(target.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"{target}: invalid JSON sidecar ({e})")


def _pack_str(value: str) -> bytes:
    encoded = value.encode("utf-8")
    return struct.pack("<I", len(encoded)) + encoded


class _Reader:
    """Bounds-checked cursor over a file's bytes."""

    def __init__(self, path, data: bytes):
        self.path = path
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise FormatError(f"{self.path}: truncated file")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (length,) = self.unpack("<I")
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(f"{self.path}: invalid UTF-8 string")


def _record_dtype(spectrum_len: int) -> np.dtype:
    return np.dtype([("spectrum", "<f4", (spectrum_len,)), ("force", "<f4")])


def write_scans(path, dataset: MScanDataset) -> Path:
    """Writes OCTF for raw spectra or OCTA for A-scans, chosen by record length."""
    path = Path(path)
    magic = MAGIC_RAW if dataset.spectrum_len == SPECTRUM_LEN else MAGIC_RECON
    header = struct.pack("<4sIII", magic, VERSION, dataset.n_scans, dataset.spectrum_len)
    header += _pack_str(dataset.needle_id) + struct.pack("<Q", dataset.rng_seed)

    records = np.empty(dataset.n_scans, dtype=_record_dtype(dataset.spectrum_len))
    records["spectrum"] = dataset.scans
    records["force"] = dataset.forces
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header)
        f.write(records.tobytes())
    logger.debug("Wrote %s (%d x %d)", path, dataset.n_scans, dataset.spectrum_len)
    return path


def read_scans(path, expected_magic: Optional[bytes] = None) -> MScanDataset:
    """
    Reads an OCTF or OCTA file. Needle parameters are taken from the JSON
    sidecar when one exists.
    """
    path = Path(path)
    reader = _Reader(path, path.read_bytes())
    magic, version, n_scans, spectrum_len = reader.unpack("<4sIII")
    if magic not in _SCAN_MAGICS or (expected_magic is not None and magic != expected_magic):
        wanted = expected_magic.decode() if expected_magic else "OCTF/OCTA"
        raise FormatError(f"{path}: bad magic {magic!r}, expected {wanted}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if spectrum_len != _SCAN_MAGICS[magic]:
        raise FormatError(f"{path}: {magic.decode()} records must hold {_SCAN_MAGICS[magic]} samples")
    needle_id = reader.string()
    (seed,) = reader.unpack("<Q")

    dtype = _record_dtype(spectrum_len)
    body = reader.take(n_scans * dtype.itemsize)
    if reader.offset != len(reader.data):
        raise FormatError(f"{path}: trailing bytes after {n_scans} records")
    records = np.frombuffer(body, dtype=dtype)

    model = None
    sidecar = read_sidecar(path)
    if sidecar and sidecar.get("model_params"):
        try:
            model = NeedleModel(**sidecar["model_params"])
        except ValidationError as e:
            raise FormatError(f"{sidecar_path(path)}: invalid needle parameters ({e})")

    return MScanDataset(
        scans=np.array(records["spectrum"], dtype=np.float32),
        forces=np.array(records["force"], dtype=np.float64),
        needle_id=needle_id,
        model_params=model,
        rng_seed=seed,
    )


def write_weights(path, arrays: Dict[str, np.ndarray]) -> Path:
    path = Path(path)
    chunks = [struct.pack("<4sII", MAGIC_WEIGHTS, VERSION, len(arrays))]
    for name, value in arrays.items():
        value = np.asarray(value, dtype="<f8")
        chunks.append(_pack_str(name))
        chunks.append(struct.pack(f"<I{value.ndim}I", value.ndim, *value.shape))
        chunks.append(value.tobytes())
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(chunks))
    return path


def read_weights(path) -> Dict[str, np.ndarray]:
    path = Path(path)
    reader = _Reader(path, path.read_bytes())
    magic, version, count = reader.unpack("<4sII")
    if magic != MAGIC_WEIGHTS:
        raise FormatError(f"{path}: bad magic {magic!r}, expected OCTW")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")

    arrays = OrderedDict()
    for _ in range(count):
        name = reader.string()
        (rank,) = reader.unpack("<I")
        shape = reader.unpack(f"<{rank}I") if rank else ()
        size = int(np.prod(shape)) if rank else 1
        arrays[name] = np.frombuffer(reader.take(8 * size), dtype="<f8").reshape(shape).astype(np.float64)
    if reader.offset != len(reader.data):
        raise FormatError(f"{path}: trailing bytes after {count} arrays")
    return arrays
