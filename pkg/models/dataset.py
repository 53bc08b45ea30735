from typing import Literal, Optional
import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, model_validator
from models.needle import SPECTRUM_LEN, NeedleModel


ASCAN_LEN = SPECTRUM_LEN // 2

# One detector read-out (1024 samples) and one depth profile (512 samples).
RawSpectrum = NDArray[np.float64]
ComplexSpectrum = NDArray[np.complex128]
AScan = NDArray[np.float64]

Representation = Literal["raw", "recon"]

REPRESENTATION_LENGTHS = {"raw": SPECTRUM_LEN, "recon": ASCAN_LEN}


def representation_for_length(length: int) -> Representation:
    for name, size in REPRESENTATION_LENGTHS.items():
        if size == length:
            return name
    raise ValueError(f"No representation has records of length {length}")


class MScanDataset(BaseModel):
    """
    Time ordered scans with their force labels.
    `scans` is (N_t, 1024) for raw spectra or (N_t, 512) for A-scans.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    scans: np.ndarray
    forces: np.ndarray
    needle_id: str
    model_params: Optional[NeedleModel] = None  # synthetic data only
    rng_seed: int = 0

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.scans.ndim != 2 or self.scans.shape[1] not in REPRESENTATION_LENGTHS.values():
            raise ValueError(f"scans must be (N_t, 1024) or (N_t, 512), got {self.scans.shape}")
        if self.forces.ndim != 1 or len(self.forces) != len(self.scans):
            raise ValueError("forces must hold one label per scan")
        if not np.all(np.isfinite(self.scans)):
            raise ValueError("scans must be finite")
        return self

    @property
    def n_scans(self) -> int:
        return len(self.scans)

    @property
    def spectrum_len(self) -> int:
        return self.scans.shape[1]

    @property
    def representation(self) -> Representation:
        return representation_for_length(self.spectrum_len)
