import math
from typing import List, Literal, Optional, Union
import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from models.dataset import SPECTRUM_LEN


class ReconConfig(BaseModel):
    """
    Settings of the six step reconstruction.
    chirp_table: "identity", "needle" (derived from the needle's chirp
    polynomial, the manufacturer calibration analog) or explicit per-pixel
    resampling positions.
    """
    damping: float = 0.05
    chirp_table: Union[Literal["identity", "needle"], List[float]] = "needle"
    interpolation: Literal["linear", "cubic"] = "linear"
    window: Literal["hann"] = "hann"
    dc_init: Literal["first_scan", "zero", "reference"] = "first_scan"

    @field_validator("damping")
    @classmethod
    def _damping_range(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        return value

    @field_validator("chirp_table")
    @classmethod
    def _table_length(cls, value):
        if isinstance(value, list) and len(value) != SPECTRUM_LEN:
            raise ValueError(f"chirp_table must hold {SPECTRUM_LEN} positions")
        return value

    @property
    def settle_scans(self) -> int:
        """Scans until the initial DC estimate weighs less than 1%."""
        if self.damping >= 1.0:
            return 1
        return math.ceil(math.log(0.01) / math.log(1.0 - self.damping))


class DcState(BaseModel):
    """Running DC spectrum estimate of one M-scan."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    estimate: Optional[np.ndarray] = None
    count: int = 0
