from typing import Dict, List, Optional
from pydantic import BaseModel, field_validator
from models.dataset import Representation
from models.training import Variant


class LatencyStats(BaseModel):
    """Single-scan forward wall time, milliseconds."""
    median_ms: float
    iqr_ms: float
    p25_ms: float
    p75_ms: float
    reps: int
    warmup: int
    input_len: int
    host: Dict[str, str] = {}


class EvalReport(BaseModel):
    needle_id: str
    variant: Variant
    representation: Representation
    seeds: List[int]
    mae_mN: List[float]
    mae_mean_mN: float
    mae_std_mN: float
    latency: Optional[LatencyStats] = None
    status: str = "ok"
    error: Optional[str] = None
    dataset_hash: str = ""
    config_hash: str = ""

    @field_validator("mae_mN")
    @classmethod
    def _non_negative(cls, value: List[float]) -> List[float]:
        if any(v < 0 for v in value):
            raise ValueError("MAE cannot be negative")
        return value


# Published reference results: (needle, variant) -> (raw, recon) MAE mean, spread in mN.
REFERENCE_MAE_MN = {
    ("Needle 1", "ResNet6"): ((8.54, 0.14), (7.22, 0.14)),
    ("Needle 2", "ResNet6"): ((23.10, 0.40), (17.15, 0.33)),
    ("Needle 3", "ResNet6"): ((9.02, 0.08), (11.29, 0.09)),
    ("Needle 1", "ResNet18"): ((4.36, 0.05), (7.09, 0.18)),
    ("Needle 2", "ResNet18"): ((8.16, 0.23), (11.42, 0.32)),
    ("Needle 3", "ResNet18"): ((7.18, 0.66), (5.65, 0.06)),
    ("Needle 1", "ResNet34"): ((4.40, 0.06), (6.61, 0.19)),
    ("Needle 2", "ResNet34"): ((6.95, 0.24), (11.14, 0.32)),
    ("Needle 3", "ResNet34"): ((6.08, 0.06), (6.37, 0.05)),
}

REFERENCE_LATENCY_MS = {"ResNet6": 1.11, "ResNet18": 3.56, "ResNet34": 6.43}
