from typing import List, Literal, Optional, Tuple
from pydantic import BaseModel, Field, field_validator, model_validator
from models.dataset import REPRESENTATION_LENGTHS, Representation


Variant = Literal["ResNet6", "ResNet18", "ResNet34"]

BLOCK_LAYOUTS = {
    "ResNet6": (1, 1),
    "ResNet18": (2, 2, 2, 2),
    "ResNet34": (3, 4, 6, 3),
}

DEFAULT_STEM_CHANNELS = {
    "ResNet6": 32,
    "ResNet18": 64,
    "ResNet34": 64,
}


class ArchSpec(BaseModel):
    """
    1D ResNet layout. Stage i has stem_channels * 2**i channels and
    block_counts[i] basic blocks; every stage after the first halves the length.
    """
    variant: Variant
    input_len: Literal[1024, 512] = 1024
    stem_channels: Optional[int] = None
    block_counts: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def _fill_layout(self):
        layout = BLOCK_LAYOUTS[self.variant]
        if self.block_counts is None:
            self.block_counts = layout
        elif tuple(self.block_counts) != layout:
            raise ValueError(f"{self.variant} uses block layout {layout}")
        if self.stem_channels is None:
            self.stem_channels = DEFAULT_STEM_CHANNELS[self.variant]
        if self.stem_channels < 1:
            raise ValueError("stem_channels must be >= 1")
        return self

    @property
    def representation(self) -> Representation:
        return "raw" if self.input_len == REPRESENTATION_LENGTHS["raw"] else "recon"

    @property
    def trailing_conv(self) -> bool:
        """ResNet6 spends its sixth conv after the blocks instead of on stem downsampling."""
        return self.variant == "ResNet6"

    @property
    def stage_channels(self) -> List[int]:
        return [self.stem_channels * 2 ** i for i in range(len(self.block_counts))]


class TrainConfig(BaseModel):
    epochs: int = 150
    batch_size: int = 128
    learning_rate: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.2
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    representation: Representation = "raw"
    normalization: Literal["auto", "per_position", "log_global"] = "auto"
    eval_batch_size: int = 512

    @field_validator("epochs")
    @classmethod
    def _epochs_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("epochs must be >= 1")
        return value

    @field_validator("batch_size")
    @classmethod
    def _batch_for_batchnorm(cls, value: int) -> int:
        if value < 2:
            raise ValueError("batch_size must be >= 2 for batch normalization")
        return value

    @field_validator("val_fraction")
    @classmethod
    def _fraction_open_interval(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")
        return value

    @field_validator("seeds")
    @classmethod
    def _seeds_non_empty(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("seeds must not be empty")
        return value

    @property
    def normalization_policy(self) -> str:
        if self.normalization != "auto":
            return self.normalization
        return "per_position" if self.representation == "raw" else "log_global"


class EpochRecord(BaseModel):
    epoch: int
    train_mse_N2: float
    val_mae_mN: float
    seconds: float


class TrainHistory(BaseModel):
    seed: int
    records: List[EpochRecord] = []
    best_epoch: Optional[int] = None
    best_val_mae_mN: Optional[float] = None

    def __len__(self):
        return len(self.records)
