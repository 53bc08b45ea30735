import hashlib
import json
from typing import Any, Dict, List, Literal, Optional
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from core.config import settings
from core.errors import ConfigurationError
from models.dataset import Representation
from models.needle import NeedleModel, needle_preset
from models.recon import ReconConfig
from models.training import ArchSpec, TrainConfig, Variant


PAPER_SCALE_SCANS = 180000
PAPER_SCALE_EPOCHS = 150
PAPER_SCALE_SEEDS = [0, 1, 2, 3, 4]


class NeedleEntry(BaseModel):
    """A needle of the experiment: a preset id, explicit parameters, or both."""
    needle_id: str
    preset: Optional[int] = None
    params: Dict[str, Any] = {}

    @model_validator(mode="after")
    def _parameters_resolve(self):
        try:
            self.resolve()
        except (ValidationError, ConfigurationError) as e:
            raise ValueError(f"needle '{self.needle_id}': {e}")
        return self

    def resolve(self) -> NeedleModel:
        if self.preset is not None:
            return needle_preset(self.preset, **self.params)
        return NeedleModel(**self.params)


class ProfileSpec(BaseModel):
    kind: Literal["ramp", "triangle", "sinusoid", "random-walk"] = "triangle"
    n_scans: int = 20000
    cycles: int = 10

    @field_validator("n_scans")
    @classmethod
    def _non_empty(cls, value: int) -> int:
        if value < 1:
            raise ValueError("n_scans must be >= 1")
        return value


class ExperimentConfig(BaseModel):
    needles: List[NeedleEntry] = Field(
        default_factory=lambda: [NeedleEntry(needle_id="Needle 1", preset=1)])
    profile: ProfileSpec = Field(default_factory=ProfileSpec)
    dataset_seed: int = 0
    recon: ReconConfig = Field(default_factory=ReconConfig)
    variants: List[Variant] = ["ResNet6"]
    representations: List[Representation] = ["raw", "recon"]
    stem_channels: Dict[str, int] = {}
    train: TrainConfig = Field(default_factory=lambda: TrainConfig(epochs=30, seeds=[0, 1]))
    bench_reps: int = Field(default_factory=lambda: settings.OCT_BENCH_REPS)
    bench_warmup: int = Field(default_factory=lambda: settings.OCT_BENCH_WARMUP)
    output_dir: str = Field(default_factory=lambda: settings.OCT_OUTPUT_DIR)

    @field_validator("needles", "variants", "representations")
    @classmethod
    def _non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("must not be empty")
        return value

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form, output location excluded."""
        payload = self.model_dump(mode="json", exclude={"output_dir"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def arch_spec(self, variant: Variant, representation: Representation) -> ArchSpec:
        return ArchSpec(
            variant=variant,
            input_len=1024 if representation == "raw" else 512,
            stem_channels=self.stem_channels.get(variant),
        )

    def train_config(self, representation: Representation) -> TrainConfig:
        return self.train.model_copy(update={"representation": representation})

    def needle(self, needle_id: Optional[str] = None) -> NeedleEntry:
        if needle_id is None:
            return self.needles[0]
        for entry in self.needles:
            if entry.needle_id == needle_id:
                return entry
        raise ConfigurationError(f"no needle '{needle_id}' in the config")

    def to_paper_scale(self) -> "ExperimentConfig":
        return self.model_copy(update={
            "profile": self.profile.model_copy(update={"n_scans": PAPER_SCALE_SCANS}),
            "train": self.train.model_copy(update={
                "epochs": PAPER_SCALE_EPOCHS, "seeds": list(PAPER_SCALE_SEEDS)}),
        })
