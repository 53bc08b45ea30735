import math
from typing import List, Literal, Optional
import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from core.errors import ConfigurationError


# Detector pixels per read-out.
SPECTRUM_LEN = 1024

# Light source: 1310 nm centre, band chosen so the unloaded gap lands near bin 200.
DEFAULT_SOURCE_CENTER = 2 * math.pi / 1.31e-6
DEFAULT_K_SPAN = 200 * 2 * math.pi / (2 * 1.0e-3) * (SPECTRUM_LEN - 1) / SPECTRUM_LEN
DEFAULT_SOURCE_BANDWIDTH = DEFAULT_K_SPAN / 5

# Chirp shape in normalized pixel position u: u + b*u(1-u) + c*u(1-u)(1-2u).
DEFAULT_CHIRP_QUADRATIC = 0.2
DEFAULT_CHIRP_CUBIC = 0.05

MAX_FORCE = 1.0


def chirp_coefficients(center: float, span: float,
                       quadratic: float = DEFAULT_CHIRP_QUADRATIC,
                       cubic: float = DEFAULT_CHIRP_CUBIC) -> List[float]:
    """
    Coefficients [c0, c1, c2, c3] of k(u) = c0 + c1*u + c2*u^2 + c3*u^3,
    u = pixel / (SPECTRUM_LEN - 1). With quadratic 0.2 the mid-band pixel
    position sits 5% of the band away from a linear map.
    """
    start = center - span / 2
    return [
        start,
        span * (1 + quadratic + cubic),
        span * (-quadratic - 3 * cubic),
        span * (2 * cubic),
    ]


def pixel_wavenumbers(coeffs: List[float], n: int = SPECTRUM_LEN) -> np.ndarray:
    """Evaluates the pixel -> wavenumber polynomial on pixels 0..n-1."""
    u = np.arange(n, dtype=np.float64) / (n - 1)
    return np.polynomial.polynomial.polyval(u, np.asarray(coeffs, dtype=np.float64))


class NeedleModel(BaseModel):
    """Physical parameters of one simulated needle tip."""
    spring_constant: float = 4000.0                   # N/m
    rest_gap: float = 1.0e-3                          # m
    reflectivity: float = 0.2
    source_center: float = DEFAULT_SOURCE_CENTER      # rad/m
    source_bandwidth: float = DEFAULT_SOURCE_BANDWIDTH  # rad/m
    chirp_coeffs: List[float] = Field(
        default_factory=lambda: chirp_coefficients(DEFAULT_SOURCE_CENTER, DEFAULT_K_SPAN))
    noise_sigma: float = 0.01
    saturation_force: Optional[float] = None          # N, None disables
    drift_rate: float = 0.0

    @field_validator("spring_constant", "rest_gap", "source_center", "source_bandwidth")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not math.isfinite(value) or value <= 0:
            raise ValueError("must be finite and > 0")
        return value

    @field_validator("reflectivity")
    @classmethod
    def _reflectivity_range(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("reflectivity must lie in [0, 1]")
        return value

    @field_validator("noise_sigma")
    @classmethod
    def _noise_non_negative(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0:
            raise ValueError("noise_sigma must be >= 0")
        return value

    @field_validator("saturation_force")
    @classmethod
    def _saturation_positive(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and (not math.isfinite(value) or value <= 0):
            raise ValueError("saturation_force must be > 0 when set")
        return value

    @field_validator("chirp_coeffs")
    @classmethod
    def _chirp_monotone(cls, value: List[float]) -> List[float]:
        if len(value) == 0 or len(value) > 4:
            raise ValueError("chirp_coeffs holds 1 to 4 polynomial coefficients")
        k = pixel_wavenumbers(value)
        if not np.all(np.isfinite(k)) or not np.all(np.diff(k) > 0):
            raise ValueError("pixel -> wavenumber map must be strictly increasing")
        return value

    @model_validator(mode="after")
    def _piston_clear_of_ferrule(self):
        if self.compression(np.float64(MAX_FORCE)) >= self.rest_gap:
            raise ValueError("displacement at 1 N must stay below rest_gap")
        return self

    def compression(self, force: np.ndarray) -> np.ndarray:
        """
        Epoxy spring travel (m) for non-negative forces (N).
        Hookean up to saturation_force; above it the extra travel follows
        knee * tanh((F - Fs) / Fs), which matches value and slope at the knee
        and never exceeds twice the knee displacement.
        """
        k = self.spring_constant
        fs = self.saturation_force
        if fs is None:
            return force / k
        knee = fs / k
        return np.where(force <= fs, force / k, knee + knee * np.tanh((force - fs) / fs))

    def wavenumbers(self) -> np.ndarray:
        return pixel_wavenumbers(self.chirp_coeffs)


# Manufacturing spread between needles built identically.
NEEDLE_PRESETS = {
    1: {"spring_scale": 1.00, "reflectivity": 0.20, "rest_gap": 1.00e-3},
    2: {"spring_scale": 0.90, "reflectivity": 0.15, "rest_gap": 1.02e-3},
    3: {"spring_scale": 1.12, "reflectivity": 0.25, "rest_gap": 0.97e-3},
}


def needle_preset(needle: int, **overrides) -> NeedleModel:
    """
    Returns the NeedleModel of one of the three preset needles.
    Keyword overrides replace individual fields.
    """
    if needle not in NEEDLE_PRESETS:
        raise ConfigurationError(f"Unknown needle preset {needle}, expected one of {sorted(NEEDLE_PRESETS)}")
    preset = NEEDLE_PRESETS[needle]
    base = NeedleModel()
    params = {
        "spring_constant": base.spring_constant * preset["spring_scale"],
        "reflectivity": preset["reflectivity"],
        "rest_gap": preset["rest_gap"],
    }
    params.update(overrides)
    return NeedleModel(**{**base.model_dump(), **params})


class ForceProfile(BaseModel):
    """Applied axial force per scan, N."""
    samples: List[float]
    description: Literal["ramp", "triangle", "sinusoid", "random-walk", "custom"] = "custom"

    @field_validator("samples")
    @classmethod
    def _in_range(cls, value: List[float]) -> List[float]:
        arr = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("forces must be finite")
        if np.any(arr < 0.0) or np.any(arr > MAX_FORCE):
            raise ValueError("forces must lie in [0, 1] N")
        return value
