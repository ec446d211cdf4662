import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

# Default pipeline configuration, keys as they appear in config files
DEFAULT_CONFIG = {
    "slic-superpixels": 32,
    "slic-cell-size": None,
    "compactness": 10.0,
    "merge-threshold": 25.0,
    "relevance-patch": 32,
    "relevance-stride": 8,
    "relevance-tolerance": 0.5,
    "noise-patch": 8,
    "noise-padding": 3,
    "noise-mode": "refined",
    "suspicion-threshold": 0.4,
    "filter-window": 3,
    "linthresh": 1.0,
    "cluster-backend": "kmeans",
    "cluster-seed": 0,
    "cluster-feature": "energy",
    "energy-window": 15,
    "fuzzifier": 2.0,
    "min-region-pixels": 32,
    "binarize": "otsu",
    "fixed-threshold": 0.5,
    "min-heat": 0.2,
    "min-segment-band-pixels": 64,
    "band-part": "real-imag",
    "heat-denominator": "produced",
    "largest-segment-only": False,
}

_CHOICES = {
    "noise_mode": ("refined", "raw", "balanced"),
    "cluster_backend": ("kmeans", "cmeans"),
    "cluster_feature": ("energy", "magnitude", "value"),
    "binarize": ("otsu", "fixed"),
    "band_part": ("real-imag", "real-abs"),
    "heat_denominator": ("produced", "all"),
}


def to_key(name: str) -> str:
    return name.replace("_", "-")


def to_field(key: str) -> str:
    return key.replace("-", "_")


@dataclass(frozen=True)
class PipelineConfig:
    slic_superpixels: int = 32
    slic_cell_size: Optional[int] = None
    compactness: float = 10.0
    merge_threshold: float = 25.0
    relevance_patch: int = 32
    relevance_stride: int = 8
    relevance_tolerance: float = 0.5
    noise_patch: int = 8
    noise_padding: int = 3
    noise_mode: str = "refined"
    suspicion_threshold: float = 0.4
    filter_window: int = 3
    linthresh: float = 1.0
    cluster_backend: str = "kmeans"
    cluster_seed: int = 0
    cluster_feature: str = "energy"
    energy_window: int = 15
    fuzzifier: float = 2.0
    min_region_pixels: int = 32
    binarize: str = "otsu"
    fixed_threshold: float = 0.5
    min_heat: float = 0.2
    min_segment_band_pixels: int = 64
    band_part: str = "real-imag"
    heat_denominator: str = "produced"
    largest_segment_only: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Raise ConfigError on the first invalid field"""
        positive_ints = (
            "slic_superpixels", "relevance_patch", "relevance_stride", "noise_patch", "energy_window"
        )
        for name in positive_ints:
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                raise ConfigError(f"{to_key(name)} must be a positive integer, got {getattr(self, name)!r}")
        if self.relevance_patch < 2 or self.noise_patch < 2:
            raise ConfigError("patch sizes must be at least 2")
        if self.slic_cell_size is not None and self.slic_cell_size < 1:
            raise ConfigError(f"slic-cell-size must be positive, got {self.slic_cell_size}")
        if self.noise_padding < 0 or self.min_region_pixels < 0 or self.min_segment_band_pixels < 0:
            raise ConfigError("padding and pixel counts must be non-negative")
        if self.filter_window < 3 or self.filter_window % 2 == 0:
            raise ConfigError(f"filter-window must be odd and >= 3, got {self.filter_window}")
        if self.compactness <= 0 or self.linthresh <= 0:
            raise ConfigError("compactness and linthresh must be positive")
        if self.merge_threshold < 0 or self.relevance_tolerance < 0 or self.suspicion_threshold < 0:
            raise ConfigError("thresholds must be non-negative")
        if not 0.0 <= self.fixed_threshold <= 1.0 or not 0.0 <= self.min_heat <= 1.0:
            raise ConfigError("fixed-threshold and min-heat must lie in [0, 1]")
        if self.fuzzifier <= 1.0:
            raise ConfigError(f"fuzzifier must be > 1, got {self.fuzzifier}")
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{to_key(name)} must be one of {', '.join(allowed)}, got {getattr(self, name)!r}")

    @classmethod
    def from_mapping(cls, data: Dict[str, Any]) -> "PipelineConfig":
        """Build from a kebab-case mapping; unknown keys are rejected"""
        known = {f.name for f in fields(cls)}
        values = {}
        for key, value in data.items():
            name = to_field(key)
            if name not in known:
                raise ConfigError(f"unknown configuration key: {key}")
            values[name] = value
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"invalid configuration value: {e}") from e

    def to_mapping(self) -> Dict[str, Any]:
        return {to_key(name): value for name, value in asdict(self).items()}

    def with_overrides(self, **overrides: Any) -> "PipelineConfig":
        """Return a copy with every non-None override applied"""
        changes = {name: value for name, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self


class Config:
    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file or os.getenv("INPAINT_FORENSICS_CONFIG") or "config.json"
        self.data = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from JSON file, falling back to defaults if it does not exist"""
        data = dict(DEFAULT_CONFIG)
        if not os.path.exists(self.config_file):
            logger.debug(f"No config file at {self.config_file}, using defaults")
            return data

        try:
            with open(self.config_file, 'r') as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file: {e}", self.config_file) from e

        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object", self.config_file)
        data.update(loaded)
        logger.info(f"Loaded configuration from {self.config_file}")
        return data

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value"""
        return self.data.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set a configuration value"""
        self.data[key] = value

    def pipeline(self) -> PipelineConfig:
        """Validated pipeline settings"""
        try:
            return PipelineConfig.from_mapping(self.data)
        except ConfigError as e:
            raise ConfigError(e.message, self.config_file) from e
