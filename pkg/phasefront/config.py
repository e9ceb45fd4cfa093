"""Configuration management for phasefront."""

import math
from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numeric defaults loaded from environment variables (prefix PHASEFRONT_)."""

    # Logging
    LOG_LEVEL: str = "INFO"

    # Grids (detection needs |lambda|*L well inside the band, evolution needs pi/h >= L)
    DETECTION_L: float = 40.0
    DETECTION_N: int = 4096
    EVOLUTION_L: float = 80.0
    EVOLUTION_N: int = 4096

    # Bargmann transform
    BARGMANN_WINDOW: float = 8.0  # Gaussian window half-width in standard deviations
    BARGMANN_ROW_BATCH: int = 64

    # Wave front detection
    ANGULAR_BINS: int = 64
    SECTOR_WIDTH_FACTOR: float = 1.5  # sector half-width in units of the bin half-width
    PROBE_R0: float = 4.0
    PROBE_R1: float = 16.0
    RADIAL_SHELLS: int = 12
    DECAY_N_MAX: float = 8.0
    DECAY_N_THRESHOLD: float = 3.0
    SOBOLEV_NESTED_R1: List[float] = [8.0, 12.0, 16.0]
    SOBOLEV_GROWTH_THRESHOLD: float = 0.2
    PHASE_GRID_COUNT: int = 257

    # Signals and evolution
    CHIRP_NYQUIST_FRACTION: float = 0.8
    NYQUIST_EDGE_FRACTION: float = 0.05
    NYQUIST_MASS_TOLERANCE: float = 1e-6
    BLOWUP_FACTOR: float = 1e3
    TRUNCATION_TOLERANCE: float = 1e-6
    MAX_ROTATION_STEP: float = math.pi / 4

    # Flows
    FD_RELATIVE_STEP: float = 1e-5

    # Paradifferential calculus
    QUADRATURE_NODES: int = 16
    COMPLEX_STEP: float = 1e-20
    KN_ROW_BATCH: int = 256

    model_config = SettingsConfigDict(
        env_prefix="PHASEFRONT_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


# Global settings instance
settings = Settings()
