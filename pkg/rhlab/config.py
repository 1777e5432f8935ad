"""Runtime configuration."""

from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and CLI settings.

    Attributes
    ----------
    threads : int
        Worker threads used for point evaluation (``RHLAB_THREADS``).
    log_level : str
        Root log level configured by the CLI.
    default_samples : int
        Sample count used when a scenario omits one.
    default_seed : int
        Halton scrambling seed used when a scenario omits one.
    exclusion_margin : float
        Distance in chart units kept from chart singularities.
    critical_gradient : float
        Gradient norm at or below which a point counts as critical.
    jet_order : int
        Truncation order of the jets behind curvature packs.
    ode_tolerance : float
        Default absolute and relative tolerance of the ODE integrator.
    ode_max_step : float
        Largest step the integrator may take, which also bounds grid spacing.
    max_rejection_ratio : float
        Fraction of rejected draws after which sampling gives up.
    report_dir : Path
        Directory used for relative report output paths.
    """

    model_config = SettingsConfigDict(env_prefix="RHLAB_", extra="ignore")

    threads: int = Field(default=4, ge=1)
    log_level: str = "INFO"
    default_samples: int = Field(default=64, ge=1, le=100_000)
    default_seed: int = 0
    exclusion_margin: float = Field(default=0.05, ge=0.0)
    critical_gradient: float = Field(default=1e-4, gt=0.0)
    jet_order: int = Field(default=4, ge=3, le=8)
    ode_tolerance: float = Field(default=1e-10, ge=1e-12, le=1e-6)
    ode_max_step: float = Field(default=0.01, gt=0.0)
    max_rejection_ratio: float = Field(default=0.99, gt=0.0, lt=1.0)
    report_dir: Path = Field(default=Path("."))


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return cached settings.

    Returns
    -------
    Settings
        Cached settings instance.
    """
    return Settings()
