"""
Toolkit Configuration Management

Centralized configuration for the path feasibility query toolkit with support for:
- Machine semantics (word width, UnDef resolution)
- Change value analysis and optimization pipeline defaults
- Path exploration budgets
- Brute-force oracle bounds
- Solver benchmarking
- Environment-specific logging
"""

from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Environment(str, Enum):
    """Environment types."""
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class LogLevel(str, Enum):
    """Logging levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class CvaModeName(str, Enum):
    """UnDef substitution modes of the change value analysis."""
    CONSERVATIVE = "conservative"
    AGGRESSIVE = "aggressive"


class BranchArm(str, Enum):
    """Arm taken when a branch condition folds to UnDef."""
    THEN = "then"
    ELSE = "else"


class OutputFormat(str, Enum):
    """Formula output formats."""
    STP = "stp"
    SMTLIB2 = "smt2"


class MachineSettings(BaseSettings):
    """Word width and UnDef resolution used by the interpreter and lowering."""

    model_config = SettingsConfigDict(env_prefix="PFQ_MACHINE_", extra="ignore")

    bit_width: int = Field(default=32, ge=2, le=64, description="Bitvector word width")
    undef_value: int = Field(default=0, description="Value read for UnDef under the fixed policy")
    undef_seed: Optional[int] = Field(
        default=None,
        description="When set, UnDef reads are drawn from a generator seeded with this value",
    )


class AnalysisSettings(BaseSettings):
    """Change value analysis and pass pipeline defaults."""

    model_config = SettingsConfigDict(env_prefix="PFQ_ANALYSIS_", extra="ignore")

    cva_mode: CvaModeName = Field(default=CvaModeName.CONSERVATIVE)
    passes: List[str] = Field(default=["constprop", "sccp-undef", "dce", "dse"])
    max_rounds: int = Field(default=10, ge=1)
    undef_branch: BranchArm = Field(default=BranchArm.THEN)


class PathSettings(BaseSettings):
    """Budgets for path walking and enumeration."""

    model_config = SettingsConfigDict(env_prefix="PFQ_PATH_", extra="ignore")

    fuel: int = Field(default=10_000, ge=1)
    max_paths: int = Field(default=64, ge=1)


class OracleSettings(BaseSettings):
    """Bounds of the exhaustive satisfiability oracle."""

    model_config = SettingsConfigDict(env_prefix="PFQ_ORACLE_", extra="ignore")

    max_width: int = Field(default=6, ge=1, le=6)
    max_array_cells: int = Field(default=8, ge=0, le=8)
    max_state_bits: int = Field(default=24, ge=1, le=24)


class BenchSettings(BaseSettings):
    """External solver benchmarking."""

    model_config = SettingsConfigDict(env_prefix="PFQ_BENCH_", extra="ignore")

    reps: int = Field(default=5, ge=1)
    timeout: float = Field(default=60.0, gt=0)
    measure_memory: bool = Field(default=False)


class Settings(BaseSettings):
    """Main toolkit settings."""

    model_config = SettingsConfigDict(
        env_prefix="PFQ_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Info
    app_name: str = Field(default="pfq")
    app_version: str = Field(default="1.0.0")

    # Environment
    environment: Environment = Field(default=Environment.DEVELOPMENT)

    # Logging
    log_level: LogLevel = Field(default=LogLevel.WARNING)
    log_json: bool = Field(default=False)
    log_file: Optional[str] = Field(default=None)

    # Paths
    fixtures_dir: Path = Field(default=Path(__file__).resolve().parent.parent / "fixtures")

    # Sub-configurations
    machine: MachineSettings = Field(default_factory=MachineSettings)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
    path: PathSettings = Field(default_factory=PathSettings)
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    bench: BenchSettings = Field(default_factory=BenchSettings)

    @field_validator("environment", mode="before")
    @classmethod
    def validate_environment(cls, v):
        """Validate environment setting."""
        if isinstance(v, str):
            return Environment(v.lower())
        return v

    @field_validator("log_level", mode="before")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level setting."""
        if isinstance(v, str):
            return LogLevel(v.upper())
        return v

    @property
    def is_production(self) -> bool:
        """Check if running in production."""
        return self.environment == Environment.PRODUCTION


# Global settings instance
settings = Settings()


# Convenience functions
def get_settings() -> Settings:
    """Get toolkit settings."""
    return settings


def fixture_path(name: str) -> Path:
    """Resolve a bundled fixture file."""
    return settings.fixtures_dir / name
