"""
Core Package

Shared infrastructure of the path feasibility query toolkit:
- Environment-driven configuration management
- Structured logging setup
- Error hierarchy with source positions
"""

from .config import (
    settings,
    get_settings,
    fixture_path,
    Settings,
    Environment,
    LogLevel,
    CvaModeName,
    BranchArm,
    OutputFormat,
)

from .log import setup_logging

from .errors import (
    PfqError,
    ConfigError,
)

__all__ = [
    # Configuration
    "settings",
    "get_settings",
    "fixture_path",
    "Settings",
    "Environment",
    "LogLevel",
    "CvaModeName",
    "BranchArm",
    "OutputFormat",

    # Logging
    "setup_logging",

    # Errors
    "PfqError",
    "ConfigError",
]
