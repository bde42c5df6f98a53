"""
Run Configuration

Validated settings for one command-line run. Values come from, in increasing
precedence: defaults, VEILCACHE_* environment variables (and a .env file), a
JSON config file, and command-line flags.
"""

import json
import logging
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import Field as SettingsField
from pydantic import ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.errors import ConfigError
from core.galois import Field, field_for_params, is_prime

logger = logging.getLogger(__name__)

DEFAULT_CAP = 10 ** 6


class LogLevel(str, Enum):
    """Logging levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class RunConfig(BaseSettings):
    """System size, code, randomness and output settings."""

    model_config = SettingsConfigDict(
        env_prefix="VEILCACHE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # System
    K: int = 2
    N: int = 2
    F: Optional[int] = None
    L: int = 1
    p: Optional[int] = None
    generator: Optional[Path] = None
    library: Optional[Path] = None
    preset: Optional[str] = None

    # Scheme
    mode: Literal["private", "nonprivate", "hybrid"] = "private"
    M: Optional[str] = None
    seed: Optional[int] = None
    keys: Optional[List[int]] = None

    # Audit
    cap: int = DEFAULT_CAP
    jobs: Optional[int] = None

    # Output
    output: Path = Path("out")
    log_level: LogLevel = SettingsField(LogLevel.INFO)

    @field_validator("K", "N", "L")
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("F")
    @classmethod
    def validate_file_length(cls, v):
        if v is not None and v < 1:
            raise ValueError("file length must be at least 1")
        return v

    @field_validator("p")
    @classmethod
    def validate_prime(cls, v):
        if v is not None and (v < 2 or not is_prime(v)):
            raise ValueError(f"{v} is not a prime")
        return v

    @field_validator("cap")
    @classmethod
    def validate_cap(cls, v):
        if v < 1:
            raise ValueError("cap must be at least 1")
        return v

    @field_validator("jobs")
    @classmethod
    def validate_jobs(cls, v):
        if v is not None and v < 1:
            raise ValueError("jobs must be at least 1")
        return v

    @field_validator("M")
    @classmethod
    def validate_memory(cls, v):
        if v is None:
            return v
        try:
            m = Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot read M={v!r} as a rational") from None
        if m < 0:
            raise ValueError("M must be non-negative")
        return v.strip()

    def resolved_field(self) -> Field:
        """The override prime if given, else the smallest prime >= KN."""
        if self.p is not None:
            return Field(self.p)
        return field_for_params(self.K, self.N)

    def file_length(self) -> int:
        return self.F if self.F is not None else self.L * (self.K * (self.N - 1) + 1)

    def memory(self) -> Optional[Fraction]:
        return None if self.M is None else Fraction(self.M)

    def to_dict(self) -> Dict[str, Any]:
        """Configuration as plain data, forced keys masked."""
        config_dict = self.model_dump(mode="json")
        if config_dict.get("keys"):
            config_dict["keys"] = "***"
        return config_dict


def load_run_config(config_file: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """Merge a JSON config file with flag overrides; None-valued flags are ignored."""
    data: Dict[str, Any] = {}
    if config_file is not None:
        try:
            data = json.loads(Path(config_file).read_text())
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read config file {config_file}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {config_file} must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        config = RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    logger.debug(f"Run configuration: {config.to_dict()}")
    return config
