"""Seqspace - Run configuration, environment defaults and spec-file loading"""

import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Type, TypeVar

from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError
from .search import SearchBudget
from .spaces import SpaceSpec, parse_space

logger = logging.getLogger(__name__)

SCHEMA = "seqspace/1"

Model = TypeVar("Model", bound=BaseModel)


class OutputFormat(Enum):
    """Report rendering"""
    JSON = "json"
    CSV = "csv"
    HUMAN = "human"


class Settings(BaseSettings):
    """Defaults read from SEQSPACE_* environment variables (and .env)"""
    model_config = SettingsConfigDict(env_prefix="SEQSPACE_", extra="ignore")

    seed: int = Field(default=0, ge=0, lt=2**64)
    restarts: int = Field(default=64, ge=0)
    steps: int = Field(default=200, ge=0)
    tol: float = Field(default=1e-9, gt=0.0)
    rel_tol: float = Field(default=1e-6, gt=0.0)
    format: OutputFormat = OutputFormat.HUMAN


class BudgetConfig(BaseModel):
    restarts: int = Field(default=64, ge=0)
    steps: int = Field(default=200, ge=0)

    def search_budget(self) -> SearchBudget:
        return SearchBudget(restarts=self.restarts, steps=self.steps)


class Tolerances(BaseModel):
    absolute: float = Field(default=1e-9, gt=0.0)
    relative: float = Field(default=1e-6, gt=0.0)


class OutputConfig(BaseModel):
    path: Optional[Path] = None
    format: OutputFormat = OutputFormat.HUMAN


class RunConfig(BaseModel):
    """Everything that determines a run's output"""
    space: Optional[SpaceSpec] = None
    seed: int = Field(default=0, ge=0, lt=2**64)
    budget: BudgetConfig = Field(default_factory=BudgetConfig)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @classmethod
    def from_settings(cls, settings: Settings, **overrides: Any) -> "RunConfig":
        """Environment defaults with explicit (non-None) overrides applied"""
        values = {
            "seed": settings.seed,
            "budget": BudgetConfig(restarts=settings.restarts, steps=settings.steps),
            "tolerances": Tolerances(absolute=settings.tol, relative=settings.rel_tol),
            "output": OutputConfig(format=settings.format),
        }
        budget = overrides.pop("budget", None)
        if budget is not None:
            values["budget"] = BudgetConfig(restarts=budget, steps=settings.steps)
        tol = overrides.pop("tol", None)
        if tol is not None:
            values["tolerances"] = Tolerances(absolute=tol, relative=settings.rel_tol)
        path = overrides.pop("out", None)
        fmt = overrides.pop("format", None)
        values["output"] = OutputConfig(
            path=path,
            format=OutputFormat(fmt) if fmt is not None else settings.format,
        )
        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls(**values)
        except ValidationError as e:
            raise _config_error(e, "flags") from e

    def config_hash(self) -> str:
        """First 16 hex digits of sha256 over the canonical config JSON"""
        payload = self.model_dump(mode="json", exclude={"output"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _config_error(error: ValidationError, source: str) -> ConfigError:
    first = error.errors()[0]
    path = ".".join(str(part) for part in first.get("loc", ()))
    return ConfigError(first.get("msg", str(error)), source=source, field=path or None)


def read_json(path: Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read file: {e.strerror}", source=str(path)) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, source=str(path), line=e.lineno, column=e.colno) from e


def load_space(path: Path) -> SpaceSpec:
    data = read_json(path)
    try:
        return parse_space(data)
    except ValidationError as e:
        raise _config_error(e, str(path)) from e


def load_model(path: Path, model: Type[Model]) -> Model:
    data = read_json(path)
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise _config_error(e, str(path)) from e


def parse_vector(text: str) -> list[float]:
    """Comma-separated numbers, e.g. '3,4' or '1, -0.5, 2e-3'"""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"not a comma-separated vector: {text!r}") from e
