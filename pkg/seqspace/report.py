"""Seqspace - Reproducible run reports in json, csv and human formats"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from .config import SCHEMA, OutputFormat, RunConfig, Tolerances

logger = logging.getLogger(__name__)


class Report(BaseModel):
    """Result of one subcommand, tagged with everything needed to rerun it"""
    schema_: str = Field(default=SCHEMA, alias="schema")
    command: str
    config_hash: str
    seed: int
    tolerances: Tolerances
    result: Dict[str, Any]

    model_config = ConfigDict(populate_by_name=True)

    @classmethod
    def build(cls, command: str, config: RunConfig, result: Any) -> "Report":
        if isinstance(result, BaseModel):
            result = result.model_dump(mode="json")
        return cls(
            command=command,
            config_hash=config.config_hash(),
            seed=config.seed,
            tolerances=config.tolerances,
            result=result,
        )

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def _flatten(prefix: str, value: Any, rows: List[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), item, rows)
    elif isinstance(value, list) and value and all(isinstance(v, (int, float)) for v in value):
        rows.append((prefix, " ".join(f"{v:.12g}" for v in value)))
    elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
        for index, item in enumerate(value):
            _flatten(f"{prefix}[{index}]", item, rows)
    elif isinstance(value, float):
        rows.append((prefix, f"{value:.12g}"))
    else:
        rows.append((prefix, json.dumps(value) if isinstance(value, list) else str(value)))


def report_rows(report: Report) -> List[tuple[str, str]]:
    rows: List[tuple[str, str]] = [
        ("schema", report.schema_),
        ("command", report.command),
        ("config_hash", report.config_hash),
        ("seed", str(report.seed)),
    ]
    _flatten("", report.result, rows)
    return rows


def render(report: Report, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.JSON:
        return report.to_json()
    rows = report_rows(report)
    if fmt is OutputFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        writer.writerows(rows)
        return buffer.getvalue().rstrip("\n")
    width = max(len(key) for key, _ in rows)
    return "\n".join(f"{key.ljust(width)}  {value}" for key, value in rows)


def emit(report: Report, fmt: OutputFormat, path: Optional[Path] = None) -> str:
    """Render and write to `path` (or return for stdout)"""
    text = render(report, fmt)
    logger.debug(f"Report {report.command}: {report.model_dump_json(by_alias=True)}")
    if path is not None:
        Path(path).write_text(text + "\n")
        logger.info(f"Report written to {path}")
    return text
