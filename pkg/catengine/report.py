"""
Flat-file outputs: CSV tables, JSON results, manifest sidecars, xlsx
workbooks and gnuplot scripts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import pandas as pd
from openpyxl import Workbook
from openpyxl.utils import get_column_letter

from catengine import __version__, settings
from catengine.config_schema import RunManifest

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"
MAX_SHEET_TITLE = 31


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def config_digest(payload: Any) -> str:
    """SHA-256 of the canonical JSON form; key order and whitespace do not matter."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def manifest_path(data_path: Path) -> Path:
    return data_path.with_name(data_path.name + ".manifest.json")


@dataclass
class ReportWriter:
    """
    Single writer for one CLI invocation. Every data file it writes gets a
    RunManifest sidecar carrying the command, the config digest, the seed
    and the wall time since the writer was created.
    """
    command: str
    config: Any
    seed: int
    output_dir: Path = field(default_factory=lambda: Path(settings.OUTPUT_DIR))
    started: float = field(default_factory=time.monotonic)

    def __post_init__(self) -> None:
        self.output_dir = Path(self.output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.digest = config_digest(self.config)

    def _manifest(self, data_path: Path) -> Path:
        manifest = RunManifest(
            command=self.command,
            config_digest=self.digest,
            seed=self.seed,
            tool_version=__version__,
            wall_time_seconds=round(time.monotonic() - self.started, 3),
            data_file=data_path.name,
        )
        target = manifest_path(data_path)
        target.write_text(json.dumps(manifest.model_dump(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return target

    def write_table(self, frame: pd.DataFrame, name: str) -> Path:
        path = self.output_dir / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        self._manifest(path)
        logger.info("Wrote %s (%d rows)", path, len(frame))
        return path

    def write_json(self, payload: Dict[str, Any], name: str) -> Path:
        path = self.output_dir / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
        self._manifest(path)
        logger.info("Wrote %s", path)
        return path

    def write_workbook(self, tables: Dict[str, pd.DataFrame], summary: Dict[str, Any], name: str) -> Path:
        path = self.output_dir / f"{name}.xlsx"
        export_workbook(tables, summary, path)
        self._manifest(path)
        logger.info("Wrote %s (%d sheets)", path, len(tables) + 1)
        return path

    def write_gnuplot(self, frame: pd.DataFrame, csv_path: Path, name: str, x: str, y: Sequence[str]) -> Path:
        path = self.output_dir / f"{name}.gp"
        path.write_text(gnuplot_script(frame, csv_path.name, x, y, title=name), encoding="utf-8")
        self._manifest(path)
        logger.info("Wrote %s", path)
        return path


def _auto_size_columns(worksheet) -> None:
    for column_cells in worksheet.columns:
        length = max(len(str(cell.value or "")) for cell in column_cells)
        worksheet.column_dimensions[get_column_letter(column_cells[0].column)].width = min(length + 2, 60)


def _cell(value: Any) -> Any:
    if value is None:
        return None
    if isinstance(value, float) and value != value:
        return None
    if hasattr(value, "item"):
        return value.item()
    return value


def export_workbook(tables: Dict[str, pd.DataFrame], summary: Dict[str, Any], path: Union[str, Path]) -> None:
    """Summary sheet of key/value pairs followed by one sheet per table."""
    workbook = Workbook()
    summary_sheet = workbook.active
    summary_sheet.title = "Summary"
    summary_sheet.append(["Field", "Value"])
    for key, value in summary.items():
        if isinstance(value, dict):
            summary_sheet.append([])
            summary_sheet.append([key.replace("_", " ").title(), ""])
            for inner_key, inner_value in value.items():
                summary_sheet.append([str(inner_key), _cell(inner_value)])
            continue
        summary_sheet.append([key.replace("_", " ").title(), _cell(value)])
    _auto_size_columns(summary_sheet)

    for name, frame in tables.items():
        sheet = workbook.create_sheet(title=name[:MAX_SHEET_TITLE])
        sheet.append([str(c) for c in frame.columns])
        for record in frame.itertuples(index=False):
            sheet.append([_cell(v) for v in record])
        _auto_size_columns(sheet)
    workbook.save(path)


def _gnuplot_string(value: str) -> str:
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def gnuplot_script(frame: pd.DataFrame, csv_name: str, x: str, y: Sequence[str], title: str = "") -> str:
    """
    Script plotting ``y`` against ``x`` from the CSV, one curve per
    (case, parity) group. Columns are addressed by position.
    """
    columns = list(frame.columns)
    x_col = columns.index(x) + 1
    group_keys = [key for key in ("case", "parity") if key in columns]
    groups = frame[group_keys].drop_duplicates().itertuples(index=False) if group_keys else [()]

    lines = [
        f"# {title}",
        'set datafile separator ","',
        "set key outside right",
        f"set xlabel {_gnuplot_string(x)}",
        f"set ylabel {_gnuplot_string(', '.join(y))}",
        f"set title {_gnuplot_string(title)}",
    ]
    curves = []
    for group in groups:
        condition = " && ".join(
            f"strcol({columns.index(key) + 1}) eq {_gnuplot_string(value)}" for key, value in zip(group_keys, group)
        ) or "1"
        label = " ".join(str(v) for v in group)
        for column in y:
            y_col = columns.index(column) + 1
            curves.append(
                f"{_gnuplot_string(csv_name)} every ::1 using {x_col}:({condition} ? ${y_col} : 1/0) "
                f"with linespoints title {_gnuplot_string((label + ' ' + column).strip())}"
            )
    lines.append("plot " + ", \\\n     ".join(curves))
    return "\n".join(lines) + "\n"


def find_manifest(data_path: Union[str, Path]) -> Optional[RunManifest]:
    path = manifest_path(Path(data_path))
    if not path.exists():
        return None
    return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
