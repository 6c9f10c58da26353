"""CSV/JSON emission for reports, geodesic paths and curvature scans."""

import csv
import io
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

from .default_config_settings import save_config_to_file
from .errors import OutputError

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"
FORMATS = ("csv", "json")


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "nan"
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def write_text_atomic(text: str, path: str) -> str:
    """Write to ``<path>.tmp`` then rename, so a failed run leaves no partial file."""
    tmp_path = f"{path}.tmp"
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(tmp_path, "w", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except OSError as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise OutputError(f"cannot write {path}: {e}")
    logger.info(f"Wrote {path}")
    return path


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


def rows_from_csv(text: str) -> List[Dict[str, Any]]:
    """Parse a CSV written by this module; numbers become floats, flags bools."""
    records = []
    for raw in csv.DictReader(io.StringIO(text)):
        record = {}
        for key, value in raw.items():
            if value in ("true", "false"):
                record[key] = value == "true"
            elif value == "suppressed":
                record[key] = None
            else:
                try:
                    record[key] = float(value)
                except ValueError:
                    record[key] = value
        records.append(record)
    return records


def write_outputs(report, format: str, path: str) -> str:
    """Serialize a report (anything with ``to_csv``/``to_json``) to ``path``."""
    if format not in FORMATS:
        raise OutputError(f"unknown output format {format!r}, expected one of {FORMATS}")
    text = report.to_csv() if format == "csv" else report.to_json()
    return write_text_atomic(text, path)


def path_header(dim: int) -> List[str]:
    return ["t", *(f"x{i}" for i in range(dim)), *(f"v{i}" for i in range(dim)), "speed"]


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any]
    seeds: Dict[str, int]
    tolerances: Dict[str, Any]
    version: str = TOOL_VERSION
    wall_clock: float = 0.0
    outputs: List[str] = field(default_factory=list)
    started: Optional[float] = field(default=None, repr=False)

    def start(self):
        self.started = time.perf_counter()
        return self

    def finish(self, outputs: Sequence[str]):
        if self.started is not None:
            self.wall_clock = round(time.perf_counter() - self.started, 3)
        self.outputs = list(outputs)
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("started")
        return data


def manifest_path(output_path: str) -> str:
    return f"{output_path}.manifest.json"


def write_manifest(manifest: RunManifest, output_path: str) -> str:
    """Save ``<out>.manifest.json`` beside an output file."""
    path = manifest_path(output_path)
    try:
        return save_config_to_file(manifest.to_dict(), path)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}")
