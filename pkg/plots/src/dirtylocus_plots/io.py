"""Reading and validating dirtylocus analysis CSV files.

Analysis files start with a '#'-prefixed run-manifest comment block
(tool marker, command, config digest, settings), then a CSV header and
data rows, optionally followed by trailing comment lines (a JSON trailer
such as the winding record, or status lines from the locus tracer).
"""

from __future__ import annotations

import csv
import json
import io as _io
from dataclasses import dataclass, field


class SchemaError(ValueError):
    """The input is not a well-formed analysis file of the requested kind."""


FIGURE_KINDS = ("locus", "nyquist", "sensitivity", "sweep")

REQUIRED_COLUMNS = {
    "sweep": {"tau", "path_id", "family", "re", "im"},
    "nyquist": {"omega", "H_re", "H_im"},
    "sensitivity": {"omega", "sensitivity"},
    "locus": {"tau", "re", "im", "residual"},
}


@dataclass(frozen=True)
class PlotJob:
    """One figure request: input analysis files, figure kind, output path."""

    inputs: tuple[str, ...]
    kind: str
    out: str
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input file is required")


@dataclass(frozen=True)
class AnalysisFile:
    """A parsed analysis CSV: manifest fields, rows, optional trailer."""

    path: str
    manifest: dict
    columns: tuple[str, ...]
    rows: tuple[dict, ...]
    trailer: dict | None = None
    status_lines: tuple[str, ...] = field(default_factory=tuple)

    @property
    def digest(self) -> str:
        return self.manifest.get("config_digest", "unknown")

    def column(self, name: str) -> list[float]:
        return [float(r[name]) for r in self.rows]


def _parse_manifest(lines: list[str], path: str) -> dict:
    if not lines or not lines[0].startswith("# dirtylocus "):
        raise SchemaError(
            f"{path}: missing run-manifest header (expected a '# dirtylocus ...' line)"
        )
    manifest = {"tool": lines[0][2:].strip()}
    for line in lines[1:]:
        body = line[1:].strip()
        if ": " not in body:
            continue
        key, value = body.split(": ", 1)
        try:
            manifest[key] = json.loads(value)
        except json.JSONDecodeError:
            manifest[key] = value
    return manifest


def read_analysis_file(path: str) -> AnalysisFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path!r}: {exc}") from exc
    head = []
    idx = 0
    while idx < len(lines) and lines[idx].startswith("#"):
        head.append(lines[idx])
        idx += 1
    manifest = _parse_manifest(head, path)
    body, tail = [], []
    for line in lines[idx:]:
        if line.startswith("#"):
            tail.append(line)
        elif line.strip():
            body.append(line)
    if not body:
        raise SchemaError(f"{path}: no data rows")
    reader = csv.DictReader(_io.StringIO("\n".join(body)))
    columns = tuple(reader.fieldnames or ())
    rows = tuple(dict(r) for r in reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    trailer = None
    status_lines = []
    for line in tail:
        payload = line[1:].strip()
        if payload.startswith("{"):
            try:
                trailer = json.loads(payload)
            except json.JSONDecodeError:
                status_lines.append(payload)
        else:
            status_lines.append(payload)
    return AnalysisFile(path, manifest, columns, rows, trailer, tuple(status_lines))


def validate_for_kind(data: AnalysisFile, kind: str) -> None:
    missing = REQUIRED_COLUMNS[kind] - set(data.columns)
    if missing:
        raise SchemaError(
            f"{data.path}: not a {kind} file, missing columns {sorted(missing)} "
            f"(found {list(data.columns)})"
        )
