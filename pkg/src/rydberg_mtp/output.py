"""CSV/JSON artifacts and the run manifest."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rydberg_mtp.analysis import MapResult, SpectrumResult
from rydberg_mtp.errors import raise_numerical_error

LOGGER = logging.getLogger(__name__)

Cell = float | int | str | None

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Table:
    """Rows ready for CSV output plus the metadata of the JSON sidecar."""

    columns: list[str]
    rows: list[tuple[Cell, ...]]
    metadata: dict[str, object] = field(default_factory=dict)


def spectrum_table(result: SpectrumResult) -> Table:
    """One row per axis point: axis, observable, then extra columns."""
    extra_names = sorted(result.extras)
    columns = [result.axis.name, result.value_name, *extra_names]
    layers = [
        result.axis.values,
        result.values,
        *(result.extras[name] for name in extra_names),
    ]
    rows: list[tuple[Cell, ...]] = [
        tuple(float(layer[i]) for layer in layers) for i in range(result.axis.size)
    ]
    metadata = {"axes": [result.axis.describe()], "metadata": result.metadata}
    return Table(columns=columns, rows=rows, metadata=metadata)


def map_table(*maps: MapResult) -> Table:
    """Row-major rows (y outer, x inner) with one column per map layer.

    All maps must share their grid; each contributes its values followed by
    its extra layers.
    """
    if not maps:
        raise_numerical_error("GridMismatch", "map_table needs at least one map")
    first = maps[0]
    for other in maps[1:]:
        if not first.same_grid(other):
            raise_numerical_error(
                "GridMismatch", "maps written together must share axes"
            )
    columns = [first.y_axis.name, first.x_axis.name]
    layers: list[np.ndarray] = []
    for item in maps:
        columns.append(item.value_name)
        layers.append(item.values)
        for name in sorted(item.extras):
            columns.append(name)
            layers.append(item.extras[name])
    rows: list[tuple[Cell, ...]] = []
    for j, y in enumerate(first.y_axis.values.tolist()):
        for i, x in enumerate(first.x_axis.values.tolist()):
            rows.append((y, x, *(float(layer[j, i]) for layer in layers)))
    metadata = {
        "axes": [first.y_axis.describe(), first.x_axis.describe()],
        "metadata": {item.value_name: item.metadata for item in maps},
    }
    return Table(columns=columns, rows=rows, metadata=metadata)


def format_cell(value: Cell) -> str:
    """Render one CSV cell; floats use 12 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        if math.isnan(value):
            raise_numerical_error("NonFiniteOutput", "refusing to write NaN")
        return format(value, ".12g")
    return str(value)


def _json_ready(value: object) -> object:
    if isinstance(value, dict):
        return {str(key): _json_ready(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_json_ready(item) for item in value]
    if isinstance(value, np.ndarray):
        return _json_ready(value.tolist())
    if isinstance(value, np.generic):
        return _json_ready(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def write_json(path: Path, payload: object) -> None:
    """Write deterministic, indented JSON."""
    text = json.dumps(_json_ready(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def emit(table: Table, directory: Path, name: str) -> list[Path]:
    """Write ``<name>.csv`` and its ``<name>.json`` sidecar.

    Every cell is rendered before anything touches the disk, so a NaN
    leaves no partial file behind.

    Raises:
        NumericalError: If any value is NaN.

    """
    rendered = [[format_cell(value) for value in row] for row in table.rows]
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{name}.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(table.columns)
        writer.writerows(rendered)
    json_path = directory / f"{name}.json"
    write_json(
        json_path,
        {"columns": table.columns, "rows": len(rendered), **table.metadata},
    )
    LOGGER.info("wrote %s (%d rows)", csv_path, len(rendered))
    return [csv_path, json_path]


def write_manifest(
    directory: Path,
    *,
    command: str,
    config: dict[str, object],
    version: str,
    wall_time_s: float,
    files: Sequence[Path],
    results: dict[str, object],
    diagnostics: dict[str, object],
    provenance: dict[str, object],
) -> Path:
    """Write ``manifest.json`` describing one run."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / MANIFEST_NAME
    write_json(
        path,
        {
            "command": command,
            "config": config,
            "version": version,
            "wall_time_s": wall_time_s,
            "files": [item.name for item in files],
            "results": results,
            "diagnostics": diagnostics,
            "provenance": provenance,
        },
    )
    return path
