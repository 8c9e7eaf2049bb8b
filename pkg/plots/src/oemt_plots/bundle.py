"""Read-only access to result bundles (CSV tables plus JSON sidecars)."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path


class PlotError(Exception):
    """Raised when a bundle cannot be rendered as requested."""


def _parse_cell(text: str):
    """Invert the writer's cell encoding: bool, int, float, else string."""
    if text == "True":
        return True
    if text == "False":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass(frozen=True)
class Table:
    """One CSV table with its parsed rows and optional JSON sidecar."""

    name: str
    columns: tuple[str, ...]
    rows: list[tuple]
    sidecar: dict

    def column(self, name: str) -> list:
        """Return one column; a missing name reports what is available."""
        if name not in self.columns:
            raise PlotError(
                f"table '{self.name}' has no column '{name}'; "
                f"available columns: {', '.join(self.columns)}"
            )
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def has_column(self, name: str) -> bool:
        return name in self.columns


class Bundle:
    """A result bundle directory. Never writes to it."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise PlotError(f"bundle directory not found: {self.root}")
        self.metadata = self._load_json(self.root / "metadata.json")

    def _load_json(self, path: Path) -> dict:
        if not path.is_file():
            return {}
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def table_names(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.csv"))

    def tables(self, prefix: str) -> list[Table]:
        """All tables whose file name starts with the prefix, sorted by name."""
        found = [self.table(p.stem) for p in sorted(self.root.glob(f"{prefix}*.csv"))]
        return found

    def require_tables(self, prefix: str, kind: str) -> list[Table]:
        found = self.tables(prefix)
        if not found:
            have = ", ".join(self.table_names()) or "none"
            raise PlotError(
                f"kind '{kind}' needs a '{prefix}*' table in {self.root}; "
                f"available tables: {have}"
            )
        return found

    def table(self, name: str) -> Table:
        path = self.root / f"{name}.csv"
        if not path.is_file():
            have = ", ".join(self.table_names()) or "none"
            raise PlotError(f"no table '{name}' in {self.root}; available tables: {have}")
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [tuple(_parse_cell(cell) for cell in row) for row in reader]
        sidecar = self._load_json(self.root / f"{name}.json")
        return Table(name=name, columns=tuple(header), rows=rows, sidecar=sidecar)
