from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable

import pandas as pd

from src.errors import ConfigError, ValidationError

# Shared writers for everything the CLI and the experiment pipelines emit.
# Curves, moment tables and eigenvalues go to CSV through pandas; reports and configs go to JSON.
# JSON is written canonically (sorted keys, fixed indentation, NaN -> null) so that the same
# content always produces the same bytes and can be hashed.


def _clean(value: Any) -> Any:
    # json cannot encode NaN/inf or numpy scalars; normalize recursively
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "tolist"):
        return _clean(value.tolist())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    return value


def canonical_json(doc: Any) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(doc: Any, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)  # create folders if missing
    path.write_text(canonical_json(doc), encoding="utf-8")
    return path


def csv_text(rows: Iterable[dict]) -> str:
    # same columns as write_rows, for commands that print to stdout
    return pd.DataFrame(list(rows)).to_csv(index=False, lineterminator="\n")


def write_rows(rows: Iterable[dict], path: str | Path) -> Path:
    # rows are plain dicts (to_rows() of curves, tables and spectra); pandas turns them into columns
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(list(rows)).to_csv(path, index=False)
    return path


def read_eigenvalues(path: str | Path) -> pd.Series:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"eigenvalue file not found: {path}")
    frame = pd.read_csv(path)
    if "eigenvalue" not in frame.columns:
        raise ValidationError(f"{path} has no 'eigenvalue' column")
    return frame["eigenvalue"]


def experiment_dir(output_root: str | Path, name: str) -> Path:
    # every experiment writes under <output_root>/experiments/<name>/
    return Path(output_root) / "experiments" / name
