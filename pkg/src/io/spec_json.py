# Ensemble spec files. Field names mirror EnsembleSpec one to one; "graphon" may be an inline
# graphon document or a path to one, resolved against the directory of the spec file.

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from src.ensembles.samplers import EnsembleSpec
from src.errors import ConfigError, ValidationError
from src.io.graphon_json import graphon_from_dict, load_graphon

FIELDS = ("kind", "n", "m", "seed", "graphon", "sizes", "weights", "dist", "sparsity")


def spec_from_dict(doc: dict, base_dir: Optional[Path] = None) -> EnsembleSpec:
    unknown = set(doc) - set(FIELDS)
    if unknown:
        raise ValidationError(f"unknown ensemble spec fields: {sorted(unknown)}")
    if "kind" not in doc or "n" not in doc:
        raise ValidationError("an ensemble spec needs at least 'kind' and 'n'")
    fields = dict(doc)
    graphon = fields.get("graphon")
    if isinstance(graphon, str):
        path = Path(graphon)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        fields["graphon"] = load_graphon(path)
    elif isinstance(graphon, dict):
        fields["graphon"] = graphon_from_dict(graphon)
    if fields.get("sizes") is not None:
        fields["sizes"] = tuple(fields["sizes"])
    return EnsembleSpec(**fields)


def load_spec(path: str | Path) -> EnsembleSpec:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"ensemble spec file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"ensemble spec {path} is not valid JSON: {exc}") from exc
    return spec_from_dict(doc, path.parent)


def dump_spec(spec: EnsembleSpec, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
