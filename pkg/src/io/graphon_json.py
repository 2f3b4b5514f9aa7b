# Graphon files: the JSON documents that name the limiting object every prediction is made from.
# The schema is flat and keyed by "kind":
#   {"kind": "step", "fractions": [...], "weights": [[...], ...]}
#   {"kind": "constant", "value": c}
#   {"kind": "analytic", "name": "product" | "min" | "max" | "constant", "scale": c}
#   {"kind": "profile", "weights": [[...]]}            equal blocks, one per row
#   {"kind": "gram", "profile": [[...]], "aspect": y, "left_fractions": [...], "right_fractions": [...]}
# An optional "refine": panels on an analytic kernel turns it into a step graphon right away.

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from src.core.graphon import (
    AnalyticGraphon,
    Graphon,
    StepGraphon,
    constant_graphon,
    from_variance_profile,
    gram_graphon,
    refine,
)
from src.errors import ConfigError, ValidationError


def _require(doc: dict, key: str):
    if key not in doc:
        raise ValidationError(f"graphon document of kind {doc.get('kind')!r} is missing {key!r}")
    return doc[key]


def graphon_from_dict(doc: dict) -> Graphon:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValidationError("a graphon document must be an object with a 'kind'")
    kind = doc["kind"]
    if kind == "step":
        W: Graphon = StepGraphon(np.asarray(_require(doc, "fractions")), np.asarray(_require(doc, "weights")))
    elif kind == "constant":
        W = constant_graphon(float(_require(doc, "value")))
    elif kind == "analytic":
        W = AnalyticGraphon(_require(doc, "name"), float(doc.get("scale", 1.0)))
        if "refine" in doc:
            W = refine(W, int(doc["refine"]))
    elif kind == "profile":
        W = from_variance_profile(_require(doc, "weights"))
    elif kind == "gram":
        W = gram_graphon(
            _require(doc, "profile"),
            float(_require(doc, "aspect")),
            doc.get("left_fractions"),
            doc.get("right_fractions"),
        )
    else:
        raise ValidationError(f"unknown graphon kind {kind!r}")
    return W


def graphon_to_dict(W: Graphon) -> dict:
    return W.to_dict()


def load_graphon(path: str | Path) -> Graphon:
    path = Path(path)
    # a missing or unreadable file is a configuration problem, reported with the path
    if not path.is_file():
        raise ConfigError(f"graphon file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"graphon file {path} is not valid JSON: {exc}") from exc
    return graphon_from_dict(doc)


def dump_graphon(W: Graphon, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(graphon_to_dict(W), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
