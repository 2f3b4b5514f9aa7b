from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from src.core.graphon import Graphon
from src.ensembles.samplers import EnsembleSpec
from src.errors import ConfigError, ValidationError
from src.io.graphon_json import graphon_from_dict, load_graphon
from src.io.spec_json import spec_from_dict
from src.io.writers import canonical_json

# An experiment pairs an ensemble with the graphon its limit is predicted from:
# sample every replicate seed, compute the spectrum of the chosen matrix, compare it with
# the tree-density moments and the QVE density of the graphon, and judge the deltas
# against the tolerances.
#
# Config files are JSON:
# {
#   "name": "semicircle-gw",
#   "ensemble": {<EnsembleSpec fields>},
#   "observable": "centered",                       optional, default: the primary matrix
#   "prediction": {"graphon": "g.json" | {...}, "max_order": 6, "eta": 0.05,
#                  "points": 801, "bins": 60, "gram": false, "aspect": null},
#   "tolerances": {"moment": 0.05, "ks": 0.05, "l1": null},
#   "moment_orders": [2, 4, 6],
#   "replicates": {"seeds": [1, 2, 3]}  or  {"count": 3, "base_seed": 1},
#   "diagnostics": ["sbm-perturbation"],
#   "output": {"dir": "data/experiments/semicircle-gw"}
# }
# Relative paths are resolved against the directory of the config file.

DIAGNOSTICS = ("sbm-perturbation",)
TOLERANCE_KEYS = ("moment", "ks", "l1")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    name: str
    ensemble: EnsembleSpec
    graphon: Graphon
    max_order: int = 6
    eta: float = 0.05
    points: int = 801
    bins: int = 60
    gram: bool = False
    aspect: Optional[float] = None
    observable: Optional[str] = None
    tolerances: dict = field(default_factory=lambda: {"moment": 0.05})
    moment_orders: tuple[int, ...] = ()
    seeds: tuple[int, ...] = ()
    diagnostics: tuple[str, ...] = ()
    output_dir: Optional[str] = None
    description: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("an experiment needs a name")
        if self.max_order < 0:
            raise ValidationError("max_order must be non-negative")
        if self.eta <= 0:
            raise ValidationError("eta must be positive")
        if self.gram and (self.aspect is None or self.aspect <= 0):
            raise ValidationError("Gram predictions need a positive aspect ratio")
        for key, value in self.tolerances.items():
            if key not in TOLERANCE_KEYS:
                raise ValidationError(f"unknown tolerance {key!r}; expected one of {TOLERANCE_KEYS}")
            if value is not None and not value > 0:
                raise ValidationError(f"tolerance {key!r} must be positive, got {value!r}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValidationError("replicate seeds must be distinct")
        for d in self.diagnostics:
            if d not in DIAGNOSTICS:
                raise ValidationError(f"unknown diagnostic {d!r}; expected one of {DIAGNOSTICS}")
        orders = self.moment_orders
        if not orders:
            orders = tuple(range(1, self.max_order + 1)) if self.gram else tuple(range(2, self.max_order + 1, 2))
        if any(k < 1 or k > self.max_order for k in orders):
            raise ValidationError(f"moment orders must lie in 1..{self.max_order}")
        object.__setattr__(self, "moment_orders", tuple(orders))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def with_seeds(self, seeds) -> "ExperimentConfig":
        return replace(self, seeds=tuple(seeds))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "ensemble": self.ensemble.to_dict(),
            "observable": self.observable,
            "prediction": {
                "graphon": self.graphon.to_dict(),
                "max_order": self.max_order,
                "eta": self.eta,
                "points": self.points,
                "bins": self.bins,
                "gram": self.gram,
                "aspect": self.aspect,
            },
            "tolerances": dict(self.tolerances),
            "moment_orders": list(self.moment_orders),
            "replicates": {"seeds": list(self.seeds)},
            "diagnostics": list(self.diagnostics),
            "output": {"dir": self.output_dir},
        }

    def config_hash(self) -> str:
        # sha256 of the canonical JSON; the output directory does not change results
        doc = self.to_dict()
        doc.pop("output")
        return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def _resolve(path: str, base_dir: Optional[Path]) -> Path:
    p = Path(path)
    return base_dir / p if base_dir is not None and not p.is_absolute() else p


def _seeds(doc: dict) -> tuple[int, ...]:
    if "seeds" in doc:
        return tuple(int(s) for s in doc["seeds"])
    count = int(doc.get("count", 0))
    if count < 0:
        raise ValidationError("replicate count must be non-negative")
    base = int(doc.get("base_seed", 1))
    return tuple(range(base, base + count))


def config_from_dict(doc: dict, base_dir: Optional[Path] = None) -> ExperimentConfig:
    try:
        prediction = dict(doc.get("prediction", {}))
        graphon_ref = prediction.pop("graphon", None)
        if graphon_ref is None:
            raise ValidationError("the prediction block needs a graphon")
        if isinstance(graphon_ref, str):
            graphon = load_graphon(_resolve(graphon_ref, base_dir))
        else:
            graphon = graphon_from_dict(graphon_ref)
        ensemble = spec_from_dict(doc["ensemble"], base_dir)
        output_dir = (doc.get("output") or {}).get("dir")
        return ExperimentConfig(
            name=doc["name"],
            ensemble=ensemble,
            graphon=graphon,
            max_order=int(prediction.get("max_order", 6)),
            eta=float(prediction.get("eta", 0.05)),
            points=int(prediction.get("points", 801)),
            bins=int(prediction.get("bins", 60)),
            gram=bool(prediction.get("gram", False)),
            aspect=prediction.get("aspect"),
            observable=doc.get("observable"),
            tolerances=dict(doc.get("tolerances", {"moment": 0.05})),
            moment_orders=tuple(doc.get("moment_orders", ())),
            seeds=_seeds(doc.get("replicates", {})),
            diagnostics=tuple(doc.get("diagnostics", ())),
            output_dir=str(_resolve(output_dir, base_dir)) if output_dir else None,
            description=doc.get("description", ""),
        )
    except KeyError as exc:
        raise ValidationError(f"experiment config is missing {exc.args[0]!r}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"experiment config not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"experiment config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc, path.parent)
