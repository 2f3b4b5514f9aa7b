# HTTP endpoints: read-only predictions computed from a posted graphon document, the builtin
# experiment catalog, and the latest persisted run per experiment (src/db/models.py).
# Library errors become 422 responses with the message as detail; missing runs are 404.

from __future__ import annotations

import json
from typing import Optional

from fastapi import APIRouter, Depends, HTTPException
from pydantic import BaseModel, Field
from sqlalchemy import desc, select
from sqlalchemy.orm import Session

from src.core.graphon import refine
from src.core.qve import density_curve, solve_gram_qve, solve_qve
from src.db.models import ExperimentRun
from src.db.session import get_session
from src.errors import GraphonSpectraError
from src.io.graphon_json import graphon_from_dict
from src.spectra.compare import predicted_moments

from pipelines.experiments.catalog import experiment_names

router = APIRouter()


class GraphonRequest(BaseModel):
    graphon: dict
    gram: bool = False
    aspect: Optional[float] = None


class MomentsRequest(GraphonRequest):
    max_order: int = Field(6, ge=0)


class QveRequest(GraphonRequest):
    # [Re z, Im z]
    z: list[float] = Field(..., min_length=2, max_length=2)


class DensityRequest(GraphonRequest):
    e_min: float = -3.0
    e_max: float = 3.0
    points: int = Field(201, ge=2, le=20001)
    eta: float = Field(0.01, gt=0)


def _graphon(body: GraphonRequest):
    return refine(graphon_from_dict(body.graphon))


@router.get("/health")
def health() -> dict:
    return {"status": "ok"}


@router.post("/moments")
def post_moments(body: MomentsRequest) -> dict:
    try:
        table = predicted_moments(_graphon(body), body.max_order, body.gram, body.aspect)
    except GraphonSpectraError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return {"source": table.source, "moments": table.to_rows()}


@router.post("/qve")
def post_qve(body: QveRequest) -> dict:
    z = complex(body.z[0], body.z[1])
    try:
        # refined inside the solver, which records the panel count
        W = graphon_from_dict(body.graphon)
        if body.gram:
            if body.aspect is None:
                raise HTTPException(status_code=422, detail="Gram solves need the aspect ratio")
            return solve_gram_qve(W, body.aspect, z).to_dict()
        return solve_qve(W, z).to_dict()
    except GraphonSpectraError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@router.post("/density")
def post_density(body: DensityRequest) -> dict:
    try:
        curve = density_curve(
            _graphon(body), body.e_min, body.e_max, body.points, body.eta, gram=body.gram, y=body.aspect
        )
    except GraphonSpectraError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return {
        "eta": curve.eta,
        "kind": curve.kind,
        # NaN marks grid points whose solve did not converge; JSON gets null
        "points": [{"E": r["E"], "rho": None if r["rho"] != r["rho"] else r["rho"]} for r in curve.to_rows()],
        "failures": [list(f) for f in curve.failures],
    }


@router.get("/experiments")
def get_experiments() -> dict:
    return {"experiments": experiment_names()}


@router.get("/runs/{name}")
def get_latest_run(name: str, session: Session = Depends(get_session)) -> dict:
    query = (
        select(ExperimentRun)
        .where(ExperimentRun.name == name)
        .order_by(desc(ExperimentRun.created_at), desc(ExperimentRun.id))
        .limit(1)
    )
    row = session.execute(query).scalar_one_or_none()
    if row is None:
        raise HTTPException(status_code=404, detail=f"No stored run for {name}")
    return {
        "name": row.name,
        "config_hash": row.config_hash,
        "tool_version": row.tool_version,
        "passed": row.passed,
        "created_at": row.created_at.isoformat(),
        "report": json.loads(row.report_json),
    }
