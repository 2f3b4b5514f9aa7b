# ORM table for experiment runs that were asked to persist (run_experiment(..., persist=True)
# or `graphon-spectra experiment run --persist`). The API reads the latest run per experiment
# name from here; the full report is kept as canonical JSON text.

from __future__ import annotations

from datetime import datetime, timezone

from sqlalchemy import Boolean, DateTime, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column


def _utcnow() -> datetime:
    # callable default: evaluated per insert, not once at import
    return datetime.now(timezone.utc)


class Base(DeclarativeBase):
    pass


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    # catalog name such as "semicircle-gw"; index = True because the API filters on it
    name: Mapped[str] = mapped_column(String(64), index=True)
    # sha256 of the canonical config JSON; distinguishes reports of different configs
    config_hash: Mapped[str] = mapped_column(String(64), index=True)
    tool_version: Mapped[str] = mapped_column(String(32))
    # NULL for prediction-only runs (no replicates)
    passed: Mapped[bool | None] = mapped_column(Boolean, nullable=True)
    report_json: Mapped[str] = mapped_column(Text)
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), default=_utcnow)
