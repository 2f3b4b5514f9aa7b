# Database connectivity for persisted experiment runs (pipelines/experiments/runner.py) and the
# API routes in src/api/routes.py. The URL comes from GRAPHON_SPECTRA_DB_URL (SQLite by default),
# and the engine is only built on first use so importing the package never touches a database.

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path
from typing import Generator

from sqlalchemy import Engine, create_engine
from sqlalchemy.engine import make_url
from sqlalchemy.orm import Session, sessionmaker

from src.config import get_settings
from src.db.models import Base

log = logging.getLogger(__name__)


def _build_database_url() -> str:
    url = get_settings().db_url
    parsed = make_url(url)
    # SQLite will not create missing folders for its file
    if parsed.get_backend_name() == "sqlite" and parsed.database not in (None, "", ":memory:"):
        Path(parsed.database).parent.mkdir(parents=True, exist_ok=True)
    return url


@lru_cache(maxsize=None)
def get_engine(url: str | None = None) -> Engine:
    url = url or _build_database_url()
    engine = create_engine(url, pool_pre_ping=True)
    # one table, no migrations: create it if missing
    Base.metadata.create_all(engine)
    log.debug("database engine ready for %s", engine.url.render_as_string(hide_password=True))
    return engine


def session_factory(url: str | None = None) -> sessionmaker[Session]:
    return sessionmaker(bind=get_engine(url), autocommit=False, autoflush=False)


def get_session() -> Generator[Session, None, None]:
    # FastAPI dependency: one short-lived session per request, always closed
    session = session_factory()()
    try:
        yield session
    finally:
        session.close()
