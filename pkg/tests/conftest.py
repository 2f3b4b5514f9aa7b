from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from src.config import get_settings
from src.core.graphon import StepGraphon
from src.db.session import get_engine

# the autouse environment fixture is function scoped; hypothesis examples share it safely
settings.register_profile("graphon-spectra", deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("graphon-spectra")


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    # every test gets its own database and output root; cached settings are re-read
    monkeypatch.setenv("GRAPHON_SPECTRA_DB_URL", f"sqlite:///{tmp_path / 'runs.db'}")
    monkeypatch.setenv("GRAPHON_SPECTRA_OUTPUT_ROOT", str(tmp_path / "out"))
    monkeypatch.setenv("GRAPHON_SPECTRA_THREADS", "2")
    get_settings.cache_clear()
    get_engine.cache_clear()
    yield
    get_settings.cache_clear()
    get_engine.cache_clear()


@pytest.fixture
def bipartite() -> StepGraphon:
    return StepGraphon(np.array([0.5, 0.5]), np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def two_block() -> StepGraphon:
    return StepGraphon(np.array([0.5, 0.5]), np.array([[1.0, 2.0], [2.0, 3.0]]))
