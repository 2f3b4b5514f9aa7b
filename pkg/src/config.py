# Central settings for the library, the CLI and the API.
# Values come from the environment (optionally a .env file via python-dotenv) so runs
# can be tuned without touching code, the same way the database URL always was.

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

from dotenv import load_dotenv

from src.errors import ConfigError

ENV_PREFIX = "GRAPHON_SPECTRA_"


@dataclass(frozen=True)
class Settings:
    threads: int
    tree_cap: int = 12
    cut_exact_cap: int = 16
    perm_exact_cap: int = 8
    qve_tol: float = 1e-12
    qve_max_iter: int = 100_000
    refine_panels: int = 256
    eig_cap: int = 8192
    eig_inrepo_max_n: int = 1024
    db_url: str = "sqlite:///data/graphon_spectra.db"
    output_root: str = "data"
    log_level: str = "INFO"


def _read(name: str, cast, default):
    # os.getenv returns None when unset; an empty string is treated as unset too
    raw = os.getenv(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    try:
        value = cast(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_PREFIX}{name}={raw!r} is not a valid {cast.__name__}") from exc
    if cast in (int, float) and value <= 0:
        raise ConfigError(f"{ENV_PREFIX}{name} must be positive, got {raw!r}")
    return value


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    return Settings(
        threads=_read("THREADS", int, os.cpu_count() or 1),
        tree_cap=_read("TREE_CAP", int, 12),
        cut_exact_cap=_read("CUT_EXACT_CAP", int, 16),
        perm_exact_cap=_read("PERM_EXACT_CAP", int, 8),
        qve_tol=_read("QVE_TOL", float, 1e-12),
        qve_max_iter=_read("QVE_MAX_ITER", int, 100_000),
        refine_panels=_read("REFINE_PANELS", int, 256),
        eig_cap=_read("EIG_CAP", int, 8192),
        eig_inrepo_max_n=_read("EIG_INREPO_MAX_N", int, 1024),
        db_url=_read("DB_URL", str, "sqlite:///data/graphon_spectra.db"),
        output_root=_read("OUTPUT_ROOT", str, "data"),
        log_level=_read("LOG_LEVEL", str, "INFO").upper(),
    )
