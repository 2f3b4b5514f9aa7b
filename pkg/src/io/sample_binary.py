"""GSPC matrix files.

Layout, all little-endian:

    magic   4 bytes   b"GSPC"
    version u32       1
    n       u64       matrix order (for Gram samples: number of columns of X)
    m       u64       0, or the number of rows of X for Gram samples
    data    float64   row-major (n + m) x (n + m) matrix
    latent  float64   optional, n latent coordinates (W-random graphs)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from src.ensembles.samplers import EnsembleSample
from src.errors import ConfigError, ValidationError

MAGIC = b"GSPC"
VERSION = 1
HEADER = struct.Struct("<4sIQQ")
FLOAT = np.dtype("<f8")


@dataclass(frozen=True, eq=False)
class MatrixFile:
    matrix: np.ndarray
    n: int
    m: int
    latent: Optional[np.ndarray] = None


def write_matrix(path: str | Path, matrix: np.ndarray, n: int, m: int = 0, latent: Optional[np.ndarray] = None) -> Path:
    dim = n + m
    if matrix.shape != (dim, dim):
        raise ValidationError(f"matrix shape {matrix.shape} does not match n + m = {dim}")
    if latent is not None and latent.shape != (n,):
        raise ValidationError(f"latent coordinates must have length n = {n}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, n, m))
        fh.write(np.ascontiguousarray(matrix, dtype=FLOAT).tobytes())
        if latent is not None:
            fh.write(np.ascontiguousarray(latent, dtype=FLOAT).tobytes())
    return path


def write_sample(sample: EnsembleSample, path: str | Path, matrix: Optional[str] = None) -> Path:
    """Write the primary matrix of ``sample`` (or the named one)."""
    M = sample.matrix if matrix is None else sample.get(matrix)
    m = int(sample.metadata.get("m", 0)) if sample.metadata.get("kind") == "gram" else 0
    return write_matrix(path, M, M.shape[0] - m, m, sample.latent)


def read_matrix(path: str | Path) -> MatrixFile:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"matrix file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < HEADER.size:
        raise ValidationError(f"{path} is too short for a GSPC header")
    magic, version, n, m = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationError(f"{path} is not a GSPC file (magic {magic!r})")
    if version != VERSION:
        raise ValidationError(f"unsupported GSPC version {version}")
    dim = n + m
    body = np.frombuffer(raw, dtype=FLOAT, offset=HEADER.size)
    if body.size == dim * dim:
        latent = None
    elif body.size == dim * dim + n:
        latent = body[dim * dim :].copy()
    else:
        raise ValidationError(f"{path} holds {body.size} values, expected {dim * dim} (+{n} latent)")
    return MatrixFile(body[: dim * dim].reshape(dim, dim).copy(), int(n), int(m), latent)
