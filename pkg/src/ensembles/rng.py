"""Counter-based random streams.

Every row of every sampled matrix draws from its own Philox stream keyed by
(seed, purpose, row), so entry (i, j) does not depend on the order rows are filled in
and the same spec reproduces the same matrix bit for bit on any platform.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from src.errors import ValidationError

MASK64 = (1 << 64) - 1

# stream purposes; kept disjoint so different parts of a sample are independent
ENTRIES = 1
LATENT = 2
DIAGONAL = 3
EXTRA = 4

DISTRIBUTIONS = ("gaussian", "rademacher", "uniform-pm")


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0 or seed > MASK64:
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    key = np.array([check_seed(seed), (purpose << 48) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def unit_draw(dist: str) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Mean 0, variance 1 draws for the continuous entry catalog."""
    if dist == "gaussian":
        return lambda gen, size: gen.standard_normal(size)
    if dist == "rademacher":
        return lambda gen, size: 2.0 * gen.integers(0, 2, size=size) - 1.0
    if dist == "uniform-pm":
        root3 = np.sqrt(3.0)
        return lambda gen, size: gen.uniform(-root3, root3, size=size)
    raise ValidationError(f"unknown entry distribution {dist!r}; expected one of {DISTRIBUTIONS}")


def uniform_draw(gen: np.random.Generator, size: int) -> np.ndarray:
    return gen.random(size)


def rows(seed: int, purpose: int, n_rows: int, n_cols: int, draw) -> np.ndarray:
    out = np.empty((n_rows, n_cols))
    for i in range(n_rows):
        out[i] = draw(stream(seed, purpose, i), n_cols)
    return out


def symmetric_rows(seed: int, purpose: int, n: int, draw, include_diagonal: bool = True) -> np.ndarray:
    """Symmetric matrix whose (i, j), j >= i, entry is draw number j of row stream i."""
    upper = np.triu(rows(seed, purpose, n, n, draw), 0 if include_diagonal else 1)
    return upper + np.triu(upper, 1).T
