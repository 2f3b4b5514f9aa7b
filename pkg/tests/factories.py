from __future__ import annotations

import numpy as np

from src.core.graphon import StepGraphon


def random_step_graphon(gen: np.random.Generator, d: int, scale: float = 2.0) -> StepGraphon:
    fractions = gen.dirichlet(np.ones(d))
    fractions /= fractions.sum()
    raw = gen.uniform(0.0, scale, size=(d, d))
    return StepGraphon(fractions, (raw + raw.T) / 2.0)


def stochastic_step_graphon(gen: np.random.Generator, d: int) -> StepGraphon:
    """Equal blocks with a doubly stochastic weight matrix scaled so every row integrates to 1."""
    # convex combination of permutation matrices is doubly stochastic; symmetrize it
    M = np.zeros((d, d))
    for w in gen.dirichlet(np.ones(4)):
        M += w * np.eye(d)[gen.permutation(d)]
    M = (M + M.T) / 2.0
    return StepGraphon(np.full(d, 1.0 / d), d * M)


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))
