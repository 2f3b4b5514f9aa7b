"""Block layouts for block matrices and stochastic block models, with their limit graphons.

Growing layouts follow the class-size recipe n_i = floor(n * alpha_i), generated until
n_i reaches 0:

- case 1: sum(alpha_i) = 1, the leftover vertices form one last class;
- case 2: sum(alpha_i) = alpha < 1, the leftover vertices are split into small classes
  whose mutual variances are all s0 and whose variance against big class k is s_k0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Union

import numpy as np
from scipy.special import zeta

from src.core.graphon import StepGraphon
from src.ensembles.samplers import EnsembleSpec, block_sizes, sbm_sigma
from src.errors import ValidationError

log = logging.getLogger(__name__)

Decay = Literal["geometric", "power"]


@dataclass(frozen=True, eq=False)
class BlockLayout:
    sizes: np.ndarray
    weights: np.ndarray
    # step graphon the normalized layouts converge to; the tail is merged into one block
    limit: StepGraphon
    big_classes: int
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.sizes.sum())

    @property
    def d(self) -> int:
        return int(self.sizes.shape[0])

    @property
    def empirical(self) -> StepGraphon:
        """The layout itself as a step graphon (block fractions n_i / n)."""
        return StepGraphon(self.sizes / self.n, self.weights)

    def spec(self, seed: int = 0, dist: str = "gaussian") -> EnsembleSpec:
        return EnsembleSpec("block-matrix", self.n, seed=seed, sizes=tuple(self.sizes), weights=self.weights, dist=dist)


def decay_fractions(i, decay: Decay = "geometric", gamma: float = 2.0, beta: float = 2.0, total: float = 1.0) -> np.ndarray:
    """alpha_i = C / gamma^i or C / i^beta for class indices i >= 1, C chosen so the series sums to ``total``."""
    i = np.asarray(i, dtype=float)
    if decay == "geometric":
        if gamma <= 1:
            raise ValidationError("geometric decay needs gamma > 1")
        return total * (gamma - 1.0) / gamma**i
    if decay == "power":
        if beta <= 1:
            raise ValidationError("power-law decay needs beta > 1")
        return total / zeta(beta, 1) / i**beta
    raise ValidationError(f"unknown decay {decay!r}")


def _class_sizes(n: int, alpha_of) -> tuple[list[int], np.ndarray]:
    sizes: list[int] = []
    alphas: list[float] = []
    while True:
        alpha = float(alpha_of(len(sizes) + 1))
        size = int(np.floor(n * alpha))
        if size == 0:
            break
        sizes.append(size)
        alphas.append(alpha)
    return sizes, np.array(alphas)


def _pattern(d: int, diag: float, offdiag: float) -> np.ndarray:
    return np.where(np.eye(d, dtype=bool), diag, offdiag)


def growing_blocks(
    n: int,
    decay: Decay = "geometric",
    gamma: float = 2.0,
    beta: float = 2.0,
    diag: float = 2.0,
    offdiag: float = 1.0,
) -> BlockLayout:
    """Case 1: class fractions summing to 1 and a last class holding the leftover vertices."""
    sizes, alphas = _class_sizes(n, lambda c: decay_fractions(c, decay, gamma, beta))
    rest = n - sum(sizes)
    if rest > 0:
        sizes.append(rest)
    d = len(sizes)
    weights = _pattern(d, diag, offdiag)
    limit_fractions = np.append(alphas, 1.0 - alphas.sum()) if rest > 0 else alphas / alphas.sum()
    limit = StepGraphon(limit_fractions, weights)
    log.debug("growing layout n=%d: %d classes (%s decay)", n, d, decay)
    return BlockLayout(
        np.asarray(sizes), weights, limit, len(alphas), {"case": 1, "decay": decay, "gamma": gamma, "beta": beta}
    )


def growing_blocks_with_small_classes(
    n: int,
    alpha: float = 0.5,
    d: Optional[int] = None,
    decay: Decay = "geometric",
    gamma: float = 2.0,
    beta: float = 2.0,
    diag: float = 2.0,
    offdiag: float = 1.0,
    s0: float = 1.0,
    s_k0: Union[float, np.ndarray] = 1.5,
) -> BlockLayout:
    """Case 2: big classes take a fraction alpha < 1 of the vertices; the rest is split into
    small classes so that the total class count is d (default floor(sqrt(n))).
    """
    if not 0 < alpha < 1:
        raise ValidationError("the big classes must cover a fraction alpha in (0, 1)")
    d = int(np.floor(np.sqrt(n))) if d is None else d
    sizes, alphas = _class_sizes(n, lambda c: decay_fractions(c, decay, gamma, beta, total=alpha))
    big = len(sizes)
    small = d - big
    if small < 1:
        raise ValidationError(f"d={d} leaves no room for small classes next to {big} big ones")
    rest = n - sum(sizes)
    if rest < small:
        raise ValidationError(f"{rest} leftover vertices cannot fill {small} small classes")
    sizes.extend(block_sizes(np.full(small, 1.0 / small), rest).tolist())

    cross = np.broadcast_to(np.asarray(s_k0, dtype=float), (big,))
    weights = np.full((d, d), float(s0))
    weights[:big, :big] = _pattern(big, diag, offdiag)
    weights[:big, big:] = cross[:, None]
    weights[big:, :big] = cross[None, :]

    limit_weights = np.full((big + 1, big + 1), float(s0))
    limit_weights[:big, :big] = weights[:big, :big]
    limit_weights[:big, big] = cross
    limit_weights[big, :big] = cross
    limit = StepGraphon(np.append(alphas, 1.0 - alphas.sum()), limit_weights)
    return BlockLayout(
        np.asarray(sizes),
        weights,
        limit,
        big,
        {"case": 2, "decay": decay, "alpha": alpha, "small_classes": small, "s0": s0},
    )


def checkerboard(d: int, high: float, low: float) -> np.ndarray:
    """p_kl = high when k + l is even, low otherwise."""
    k = np.arange(d)
    return np.where((k[:, None] + k[None, :]) % 2 == 0, high, low)


def equal_blocks(n: int, d: int) -> np.ndarray:
    if not 1 <= d <= n:
        raise ValidationError(f"cannot split {n} vertices into {d} blocks")
    return block_sizes(np.full(d, 1.0 / d), n)


def sbm_variance_graphon(sizes, P) -> StepGraphon:
    """Profile of A/(sigma sqrt(n)): entry variances p_kl(1 - p_kl)/sigma^2 on the block layout."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    sigma = sbm_sigma(P)
    if sigma == 0:
        raise ValidationError("all edge probabilities are 0 or 1; the normalized model is degenerate")
    sizes = np.asarray(sizes, dtype=float)
    return StepGraphon(sizes / sizes.sum(), P * (1.0 - P) / sigma**2)


def degree_variance_graphon(sizes, P) -> StepGraphon:
    """Profile of A/sqrt(n alpha), alpha the mean expected degree over n."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    sizes = np.asarray(sizes, dtype=float)
    f = sizes / sizes.sum()
    alpha = float(f @ P @ f)
    if alpha <= 0:
        raise ValidationError("all edge probabilities are 0")
    return StepGraphon(f, P * (1.0 - P) / alpha)
