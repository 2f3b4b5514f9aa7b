"""Step graphons (variance profiles), a closed catalog of analytic kernels, and cut-norm tools.

Block intervals are right-open with the last one closed at 1, so ``evaluate`` is total
on the unit square.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from src.config import get_settings
from src.errors import DomainError, StructureError, ValidationError

log = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
PROFILE_SYMMETRY_TOL = 1e-9
FRACTION_TOL = 1e-12
# cut distance: restarts per relabeling when ranking, and how many relabelings get the full cut norm
RANKING_RESTARTS = 4
SHORTLIST = 24


@dataclass(frozen=True, eq=False)
class StepGraphon:
    fractions: np.ndarray
    weights: np.ndarray
    # cut_norm works on differences of graphons, which may be negative
    signed: bool = False

    def __post_init__(self) -> None:
        fractions = np.asarray(self.fractions, dtype=float).copy()
        weights = np.atleast_2d(np.asarray(self.weights, dtype=float)).copy()
        d = fractions.shape[0]
        if fractions.ndim != 1 or d == 0:
            raise ValidationError("fractions must be a non-empty 1-d array")
        if weights.shape != (d, d):
            raise ValidationError(f"weights must be {d}x{d}, got {weights.shape}")
        if np.any(fractions <= 0):
            raise ValidationError("block fractions must be strictly positive")
        if abs(fractions.sum() - 1.0) > FRACTION_TOL * max(d, 1):
            raise ValidationError(f"block fractions sum to {fractions.sum()!r}, expected 1")
        if not np.all(np.isfinite(weights)):
            raise ValidationError("weights must be finite")
        if np.max(np.abs(weights - weights.T), initial=0.0) > SYMMETRY_TOL:
            raise ValidationError("weights must be symmetric")
        if not self.signed and np.any(weights < 0):
            raise ValidationError("weights must be non-negative")
        fractions.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "fractions", fractions)
        object.__setattr__(self, "weights", weights)

    @property
    def d(self) -> int:
        return self.fractions.shape[0]

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.weights)))

    @property
    def boundaries(self) -> np.ndarray:
        edges = np.concatenate([[0.0], np.cumsum(self.fractions)])
        edges[-1] = 1.0
        return edges

    @property
    def operator(self) -> np.ndarray:
        """Measure-weighted block operator: (Wf)_i = sum_j weights[i, j] * fractions[j] * f_j."""
        return self.weights * self.fractions[None, :]

    def permuted(self, order) -> "StepGraphon":
        order = np.asarray(order, dtype=int)
        return StepGraphon(self.fractions[order], self.weights[np.ix_(order, order)], signed=self.signed)

    def scaled(self, c: float) -> "StepGraphon":
        return StepGraphon(self.fractions, c * self.weights, signed=self.signed or c < 0)

    def block_of(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > 1)):
            raise DomainError("graphon coordinates must lie in [0, 1]")
        idx = np.searchsorted(self.boundaries, x, side="right") - 1
        return np.clip(idx, 0, self.d - 1)

    def to_dict(self) -> dict:
        return {"kind": "step", "fractions": self.fractions.tolist(), "weights": self.weights.tolist()}


AnalyticKind = Literal["constant", "product", "min", "max"]


@dataclass(frozen=True)
class AnalyticGraphon:
    """Closed catalog of bounded non-negative kernels on [0,1]^2.

    ``constant``: c; ``product``: c*x*y; ``min``: c*min(x,y); ``max``: c*max(x,y).
    Arbitrary kernels enter as fine step graphons instead.
    """

    kind: AnalyticKind
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "product", "min", "max"):
            raise ValidationError(f"unknown analytic graphon kind {self.kind!r}")
        if not np.isfinite(self.scale) or self.scale < 0:
            raise ValidationError("analytic graphon scale must be finite and non-negative")

    @property
    def sup_norm(self) -> float:
        return float(self.scale)

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            return np.full(np.broadcast(x, y).shape, self.scale)
        if self.kind == "product":
            return self.scale * x * y
        if self.kind == "min":
            return self.scale * np.minimum(x, y)
        return self.scale * np.maximum(x, y)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.scale}
        return {"kind": "analytic", "name": self.kind, "scale": self.scale}


Graphon = Union[StepGraphon, AnalyticGraphon]


def constant_graphon(c: float) -> StepGraphon:
    return StepGraphon(np.array([1.0]), np.array([[float(c)]]))


def from_variance_profile(S) -> StepGraphon:
    S = np.atleast_2d(np.asarray(S, dtype=float))
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValidationError(f"variance profile must be square, got {S.shape}")
    if not np.all(np.isfinite(S)) or np.any(S < 0):
        raise ValidationError("variance profile entries must be finite and non-negative")
    if np.max(np.abs(S - S.T)) > PROFILE_SYMMETRY_TOL:
        raise ValidationError("variance profile is not symmetric")
    return StepGraphon(np.full(n, 1.0 / n), (S + S.T) / 2.0)


def refine(W: Graphon, panels: int | None = None) -> StepGraphon:
    """Midpoint-rule step approximation with ``panels`` equal blocks."""
    if isinstance(W, StepGraphon):
        return W
    panels = get_settings().refine_panels if panels is None else panels
    mid = (np.arange(panels) + 0.5) / panels
    values = W(mid[:, None], mid[None, :])
    return StepGraphon(np.full(panels, 1.0 / panels), (values + values.T) / 2.0)


def evaluate(W: Graphon, x: float, y: float) -> float:
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise DomainError(f"coordinates ({x}, {y}) outside [0, 1]^2")
    if isinstance(W, AnalyticGraphon):
        return float(W(x, y))
    i, j = W.block_of([x, y])
    return float(W.weights[i, j])


def evaluate_grid(W: Graphon, xs, ys) -> np.ndarray:
    """Vectorized evaluate: W(xs[i], ys[j]) as a matrix."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if isinstance(W, AnalyticGraphon):
        return W(xs[:, None], ys[None, :])
    return W.weights[np.ix_(W.block_of(xs), W.block_of(ys))]


def degree_function(W: StepGraphon) -> np.ndarray:
    return W.operator.sum(axis=1)


# cut norm -------------------------------------------------------------------


@dataclass(frozen=True)
class CutNormResult:
    value: float
    exact: bool
    # indicator vectors of the maximizing block sets
    rows: tuple[int, ...]
    cols: tuple[int, ...]


def _best_cols(v: np.ndarray) -> tuple[float, np.ndarray]:
    # for fixed rows, sup over t in [0,1]^d of |sum_j v_j t_j| picks all positive or all negative entries
    pos = np.where(v > 0, v, 0.0).sum(axis=-1)
    neg = np.where(v < 0, -v, 0.0).sum(axis=-1)
    return np.maximum(pos, neg), pos >= neg


def _exact_cut_norm(M: np.ndarray) -> CutNormResult:
    d = M.shape[0]
    # all 2^d row subsets as 0/1 masks; for each, the best column set is read off in closed form
    masks = ((np.arange(2**d)[:, None] >> np.arange(d)[None, :]) & 1).astype(float)
    totals = masks @ M
    values, positive = _best_cols(totals)
    best = int(np.argmax(values))
    v = totals[best]
    cols = v > 0 if positive[best] else v < 0
    return CutNormResult(
        float(values[best]),
        True,
        tuple(int(b) for b in masks[best]),
        tuple(int(b) for b in cols),
    )


def _heuristic_cut_norm(M: np.ndarray, restarts: int, seed: int) -> CutNormResult:
    # alternating maximization from random starts; every value found is attained, hence a lower bound
    d = M.shape[0]
    rng = np.random.Generator(np.random.Philox(key=seed))
    best = CutNormResult(0.0, False, (0,) * d, (0,) * d)
    for sign in (1.0, -1.0):
        for _ in range(restarts):
            s = rng.integers(0, 2, size=d).astype(float)
            value = -1.0
            for _ in range(10 * d + 10):
                # best columns for the current rows, then best rows for those columns
                t = (sign * (s @ M) > 0).astype(float)
                s = (sign * (M @ t) > 0).astype(float)
                new_value = sign * float(s @ M @ t)
                if new_value <= value + 1e-15:
                    break
                value = new_value
            # value of the final (s, t) pair, so the reported sets attain it
            value = sign * float(s @ M @ t)
            if value > best.value:
                best = CutNormResult(value, False, tuple(int(b) for b in s), tuple(int(b) for b in t))
    return best


def cut_norm_detail(
    W: StepGraphon, exact: bool | None = None, restarts: int = 32, seed: int = 0
) -> CutNormResult:
    cap = get_settings().cut_exact_cap
    # block masses folded in: the cut norm is max |s^T M t| over 0/1 vectors s, t
    M = W.weights * np.outer(W.fractions, W.fractions)
    if exact is None:
        exact = W.d <= cap
    if exact:
        return _exact_cut_norm(M)
    log.info("cut norm for d=%d uses alternating maximization (lower bound)", W.d)
    return _heuristic_cut_norm(M, restarts, seed)


def cut_norm(W: StepGraphon, exact: bool | None = None) -> float:
    return cut_norm_detail(W, exact=exact).value


def common_refinement(W1: StepGraphon, W2: StepGraphon) -> tuple[StepGraphon, StepGraphon]:
    """Re-express both graphons on the merged block boundaries."""
    edges = np.union1d(W1.boundaries, W2.boundaries)
    # drop breakpoints closer than rounding noise
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14])]
    edges[-1] = 1.0
    fractions = np.diff(edges)
    mids = (edges[:-1] + edges[1:]) / 2.0
    i1 = W1.block_of(mids)
    i2 = W2.block_of(mids)
    fractions = fractions / fractions.sum()
    return (
        StepGraphon(fractions, W1.weights[np.ix_(i1, i1)], signed=W1.signed),
        StepGraphon(fractions, W2.weights[np.ix_(i2, i2)], signed=W2.signed),
    )


def difference(W1: StepGraphon, W2: StepGraphon) -> StepGraphon:
    R1, R2 = common_refinement(W1, W2)
    return StepGraphon(R1.fractions, R1.weights - R2.weights, signed=True)


def _greedy_order(W1: StepGraphon, W2: StepGraphon) -> np.ndarray:
    # align blocks by degree rank; only a heuristic, used above the permutation cap
    r1 = np.argsort(-degree_function(W1), kind="stable")
    if W1.d != W2.d:
        return r1
    order = np.empty(W1.d, dtype=int)
    order[np.argsort(-degree_function(W2), kind="stable")] = r1
    return order


def cut_distance_upper(W1: StepGraphon, W2: StepGraphon) -> float:
    """Upper bound on the cut distance from block permutations of W1 on the common refinement.

    Every relabeling is ranked by alternating maximization; the SHORTLIST best are scored
    with cut_norm, so for d <= 4 all permutations are scored exactly.
    """
    cap = get_settings().perm_exact_cap
    if W1.d <= cap:
        candidates = itertools.permutations(range(W1.d))
    else:
        log.info("cut distance for d=%d uses greedy degree matching", W1.d)
        candidates = [tuple(_greedy_order(W1, W2)), tuple(range(W1.d))]
    # rank every relabeling by a cheap lower bound, then score the shortlist with the full cut norm
    ranked = []
    for order in candidates:
        D = difference(W1.permuted(order), W2)
        M = D.weights * np.outer(D.fractions, D.fractions)
        ranked.append((_heuristic_cut_norm(M, RANKING_RESTARTS, 0).value, D))
    ranked.sort(key=lambda item: item[0])
    best = np.inf
    for _, D in ranked[:SHORTLIST]:
        best = min(best, cut_norm(D))
        if best <= 0.0:
            break
    return float(best)


# Gram (bipartite) layout -----------------------------------------------------


def gram_split(y: float) -> float:
    if y <= 0:
        raise ValidationError(f"aspect ratio must be positive, got {y}")
    return y / (1.0 + y)


def bipartite_blocks(W: StepGraphon, y: float, tol: float = 1e-9) -> int:
    """Number of left blocks of a symmetrized (Gram) graphon; raises StructureError if not bipartite."""
    split = gram_split(y)
    cum = np.cumsum(W.fractions)
    hits = np.flatnonzero(np.abs(cum - split) <= tol)
    if hits.size == 0:
        raise StructureError(f"no block boundary at the split {split:.6g} = y/(1+y)")
    p = int(hits[0]) + 1
    if p >= W.d:
        raise StructureError("the right part of the bipartite layout is empty")
    if np.any(W.weights[:p, :p] != 0) or np.any(W.weights[p:, p:] != 0):
        raise StructureError("diagonal super-blocks of a Gram graphon must vanish")
    return p


def gram_graphon(profile, y: float, left_fractions=None, right_fractions=None) -> StepGraphon:
    """Symmetrized graphon of a rectangular block profile S (dl x dr) at aspect ratio y.

    Left blocks share y/(1+y) of [0,1] in proportion ``left_fractions``, right blocks
    share the rest; weights are [[0, S], [S^T, 0]].
    """
    S = np.atleast_2d(np.asarray(profile, dtype=float))
    dl, dr = S.shape
    lf = np.full(dl, 1.0 / dl) if left_fractions is None else np.asarray(left_fractions, dtype=float)
    rf = np.full(dr, 1.0 / dr) if right_fractions is None else np.asarray(right_fractions, dtype=float)
    split = gram_split(y)
    fractions = np.concatenate([split * lf / lf.sum(), (1.0 - split) * rf / rf.sum()])
    weights = np.zeros((dl + dr, dl + dr))
    weights[:dl, dl:] = S
    weights[dl:, :dl] = S.T
    return StepGraphon(fractions / fractions.sum(), weights)


def gram_profile(W: StepGraphon, y: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of gram_graphon: (left fractions, right fractions, S), fractions renormalized per side."""
    p = bipartite_blocks(W, y)
    lf = W.fractions[:p] / W.fractions[:p].sum()
    rf = W.fractions[p:] / W.fractions[p:].sum()
    return lf, rf, W.weights[:p, p:].copy()
