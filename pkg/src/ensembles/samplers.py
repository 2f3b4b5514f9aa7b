"""Random matrix ensembles with the centering and scaling conventions of the limit theorems.

Every sampler returns an ``EnsembleSample`` holding one or more named matrices. The
``primary`` one is what experiments and the binary writer use by default; the others
are the alternative normalizations a proof step works with (centered adjacency, the
SBM matrix with a sampled diagonal, the Gram matrix itself, ...).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional, Union

import numpy as np

from src.core.graphon import AnalyticGraphon, Graphon, StepGraphon, evaluate_grid, gram_profile
from src.ensembles import rng
from src.errors import ValidationError

log = logging.getLogger(__name__)

EnsembleKind = Literal["wigner-type", "generalized-wigner", "w-random-graph", "block-matrix", "sbm", "gram"]
KINDS = ("wigner-type", "generalized-wigner", "w-random-graph", "block-matrix", "sbm", "gram")

# stochasticity band for generalized Wigner profiles
DEGREE_TOL = 0.01
# below this expected degree the sparse theorems say nothing; sampled but flagged
SPARSE_SCOPE_MIN = 10.0
EQUAL_DEGREE_BAND = 0.05

Profile = Union[Graphon, np.ndarray]


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    kind: EnsembleKind
    n: int
    seed: int = 0
    m: Optional[int] = None
    graphon: Optional[Graphon] = None
    sizes: Optional[tuple[int, ...]] = None
    # variances (continuous models) or probabilities (sbm)
    weights: Optional[np.ndarray] = None
    dist: str = "gaussian"
    sparsity: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        rng.check_seed(self.seed)
        if self.dist not in rng.DISTRIBUTIONS:
            raise ValidationError(f"unknown entry distribution {self.dist!r}")
        if self.sizes is not None:
            sizes = tuple(int(s) for s in self.sizes)
            if any(s < 1 for s in sizes):
                raise ValidationError("block sizes must be at least 1")
            object.__setattr__(self, "sizes", sizes)
        if self.weights is not None:
            object.__setattr__(self, "weights", np.atleast_2d(np.asarray(self.weights, dtype=float)))
        if self.kind in ("block-matrix", "sbm"):
            if self.sizes is None or self.weights is None:
                raise ValidationError(f"{self.kind} needs sizes and weights")
        elif self.kind == "gram":
            if self.m is None or self.m < 1:
                raise ValidationError("gram needs m >= 1")
            if self.graphon is None and self.weights is None:
                raise ValidationError("gram needs a bipartite graphon or an m x n profile")
        elif self.graphon is None and self.weights is None:
            raise ValidationError(f"{self.kind} needs a graphon or an explicit profile")
        if self.kind == "w-random-graph" and self.sparsity is None:
            raise ValidationError("w-random-graph needs the sparsity rho")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "n": self.n, "seed": self.seed, "dist": self.dist}
        if self.m is not None:
            out["m"] = self.m
        if self.graphon is not None:
            out["graphon"] = self.graphon.to_dict()
        if self.sizes is not None:
            out["sizes"] = list(self.sizes)
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        if self.sparsity is not None:
            out["sparsity"] = self.sparsity
        return out


@dataclass(frozen=True, eq=False)
class EnsembleSample:
    matrices: dict[str, np.ndarray]
    primary: str
    seed: int
    # what the primary matrix was divided by, and how to reproduce it
    normalization: dict
    latent: Optional[np.ndarray] = None
    spec: Optional[EnsembleSpec] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for M in self.matrices.values():
            M.setflags(write=False)
        if self.latent is not None:
            self.latent.setflags(write=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.matrices[self.primary]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def get(self, name: str) -> np.ndarray:
        if name not in self.matrices:
            raise ValidationError(f"sample has no matrix {name!r}; available: {sorted(self.matrices)}")
        return self.matrices[name]


def block_sizes(fractions, n: int) -> np.ndarray:
    """Largest-remainder rounding of n * fractions; sums to n exactly."""
    fractions = np.asarray(fractions, dtype=float)
    raw = n * fractions
    sizes = np.floor(raw).astype(int)
    short = n - int(sizes.sum())
    if short > 0:
        # stable sort keeps ties in block order
        order = np.argsort(-(raw - sizes), kind="stable")
        sizes[order[:short]] += 1
    return sizes


def _labels(sizes) -> np.ndarray:
    return np.repeat(np.arange(len(sizes)), sizes)


def _check_sizes(sizes, weights: np.ndarray, n: Optional[int] = None) -> np.ndarray:
    sizes = np.asarray(sizes, dtype=int)
    d = sizes.shape[0]
    if weights.shape != (d, d):
        raise ValidationError(f"{d} block sizes need a {d}x{d} matrix, got {weights.shape}")
    if np.any(sizes < 1):
        raise ValidationError("block sizes must be at least 1")
    if n is not None and int(sizes.sum()) != n:
        raise ValidationError(f"block sizes sum to {int(sizes.sum())}, expected n={n}")
    if np.max(np.abs(weights - weights.T)) > 0:
        raise ValidationError("block matrix must be symmetric")
    return sizes


def _pointwise_profile(S: Profile, n: int) -> np.ndarray:
    """n x n variance matrix of a profile: blockwise for step graphons, midpoints otherwise."""
    if isinstance(S, StepGraphon):
        labels = _labels(block_sizes(S.fractions, n))
        return S.weights[np.ix_(labels, labels)]
    if isinstance(S, AnalyticGraphon):
        mid = (np.arange(n) + 0.5) / n
        return evaluate_grid(S, mid, mid)
    S = np.asarray(S, dtype=float)
    if S.shape != (n, n):
        raise ValidationError(f"explicit profile must be {n}x{n}, got {S.shape}")
    if np.any(S != S.T):
        raise ValidationError("explicit profile must be symmetric")
    return S


def _wigner_from_variances(V: np.ndarray, dist: str, seed: int, metadata: dict) -> EnsembleSample:
    if not np.all(np.isfinite(V)) or np.any(V < 0):
        raise ValidationError("variance profile entries must be finite and non-negative")
    n = V.shape[0]
    Z = rng.symmetric_rows(seed, rng.ENTRIES, n, rng.unit_draw(dist))
    A = np.sqrt(V) * Z
    M = A / np.sqrt(n)
    return EnsembleSample(
        {"normalized": M, "raw": A},
        "normalized",
        seed,
        {"matrix": "normalized", "divided_by": float(np.sqrt(n)), "formula": "A/sqrt(n)"},
        metadata={"dist": dist, **metadata},
    )


def sample_wigner_type(S: Profile, n: int, dist: str = "gaussian", seed: int = 0) -> EnsembleSample:
    """Symmetric A with independent mean-zero entries of variance s_ij, returned as A/sqrt(n).

    The diagonal is drawn with its own profile variance.
    """
    V = _pointwise_profile(S, n)
    return _wigner_from_variances(V, dist, seed, {"kind": "wigner-type"})


def sample_generalized_wigner(S: Profile, n: int, dist: str = "gaussian", seed: int = 0) -> EnsembleSample:
    if isinstance(S, StepGraphon):
        deviation = float(np.max(np.abs(S.operator.sum(axis=1) - 1.0)))
    else:
        V = _pointwise_profile(S, n)
        deviation = float(np.max(np.abs(V.mean(axis=1) - 1.0)))
    if deviation > DEGREE_TOL:
        raise ValidationError(
            f"profile is not stochastic: row averages deviate from 1 by {deviation:.4g} (allowed {DEGREE_TOL})"
        )
    sample = sample_wigner_type(S, n, dist, seed)
    sample.metadata.update({"kind": "generalized-wigner", "degree_deviation": deviation})
    return sample


def _bernoulli_upper(P: np.ndarray, seed: int) -> np.ndarray:
    """Symmetric 0/1 matrix with zero diagonal; edge (i, j), i < j, uses uniform j of row stream i."""
    U = rng.symmetric_rows(seed, rng.ENTRIES, P.shape[0], rng.uniform_draw, include_diagonal=False)
    A = (U < P).astype(float)
    np.fill_diagonal(A, 0.0)
    return A


def _keep(matrices: dict[str, np.ndarray], keep: Optional[Iterable[str]], primary: str) -> dict[str, np.ndarray]:
    if keep is None:
        return matrices
    names = set(keep) | {primary}
    unknown = names - set(matrices)
    if unknown:
        raise ValidationError(f"unknown matrix names {sorted(unknown)}; available: {sorted(matrices)}")
    return {k: v for k, v in matrices.items() if k in names}


def _scope_check(n: int, sparsity: float, metadata: dict) -> None:
    metadata["expected_degree_scale"] = n * sparsity
    if n * sparsity < SPARSE_SCOPE_MIN:
        metadata["outside_theorem_scope"] = True
        log.warning("n*rho = %.3g < %g: sparse regime outside the scope of the limit theorems", n * sparsity, SPARSE_SCOPE_MIN)


def sample_w_random_graph(
    W: Graphon, n: int, rho: float, seed: int = 0, keep: Optional[Iterable[str]] = None
) -> EnsembleSample:
    """Sparse W-random graph: latent x_i ~ U[0,1], edge {i,j} with probability rho * W(x_i, x_j).

    Matrices: ``adjacency``; ``scaled`` = A/sqrt(n rho) (primary);
    ``centered`` = (A - E[A | x])/sqrt(n rho).
    """
    if rho < 0:
        raise ValidationError("sparsity must be non-negative")
    if rho * W.sup_norm > 1.0:
        raise ValidationError(f"rho * sup W = {rho * W.sup_norm:.6g} exceeds 1")
    x = rng.stream(seed, rng.LATENT).random(n)
    P = rho * evaluate_grid(W, x, x)
    np.fill_diagonal(P, 0.0)
    A = _bernoulli_upper(P, seed)
    metadata: dict = {"kind": "w-random-graph", "rho": rho, "edges": int(A.sum() // 2)}
    if rho == 0:
        # empty graph: nothing to normalize by
        scale = 1.0
        metadata["outside_theorem_scope"] = True
    else:
        scale = float(np.sqrt(n * rho))
        _scope_check(n, rho, metadata)
    matrices = {"adjacency": A, "scaled": A / scale, "centered": (A - P) / scale}
    return EnsembleSample(
        _keep(matrices, keep, "scaled"),
        "scaled",
        seed,
        {"matrix": "scaled", "divided_by": scale, "formula": "A/sqrt(n*rho)"},
        latent=x,
        metadata=metadata,
    )


def sample_block_matrix(sizes, S, dist: str = "gaussian", seed: int = 0, n: Optional[int] = None) -> EnsembleSample:
    S = np.atleast_2d(np.asarray(S, dtype=float))
    sizes = _check_sizes(sizes, S, n)
    labels = _labels(sizes)
    return _wigner_from_variances(S[np.ix_(labels, labels)], dist, seed, {"kind": "block-matrix", "d": len(sizes)})


def sbm_sigma(P: np.ndarray) -> float:
    """sigma with sigma^2 = p(1 - p), p the largest configured edge probability."""
    p = float(np.max(P))
    return float(np.sqrt(p * (1.0 - p)))


def sample_sbm(sizes, P, seed: int = 0, n: Optional[int] = None, keep: Optional[Iterable[str]] = None) -> EnsembleSample:
    """Stochastic block model with zero diagonal.

    Matrices: ``adjacency``; ``scaled`` = A/(sigma sqrt(n)) (primary);
    ``centered`` = (A - EA)/(sigma sqrt(n)); ``tilde`` and ``tilde_centered``, the same
    with the diagonal sampled as Bernoulli(p_kk), so that E[tilde] has rank at most d;
    ``degree_scaled`` = A/sqrt(n alpha) with n alpha the mean expected degree, and its
    centered version ``degree_centered``.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if not np.all(np.isfinite(P)) or np.any(P < 0) or np.any(P > 1):
        raise ValidationError("edge probabilities must lie in [0, 1]")
    sizes = _check_sizes(sizes, P, n)
    labels = _labels(sizes)
    n = int(sizes.sum())
    EA_tilde = P[np.ix_(labels, labels)]
    EA = EA_tilde.copy()
    np.fill_diagonal(EA, 0.0)
    A = _bernoulli_upper(EA, seed)
    diag = (rng.stream(seed, rng.DIAGONAL).random(n) < np.diag(EA_tilde)).astype(float)
    A_tilde = A + np.diag(diag)

    sigma = sbm_sigma(P)
    metadata: dict = {"kind": "sbm", "d": len(sizes), "sigma": sigma, "edges": int(A.sum() // 2)}
    scale = sigma * np.sqrt(n) if sigma > 0 else 1.0
    if sigma == 0:
        metadata["degenerate_sigma"] = True
    else:
        _scope_check(n, float(np.max(P)), metadata)
    alpha = float(EA.sum()) / n**2
    degree_scale = np.sqrt(n * alpha) if alpha > 0 else 1.0
    metadata["alpha"] = alpha
    matrices = {
        "adjacency": A,
        "scaled": A / scale,
        "centered": (A - EA) / scale,
        "tilde": A_tilde / scale,
        "tilde_centered": (A_tilde - EA_tilde) / scale,
        "degree_scaled": A / degree_scale,
        "degree_centered": (A - EA) / degree_scale,
    }
    return EnsembleSample(
        _keep(matrices, keep, "scaled"),
        "scaled",
        seed,
        {"matrix": "scaled", "divided_by": float(scale), "formula": "A/(sigma*sqrt(n))", "sigma": sigma},
        metadata=metadata,
    )


def _gram_profile(S, m: int, n: int) -> np.ndarray:
    """m x n variance matrix from a bipartite step graphon (aspect m/n) or an explicit profile."""
    if isinstance(S, StepGraphon):
        lf, rf, block = gram_profile(S, m / n)
        return block[np.ix_(_labels(block_sizes(lf, m)), _labels(block_sizes(rf, n)))]
    if isinstance(S, AnalyticGraphon):
        return evaluate_grid(S, (np.arange(m) + 0.5) / m, (np.arange(n) + 0.5) / n)
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape == (1, 1):
        return np.full((m, n), S[0, 0])
    if S.shape != (m, n):
        raise ValidationError(f"Gram profile must be {m}x{n}, got {S.shape}")
    return S


def sample_gram(m: int, n: int, S, dist: str = "gaussian", seed: int = 0) -> EnsembleSample:
    """X (m x n) with Var(x_ij) = s_ij. Matrices: ``gram`` = XX^T/n, ``x`` and the
    symmetrization ``symmetrized`` = [[0, X], [X^T, 0]]/sqrt(n+m) (primary).
    """
    if m < 1 or n < 1:
        raise ValidationError(f"invalid Gram sizes m={m}, n={n}")
    V = _gram_profile(S, m, n)
    if not np.all(np.isfinite(V)) or np.any(V < 0):
        raise ValidationError("variance profile entries must be finite and non-negative")
    X = np.sqrt(V) * rng.rows(seed, rng.ENTRIES, m, n, rng.unit_draw(dist))
    H = np.zeros((m + n, m + n))
    H[:m, m:] = X
    H[m:, :m] = X.T
    scale = float(np.sqrt(n + m))
    return EnsembleSample(
        {"symmetrized": H / scale, "gram": X @ X.T / n, "x": X},
        "symmetrized",
        seed,
        {"matrix": "symmetrized", "divided_by": scale, "formula": "H/sqrt(n+m)"},
        metadata={"kind": "gram", "m": m, "n": n, "aspect": m / n, "dist": dist},
    )


def sample(spec: EnsembleSpec, keep: Optional[Iterable[str]] = None) -> EnsembleSample:
    profile = spec.graphon if spec.graphon is not None else spec.weights
    if spec.kind == "wigner-type":
        out = sample_wigner_type(profile, spec.n, spec.dist, spec.seed)
    elif spec.kind == "generalized-wigner":
        out = sample_generalized_wigner(profile, spec.n, spec.dist, spec.seed)
    elif spec.kind == "w-random-graph":
        W = spec.graphon if spec.graphon is not None else StepGraphon(
            np.full(spec.weights.shape[0], 1.0 / spec.weights.shape[0]), spec.weights
        )
        out = sample_w_random_graph(W, spec.n, spec.sparsity, spec.seed, keep)
    elif spec.kind == "block-matrix":
        out = sample_block_matrix(spec.sizes, spec.weights, spec.dist, spec.seed, spec.n)
    elif spec.kind == "sbm":
        out = sample_sbm(spec.sizes, spec.weights, spec.seed, spec.n, keep)
    else:
        out = sample_gram(spec.m, spec.n, profile, spec.dist, spec.seed)
    object.__setattr__(out, "spec", spec)
    return out


# diagnostics ------------------------------------------------------------------


def lindeberg_sum(raw: np.ndarray, eta: float) -> float:
    """(1/n^2) sum_ij a_ij^2 1{|a_ij| > eta sqrt(n)} for an unnormalized symmetric matrix.

    Bounded entry laws make this exactly 0 once eta sqrt(n) exceeds the entry bound.
    """
    if eta <= 0:
        raise ValidationError("eta must be positive")
    n = raw.shape[0]
    big = np.abs(raw) > eta * np.sqrt(n)
    return float(np.sum(raw[big] ** 2) / n**2)


@dataclass(frozen=True)
class DegreeCheck:
    alpha: float
    deviation: float
    band: float

    @property
    def within_band(self) -> bool:
        return self.deviation <= self.band


def check_equal_degrees(sizes, P, band: float = EQUAL_DEGREE_BAND) -> DegreeCheck:
    """Expected degrees sum_j p_ij against n alpha; deviation is max_i |deg_i/(n alpha) - 1|.

    The band is a declared choice: the limit theorem only asks for (1 + o(1)).
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    sizes = _check_sizes(sizes, P)
    n = int(sizes.sum())
    labels = _labels(sizes)
    EA = P[np.ix_(labels, labels)]
    np.fill_diagonal(EA, 0.0)
    degrees = EA.sum(axis=1)
    alpha = float(degrees.mean()) / n
    if alpha <= 0:
        raise ValidationError("all expected degrees are zero")
    deviation = float(np.max(np.abs(degrees / (n * alpha) - 1.0)))
    if deviation > band:
        log.warning("expected degrees deviate by %.3g from their mean (band %.3g)", deviation, band)
    return DegreeCheck(alpha, deviation, band)
