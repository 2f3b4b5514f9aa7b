from __future__ import annotations

import numpy as np

from src.core.graphon import AnalyticGraphon, StepGraphon, constant_graphon, gram_graphon, refine
from src.ensembles.layouts import (
    checkerboard,
    degree_variance_graphon,
    equal_blocks,
    growing_blocks,
    sbm_variance_graphon,
)
from src.ensembles.samplers import EnsembleSpec, block_sizes, check_equal_degrees
from src.errors import ValidationError

from pipelines.experiments.config import ExperimentConfig

# The builtin catalog: one desk-scale experiment per limit theorem the package predicts.
# Sizes are chosen so each experiment finishes in about a minute on a laptop; the tolerances
# are desk-scale surrogates for statements that only hold as n -> infinity.

DEFAULT_SEEDS = (1, 2, 3)


def _semicircle_gw() -> ExperimentConfig:
    W = constant_graphon(1.0)
    return ExperimentConfig(
        name="semicircle-gw",
        description="generalized Wigner matrix with constant profile: semicircle law",
        ensemble=EnsembleSpec("generalized-wigner", 2000, graphon=W),
        graphon=W,
        max_order=6,
        tolerances={"moment": 0.05, "ks": 0.05},
        seeds=DEFAULT_SEEDS,
    )


def _inhomog_degree() -> ExperimentConfig:
    # two equal communities: every vertex has the same expected degree
    n = 2000
    sizes = equal_blocks(n, 2)
    P = np.array([[0.02, 0.005], [0.005, 0.02]])
    check_equal_degrees(sizes, P)
    return ExperimentConfig(
        name="inhomog-degree",
        description="inhomogeneous random graph with equal expected degrees, scaled by sqrt(n alpha)",
        ensemble=EnsembleSpec("sbm", n, sizes=tuple(sizes), weights=P),
        graphon=degree_variance_graphon(sizes, P),
        observable="degree_centered",
        max_order=4,
        tolerances={"moment": 0.05, "ks": 0.05},
        seeds=DEFAULT_SEEDS,
    )


def _w_random_sparse() -> ExperimentConfig:
    n = 4096
    W = refine(AnalyticGraphon("product"), 128)
    return ExperimentConfig(
        name="w-random-sparse",
        description="sparse W-random graph, product kernel, rho = n^(-1/2)",
        ensemble=EnsembleSpec("w-random-graph", n, graphon=W, sparsity=n**-0.5),
        graphon=W,
        observable="centered",
        max_order=6,
        tolerances={"moment": 0.07},
        seeds=DEFAULT_SEEDS,
    )


def _block_fixed_d() -> ExperimentConfig:
    n = 1500
    fractions = np.array([0.5, 0.3, 0.2])
    S = np.array([[1.0, 2.0, 0.5], [2.0, 1.0, 1.0], [0.5, 1.0, 3.0]])
    sizes = block_sizes(fractions, n)
    return ExperimentConfig(
        name="block-fixed-d",
        description="Wigner-type block matrix with a fixed number of blocks",
        ensemble=EnsembleSpec("block-matrix", n, sizes=tuple(sizes), weights=S),
        graphon=StepGraphon(fractions, S),
        max_order=6,
        tolerances={"moment": 0.05, "ks": 0.05},
        seeds=DEFAULT_SEEDS,
    )


def _block_growing_d() -> ExperimentConfig:
    layout = growing_blocks(2000, decay="geometric", gamma=2.0)
    return ExperimentConfig(
        name="block-growing-d",
        description="block matrix with geometric class fractions alpha_i = (gamma - 1)/gamma^i",
        ensemble=layout.spec(),
        graphon=layout.limit,
        max_order=6,
        tolerances={"moment": 0.05, "ks": 0.05},
        seeds=DEFAULT_SEEDS,
    )


def _sbm_sparse() -> ExperimentConfig:
    n, d = 4096, 64
    sizes = equal_blocks(n, d)
    P = checkerboard(d, 0.7 / np.sqrt(n), 0.3 / np.sqrt(n))
    return ExperimentConfig(
        name="sbm-sparse",
        description="sparse SBM, p_kl in {0.3, 0.7} n^(-1/2), scaled by sigma sqrt(n)",
        ensemble=EnsembleSpec("sbm", n, sizes=tuple(sizes), weights=P),
        graphon=sbm_variance_graphon(sizes, P),
        max_order=4,
        # the mean of A is a rank-d perturbation: only the distribution-level check is meaningful
        tolerances={"ks": 0.05},
        moment_orders=(2,),
        seeds=DEFAULT_SEEDS,
    )


def _sbm_dense() -> ExperimentConfig:
    n = 1024
    d = int(np.floor(np.sqrt(n)))
    sizes = equal_blocks(n, d)
    P = checkerboard(d, 0.6, 0.3)
    return ExperimentConfig(
        name="sbm-dense",
        description="dense SBM with d = floor(sqrt(n)) blocks, mean removed, plus perturbation bounds",
        ensemble=EnsembleSpec("sbm", n, sizes=tuple(sizes), weights=P),
        graphon=sbm_variance_graphon(sizes, P),
        observable="centered",
        max_order=6,
        tolerances={"moment": 0.05, "ks": 0.05},
        diagnostics=("sbm-perturbation",),
        seeds=DEFAULT_SEEDS,
    )


def _gram_mp() -> ExperimentConfig:
    return ExperimentConfig(
        name="gram-mp",
        description="Gram matrix with constant profile and m = n: Marchenko-Pastur law with ratio 1",
        ensemble=EnsembleSpec("gram", 1000, m=1000, weights=np.array([[1.0]])),
        graphon=gram_graphon([[1.0]], 1.0),
        observable="gram",
        gram=True,
        aspect=1.0,
        max_order=4,
        tolerances={"moment": 0.05, "ks": 0.05},
        seeds=DEFAULT_SEEDS,
    )


def _gram_profile() -> ExperimentConfig:
    m, n = 500, 1000
    W = gram_graphon([[1.0, 2.0], [0.5, 1.5]], m / n)
    return ExperimentConfig(
        name="gram-profile",
        description="Gram matrix with a 2 x 2 block variance profile at aspect ratio 1/2",
        ensemble=EnsembleSpec("gram", n, m=m, graphon=W),
        graphon=W,
        observable="gram",
        gram=True,
        aspect=m / n,
        max_order=4,
        tolerances={"moment": 0.05, "ks": 0.05},
        seeds=DEFAULT_SEEDS,
    )


_BUILDERS = {
    "semicircle-gw": _semicircle_gw,
    "inhomog-degree": _inhomog_degree,
    "w-random-sparse": _w_random_sparse,
    "block-fixed-d": _block_fixed_d,
    "block-growing-d": _block_growing_d,
    "sbm-sparse": _sbm_sparse,
    "sbm-dense": _sbm_dense,
    "gram-mp": _gram_mp,
    "gram-profile": _gram_profile,
}


def experiment_names() -> list[str]:
    return list(_BUILDERS)


def builtin_experiments() -> list[ExperimentConfig]:
    return [build() for build in _BUILDERS.values()]


def get_experiment(name: str) -> ExperimentConfig:
    if name not in _BUILDERS:
        raise ValidationError(f"unknown experiment {name!r}; builtin: {', '.join(_BUILDERS)}")
    return _BUILDERS[name]()
