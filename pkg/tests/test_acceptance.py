"""Desk-scale Monte Carlo checks of the limit theorems.

The theorems are statements about n -> infinity; the sizes and tolerances here are the
declared finite-n surrogates. Run with ``pytest -m slow``.
"""

from __future__ import annotations

import numpy as np
import pytest

from pipelines.experiments.catalog import get_experiment
from pipelines.experiments.runner import run_experiment, strip_timestamp
from src.core.graphon import AnalyticGraphon, StepGraphon, gram_graphon, refine
from src.core.homdensity import gram_moment_table, wigner_moment
from src.core.qve import density_curve
from src.ensembles.layouts import checkerboard, equal_blocks, sbm_variance_graphon
from src.ensembles.samplers import sample_gram, sample_sbm, sample_w_random_graph, sample_wigner_type
from src.io.writers import canonical_json
from src.spectra.compare import predicted_range, sbm_perturbation_report
from src.spectra.distances import esd_moments, ks_to_curve
from src.spectra.eigen import eigenvalues_symmetric

pytestmark = pytest.mark.slow


def _even_moments(matrices, max_k: int) -> np.ndarray:
    values = []
    for M in matrices:
        table = esd_moments(eigenvalues_symmetric(M, backend="lapack"), 2 * max_k)
        values.append([table[2 * k] for k in range(1, max_k + 1)])
    return np.mean(values, axis=0)


def test_two_block_wigner_type_moments():
    W = StepGraphon(np.array([0.5, 0.5]), np.array([[1.0, 2.0], [2.0, 3.0]]))
    empirical = _even_moments((sample_wigner_type(W, 2048, seed=s).matrix for s in range(1, 6)), 3)
    predicted = np.array([wigner_moment(k, W) for k in range(1, 4)])
    np.testing.assert_allclose(empirical, predicted, rtol=0.05)


def test_sparse_sbm_follows_the_qve_density():
    n, d = 4096, 64
    sizes = equal_blocks(n, d)
    P = checkerboard(d, 0.7 / np.sqrt(n), 0.3 / np.sqrt(n))
    W = sbm_variance_graphon(sizes, P)
    lo, hi = predicted_range(W)
    curve = density_curve(W, lo, hi, 801, 0.05)
    distances = [
        ks_to_curve(eigenvalues_symmetric(sample_sbm(sizes, P, seed=s, keep=()).matrix, backend="lapack"), curve)
        for s in (1, 2, 3)
    ]
    assert np.mean(distances) < 0.05


def test_sparse_w_random_graph_moments():
    n = 4096
    W = refine(AnalyticGraphon("product"), 128)
    matrices = (sample_w_random_graph(W, n, n**-0.5, seed=s, keep=("centered",)).get("centered") for s in (1, 2, 3))
    empirical = _even_moments(matrices, 3)
    predicted = np.array([wigner_moment(k, W) for k in range(1, 4)])
    np.testing.assert_allclose(empirical, predicted, rtol=0.07)


def test_dense_sbm_rank_bound():
    n = 1024
    d = int(np.floor(np.sqrt(n)))
    P = checkerboard(d, 0.6, 0.3)
    for seed in (1, 2, 3):
        report = sbm_perturbation_report(sample_sbm(equal_blocks(n, d), P, seed=seed))
        assert report["rank_bound_holds"]
        assert report["levy_bound_holds"]


def test_builtin_reports_are_byte_identical():
    cfg = get_experiment("gram-profile").with_seeds((1, 2))
    first = run_experiment(cfg, threads=1)
    second = run_experiment(cfg, threads=2)
    assert canonical_json(strip_timestamp(first)) == canonical_json(strip_timestamp(second))


def test_gram_profile_moments_at_aspect_two():
    # m > n, so half the Gram spectrum sits at zero
    m, n, y = 1000, 500, 2.0
    W = gram_graphon([[1.0, 2.0], [0.5, 1.5]], y)
    values = []
    for seed in (1, 2, 3):
        table = esd_moments(eigenvalues_symmetric(sample_gram(m, n, W, seed=seed).get("gram"), backend="lapack"), 3)
        values.append([table[k] for k in range(1, 4)])
    predicted = gram_moment_table(W, y, 3)
    np.testing.assert_allclose(np.mean(values, axis=0), [predicted[k] for k in range(1, 4)], rtol=0.05)
