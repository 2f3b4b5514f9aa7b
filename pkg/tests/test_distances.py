from __future__ import annotations

import numpy as np
import pytest

from src.core.graphon import constant_graphon
from src.core.qve import density_curve
from src.ensembles.samplers import sample_sbm, sample_wigner_type
from src.errors import DomainError, ValidationError
from src.spectra.compare import compare_spectrum, moment_deltas, predicted_moments, predicted_range, sbm_perturbation_report
from src.spectra.distances import (
    empirical_cdf,
    empirical_stieltjes,
    esd_moments,
    histogram_density,
    kolmogorov_distance,
    ks_to_curve,
    l1_density_distance,
    levy_cube_bound,
    levy_distance,
)
from src.spectra.eigen import Spectrum, eigenvalues_symmetric
from tests.factories import philox


def spectrum(*values) -> Spectrum:
    return Spectrum.from_values(values)


def test_esd_moments():
    table = esd_moments(spectrum(-1.0, 0.0, 1.0, 2.0), 3)
    assert table.source == "empirical"
    assert table[0] == 1.0
    assert table[1] == pytest.approx(0.5)
    assert table[2] == pytest.approx(1.5)
    assert table[3] == pytest.approx(2.0)


def test_empirical_stieltjes():
    sp = spectrum(0.0, 1.0)
    z = 2j
    assert empirical_stieltjes(sp, z) == pytest.approx((1 / z + 1 / (z - 1)) / 2)
    assert empirical_stieltjes(sp, z).imag < 0
    with pytest.raises(DomainError):
        empirical_stieltjes(sp, 0.5)


def test_empirical_cdf_is_right_continuous():
    sp = spectrum(0.0, 1.0, 1.0, 2.0)
    np.testing.assert_allclose(empirical_cdf(sp, [-1.0, 0.0, 0.5, 1.0, 2.0]), [0.0, 0.25, 0.25, 0.75, 1.0])


def test_kolmogorov_distance_is_an_exact_ratio():
    a = Spectrum.from_values(np.arange(10.0))
    b = Spectrum.from_values(np.arange(3.0, 13.0))
    assert kolmogorov_distance(a, b) == 3 / 10
    assert kolmogorov_distance(b, a) == 3 / 10
    # unequal sizes: on [1, 2) one CDF is 1 and the other 2/3
    assert kolmogorov_distance(spectrum(0.0, 1.0), spectrum(0.0, 1.0, 2.0)) == 1 / 3


def test_levy_distance_of_a_shifted_spectrum():
    assert levy_distance(spectrum(0.0, 1.0), spectrum(0.25, 1.25)) == pytest.approx(0.25, abs=1e-12)
    assert levy_distance(spectrum(0.25, 1.25), spectrum(0.0, 1.0)) == pytest.approx(0.25, abs=1e-12)


def test_point_mass_distances():
    a, b = spectrum(0.0), spectrum(1.0)
    assert kolmogorov_distance(a, b) == 1.0
    assert levy_distance(a, b) == pytest.approx(1.0)
    assert levy_distance(a, a) == 0.0
    assert kolmogorov_distance(a, a) == 0.0


def test_levy_of_a_small_shift():
    a = Spectrum.from_values(np.linspace(0.0, 1.0, 101))
    b = Spectrum.from_values(np.linspace(0.0, 1.0, 101) + 0.003)
    assert levy_distance(a, b) == pytest.approx(0.003, abs=1e-9)
    assert levy_distance(a, b) <= kolmogorov_distance(a, b)


def test_levy_cube_bound():
    assert levy_cube_bound(np.diag([1.0, 0.0]), np.zeros((2, 2))) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        levy_cube_bound(np.eye(2), np.eye(3))


def test_levy_cube_is_bounded_by_the_perturbation():
    gen = philox(37)
    for _ in range(100):
        n = int(gen.integers(2, 12))
        A = gen.standard_normal((n, n))
        A = (A + A.T) / 2
        E = gen.standard_normal((n, n)) * gen.uniform(0.01, 1.0)
        B = A + (E + E.T) / 2
        L = levy_distance(eigenvalues_symmetric(A), eigenvalues_symmetric(B))
        assert L**3 <= levy_cube_bound(A, B) + 1e-12


def test_histogram_density():
    curve = histogram_density(Spectrum.from_values(np.zeros(10)), 2, (-1.0, 1.0))
    np.testing.assert_allclose(curve.rho, [0.0, 1.0])
    assert curve.kind == "histogram"
    assert curve.support == (-1.0, 1.0)
    assert curve.integral() == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        histogram_density(spectrum(5.0), 4, (-1.0, 1.0))
    with pytest.raises(ValidationError):
        histogram_density(spectrum(0.0), 0, (-1.0, 1.0))
    with pytest.raises(ValidationError):
        histogram_density(spectrum(0.0), 2, (1.0, 1.0))


def test_l1_distance_between_histograms():
    left = histogram_density(spectrum(0.25, 0.25), 2, (0.0, 1.0))
    right = histogram_density(spectrum(0.75, 0.75), 2, (0.0, 1.0))
    assert l1_density_distance(left, left) == 0.0
    assert l1_density_distance(left, right) == pytest.approx(2.0, abs=0.01)


def test_ks_to_a_predicted_curve():
    curve = density_curve(constant_graphon(1.0), -3.0, 3.0, 601, 0.01)
    quantiles = np.interp((np.arange(500) + 0.5) / 500, curve.cdf(), curve.energies)
    assert ks_to_curve(Spectrum.from_values(quantiles), curve) <= 1 / 500 + 1e-6
    assert ks_to_curve(spectrum(10.0), curve) == pytest.approx(1.0)


def test_predictions():
    W = constant_graphon(1.0)
    table = predicted_moments(W, 4)
    assert table[4] == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        predicted_moments(W, 4, gram=True)
    assert predicted_range(W) == (-2.5, 2.5)
    rows = moment_deltas(table, esd_moments(spectrum(-1.0, 1.0), 4))
    assert [r["order"] for r in rows] == [1, 2, 3, 4]
    assert rows[0]["relative"] is None
    assert rows[1]["delta"] == pytest.approx(0.0)
    assert rows[3]["relative"] == pytest.approx(-0.5)


def test_compare_a_wigner_sample():
    W = constant_graphon(1.0)
    sp = eigenvalues_symmetric(sample_wigner_type(W, 1000, seed=1).matrix, backend="lapack")
    report = compare_spectrum(sp, W, 4, 0.05, bins=30)
    assert report["n"] == 1000
    assert report["qve_failures"] == 0
    assert report["ks_to_qve_cdf"] < 0.05
    assert report["l1_density"] < 0.3
    second = next(row for row in report["moments"] if row["order"] == 2)
    assert abs(second["relative"]) < 0.1


def test_sbm_perturbation_bounds_hold():
    P = np.array([[0.5, 0.1], [0.1, 0.4]])
    report = sbm_perturbation_report(sample_sbm([100, 100], P, seed=5))
    assert report["levy_bound_holds"]
    assert report["rank_bound_holds"]
    assert report["rank_bound"] == pytest.approx(0.01)
    with pytest.raises(ValidationError):
        sbm_perturbation_report(sample_wigner_type(constant_graphon(1.0), 10))


def test_rank_bound_holds_when_the_gap_equals_the_rank():
    # the block-mean difference has rank 2 and the distance lands exactly on 2/200
    report = sbm_perturbation_report(sample_sbm([100, 100], [[0.5, 0.1], [0.1, 0.4]], seed=5))
    assert report["rank_ks"] <= report["rank_bound"]
    assert report["rank_bound_holds"]
