from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.core.graphon import AnalyticGraphon, constant_graphon, gram_graphon
from src.core.homdensity import gram_moment, wigner_moment
from src.core.qve import (
    density_curve,
    gram_transform_from_wigner,
    marchenko_pastur_transform,
    semicircle_transform,
    series_moments,
    series_transform,
    solve_gram_qve,
    solve_qve,
    transform_moments,
)
from src.core.trees import catalan
from src.errors import DomainError, NonConvergenceError, StructureError, ValidationError
from tests.factories import philox, random_step_graphon

GRID = [complex(E, eta) for E in np.linspace(-3.0, 3.0, 10) for eta in (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)]


def test_semicircle_closed_form_on_a_grid():
    W = constant_graphon(1.0)
    assert len(GRID) == 100
    for z in GRID:
        sol = solve_qve(W, z)
        assert abs(sol.s - semicircle_transform(z)) < 1e-10
        assert sol.residual <= 1e-12


def test_semicircle_examples():
    W = constant_graphon(1.0)
    outside = solve_qve(W, complex(3.0, 1e-9))
    assert outside.s.real == pytest.approx((3 - np.sqrt(5)) / 2, abs=1e-7)
    assert abs(outside.s.imag) < 1e-7
    z = 2j
    assert abs(solve_qve(W, z).s - semicircle_transform(z)) < 1e-10


@pytest.mark.parametrize("c", [0.25, 2.0, 4.0])
def test_constant_profile_scaling(c):
    for z in (complex(0.3, 0.1), complex(-1.5, 0.5), complex(4.0, 0.05)):
        expected = semicircle_transform(z / np.sqrt(c)) / np.sqrt(c)
        assert abs(solve_qve(constant_graphon(c), z).s - expected) < 1e-10
        assert abs(semicircle_transform(z, variance=c) - expected) < 1e-12


def test_solution_signs_and_average(two_block):
    for z in (complex(-2.0, 0.05), complex(0.0, 0.01), complex(1.0, 1.0)):
        sol = solve_qve(two_block, z)
        assert np.all(sol.a.imag < 0)
        assert sol.s.imag < 0
        assert abs(sol.s - two_block.fractions @ sol.a) < 1e-12


def test_reflection_symmetry(two_block):
    z = complex(0.7, 0.2)
    a = solve_qve(two_block, z).a
    b = solve_qve(two_block, -z.conjugate()).a
    np.testing.assert_allclose(b, -np.conj(a), atol=1e-11)


def test_large_z_asymptotics():
    gen = philox(23)
    for _ in range(5):
        W = random_step_graphon(gen, 3)
        z = 1e3 * np.exp(1j * np.pi / 3)
        s = solve_qve(W, z).s
        assert abs(s - 1 / z) <= 2 * W.sup_norm / abs(z) ** 3


def test_solution_does_not_depend_on_the_start(two_block):
    gen = philox(29)
    z = complex(0.5, 0.1)
    reference = solve_qve(two_block, z).a
    for _ in range(5):
        start = gen.standard_normal(2) - 1j * gen.uniform(0.1, 2.0, 2)
        np.testing.assert_allclose(solve_qve(two_block, z, initial=start).a, reference, atol=1e-10)


def test_errors(two_block):
    with pytest.raises(DomainError):
        solve_qve(two_block, complex(1.0, 0.0))
    with pytest.raises(DomainError):
        solve_qve(two_block, complex(1.0, -0.5))
    with pytest.raises(NonConvergenceError) as info:
        solve_qve(two_block, complex(0.1, 0.01), max_iter=2)
    assert info.value.residual > 0
    assert info.value.z == complex(0.1, 0.01)
    with pytest.raises(ValidationError):
        solve_qve(two_block, 1j, tol=0.0)


def test_analytic_inputs_are_refined():
    sol = solve_qve(AnalyticGraphon("product"), 1j)
    assert sol.metadata["refinement_panels"] == 256
    assert sol.to_dict()["refinement_panels"] == 256


def test_marchenko_pastur_gram_example():
    W = gram_graphon([[1.0]], 1.0)
    sol = solve_gram_qve(W, 1.0, complex(5.0, 1e-9))
    assert sol.s.real == pytest.approx((1 - np.sqrt(1 - 4 / 5)) / 2, abs=1e-7)
    assert sol.s.real == pytest.approx(0.2763932, abs=1e-7)


def test_marchenko_pastur_closed_form_on_a_grid():
    W = gram_graphon([[1.0]], 1.0)
    for E in np.linspace(0.5, 5.0, 10):
        for eta in (0.05, 0.1, 0.5, 1.0, 5.0):
            z = complex(E, eta)
            assert abs(solve_gram_qve(W, 1.0, z).s - marchenko_pastur_transform(z, 1.0)) < 1e-10


def test_gram_moments_from_the_transform():
    W = gram_graphon([[1.0]], 1.0)
    table = transform_moments(lambda z: solve_gram_qve(W, 1.0, z).s, 4, radius=10.0)
    for k in range(1, 5):
        assert table[k] == pytest.approx(gram_moment(k, W, 1.0), abs=1e-6)


@pytest.mark.parametrize("y", [0.5, 1.0, 2.0])
def test_gram_change_of_variables(y):
    W = gram_graphon([[1.0, 2.0], [0.5, 1.5]], y)
    for z in (complex(0.5, 0.1), complex(2.0, 0.05), complex(6.0, 1.0)):
        direct = solve_gram_qve(W, y, z).s
        assert abs(direct - gram_transform_from_wigner(W, y, z)) < 1e-8


def test_gram_structure_is_required(two_block):
    with pytest.raises(StructureError):
        solve_gram_qve(two_block, 1.0, 1j)


def test_series_moments():
    table = series_moments(constant_graphon(1.0), 8)
    assert table.source == "qve-series"
    for k in range(5):
        assert table[2 * k] == pytest.approx(catalan(k))
    scaled = series_moments(constant_graphon(3.0), 6)
    assert scaled[6] == pytest.approx(catalan(3) * 27)


@given(
    st.integers(min_value=1, max_value=5),
    st.integers(min_value=0, max_value=2**32),
    st.floats(min_value=0.1, max_value=np.pi - 0.1),
)
def test_series_agrees_with_the_solver(d, seed, angle):
    W = random_step_graphon(philox(seed), d)
    z = 10.0 * np.exp(1j * angle)
    table = series_moments(W, 12)
    assert abs(series_transform(table, z) - solve_qve(W, z).s) < 1e-6
    assert table[6] == pytest.approx(wigner_moment(3, W))


def test_transform_moments_recovers_catalan_numbers():
    table = transform_moments(semicircle_transform, 8, radius=5.0)
    for k in range(5):
        assert table[2 * k] == pytest.approx(catalan(k), abs=1e-9)
    for k in range(4):
        assert table[2 * k + 1] == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValidationError):
        transform_moments(semicircle_transform, 2, radius=5.0, points=63)


def test_semicircle_density_curve():
    curve = density_curve(constant_graphon(1.0), -3.0, 3.0, 601, 0.01)
    assert not curve.failures
    assert curve.rho[300] == pytest.approx(1 / np.pi, rel=0.02)
    assert curve.rho[50] < 0.02 and curve.rho[550] < 0.02
    np.testing.assert_allclose(curve.rho, curve.rho[::-1], atol=1e-9)
    assert curve.integral() == pytest.approx(1.0, abs=0.01)
    assert curve.cdf()[-1] == pytest.approx(1.0)
    assert curve.support == (-3.0, 3.0)


def test_gram_density_curve():
    W = gram_graphon([[1.0]], 1.0)
    curve = density_curve(W, 0.5, 3.5, 301, 0.01, gram=True, y=1.0)
    assert curve.kind == "gram-qve"
    assert not curve.failures
    x = curve.energies
    # Marchenko-Pastur law with ratio 1: sqrt(x(4 - x))/(2 pi x), 1/(2 pi) at x = 2
    expected = np.sqrt(x * (4.0 - x)) / (2.0 * np.pi * x)
    np.testing.assert_allclose(curve.rho, expected, atol=0.01)
    idx = int(np.argmin(np.abs(x - 2.0)))
    assert curve.rho[idx] == pytest.approx(1 / (2 * np.pi), rel=0.02)


def test_density_curve_validation(two_block):
    with pytest.raises(ValidationError):
        density_curve(two_block, -1, 1, 10, 0.0)
    with pytest.raises(ValidationError):
        density_curve(two_block, -1, 1, 1, 0.1)
    with pytest.raises(ValidationError):
        density_curve(two_block, -1, 1, 10, 0.1, gram=True)


def test_non_converged_points_are_recorded(two_block):
    curve = density_curve(two_block, -1.0, 1.0, 5, 0.01, max_iter=1)
    assert len(curve.failures) == 5
    assert np.all(np.isnan(curve.rho))
