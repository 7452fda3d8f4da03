import math

import numpy as np
import pytest

from fockbeam.errors import ResourceLimitError
from fockbeam.exact import FockInput, exact_amplitudes_real
from fockbeam.oracle import GeneratorMatrix, oracle_check, oracle_evolve, oracle_matrix

QUARTER = math.pi / 4


def test_generator_is_antisymmetric_tridiagonal():
    g = GeneratorMatrix.build(6).dense()
    assert np.array_equal(g, -g.T)
    assert np.count_nonzero(np.triu(g, 2)) == 0
    assert g[1, 0] == pytest.approx(math.sqrt(6))


def test_zero_angle_is_identity():
    vec = oracle_evolve(7, 3, 0.0)
    assert np.allclose(vec, np.eye(8)[3], atol=1e-15)


def test_hom_triple():
    vec = oracle_evolve(2, 1, QUARTER)
    assert abs(vec[1]) <= 1e-12
    assert abs(vec[0]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert vec[0] == pytest.approx(-vec[2], abs=1e-12)


def test_four_photon_probabilities():
    vec = oracle_evolve(4, 2, QUARTER)
    assert np.allclose(vec**2, [3 / 8, 0, 1 / 4, 0, 3 / 8], atol=1e-12)


@pytest.mark.parametrize("n_total", [1, 10, 100, 500])
def test_norm_preserved(n_total):
    u = oracle_matrix(n_total, 0.83)
    assert np.allclose(np.linalg.norm(u, axis=0), 1.0, atol=1e-12)


def test_composition():
    for n_total in (5, 40):
        a, b = 0.3, 1.1
        lhs = oracle_matrix(n_total, b) @ oracle_matrix(n_total, a)
        assert np.max(np.abs(lhs - oracle_matrix(n_total, a + b))) <= 1e-10


def test_eig_and_expm_agree():
    for n_total in (3, 30):
        d = oracle_matrix(n_total, 0.7, method="eig") - oracle_matrix(n_total, 0.7, method="expm")
        assert np.max(np.abs(d)) <= 1e-11


def test_signed_agreement_with_exact():
    """After aligning the global phase on one entry, every sign matches."""
    for n_total in range(1, 61):
        u = oracle_matrix(n_total, QUARTER)
        for n_a in range(n_total + 1):
            exact = exact_amplitudes_real(FockInput(n_total, n_a))
            ref = int(np.argmax(np.abs(exact)))
            phase = np.sign(u[ref, n_a] * exact[ref])
            assert np.max(np.abs(phase * u[:, n_a] - exact)) <= 1e-10


def test_phase_convention_needs_no_calibration():
    # the oracle and the derivative sum share the same convention outright
    for n_total in (4, 9, 33):
        u = oracle_matrix(n_total, QUARTER)
        for n_a in range(n_total + 1):
            assert np.allclose(u[:, n_a], exact_amplitudes_real(FockInput(n_total, n_a)), atol=1e-10)


def test_general_angle_signed():
    for xi in (0.2, 1.0, 2.9):
        u = oracle_matrix(25, xi)
        for n_a in (0, 7, 25):
            assert np.allclose(u[:, n_a], exact_amplitudes_real(FockInput(25, n_a, xi)), atol=1e-10)


def test_oracle_check_small():
    report = oracle_check(20)
    assert report.passed
    assert report.max_deviation <= 1e-8
    assert report.cases_checked == sum(n + 1 for n in range(21))
    assert report.elapsed_s < 1.0
    small = oracle_check(2)
    assert small.max_deviation <= 1e-14  # rounding level of the eigen-decomposition


def test_dimension_bound():
    with pytest.raises(ResourceLimitError):
        GeneratorMatrix.build(2001)
