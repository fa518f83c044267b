import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twochan.errors import DomainError, StructuralError
from twochan.instances import random_certified_problem
from twochan.model import (
    Band,
    CouplingBlock,
    SpectralOperator,
    TwoChannelProblem,
    assemble_full,
    hilbert_schmidt_norm,
    reduce_linear_term,
    spectral_gap,
)


def test_assemble_scalar_block():
    problem = TwoChannelProblem.from_entries(
        SpectralOperator((0.0,)), SpectralOperator((2.0,)), np.array([[0.5]])
    )
    np.testing.assert_allclose(assemble_full(problem), [[0.0, 0.5], [0.5, 2.0]])


def test_assemble_decoupled_spectrum():
    a1 = SpectralOperator((0.0, 1.0))
    a2 = SpectralOperator((3.0, 5.0))
    problem = TwoChannelProblem.from_entries(a1, a2, np.zeros((2, 2)))
    eigs = np.linalg.eigvalsh(assemble_full(problem))
    np.testing.assert_allclose(np.sort(eigs), [0.0, 1.0, 3.0, 5.0])


def test_assemble_hermitian_random(rng):
    problem = random_certified_problem(rng, n1=3, n2=3)
    full = assemble_full(problem)
    assert np.linalg.norm(full - full.conj().T) <= 1e-12 * np.linalg.norm(full)


def test_assemble_dimension_mismatch():
    a1 = SpectralOperator((0.0,))
    a2 = SpectralOperator((2.0, 3.0))
    with pytest.raises(StructuralError):
        TwoChannelProblem.from_entries(a1, a2, np.zeros((1, 1)))


@given(shift=st.floats(-50, 50), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_gap_shift_invariant_and_symmetric(shift, seed):
    gen = np.random.default_rng(seed)
    problem = random_certified_problem(gen)
    shifted = TwoChannelProblem.from_entries(
        SpectralOperator(tuple(x + shift for x in problem.a1.discrete_eigenvalues)),
        SpectralOperator(tuple(x + shift for x in problem.a2.discrete_eigenvalues)),
        problem.b12.entries,
    )
    assert spectral_gap(shifted) == pytest.approx(spectral_gap(problem), abs=1e-12)
    assert spectral_gap(problem.swapped()) == spectral_gap(problem)


def test_gap_examples():
    p = TwoChannelProblem.from_entries(
        SpectralOperator((0.0, 1.0)), SpectralOperator((3.0, 5.0)), np.zeros((2, 2))
    )
    assert spectral_gap(p) == 2.0

    band = SpectralOperator((), (Band(0.0, 1.0, 9),))
    point = SpectralOperator((1.5,))
    p2 = TwoChannelProblem.from_entries(band, point, np.zeros((9, 1)))
    assert spectral_gap(p2) == pytest.approx(0.5)

    overlapping = TwoChannelProblem.from_entries(
        SpectralOperator((0.0, 1.0)), SpectralOperator((1.0, 2.0)), np.zeros((2, 2))
    )
    assert spectral_gap(overlapping) == 0.0


def test_gap_endpoint_based_not_sample_based():
    # refinement of the band must not change the gap
    values = []
    for n in (5, 17, 65):
        band = SpectralOperator((), (Band(0.0, 1.0, n),))
        point = SpectralOperator((1.7,))
        p = TwoChannelProblem.from_entries(band, point, np.zeros((n, 1)))
        values.append(spectral_gap(p))
    assert values[0] == values[1] == values[2] == pytest.approx(0.7)


def test_hs_norm_hand_value():
    a1 = SpectralOperator((0.0,))
    a2 = SpectralOperator((2.0, 3.0))
    block = CouplingBlock(np.array([[0.3, 0.4]]), a1, a2)
    assert hilbert_schmidt_norm(block) == pytest.approx(0.5)


def test_hs_norm_zero_block():
    a1 = SpectralOperator((0.0,))
    a2 = SpectralOperator((2.0,))
    assert hilbert_schmidt_norm(CouplingBlock(np.zeros((1, 1)), a1, a2)) == 0.0


def test_hs_norm_matches_riemann_double_sum():
    # independent oracle: plain double Riemann sum of |B(l, m)|^2 on a fine grid
    def kernel(lam, mu):
        return np.sin(np.pi * lam) ** 2 * np.sin(np.pi * (mu - 2.0)) ** 2

    a1 = SpectralOperator((), (Band(0.0, 1.0, 201),))
    a2 = SpectralOperator((), (Band(2.0, 3.0, 201),))
    entries = kernel(a1.points[:, None], a2.points[None, :])
    entries[a1.is_band_endpoint, :] = 0.0
    entries[:, a2.is_band_endpoint] = 0.0
    block = CouplingBlock(entries, a1, a2)

    fine_l = np.linspace(0, 1, 4001)
    fine_m = np.linspace(2, 3, 4001)
    values = np.abs(kernel(fine_l[:, None], fine_m[None, :])) ** 2
    brute = np.sqrt(np.trapezoid(np.trapezoid(values, fine_m, axis=1), fine_l))
    assert hilbert_schmidt_norm(block) == pytest.approx(brute, rel=1e-4)


def test_hs_norm_conjugate_symmetric(certified_problem):
    assert hilbert_schmidt_norm(certified_problem.b12) == hilbert_schmidt_norm(
        certified_problem.b21
    )


def test_coupling_endpoints_forced_zero():
    a1 = SpectralOperator((), (Band(0.0, 1.0, 5),))
    a2 = SpectralOperator((2.0,))
    block = CouplingBlock(np.ones((5, 1)), a1, a2)
    np.testing.assert_array_equal(block.entries[[0, 4], 0], [0.0, 0.0])
    np.testing.assert_array_equal(block.entries[1:4, 0], np.ones(3))


def test_band_validation():
    with pytest.raises(StructuralError):
        Band(1.0, 0.0, 8)
    with pytest.raises(StructuralError):
        Band(0.0, 1.0, 1)
    with pytest.raises(StructuralError):
        Band(0.0, 1.0, 8, rule="simpson")
    with pytest.raises(StructuralError):
        SpectralOperator((0.5,), (Band(0.0, 1.0, 8),))
    with pytest.raises(StructuralError):
        SpectralOperator((), (Band(0.0, 1.0, 8), Band(0.5, 2.0, 8)))


def test_trapezoid_weights_positive_and_integrate():
    op = SpectralOperator((), (Band(0.0, 2.0, 33),))
    assert np.all(op.weights > 0)
    assert np.sum(op.weights) == pytest.approx(2.0)
    # integrates quadratics to the classical trapezoid accuracy
    approx = np.sum(op.weights * op.points**2)
    assert approx == pytest.approx(8 / 3, abs=1e-2)


def test_reduce_linear_term_identity():
    problem = TwoChannelProblem.from_entries(
        SpectralOperator((0.0, 1.0)), SpectralOperator((3.0,)), np.full((2, 1), 0.2)
    )
    reduction = reduce_linear_term(problem, np.zeros((2, 2)), np.zeros((1, 1)))
    assert reduction.problem is problem
    np.testing.assert_array_equal(reduction.map1, np.eye(2))


def test_reduce_linear_term_scalar():
    problem = TwoChannelProblem.from_entries(
        SpectralOperator((4.0,)), SpectralOperator((9.0,)), np.array([[0.0]])
    )
    reduction = reduce_linear_term(problem, np.array([[3.0]]), np.zeros((1, 1)))
    assert reduction.problem.a1.discrete_eigenvalues[0] == pytest.approx(1.0)
    assert reduction.problem.a2.discrete_eigenvalues[0] == pytest.approx(9.0)


def test_reduce_linear_term_substitution_oracle(rng):
    # eigenpairs of the reduced standard problem must solve the original
    # (A - N z - z)-dependent coupled problem after mapping back
    n1 = 0.3 * np.eye(2) + 0.1 * np.array([[0.0, 1.0], [1.0, 0.0]])
    n2 = 0.2 * np.eye(2)
    problem = random_certified_problem(rng, n1=2, n2=2, complex_coupling=False)
    reduction = reduce_linear_term(problem, n1, n2)
    evals, evecs = np.linalg.eigh(assemble_full(reduction.problem))
    a1 = np.diag(problem.a1.points)
    a2 = np.diag(problem.a2.points)
    b12 = problem.b12.entries
    for z, vec in zip(evals, evecs.T):
        u1 = reduction.map1 @ vec[:2]
        u2 = reduction.map2 @ vec[2:]
        r1 = (a1 - z * n1 - z * np.eye(2)) @ u1 + b12 @ u2
        r2 = b12.conj().T @ u1 + (a2 - z * n2 - z * np.eye(2)) @ u2
        assert np.linalg.norm(np.concatenate([r1, r2])) <= 1e-10


def test_reduce_linear_term_rejects_non_positive():
    problem = TwoChannelProblem.from_entries(
        SpectralOperator((4.0,)), SpectralOperator((9.0,)), np.array([[0.0]])
    )
    with pytest.raises(DomainError):
        reduce_linear_term(problem, np.array([[-1.0]]), np.zeros((1, 1)))
    with pytest.raises(DomainError):
        reduce_linear_term(problem, np.array([[-2.0]]), np.zeros((1, 1)))


def test_reduce_linear_term_rejects_grid_channels():
    band = SpectralOperator((), (Band(0.0, 1.0, 5),))
    point = SpectralOperator((2.0,))
    problem = TwoChannelProblem.from_entries(band, point, np.zeros((5, 1)))
    with pytest.raises(StructuralError):
        reduce_linear_term(problem, np.zeros((5, 5)), np.zeros((1, 1)))
