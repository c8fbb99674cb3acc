import math

import numpy as np
import pytest
import scipy.linalg as sla

from cylspec.adi import (
    AdiSolver,
    BandedLU,
    SylvesterProblem,
    adi_solve,
    backward_error,
    compute_shifts,
    dense_sylvester_oracle,
    gershgorin_bounds,
    plan_shifts,
    spectral_bounds,
)
from cylspec.errors import AdiConvergenceError, SingularOperatorError, SpectrumError
from cylspec.solvers import reduced_modal_problem
from cylspec.ultraop import BandedMatrix


def banded(a):
    return BandedMatrix.from_dense(np.asarray(a, dtype=float))


def random_banded(rng, n, offsets, shift=0.0):
    a = np.zeros((n, n))
    for off in offsets:
        idx = np.arange(max(0, -off), min(n, n - off))
        a[idx, idx + off] = rng.standard_normal(len(idx))
    return a + shift * np.eye(n)


def diagonal_problem(rng, m=8, n=8):
    """Diagonalizable problem with A ~ [1, 2] and -D ~ [-3, -2] (disjoint spectra)."""
    qa = sla.qr(rng.standard_normal((m, m)))[0]
    qd = sla.qr(rng.standard_normal((n, n)))[0]
    A = qa @ np.diag(np.linspace(1, 2, m)) @ qa.T
    D = qd @ np.diag(np.linspace(2, 3, n)) @ qd.T
    E = rng.standard_normal((m, n))
    return SylvesterProblem(banded(A), banded(np.eye(n)), banded(np.eye(m)), banded(D), E)


# --------------------------------------------------------------------------
# banded LU


def test_banded_lu_matches_dense_solve(rng):
    a = random_banded(rng, 12, [-2, -1, 0, 1, 3], shift=6.0)
    b = rng.standard_normal((12, 3))
    lu = BandedLU(banded(a))
    assert np.allclose(lu.solve(b), np.linalg.solve(a, b), atol=1e-12)
    assert np.allclose(lu.solve(b, trans=True), np.linalg.solve(a.T, b), atol=1e-12)


def test_banded_lu_complex_and_vector_rhs(rng):
    a = random_banded(rng, 9, [-1, 0, 2], shift=5.0)
    b = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    x = BandedLU(banded(a)).solve(b)
    assert x.shape == (9,)
    assert np.allclose(a @ x, b, atol=1e-12)


def test_banded_lu_singular():
    a = np.diag([1.0, 0.0, 2.0])
    with pytest.raises(SingularOperatorError):
        BandedLU(banded(a))


# --------------------------------------------------------------------------
# spectral bounds and shifts


def test_bounds_scalar_multiple():
    C = banded(np.eye(5) + np.diag(np.ones(4), 1) * 0.3)
    assert spectral_bounds(C * 2.0, C) == pytest.approx((2.0, 2.0))


def test_bounds_diagonal():
    assert spectral_bounds(banded(np.diag(np.arange(1.0, 6.0))), banded(np.eye(5))) == pytest.approx((1, 5))


def test_bounds_enclose_helmholtz_eigenvalues():
    op = reduced_modal_problem(16, 16, 0, 0.5)
    lo, hi = spectral_bounds(op.A, op.C)
    ev = sla.eigvals(op.A.toarray(), op.C.toarray()).real
    assert lo <= ev.min() + 1e-9 and ev.max() - 1e-9 <= hi


def test_gershgorin_encloses_dense_bounds(rng):
    a = random_banded(rng, 8, [-1, 0, 1], shift=3.0)
    a = 0.5 * (a + a.T)
    lo, hi = spectral_bounds(banded(a), banded(np.eye(8)))
    glo, ghi = gershgorin_bounds(banded(a), banded(np.eye(8)))
    assert glo <= lo and hi <= ghi


def test_bounds_errors():
    with pytest.raises(SingularOperatorError):
        spectral_bounds(banded(np.eye(3)), banded(np.diag([1.0, 0.0, 1.0])))
    rot = banded([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(SpectrumError):
        spectral_bounds(rot, banded(np.eye(2)))
    with pytest.raises(ValueError):
        spectral_bounds(banded(np.eye(2)), banded(np.eye(2)), method="lanczos")


def test_cross_ratio_example():
    plan = compute_shifts((1.0, 2.0), (3.0, 4.0))
    assert plan.gamma_cr == pytest.approx(4.0 / 3.0)


def test_symmetric_intervals_give_opposite_shifts():
    plan = compute_shifts((-4.0, -2.0), (2.0, 4.0), tol=1e-12)
    assert np.allclose(plan.u, -plan.v, atol=1e-12)


def test_shifts_lie_in_their_intervals():
    plan = compute_shifts((0.1, 50.0), (-30.0, -2.0), tol=1e-12)
    assert np.all((plan.u >= 0.1 - 1e-9) & (plan.u <= 50.0 + 1e-9))
    assert np.all((plan.v >= -30.0 - 1e-9) & (plan.v <= -2.0 + 1e-9))


def test_iteration_count_formula_and_monotonicity():
    coarse = compute_shifts((1.0, 2.0), (3.0, 4.0), tol=1e-1)
    fine = compute_shifts((1.0, 2.0), (3.0, 4.0), tol=1e-12)
    assert fine.J > coarse.J
    gamma = fine.gamma_cr
    assert fine.J == math.ceil(math.log(16 * gamma) * math.log(4 / 1e-12) / math.pi**2)
    assert len(fine.u) == len(fine.v) == fine.J


def test_overlapping_intervals_rejected():
    with pytest.raises(SpectrumError):
        compute_shifts((0.0, 3.0), (2.0, 5.0))
    with pytest.raises(ValueError):
        compute_shifts((3.0, 1.0), (5.0, 6.0))


# --------------------------------------------------------------------------
# ADI solve


def test_zero_rhs_gives_zero(rng):
    prob = diagonal_problem(rng)
    zero = SylvesterProblem(prob.A, prob.B, prob.C, prob.D, np.zeros((8, 8)))
    X = adi_solve(zero)
    assert np.all(X == 0)
    assert np.all(dense_sylvester_oracle(zero) == 0)


def test_one_by_one_problem():
    a, b, c, d, e = 2.0, 3.0, 0.5, 4.0, 7.0
    prob = SylvesterProblem(banded([[a]]), banded([[b]]), banded([[c]]), banded([[d]]), np.array([[e]]))
    assert adi_solve(prob)[0, 0] == pytest.approx(e / (a * b + c * d), rel=1e-14)


def test_identity_pair_oracle(rng):
    E = rng.standard_normal((4, 5))
    prob = SylvesterProblem(banded(np.eye(4)), banded(np.eye(5)), banded(np.zeros((4, 4))),
                            banded(np.zeros((5, 5))), E)
    assert np.allclose(dense_sylvester_oracle(prob), E)


def test_random_problem_matches_oracle(rng):
    prob = diagonal_problem(rng)
    X = adi_solve(prob)
    ref = dense_sylvester_oracle(prob)
    assert np.linalg.norm(X - ref) / np.linalg.norm(ref) <= 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_modal_helmholtz_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    m = n = 12
    w = int(rng.integers(0, 5))
    op = reduced_modal_problem(m, n, w, float(rng.uniform(0.01, 1.0)))
    prob = SylvesterProblem(op.A, op.B, op.C, op.D, rng.standard_normal(op.E.shape))
    X = adi_solve(prob)
    ref = dense_sylvester_oracle(prob)
    assert np.linalg.norm(X - ref) / np.linalg.norm(ref) <= 1e-10


def test_complex_rhs(rng):
    prob = diagonal_problem(rng)
    E = prob.E + 1j * rng.standard_normal(prob.E.shape)
    X = adi_solve(SylvesterProblem(prob.A, prob.B, prob.C, prob.D, E))
    assert np.allclose(X.real, adi_solve(prob), atol=1e-10)
    assert backward_error(prob.A, prob.B, prob.C, prob.D, X, E) < 1e-12


def test_history_records_every_iteration(rng):
    prob = diagonal_problem(rng)
    X, history = adi_solve(prob, record_history=True)
    assert len(history) % plan_shifts(prob.A, prob.B, prob.C, prob.D).J == 0
    assert history[-1] <= 1e-11
    assert history[0] > history[-1]


def test_residual_decays_at_least_linearly_in_log():
    op = reduced_modal_problem(24, 24, 2, 0.05)
    prob = SylvesterProblem(op.A, op.B, op.C, op.D, np.random.default_rng(3).standard_normal(op.E.shape))
    _, history = adi_solve(prob, record_history=True)
    slope = np.polyfit(np.arange(len(history)), np.log10(history), 1)[0]
    assert slope < -0.3
    # the best residual so far never gets worse by more than rounding
    assert np.all(np.minimum.accumulate(history)[-1] <= history[-1] * (1 + 1e-12))


def test_non_convergence_reports_history(rng):
    prob = diagonal_problem(rng)
    # a plan for the wrong intervals: converges far too slowly
    bad = compute_shifts((100.0, 200.0), (-200.0, -100.0), tol=1e-12)
    bad = type(bad)(**{**bad.__dict__, "u": bad.u[:1], "v": bad.v[:1], "J": 1})
    with pytest.raises(AdiConvergenceError) as info:
        AdiSolver(prob.A, prob.B, prob.C, prob.D, bad).solve(prob.E, max_cycles=2)
    assert len(info.value.history) == 2


def test_singular_shift_reports_index():
    A = banded(np.diag([1.0, 2.0]))
    C = banded(np.eye(2))
    plan = compute_shifts((1.0, 2.0), (-4.0, -3.0))
    plan = type(plan)(**{**plan.__dict__, "v": np.array([plan.v[0], 2.0] + list(plan.v[2:]))})
    with pytest.raises(SingularOperatorError) as info:
        AdiSolver(A, banded(np.eye(3)), C, banded(3 * np.eye(3)), plan)
    assert info.value.index == 1


def test_oracle_size_limit():
    big = banded(np.eye(65))
    with pytest.raises(ValueError):
        dense_sylvester_oracle(SylvesterProblem(big, big, big, big, np.zeros((65, 65))))


def test_problem_shape_validation():
    with pytest.raises(ValueError):
        SylvesterProblem(banded(np.eye(2)), banded(np.eye(3)), banded(np.eye(2)), banded(np.eye(3)),
                         np.zeros((3, 2)))
