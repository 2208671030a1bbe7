import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riccatikit import numlin
from riccatikit.exceptions import (
    DimensionMismatch,
    InputError,
    NonSquare,
    NoStabilizingSolution,
    PoleAtS,
    SingularOperator,
    UnstableSystem,
)
from generators import care_problem, stable_matrix

seeds = st.integers(0, 2**32 - 1)


def kron_lyapunov(A, Q):
    """Oracle: solve ``A P + P A^H + Q = 0`` via column-major vectorization."""
    n = A.shape[0]
    K = np.kron(np.eye(n), A) + np.kron(A.conj(), np.eye(n))
    p = np.linalg.solve(K, -Q.reshape(-1, order="F"))
    return p.reshape(n, n, order="F")


def leverrier_roots(A):
    """Oracle: characteristic polynomial by Faddeev-LeVerrier, roots by companion matrix."""
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(A @ M) / k)
    return np.roots(coeffs)


def match_multisets(a, b):
    a = list(a)
    err = 0.0
    for z in b:
        j = int(np.argmin([abs(z - w) for w in a]))
        err = max(err, abs(z - a.pop(j)))
    return err


# -- containers and eig ------------------------------------------------------

def test_statespace_scalars_promote():
    sys = numlin.StateSpace(-1.0, 1.0, 1.0, 0.0)
    assert sys.A.shape == (1, 1)
    assert (sys.n_states, sys.n_inputs, sys.n_outputs) == (1, 1, 1)


def test_statespace_rejects_bad_shapes():
    with pytest.raises(DimensionMismatch):
        numlin.StateSpace(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), 0.0)
    with pytest.raises(NonSquare):
        numlin.StateSpace(np.ones((2, 3)), np.ones((2, 1)), np.ones((1, 3)), 0.0)
    with pytest.raises(InputError):
        numlin.StateSpace([[np.nan]], [[1.0]], [[1.0]], [[0.0]])


def test_eig_diagonal_and_rotation():
    assert np.allclose(numlin.eig(np.diag([2.0, 1.0])).values, [1, 2])
    assert np.allclose(numlin.eig([[0.0, 1.0], [-1.0, 0.0]]).values, [-1j, 1j])


def test_eig_nonsquare():
    with pytest.raises(NonSquare):
        numlin.eig(np.ones((2, 3)))


def test_eig_matches_companion_oracle():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((8, 8))
    ed = numlin.eig(A)
    assert match_multisets(leverrier_roots(A), ed.values) <= 1e-8 * max(1, np.abs(ed.values).max())
    assert ed.residual(A) <= 1e-9 * np.linalg.norm(A)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 12), st.booleans())
def test_eig_sorted_with_small_residual(seed, n, cplx):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0)
    ed = numlin.eig(A)
    assert ed.residual(A) <= 1e-9 * max(np.linalg.norm(A), 1)
    keys = list(zip(ed.values.real, ed.values.imag))
    assert keys == sorted(keys)


# -- Schur -----------------------------------------------------------------------

def test_ordered_schur_already_ordered():
    sf = numlin.ordered_schur(np.diag([-1.0, 2.0]), lambda z: z.real <= 0)
    assert sf.sdim == 1
    assert np.allclose(sf.T, np.diag([-1.0, 2.0]))
    assert np.allclose(np.abs(sf.U), np.eye(2))


def test_ordered_schur_swaps():
    A = np.diag([2.0, -1.0])
    sf = numlin.ordered_schur(A, lambda z: z.real <= 0)
    assert sf.sdim == 1 and np.isclose(sf.T[0, 0], -1.0)
    assert np.allclose(sf.U @ sf.T @ sf.U.T, A)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 10), st.booleans())
def test_schur_round_trip(seed, n, cplx):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0)
    sf = numlin.ordered_schur(A, lambda z: z.real <= 0)
    U, T = sf.U, sf.T
    assert np.linalg.norm(U.conj().T @ U - np.eye(n)) <= 1e-10
    assert np.linalg.norm(U @ T @ U.conj().T - A) <= 1e-9 * np.linalg.norm(A)
    lead = numlin.eigvals(sf.leading)
    trail = numlin.eigvals(sf.trailing)
    assert np.all(lead.real <= 1e-12) and np.all(trail.real > 0)
    spec = np.concatenate([lead, trail])
    assert match_multisets(numlin.eigvals(A), spec) <= 1e-8 * max(1, np.linalg.norm(A))


# -- Sylvester / Lyapunov -----------------------------------------------------------

def test_lyapunov_scalar():
    assert np.allclose(numlin.solve_lyapunov([[-1.0]], [[2.0]]), [[1.0]])


def test_lyapunov_hand_example():
    P = numlin.solve_lyapunov(np.diag([-1.0, -2.0]), [[2.0, 3.0], [3.0, 4.0]])
    assert np.allclose(P, np.ones((2, 2)), atol=1e-12)


def test_lyapunov_random_stable_matches_kronecker():
    rng = np.random.default_rng(1)
    A = stable_matrix(rng, 10)
    P = numlin.solve_lyapunov(A, np.eye(10))
    assert np.linalg.norm(A @ P + P @ A.T + np.eye(10)) <= 1e-9
    assert np.linalg.eigvalsh(P)[0] > 0
    assert np.allclose(P, kron_lyapunov(A, np.eye(10)), rtol=0, atol=1e-9 * np.linalg.norm(P))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 8), st.booleans())
def test_lyapunov_kronecker_oracle(seed, n, cplx):
    rng = np.random.default_rng(seed)
    A = stable_matrix(rng, n, complex_=cplx)
    Q = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0)
    P = numlin.solve_lyapunov(A, Q)
    ref = kron_lyapunov(A, Q)
    assert np.linalg.norm(P - ref) <= 1e-9 * max(1, np.linalg.norm(ref))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 8), st.floats(-3, 3), st.floats(-3, 3))
def test_lyapunov_linearity(seed, n, alpha, beta):
    rng = np.random.default_rng(seed)
    A = stable_matrix(rng, n)
    Q1 = rng.standard_normal((n, n))
    Q2 = rng.standard_normal((n, n))
    lhs = numlin.solve_lyapunov(A, alpha * Q1 + beta * Q2)
    rhs = alpha * numlin.solve_lyapunov(A, Q1) + beta * numlin.solve_lyapunov(A, Q2)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1, np.linalg.norm(rhs))


def test_lyapunov_hermitian_output():
    rng = np.random.default_rng(2)
    A = stable_matrix(rng, 5, complex_=True)
    Q = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    Q = Q + Q.conj().T
    P = numlin.solve_lyapunov(A, Q)
    assert np.array_equal(P, P.conj().T)


def test_lyapunov_singular_operator():
    with pytest.raises(SingularOperator):
        numlin.solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2))


def test_sylvester_matches_kronecker():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((3, 3)) + 5 * np.eye(3)
    C = rng.standard_normal((4, 3))
    X = numlin.solve_sylvester(A, B, C)
    K = np.kron(np.eye(3), A) + np.kron(B.T, np.eye(4))
    ref = np.linalg.solve(K, C.reshape(-1, order="F")).reshape(4, 3, order="F")
    assert np.allclose(X, ref, atol=1e-10)
    assert not np.iscomplexobj(X)


# -- Riccati ---------------------------------------------------------------------

def test_care_scalar():
    sol = numlin.solve_care([[0.0]], [[1.0]], [[1.0]], [[1.0]])
    assert sol.X[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert sol.closed_loop_eigs[0] == pytest.approx(-1.0)


def test_care_zero_data():
    sol = numlin.solve_care([[-1.0]], [[0.0]], [[0.0]], [[1.0]])
    assert sol.X[0, 0] == 0.0


def test_care_double_integrator():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    sol = numlin.solve_care(A, B, np.eye(2), [[1.0]])
    r3 = np.sqrt(3.0)
    assert np.allclose(sol.X, [[r3, 1.0], [1.0, r3]], atol=1e-12)


def test_care_uncontrollable_axis_mode():
    with pytest.raises(NoStabilizingSolution):
        numlin.solve_care([[0.0]], [[0.0]], [[1.0]], [[1.0]])


def test_care_rejects_bad_input():
    with pytest.raises(InputError):
        numlin.solve_care(np.eye(2), np.ones((2, 1)), np.eye(2), [[0.0]])
    with pytest.raises(DimensionMismatch):
        numlin.solve_care(np.eye(2), np.ones((3, 1)), np.eye(2), [[1.0]])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 12), st.booleans())
def test_care_residual_property(seed, n, cplx):
    rng = np.random.default_rng(seed)
    A, B, Q, R = care_problem(rng, n, complex_=cplx)
    X = numlin.solve_care(A, B, Q, R).X
    S = B @ np.linalg.solve(R, B.conj().T)
    assert np.array_equal(X, X.conj().T)
    res = np.linalg.norm(numlin.are_residual(A, S, Q, X))
    assert res <= 1e-8 * max(1, np.linalg.norm(Q))
    assert np.all(np.linalg.eigvals(A - S @ X).real < 0)


def test_solve_are_indefinite_s_antistabilizing():
    # scalar 2a x - s x^2 + q = 0 with a = 1, s = 1, q = 3: roots 3 and -1
    stab = numlin.solve_are([[1.0]], [[1.0]], [[3.0]])
    anti = numlin.solve_are([[1.0]], [[1.0]], [[3.0]], branch="antistabilizing")
    assert stab.X[0, 0] == pytest.approx(3.0)
    assert anti.X[0, 0] == pytest.approx(-1.0)


def test_extremal_boundary_exact():
    # x^2 = 0 style boundary: A = 0, S = 1, Q = 0 gives X = 0 with closed loop at 0
    sol = numlin.solve_are_extremal([[0.0]], [[1.0]], [[0.0]])
    assert abs(sol.X[0, 0]) <= 1e-7
    assert not sol.strict


# -- frequency response and H-infinity -------------------------------------------

def test_transfer_eval_examples():
    sys = numlin.StateSpace(-1.0, 1.0, 1.0, 0.0)
    assert numlin.transfer_eval(sys, 0.0)[0, 0] == pytest.approx(1.0)
    assert numlin.transfer_eval(sys, 1j)[0, 0] == pytest.approx((1 - 1j) / 2)
    D = np.array([[1.0, 2.0]])
    gain = numlin.StateSpace(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((1, 0)), D)
    assert np.allclose(numlin.transfer_eval(gain, 3 + 4j), D)


def test_transfer_eval_pole():
    with pytest.raises(PoleAtS):
        numlin.transfer_eval(numlin.StateSpace(-1.0, 1.0, 1.0, 0.0), -1.0)


def test_hinf_examples():
    assert numlin.hinf_norm(numlin.StateSpace(-1.0, 1.0, 1.0, 0.0)) == pytest.approx(1.0, rel=1e-6)
    assert numlin.hinf_norm(numlin.StateSpace(-1.0, 1.0, 0.0, 0.0)) == 0.0
    with pytest.raises(UnstableSystem):
        numlin.hinf_norm(numlin.StateSpace(1.0, 1.0, 1.0, 0.0))


def test_hinf_resonant_peak():
    # lightly damped second-order system, peak 1 / (2 zeta sqrt(1 - zeta^2))
    zeta = 0.05
    sys = numlin.StateSpace([[0.0, 1.0], [-1.0, -2 * zeta]], [[0.0], [1.0]], [[1.0, 0.0]], 0.0)
    peak = 1.0 / (2 * zeta * np.sqrt(1 - zeta**2))
    assert numlin.hinf_norm(sys) == pytest.approx(peak, rel=1e-6)


def grid_peak(sys, count=10_000):
    w = np.concatenate([[0.0], np.logspace(-3, 3, count)])
    return max(np.linalg.svd(G, compute_uv=False)[0] for G in numlin.freqresp(sys, w)), w


def test_hinf_random_matches_grid():
    rng = np.random.default_rng(4)
    sys = numlin.StateSpace(stable_matrix(rng, 6), rng.standard_normal((6, 2)),
                            rng.standard_normal((3, 6)), rng.standard_normal((3, 2)))
    peak, _ = grid_peak(sys)
    assert numlin.hinf_norm(sys) == pytest.approx(peak, rel=1e-4)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 6), st.booleans())
def test_hinf_dominates_samples(seed, n, cplx):
    rng = np.random.default_rng(seed)
    A = stable_matrix(rng, n, margin=0.1, complex_=cplx)
    sys = numlin.StateSpace(A, rng.standard_normal((n, 2)), rng.standard_normal((2, n)),
                            rng.standard_normal((2, 2)))
    norm = numlin.hinf_norm(sys)
    w = np.linspace(-20, 20, 401)
    sig = [np.linalg.svd(G, compute_uv=False)[0] for G in numlin.freqresp(sys, w)]
    assert norm >= max(sig) - 1e-6


# -- predicates and determinism --------------------------------------------------

def test_predicates():
    assert numlin.is_psd(np.diag([0.0, 1.0]))
    assert not numlin.is_pd(np.diag([0.0, 1.0]))
    assert not numlin.is_hurwitz([[0.0, 1.0], [-1.0, 0.0]])
    assert numlin.is_hurwitz([[-1.0]])
    assert numlin.spectral_radius([[0.0, 2.0], [0.0, 0.0]]) == 0.0
    assert numlin.is_skew_symmetric([[0.0, 1.0], [-1.0, 0.0]])
    assert not numlin.is_hermitian([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(NonSquare):
        numlin.is_psd(np.ones((1, 2)))


def test_determinism():
    rng = np.random.default_rng(5)
    A, B, Q, R = care_problem(rng, 9, complex_=True)
    X1 = numlin.solve_care(A, B, Q, R).X
    X2 = numlin.solve_care(A.copy(), B.copy(), Q.copy(), R.copy()).X
    assert np.array_equal(X1, X2)
    sys = numlin.StateSpace(stable_matrix(rng, 4), rng.standard_normal((4, 1)),
                            rng.standard_normal((1, 4)), 0.0)
    assert numlin.hinf_norm(sys) == numlin.hinf_norm(sys)
