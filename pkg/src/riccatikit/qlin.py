"""Linear quantum system models.

Doubled-up (annihilation/creation) QSDE coefficients built from
Hamiltonian and coupling data, the change of basis to real quadrature
form ``(q1, p1, q2, p2, ...)``, physically realizable systems generated
from a Hamiltonian matrix ``R`` and coupling matrix ``Lambda``, and the
skew-symmetric Riccati test for realizability with direct-feedthrough
noises only.

Conventions: ``J = diag(I, -I)`` in the doubled-up formulas and ``Theta``
is block diagonal with 2x2 blocks ``[[0, 1], [-1, 0]]``.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import numlin
from .exceptions import (
    DimensionMismatch,
    InputError,
    NoSkewSolutionFound,
    NumericalError,
    SingularOperator,
    SingularX,
    SpecInvariantViolated,
    StructureViolated,
)
from .numlin import StateSpace, as_matrix

__all__ = [
    "QuantumSpec",
    "DoubledSystem",
    "PhysRealSpec",
    "QuadratureSystem",
    "SkewAreResult",
    "theta",
    "doubled",
    "is_doubled_up",
    "interleave_permutation",
    "build_qsde",
    "quadrature_transform",
    "inverse_quadrature_transform",
    "physreal_construct",
    "physreal_extract",
    "is_physically_realizable",
    "skew_are_residual",
    "physreal_are_test",
]

STRUCT_TOL = 1e-10
N_STARTS = 32


def theta(n):
    """Block-diagonal ``Theta`` of size ``n`` (``n`` even)."""
    if n % 2:
        raise DimensionMismatch(f"Theta needs an even dimension, got {n}")
    return np.kron(np.eye(n // 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _signature(n):
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def doubled(Z1, Z2):
    """Doubled-up matrix ``[[Z1, Z2], [conj(Z2), conj(Z1)]]``."""
    Z1 = np.asarray(Z1, dtype=complex)
    Z2 = np.asarray(Z2, dtype=complex)
    if Z1.shape != Z2.shape:
        raise DimensionMismatch(f"blocks must match: {Z1.shape} vs {Z2.shape}")
    return np.block([[Z1, Z2], [Z2.conj(), Z1.conj()]])


def _blocks(Z, name="matrix"):
    Z = np.asarray(Z)
    r, c = Z.shape
    if r % 2 or c % 2:
        raise StructureViolated(f"{name} has odd dimensions {Z.shape}")
    p, q = r // 2, c // 2
    return Z[:p, :q], Z[:p, q:], Z[p:, :q], Z[p:, q:]


def structure_defect(Z):
    """Largest deviation from the doubled-up block-conjugate pattern, relative to ``||Z||``."""
    Z = np.asarray(Z)
    if Z.size == 0:
        return 0.0
    if Z.shape[0] % 2 or Z.shape[1] % 2:
        return np.inf
    Z11, Z12, Z21, Z22 = _blocks(Z)
    err = max(np.max(np.abs(Z22 - Z11.conj()), initial=0.0),
              np.max(np.abs(Z21 - Z12.conj()), initial=0.0))
    return float(err / max(numlin._fro(Z), 1.0))


def is_doubled_up(Z, tol=STRUCT_TOL):
    return structure_defect(Z) <= tol


# ----------------------------------------------------------------------------
# data types
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantumSpec:
    """Hamiltonian blocks ``M1, M2``, coupling blocks ``N1, N2`` and scattering ``S``."""

    M1: np.ndarray
    M2: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    S: np.ndarray = None

    def __post_init__(self):
        M1 = np.asarray(as_matrix(self.M1, "M1", square=True), dtype=complex)
        M2 = np.asarray(as_matrix(self.M2, "M2", square=True), dtype=complex)
        N1 = np.asarray(as_matrix(self.N1, "N1"), dtype=complex)
        N2 = np.asarray(as_matrix(self.N2, "N2"), dtype=complex)
        n = M1.shape[0]
        m = N1.shape[0]
        S = np.eye(m, dtype=complex) if self.S is None else np.asarray(
            as_matrix(self.S, "S", square=True), dtype=complex)
        if M2.shape != (n, n) or N1.shape[1] != n or N2.shape != N1.shape or S.shape != (m, m):
            raise DimensionMismatch(
                f"inconsistent spec: M1{M1.shape}, M2{M2.shape}, N1{N1.shape}, "
                f"N2{N2.shape}, S{S.shape}")
        scale = max(numlin._fro(M1), 1.0)
        if numlin._fro(M1 - M1.conj().T) > STRUCT_TOL * scale:
            raise SpecInvariantViolated("M1 must be Hermitian")
        if numlin._fro(M2 - M2.T) > STRUCT_TOL * max(numlin._fro(M2), 1.0):
            raise SpecInvariantViolated("M2 must be symmetric")
        if m and numlin._fro(S.conj().T @ S - np.eye(m)) > STRUCT_TOL * np.sqrt(m):
            raise SpecInvariantViolated("S must be unitary")
        for name, val in (("M1", M1), ("M2", M2), ("N1", N1), ("N2", N2), ("S", S)):
            object.__setattr__(self, name, val)

    @property
    def n_modes(self):
        return self.M1.shape[0]

    @property
    def n_fields(self):
        return self.N1.shape[0]


@dataclass(frozen=True)
class DoubledSystem:
    """Doubled-up QSDE coefficients ``(F, G, H, K)``."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        F, G, H, K = (np.asarray(M, dtype=complex) for M in (self.F, self.G, self.H, self.K))
        n2, m2 = F.shape[0], K.shape[1]
        if F.shape != (n2, n2) or G.shape != (n2, m2) or H.shape != (K.shape[0], n2):
            raise DimensionMismatch(
                f"inconsistent doubled-up system: F{F.shape}, G{G.shape}, "
                f"H{H.shape}, K{K.shape}")
        for name, val in (("F", F), ("G", G), ("H", H), ("K", K)):
            object.__setattr__(self, name, val)

    def structure_defect(self):
        return max(structure_defect(M) for M in (self.F, self.G, self.H, self.K))

    def to_statespace(self):
        return StateSpace(self.F, self.G, self.H, self.K)


@dataclass(frozen=True)
class PhysRealSpec:
    """Hamiltonian matrix ``R`` (real symmetric) and coupling ``Lambda``.

    ``Lambda`` is ``(n_w/2) x n`` complex; ``n_y`` outputs are taken from the
    first ``n_y/2`` fields.
    """

    R: np.ndarray
    Lambda: np.ndarray
    n_y: int = None

    def __post_init__(self):
        R = as_matrix(self.R, "R", square=True)
        if np.iscomplexobj(R):
            raise InputError("R must be real")
        n = R.shape[0]
        L = np.asarray(self.Lambda, dtype=complex)
        if L.ndim == 1:
            L = L.reshape(1, -1)
        if L.ndim != 2 or L.shape[1] != n:
            raise DimensionMismatch(f"Lambda must have {n} columns, got shape {L.shape}")
        if n % 2:
            raise DimensionMismatch(f"state dimension must be even, got {n}")
        if numlin._fro(R - R.T) > STRUCT_TOL * max(numlin._fro(R), 1.0):
            raise InputError("R must be symmetric")
        n_w = 2 * L.shape[0]
        n_y = n_w if self.n_y is None else int(self.n_y)
        if n_y % 2 or not 0 <= n_y <= n_w:
            raise DimensionMismatch(f"n_y must be even and at most n_w={n_w}, got {n_y}")
        object.__setattr__(self, "R", 0.5 * (R + R.T))
        object.__setattr__(self, "Lambda", L)
        object.__setattr__(self, "n_y", n_y)

    @property
    def n_w(self):
        return 2 * self.Lambda.shape[0]


@dataclass(frozen=True)
class QuadratureSystem:
    """Real quadrature-form system ``dx = A x dt + B dw``, ``dy = C x dt + D dw``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        ss = StateSpace(self.A, self.B, self.C, self.D)
        if not ss.is_real:
            raise InputError("quadrature system matrices must be real")
        for name in "ABCD":
            object.__setattr__(self, name, getattr(ss, name))

    def to_statespace(self):
        return StateSpace(self.A, self.B, self.C, self.D)


# ----------------------------------------------------------------------------
# doubled-up model and quadrature form
# ----------------------------------------------------------------------------

def build_qsde(spec):
    """Doubled-up coefficients of the QSDE generated by ``spec``.

    ``F = -i J M - 1/2 J N^H J N``, ``G = -J N^H diag(S, -conj(S))``,
    ``H = N``, ``K = diag(S, conj(S))``.
    """
    if not isinstance(spec, QuantumSpec):
        raise InputError("build_qsde expects a QuantumSpec")
    n, m = spec.n_modes, spec.n_fields
    M = doubled(spec.M1, spec.M2)
    N = doubled(spec.N1, spec.N2)
    Jn, Jm = _signature(n), _signature(m)
    Z = np.zeros((m, m))
    F = -1j * Jn @ M - 0.5 * Jn @ N.conj().T @ Jm @ N
    G = -Jn @ N.conj().T @ np.block([[spec.S, Z], [Z, -spec.S.conj()]])
    H = N.copy()
    K = np.block([[spec.S, Z], [Z, spec.S.conj()]])
    sys = DoubledSystem(F, G, H, K)
    defect = sys.structure_defect()
    if defect > STRUCT_TOL:
        raise SpecInvariantViolated(f"doubled-up structure lost (defect {defect:.3e})")
    return sys


def interleave_permutation(k):
    """Permutation ``P`` (2k x 2k) with ``P [x1..x2k] = [x1, x3, ..., x2, x4, ...]``."""
    idx = np.concatenate([np.arange(0, 2 * k, 2), np.arange(1, 2 * k, 2)])
    return np.eye(2 * k)[idx]


def _quad_basis(k):
    # maps (a_1..a_k, a_1^*..a_k^*) to (q_1, p_1, ..., q_k, p_k)
    Mq = np.array([[1.0, 1.0], [-1j, 1j]])
    return np.kron(np.eye(k), Mq) @ interleave_permutation(k).T


def quadrature_transform(sys, tol=STRUCT_TOL):
    """Real quadrature form of a doubled-up system.

    Raises
    ------
    StructureViolated
        If the system is not doubled-up, so no real form exists.
    """
    defect = sys.structure_defect()
    if defect > tol:
        raise StructureViolated(f"system is not in doubled-up form (defect {defect:.3e})")
    n, m_in, m_out = sys.F.shape[0] // 2, sys.G.shape[1] // 2, sys.H.shape[0] // 2
    Pn, Pi, Po = _quad_basis(n), _quad_basis(m_in), _quad_basis(m_out)
    mats = (Pn @ sys.F @ np.linalg.inv(Pn), Pn @ sys.G @ np.linalg.inv(Pi),
            Po @ sys.H @ np.linalg.inv(Pn), Po @ sys.K @ np.linalg.inv(Pi))
    out = []
    for M in mats:
        if M.size and np.max(np.abs(M.imag)) > max(tol * numlin._fro(M), 1e-12):
            raise StructureViolated("quadrature form has a non-negligible imaginary part")
        out.append(M.real)
    return QuadratureSystem(*out)


def inverse_quadrature_transform(qsys):
    """Doubled-up form of a real quadrature system (all dimensions even)."""
    A, B, C, D = qsys.A, qsys.B, qsys.C, qsys.D
    if any(d % 2 for d in (A.shape[0], B.shape[1], C.shape[0])):
        raise DimensionMismatch("quadrature dimensions must be even")
    n, m_in, m_out = A.shape[0] // 2, B.shape[1] // 2, C.shape[0] // 2
    Pn, Pi, Po = _quad_basis(n), _quad_basis(m_in), _quad_basis(m_out)
    Pn_inv = np.linalg.inv(Pn)
    return DoubledSystem(Pn_inv @ A @ Pn, Pn_inv @ B @ Pi,
                         np.linalg.inv(Po) @ C @ Pn, np.linalg.inv(Po) @ D @ Pi)


# ----------------------------------------------------------------------------
# physically realizable systems
# ----------------------------------------------------------------------------

def _gamma(n_w):
    k = n_w // 2
    Mh = 0.5 * np.array([[1.0, 1j], [1.0, -1j]])
    return interleave_permutation(k) @ np.kron(np.eye(k), Mh)


def physreal_construct(spec):
    """Quadrature system generated by a Hamiltonian ``R`` and coupling ``Lambda``.

    ``A = 2 Theta (R + Im(Lambda^H Lambda))``,
    ``B = 2i Theta [-Lambda^H, Lambda^T] Gamma``,
    ``C = P^T diag(Sigma, Sigma) [Lambda + conj(Lambda); -i Lambda + i conj(Lambda)]``,
    ``D = [I 0]``.
    """
    R, L, n_y, n_w = spec.R, spec.Lambda, spec.n_y, spec.n_w
    n = R.shape[0]
    Th = theta(n)
    A = 2 * Th @ (R + (L.conj().T @ L).imag)
    B = 2j * Th @ np.hstack([-L.conj().T, L.T]) @ _gamma(n_w)
    Sigma = np.eye(n_y // 2, n_w // 2)
    Z = np.zeros_like(Sigma)
    C = (interleave_permutation(n_y // 2).T @ np.block([[Sigma, Z], [Z, Sigma]])
         @ np.vstack([L + L.conj(), -1j * L + 1j * L.conj()]))
    D = np.eye(n_y, n_w)
    for M in (A, B, C):
        if np.size(M) and np.max(np.abs(np.imag(M))) > 1e-12 * max(numlin._fro(M), 1.0):
            raise NumericalError("constructed matrices are not real")
    return QuadratureSystem(np.real(A), np.real(B), np.real(C), D)


def physreal_extract(qsys, n_y=None):
    """Recover ``(R, Lambda)`` from a system built by :func:`physreal_construct`.

    ``R`` is the symmetric part of ``-1/2 Theta A`` and ``Lambda`` is read off
    ``B``. The result is checked by rebuilding the system.
    """
    A, B = qsys.A, qsys.B
    n, n_w = B.shape
    if n % 2 or n_w % 2:
        raise DimensionMismatch("state and input dimensions must be even")
    Th = theta(n)
    R = -0.5 * Th @ A
    R = 0.5 * (R + R.T)
    blocks = 0.5j * Th @ B @ np.linalg.inv(_gamma(n_w))
    L = blocks[:, n_w // 2:].T
    spec = PhysRealSpec(R, L, n_y=qsys.C.shape[0] if n_y is None else n_y)
    rebuilt = physreal_construct(spec)
    err = max(numlin._fro(rebuilt.A - qsys.A), numlin._fro(rebuilt.B - qsys.B),
              numlin._fro(rebuilt.C - qsys.C), numlin._fro(rebuilt.D - qsys.D))
    scale = max(numlin._fro(qsys.A), numlin._fro(qsys.B), numlin._fro(qsys.C), 1.0)
    if err > 1e-9 * scale:
        raise StructureViolated(f"system is not of the (R, Lambda) form (mismatch {err:.3e})")
    return spec


def is_physically_realizable(qsys, tol=1e-9):
    """Check ``A Theta + Theta A^T + B Theta B^T = 0`` and ``B [I; 0] = Theta C^T Theta``.

    The second condition applies to the first ``n_y`` inputs, which are the
    direct-feedthrough channels of ``D = [I 0]``.
    """
    A, B, C = qsys.A, qsys.B, qsys.C
    n, n_w = B.shape
    n_y = C.shape[0]
    if n % 2 or n_w % 2 or n_y % 2:
        return False
    Th, Tw, Ty = theta(n), theta(n_w), theta(n_y)
    scale = max(numlin._fro(A), numlin._fro(B) ** 2, 1.0)
    lyap = numlin._fro(A @ Th + Th @ A.T + B @ Tw @ B.T)
    feed = numlin._fro(B[:, :n_y] - Th @ C.T @ Ty)
    return lyap <= tol * scale and feed <= tol * max(numlin._fro(B), 1.0)


# ----------------------------------------------------------------------------
# skew-symmetric Riccati equation
# ----------------------------------------------------------------------------

@dataclass
class SkewAreResult:
    """Skew-symmetric Riccati solution and the realization it induces.

    ``B`` is ``[B_v1, B_u]``: the direct-feedthrough noise channels first, so
    that ``D = [I 0]``.
    """

    X: np.ndarray
    A: np.ndarray
    Bu: np.ndarray
    C: np.ndarray
    Bv1: np.ndarray
    T: np.ndarray
    residual: float
    skewness: float
    start: str
    tf_error: float = None
    notes: list = field(default_factory=list)

    @property
    def system(self):
        n_y = self.C.shape[0]
        n_u = self.Bu.shape[1]
        return QuadratureSystem(self.A, np.hstack([self.Bv1, self.Bu]), self.C,
                                np.eye(n_y, n_y + n_u))


def _skew_are_terms(A, Bu, C):
    S = Bu @ theta(Bu.shape[1]) @ Bu.T
    Q = C.T @ theta(C.shape[0]) @ C
    return 0.5 * (S - S.T), 0.5 * (Q - Q.T)


def _skew_residual(X, A, S, Q):
    return X @ S @ X - A.T @ X - X @ A - Q


def skew_are_residual(X, A, Bu, C):
    """Frobenius residual of ``X Bu Theta Bu^T X - A^T X - X A - C^T Theta C``."""
    S, Q = _skew_are_terms(A, Bu, C)
    return numlin._fro(_skew_residual(X, A, S, Q))


def _skew_basis(n):
    return np.triu_indices(n, 1)


def _to_skew(v, n, iu):
    X = np.zeros((n, n))
    X[iu] = v
    return X - X.T


def _newton_skew(X, A, S, Q, max_iter=60, tol=1e-13):
    """Damped Newton on the skew Riccati map, staying in skew matrices."""
    n = A.shape[0]
    iu = _skew_basis(n)
    scale = max(numlin._fro(Q), numlin._fro(A), numlin._fro(S), 1.0)
    F = _skew_residual(X, A, S, Q)
    res = numlin._fro(F)
    for _ in range(max_iter):
        if not np.isfinite(res) or res <= tol * scale * max(1.0, numlin._fro(X)):
            break
        Ak = S @ X - A
        try:
            E = numlin.solve_sylvester(Ak.T, Ak, -F)
            E = 0.5 * (E - E.T)
        except SingularOperator:
            # least squares on the skew parameters
            cols = []
            for k in range(iu[0].size):
                e = np.zeros(iu[0].size)
                e[k] = 1.0
                Ek = _to_skew(e, n, iu)
                cols.append((Ak.T @ Ek + Ek @ Ak)[iu])
            Jm = np.array(cols).T
            v = np.linalg.lstsq(Jm, -F[iu], rcond=None)[0]
            E = _to_skew(v, n, iu)
        t = 1.0
        while t > 1e-4:
            Xn = X + t * E
            Fn = _skew_residual(Xn, A, S, Q)
            rn = numlin._fro(Fn)
            if np.isfinite(rn) and rn < res:
                break
            t *= 0.5
        else:
            break
        X, F, res = Xn, Fn, rn
    return X, res


def _ansatz_scalars(A, S, Q, n):
    # X = c Theta: minimize ||c^2 M2 - c M1 - Q|| over real c
    Th = theta(n)
    M2 = Th @ S @ Th
    M1 = A.T @ Th + Th @ A
    a = np.vdot(M2, M2).real
    b = -2 * np.vdot(M2, M1).real
    c = np.vdot(M1, M1).real - 2 * np.vdot(M2, Q).real
    d = 2 * np.vdot(M1, Q).real
    # derivative of a c^4 + b c^3 + c c^2 + d c
    roots = np.roots([4 * a, 3 * b, 2 * c, d]) if a > 0 else np.roots([2 * c, d]) if c else []
    return sorted(float(r.real) for r in np.atleast_1d(roots) if abs(r.imag) < 1e-9)


def _subspace_starts(A, S, Q, limit=200):
    """Initial guesses from invariant subspaces of ``[[-A, S], [Q, A^T]]``."""
    n = A.shape[0]
    Hm = np.block([[-A, S], [Q, A.T]])
    w, V = np.linalg.eig(Hm)
    order = numlin._sort_eigs(w)
    w, V = w[order], V[:, order]
    # group conjugate pairs so subsets stay closed under conjugation
    groups, used = [], set()
    for i in range(2 * n):
        if i in used:
            continue
        if abs(w[i].imag) > 1e-9 * max(abs(w[i]), 1.0):
            j = min((k for k in range(2 * n) if k not in used and k != i),
                    key=lambda k: abs(w[k] - w[i].conj()))
            groups.append((i, j))
            used.update((i, j))
        else:
            groups.append((i,))
            used.add(i)
    starts = []
    for r in range(len(groups) + 1):
        for combo in itertools.combinations(range(len(groups)), r):
            idx = [k for g in combo for k in groups[g]]
            if len(idx) != n:
                continue
            Vs = V[:, idx]
            U1, U2 = Vs[:n], Vs[n:]
            if np.linalg.cond(U1) > 1e10:
                continue
            X = np.real(U2 @ np.linalg.inv(U1))
            starts.append(0.5 * (X - X.T))
            if len(starts) >= limit:
                return starts
    return starts


def _factor_skew(X):
    """``T`` with ``X = T^T Theta T`` for non-singular real skew ``X``."""
    n = X.shape[0]
    Tq, Z = numlin.sla.schur(X, output="real")
    T = np.zeros((n, n))
    i = 0
    while i < n:
        b = Tq[i, i + 1]
        z1, z2 = Z[:, i], Z[:, i + 1]
        if b < 0:
            b, z1, z2 = -b, z2, z1
        s = np.sqrt(b)
        T[i] = s * z1
        T[i + 1] = s * z2
        i += 2
    return T


def physreal_are_test(Atf, Bu, Ctf, seed=0, n_starts=N_STARTS, grid=None,
                      res_tol=1e-10):
    """Search for a non-singular real skew-symmetric solution of the realizability ARE.

    Solves ``X Bu Theta Bu^T X - A^T X - X A - C^T Theta C = 0`` by damped
    Newton from structured starts (``c Theta`` ansatz, invariant subspaces
    of the associated Hamiltonian-like matrix) and then ``n_starts`` seeded
    random skew matrices. The first acceptable root in that order wins.

    On success ``X = T^T Theta T`` and the returned realization is
    ``(T A T^-1, T Bu, C T^-1)`` with direct-feedthrough noise input
    ``B_v1 = Theta C'^T Theta``. Its transfer function is compared with the
    input on ``grid`` (200 log-spaced points by default).

    Raises
    ------
    NoSkewSolutionFound
        The search was exhausted. This does not prove that no solution exists.
    SingularX
        Only singular skew roots were found.
    """
    A = as_matrix(Atf, "A", square=True)
    Bu = as_matrix(Bu, "Bu")
    C = as_matrix(Ctf, "C")
    n = A.shape[0]
    if Bu.shape[0] != n or C.shape[1] != n:
        raise DimensionMismatch(f"inconsistent dimensions A{A.shape}, Bu{Bu.shape}, C{C.shape}")
    if any(np.iscomplexobj(M) for M in (A, Bu, C)):
        raise InputError("physreal_are_test expects real matrices")
    if n % 2 or Bu.shape[1] % 2 or C.shape[0] % 2:
        raise DimensionMismatch("n, n_u and n_y must all be even")
    S, Q = _skew_are_terms(A, Bu, C)

    candidates = [(f"ansatz c={c:.6g}", c * theta(n)) for c in _ansatz_scalars(A, S, Q, n)]
    candidates += [(f"subspace {k}", X) for k, X in enumerate(_subspace_starts(A, S, Q))]
    rng = np.random.default_rng(seed)
    scale = max(np.sqrt(numlin._fro(Q) / max(numlin._fro(S), 1e-12)), 1.0)
    iu = _skew_basis(n)
    for k in range(n_starts):
        v = rng.standard_normal(iu[0].size) * scale
        candidates.append((f"random seed={seed} start={k}", _to_skew(v, n, iu)))

    singular_root = False
    tol_scale = max(numlin._fro(Q), numlin._fro(A), numlin._fro(S), 1.0)
    for label, X0 in candidates:
        X, res = _newton_skew(X0, A, S, Q)
        if not np.isfinite(res) or res > res_tol * tol_scale * max(1.0, numlin._fro(X)):
            continue
        sv = np.linalg.svd(X, compute_uv=False)
        if sv[-1] <= 1e-8 * max(sv[0], 1.0):
            singular_root = True
            continue
        return _realize(X, A, Bu, C, res, label, grid)
    if singular_root:
        raise SingularX("only singular skew-symmetric solutions were found")
    raise NoSkewSolutionFound(
        f"no non-singular skew-symmetric solution found from {len(candidates)} starts "
        "(search exhausted; not a proof of non-realizability)")


def _realize(X, A, Bu, C, res, label, grid):
    X = 0.5 * (X - X.T)
    n = A.shape[0]
    T = _factor_skew(X)
    Tinv = np.linalg.inv(T)
    A2, Bu2, C2 = T @ A @ Tinv, T @ Bu, C @ Tinv
    Bv1 = theta(n) @ C2.T @ theta(C.shape[0])
    out = SkewAreResult(X=X, A=A2, Bu=Bu2, C=C2, Bv1=Bv1, T=T, residual=res,
                        skewness=numlin._fro(X + X.T), start=label)
    if not is_physically_realizable(out.system, tol=1e-8):
        raise NumericalError("realization failed the physical-realizability check")
    omegas = np.logspace(-3, 3, 200) if grid is None else np.asarray(grid, dtype=float)
    G0 = numlin.freqresp(StateSpace(A, Bu, C, np.zeros((C.shape[0], Bu.shape[1]))), omegas)
    G1 = numlin.freqresp(StateSpace(A2, Bu2, C2, np.zeros((C.shape[0], Bu.shape[1]))), omegas)
    err = 0.0
    if omegas.size:
        ref = np.linalg.norm(G0, axis=(1, 2))
        floor = max(1e-12 * float(np.max(ref)), 1e-300)
        err = float(np.max(np.linalg.norm(G1 - G0, axis=(1, 2)) / np.maximum(ref, floor)))
    out.tf_error = float(err)
    if err > 1e-7:
        raise NumericalError(f"realization changes the transfer function (error {err:.3e})")
    return out
