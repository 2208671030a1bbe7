"""Dense linear algebra kernels.

Eigenvalues, ordered Schur forms, Sylvester/Lyapunov equations, algebraic
Riccati equations (strict and boundary cases), H-infinity norms and a few
matrix predicates. Everything works on real or complex ``numpy`` arrays;
real inputs give real outputs wherever the mathematics allows it.

Tolerances are relative to Frobenius norms, with an absolute floor of
``ABS_FLOOR``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .exceptions import (
    ConvergenceFailure,
    DimensionMismatch,
    IllConditioned,
    InputError,
    NonSquare,
    NoStabilizingSolution,
    PoleAtS,
    SingularOperator,
    SwapFailure,
    UnstableSystem,
)

__all__ = [
    "ABS_FLOOR",
    "StateSpace",
    "ComplexStateSpace",
    "EigenDecomposition",
    "SchurForm",
    "AreSolution",
    "as_matrix",
    "eig",
    "ordered_schur",
    "solve_sylvester",
    "solve_lyapunov",
    "solve_are",
    "solve_are_extremal",
    "are_residual",
    "solve_care",
    "hinf_norm",
    "transfer_eval",
    "freqresp",
    "is_hermitian",
    "is_psd",
    "is_pd",
    "is_hurwitz",
    "is_skew_symmetric",
    "spectral_radius",
    "hermitian_part",
]

ABS_FLOOR = 1e-12


def _thresh(tol, scale):
    return max(tol * scale, ABS_FLOOR)


def _fro(M):
    return float(np.linalg.norm(M)) if np.size(M) else 0.0


def as_matrix(M, name="matrix", square=False):
    """Return ``M`` as a finite 2-D float or complex array.

    Scalars and 1-D inputs are promoted to 2-D (a 1-D input becomes a row).
    """
    arr = np.asarray(M)
    if arr.dtype == object:
        raise InputError(f"{name} is not numeric")
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(complex)
    else:
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {arr.shape}")
    return arr


def _real_if_close(M, inputs_real):
    if inputs_real and np.iscomplexobj(M):
        return M.real.copy()
    return M


def hermitian_part(M):
    return 0.5 * (M + M.conj().T)


# ----------------------------------------------------------------------------
# state-space container
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class StateSpace:
    """Proper LTI system ``C (sI - A)^{-1} B + D``.

    Entries may be real or complex. ``n = 0`` (a pure gain) is allowed.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A)
        B = np.asarray(self.B)
        C = np.asarray(self.C)
        D = as_matrix(self.D, "D")
        A = as_matrix(A, "A", square=True) if A.size else np.zeros((0, 0))
        n = A.shape[0]
        p, m = D.shape
        B = as_matrix(B, "B") if B.size else np.zeros((n, m))
        C = as_matrix(C, "C") if C.size else np.zeros((p, n))
        D = as_matrix(D, "D")
        if B.shape != (n, m) or C.shape != (p, n):
            raise DimensionMismatch(
                f"inconsistent state-space dimensions: A{A.shape}, B{B.shape}, "
                f"C{C.shape}, D{D.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.D.shape[1]

    @property
    def n_outputs(self):
        return self.D.shape[0]

    @property
    def is_real(self):
        return not any(np.iscomplexobj(M) for M in (self.A, self.B, self.C, self.D))

    def transformed(self, T):
        """Similarity transform ``(T A T^-1, T B, C T^-1, D)``."""
        Tinv = np.linalg.inv(T)
        return type(self)(T @ self.A @ Tinv, T @ self.B, self.C @ Tinv, self.D)

    def __call__(self, s):
        return transfer_eval(self, s)


ComplexStateSpace = StateSpace


# ----------------------------------------------------------------------------
# eigenvalues and Schur forms
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray

    def residual(self, A):
        A = np.asarray(A)
        return _fro(A @ self.vectors - self.vectors * self.values)


@dataclass(frozen=True)
class SchurForm:
    """``A = U T U^H`` with the selected eigenvalues in ``T[:sdim, :sdim]``."""

    U: np.ndarray
    T: np.ndarray
    sdim: int
    ordering: str = ""

    @property
    def leading(self):
        return self.T[:self.sdim, :self.sdim]

    @property
    def trailing(self):
        return self.T[self.sdim:, self.sdim:]


def _sort_eigs(values):
    return np.lexsort((values.imag, values.real))


def eig(A):
    """Eigenvalues and right eigenvectors of a square matrix.

    Values are ordered by ascending real part, then ascending imaginary
    part, so results are reproducible. Vectors have unit 2-norm.
    """
    A = as_matrix(A, "A", square=True)
    try:
        w, V = sla.eig(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    idx = _sort_eigs(w)
    w = w[idx]
    V = V[:, idx]
    if not np.iscomplexobj(A) and np.all(w.imag == 0):
        w = w.real.astype(complex)
    return EigenDecomposition(values=w, vectors=V)


def eigvals(A):
    A = as_matrix(A, "A", square=True)
    if A.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        w = sla.eigvals(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    return w[_sort_eigs(w)].astype(complex)


def ordered_schur(A, select, output=None, ordering=""):
    """Schur decomposition with the eigenvalues picked by ``select`` leading.

    Parameters
    ----------
    A : (n, n) array_like
    select : callable
        Predicate on a complex eigenvalue. For real output the predicate must
        give the same answer for both members of a conjugate pair.
    output : {'real', 'complex'}, optional
        Defaults to ``'real'`` for real ``A``, otherwise ``'complex'``. In
        the real case ``U`` is orthogonal and ``T`` quasi-triangular.
    ordering : str
        Free-text description stored on the result.

    Returns
    -------
    SchurForm
    """
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    if output is None:
        output = "complex" if np.iscomplexobj(A) else "real"
    if n == 0:
        return SchurForm(np.zeros((0, 0)), np.zeros((0, 0)), 0, ordering)

    def _pred(x, y=None):
        z = complex(x) if y is None else complex(x, y)
        return bool(select(z))

    try:
        T, U, sdim = sla.schur(A, output=output, sort=_pred)
    except np.linalg.LinAlgError as exc:
        if "Leading" in str(exc) or "separated" in str(exc):
            w = eigvals(A)
            flags = np.array([select(z) for z in w], dtype=bool)
            if flags.any() and (~flags).any():
                gap = float(np.min(np.abs(w[flags][:, None] - w[~flags][None, :])))
            else:
                gap = float("inf")
            cond = _fro(A) / gap if gap > 0 else float("inf")
            raise SwapFailure(
                f"eigenvalue reordering is ill-conditioned (min separation {gap:.3e})",
                condition=cond) from exc
        raise ConvergenceFailure(f"Schur iteration failed: {exc}") from exc
    return SchurForm(U=U, T=T, sdim=int(sdim), ordering=ordering)


# ----------------------------------------------------------------------------
# Sylvester / Lyapunov
# ----------------------------------------------------------------------------

def solve_sylvester(A, B, C, sep_tol=1e-13):
    """Solve ``A X + X B = C`` by complex Schur forms and back-substitution.

    Raises :class:`SingularOperator` when ``A`` and ``-B`` share an eigenvalue
    (to within ``sep_tol`` relative to the coefficient norms).
    """
    A = as_matrix(A, "A", square=True)
    B = as_matrix(B, "B", square=True)
    C = as_matrix(C, "C")
    m, n = A.shape[0], B.shape[0]
    if C.shape != (m, n):
        raise DimensionMismatch(f"C must be {m}x{n}, got {C.shape}")
    real = not (np.iscomplexobj(A) or np.iscomplexobj(B) or np.iscomplexobj(C))
    if m == 0 or n == 0:
        return np.zeros((m, n), dtype=float if real else complex)

    Ta, U = sla.schur(A.astype(complex), output="complex")
    Tb, V = sla.schur(B.astype(complex), output="complex")
    da = np.diag(Ta)
    db = np.diag(Tb)
    sep = np.min(np.abs(da[:, None] + db[None, :]))
    if sep <= _thresh(sep_tol, max(_fro(A), _fro(B))):
        raise SingularOperator(
            f"A and -B share an eigenvalue (separation {sep:.3e})")

    F = U.conj().T @ C @ V
    Y = np.zeros((m, n), dtype=complex)
    eye = np.eye(m)
    for j in range(n):
        rhs = F[:, j] - Y[:, :j] @ Tb[:j, j]
        Y[:, j] = sla.solve_triangular(Ta + db[j] * eye, rhs)
    X = U @ Y @ V.conj().T
    return _real_if_close(X, real)


def solve_lyapunov(A, Q, sep_tol=1e-13):
    """Solve ``A P + P A^H + Q = 0``.

    The result is Hermitian whenever ``Q`` is.
    """
    A = as_matrix(A, "A", square=True)
    Q = as_matrix(Q, "Q", square=True)
    if Q.shape != A.shape:
        raise DimensionMismatch(f"Q must match A {A.shape}, got {Q.shape}")
    P = solve_sylvester(A, A.conj().T, -Q, sep_tol=sep_tol)
    if is_hermitian(Q, tol=1e-14):
        P = hermitian_part(P)
    return P


# ----------------------------------------------------------------------------
# algebraic Riccati equations
# ----------------------------------------------------------------------------

@dataclass
class AreSolution:
    """Solution of ``A^H X + X A - X S X + Q = 0`` with diagnostics."""

    X: np.ndarray
    residual: float
    closed_loop_eigs: np.ndarray
    branch: str = "stabilizing"
    strict: bool = True
    iterations: int = 0
    notes: list = field(default_factory=list)


def are_residual(A, S, Q, X):
    """Residual matrix ``A^H X + X A - X S X + Q``."""
    return A.conj().T @ X + X @ A - X @ S @ X + Q


def _hamiltonian(A, S, Q):
    return np.block([[A, -S], [-Q, -A.conj().T]])


def _newton_polish(A, S, Q, X, steps, herm, real, target=0.0):
    """A few Newton (Kleinman) steps; keep whichever iterate has smallest residual."""
    best = X
    best_res = _fro(are_residual(A, S, Q, X))
    cur = X
    for _ in range(steps):
        if best_res <= target:
            break
        Ak = A - S @ cur
        try:
            new = solve_lyapunov(Ak.conj().T, Q + cur @ S @ cur)
        except SingularOperator:
            break
        if herm:
            new = hermitian_part(new)
        new = _real_if_close(new, real)
        res = _fro(are_residual(A, S, Q, new))
        if not res < best_res:
            break
        best, best_res, cur = new, res, new
    return best, best_res


def _check_are_inputs(A, S, Q):
    A = as_matrix(A, "A", square=True)
    S = as_matrix(S, "S", square=True)
    Q = as_matrix(Q, "Q", square=True)
    if S.shape != A.shape or Q.shape != A.shape:
        raise DimensionMismatch(
            f"A, S, Q must share a shape; got {A.shape}, {S.shape}, {Q.shape}")
    if not is_hermitian(S, tol=1e-10) or not is_hermitian(Q, tol=1e-10):
        raise InputError("S and Q must be Hermitian")
    return A, hermitian_part(S), hermitian_part(Q)


def solve_are(A, S, Q, branch="stabilizing", axis_tol=1e-8, polish=3):
    """Stabilizing (or anti-stabilizing) solution of ``A^H X + X A - X S X + Q = 0``.

    The solution is read off the invariant subspace of the Hamiltonian
    ``[[A, -S], [-Q, -A^H]]`` for its open-left-half-plane (``'stabilizing'``)
    or open-right-half-plane (``'antistabilizing'``) eigenvalues, then
    refined with a few Newton steps. ``S`` may be indefinite.

    Raises
    ------
    NoStabilizingSolution
        The Hamiltonian has eigenvalues within ``axis_tol`` (relative) of the
        imaginary axis, or the selected subspace is not a graph.
    IllConditioned
        The subspace basis is numerically rank deficient.
    """
    A, S, Q = _check_are_inputs(A, S, Q)
    n = A.shape[0]
    real = not any(np.iscomplexobj(M) for M in (A, S, Q))
    if n == 0:
        return AreSolution(np.zeros((0, 0)), 0.0, np.zeros(0, complex), branch)
    if branch not in ("stabilizing", "antistabilizing"):
        raise ValueError(f"unknown branch {branch!r}")

    H = _hamiltonian(A, S, Q)
    scale = max(_fro(H), 1.0)
    w = eigvals(H)
    near_axis = np.abs(w.real) <= axis_tol * scale
    if near_axis.any():
        raise NoStabilizingSolution(
            f"Hamiltonian has {int(near_axis.sum())} eigenvalue(s) on the imaginary "
            f"axis (closest |Re| = {np.min(np.abs(w.real)):.3e})")

    sign = -1.0 if branch == "stabilizing" else 1.0
    schur = ordered_schur(H, lambda z: sign * z.real > 0, ordering=f"{branch} first")
    if schur.sdim != n:
        raise NoStabilizingSolution(
            f"expected {n} {branch} Hamiltonian eigenvalues, found {schur.sdim}")
    U11 = schur.U[:n, :n]
    U21 = schur.U[n:, :n]
    smin = np.linalg.svd(U11, compute_uv=False)[-1]
    if smin <= 1e-12:
        raise IllConditioned(
            f"invariant subspace is not a graph (sigma_min(U11) = {smin:.3e})")
    X = np.linalg.solve(U11.conj().T, U21.conj().T).conj().T
    X = _real_if_close(hermitian_part(X), real)
    qscale = max(_fro(Q), 1.0)
    X, res = _newton_polish(A, S, Q, X, polish, True, real, target=1e-15 * qscale)
    if res > 1e-8 * max(qscale, _fro(X) * _fro(A), _fro(X) ** 2 * _fro(S)):
        raise IllConditioned(
            f"Riccati residual {res:.3e} too large; invariant subspace is ill-conditioned")

    cl = eigvals(A - S @ X)
    margin = 1e-10 * max(_fro(A - S @ X), ABS_FLOOR)
    ok = np.all(cl.real < -margin) if branch == "stabilizing" else np.all(cl.real > margin)
    if not ok:
        raise NoStabilizingSolution(
            f"computed solution is not {branch} (closed-loop eigenvalues {cl})")
    return AreSolution(X=X, residual=res, closed_loop_eigs=cl, branch=branch)


def _kernel_solution(A, S, Q, real, cluster=1e-6):
    """Boundary solution from the stable subspace plus the Hamiltonian kernel.

    Applies when the only critical Hamiltonian eigenvalues sit at the
    origin in 2x2 Jordan blocks: the kernel is then exactly the missing
    half of the subspace, and an SVD null space is accurate to rounding
    level where eigenvectors would only be accurate to its square root.
    Returns ``None`` when the structure does not match.
    """
    n = A.shape[0]
    H = _hamiltonian(A, S, Q)
    scale = max(_fro(H), 1.0)
    w = eigvals(H)
    zero = np.abs(w) <= cluster * scale
    if not zero.any() or np.any(np.abs(w[~zero].real) <= cluster * scale):
        return None
    k = int(zero.sum()) // 2
    s = int(np.sum(w[~zero].real < 0))
    if 2 * k != int(zero.sum()) or s + k != n:
        return None
    sv, Vh = np.linalg.svd(H)[1:]
    thr = 1e-10 * scale
    # the kernel must have dimension exactly k, with a clear gap above it
    if sv[2 * n - k] > thr or (k < 2 * n and sv[2 * n - k - 1] <= 1e3 * thr):
        return None
    N = Vh[2 * n - k:].conj().T
    if s:
        sch = ordered_schur(H, lambda z: z.real < 0 and abs(z) > cluster * scale)
        if sch.sdim != s:
            return None
        basis = np.hstack([sch.U[:, :s], N])
    else:
        basis = N
    basis = np.linalg.qr(basis)[0]
    U1, U2 = basis[:n], basis[n:]
    if np.linalg.svd(U1, compute_uv=False)[-1] <= 1e-8:
        return None
    X = np.linalg.solve(U1.conj().T, U2.conj().T).conj().T
    X = _real_if_close(hermitian_part(X), real)
    res = _fro(are_residual(A, S, Q, X))
    if res > 1e-10 * scale * max(1.0, _fro(X)):
        return None
    cl = eigvals(A - S @ X)
    if np.any(cl.real > cluster * max(_fro(A - S @ X), 1.0)):
        return None
    return AreSolution(X=X, residual=res, closed_loop_eigs=cl, branch="stabilizing",
                       strict=False,
                       notes=["boundary case: stable subspace plus Hamiltonian kernel"])


def solve_are_extremal(A, S, Q, branch="stabilizing", axis_tol=1e-8, max_newton=200):
    """Extremal solution of ``A^H X + X A - X S X + Q = 0`` with ``S >= 0``.

    Identical to :func:`solve_are` when the Hamiltonian has no
    imaginary-axis eigenvalues. Otherwise (the boundary case) the maximal
    solution (``'stabilizing'``: closed loop in the closed left half plane)
    or the minimal one (``'antistabilizing'``) is computed: the constant term
    is lifted until a strictly stabilizing solution exists, and Newton's
    method is run from there on the original equation. Newton iterates
    decrease monotonically to the maximal solution.

    Raises
    ------
    NoStabilizingSolution
        No perturbation level gave a strict solution (the associated Popov
        function is indefinite), or Newton broke down.
    """
    A, S, Q = _check_are_inputs(A, S, Q)
    if branch == "antistabilizing":
        # X solves the equation for A iff -X solves it for -A; branches swap
        sol = solve_are_extremal(-A, S, Q, "stabilizing", axis_tol, max_newton)
        sol.X = -sol.X
        sol.closed_loop_eigs = eigvals(A - S @ sol.X)
        sol.branch = "antistabilizing"
        return sol
    try:
        return solve_are(A, S, Q, "stabilizing", axis_tol=axis_tol)
    except (NoStabilizingSolution, IllConditioned):
        pass

    n = A.shape[0]
    real = not any(np.iscomplexobj(M) for M in (A, S, Q))
    qscale = max(_fro(Q), _fro(A), _fro(S), 1.0)
    kern = _kernel_solution(A, S, Q, real)
    if kern is not None:
        return kern
    eye = np.eye(n)
    X0 = None
    for eps in (1e-6, 1e-4, 1e-2):
        try:
            X0 = solve_are(A, S, Q + eps * qscale * eye, "stabilizing",
                           axis_tol=axis_tol).X
            break
        except (NoStabilizingSolution, IllConditioned):
            continue
    if X0 is None:
        raise NoStabilizingSolution(
            "no Hermitian solution: imaginary-axis Hamiltonian eigenvalues persist "
            "under perturbation of the constant term")

    best = X0
    best_res = _fro(are_residual(A, S, Q, X0))
    cur = X0
    stall = 0
    it = 0
    for it in range(1, max_newton + 1):
        Ak = A - S @ cur
        try:
            new = solve_lyapunov(Ak.conj().T, Q + cur @ S @ cur, sep_tol=1e-15)
        except SingularOperator:
            break
        new = _real_if_close(hermitian_part(new), real)
        res = _fro(are_residual(A, S, Q, new))
        if not np.isfinite(res):
            break
        cur = new
        if res < best_res:
            best, best_res = new, res
            stall = 0
        else:
            stall += 1
            if stall >= 3:
                break
        if best_res <= 1e-15 * qscale:
            break
    if best_res > 1e-8 * qscale * max(1.0, _fro(best)):
        raise NoStabilizingSolution(
            f"Newton iteration stalled at residual {best_res:.3e}")
    cl = eigvals(A - S @ best)
    # critical closed-loop eigenvalues sit at the sqrt(eps) level
    if np.any(cl.real > 1e-5 * max(_fro(A - S @ best), 1.0)):
        raise NoStabilizingSolution(
            f"Newton iteration left the closed left half plane (eigenvalues {cl})")
    return AreSolution(X=best, residual=best_res, closed_loop_eigs=cl,
                       branch="stabilizing", strict=False, iterations=it,
                       notes=["boundary case: Hamiltonian has imaginary-axis eigenvalues"])


def solve_care(A, B, Q, R):
    """Stabilizing solution of ``A^H X + X A - X B R^{-1} B^H X + Q = 0``.

    Returns
    -------
    AreSolution
        ``X`` is Hermitian and ``A - B R^{-1} B^H X`` is Hurwitz.
    """
    A = as_matrix(A, "A", square=True)
    B = as_matrix(B, "B")
    R = as_matrix(R, "R", square=True)
    n = A.shape[0]
    if B.shape[0] != n or R.shape[0] != B.shape[1]:
        raise DimensionMismatch(
            f"incompatible shapes A{A.shape}, B{B.shape}, R{R.shape}")
    if not is_hermitian(R):
        raise InputError("R must be Hermitian")
    try:
        S = B @ np.linalg.solve(R, B.conj().T)
    except np.linalg.LinAlgError as exc:
        raise InputError("R is singular") from exc
    return solve_are(A, hermitian_part(S), Q, "stabilizing")


# ----------------------------------------------------------------------------
# frequency response and H-infinity norm
# ----------------------------------------------------------------------------

def transfer_eval(sys, s, tol=1e-12):
    """Evaluate ``C (sI - A)^{-1} B + D`` at the complex point ``s``."""
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n = A.shape[0]
    if n == 0:
        return D.astype(complex)
    M = s * np.eye(n) - A
    smin = np.linalg.svd(M, compute_uv=False)[-1]
    if smin <= _thresh(tol, _fro(A)):
        raise PoleAtS(f"s = {s} is a pole (sigma_min(sI - A) = {smin:.3e})")
    return C @ np.linalg.solve(M, B.astype(complex)) + D


def freqresp(sys, omegas):
    """Stack of ``G(i w)`` for every ``w`` in ``omegas``; shape (N, p, m).

    Points where ``iwI - A`` is exactly singular come back as NaN.
    """
    omegas = np.asarray(omegas, dtype=float).ravel()
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n = A.shape[0]
    N = omegas.size
    if n == 0:
        return np.broadcast_to(D.astype(complex), (N,) + D.shape).copy()
    M = 1j * omegas[:, None, None] * np.eye(n)[None] - A[None]
    Bs = np.broadcast_to(B.astype(complex), (N,) + B.shape)
    try:
        X = np.linalg.solve(M, Bs)
    except np.linalg.LinAlgError:
        X = np.empty((N,) + B.shape, dtype=complex)
        for k in range(N):
            try:
                X[k] = np.linalg.solve(M[k], Bs[k])
            except np.linalg.LinAlgError:
                X[k] = np.nan
    return C[None] @ X + D[None]


def _sigma_max(G):
    return float(np.linalg.svd(G, compute_uv=False)[0]) if G.size else 0.0


def _gamma_hamiltonian(sys, gamma):
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    p, m = D.shape
    Dh = D.conj().T
    R = Dh @ D - gamma**2 * np.eye(m)
    Sm = D @ Dh - gamma**2 * np.eye(p)
    Rinv = np.linalg.inv(R)
    Sinv = np.linalg.inv(Sm)
    return np.block([
        [A - B @ Rinv @ Dh @ C, -gamma * B @ Rinv @ B.conj().T],
        [gamma * C.conj().T @ Sinv @ C, -A.conj().T + C.conj().T @ D @ Rinv @ B.conj().T],
    ])


def _axis_frequencies(sys, gamma, axis_tol):
    H = _gamma_hamiltonian(sys, gamma)
    w = eigvals(H)
    scale = max(_fro(H), 1.0)
    on_axis = np.abs(w.real) <= axis_tol * scale
    return np.unique(np.abs(w[on_axis].imag))


def hinf_norm(sys, rtol=1e-9, axis_tol=1e-8, max_iter=500):
    """H-infinity norm of a stable system.

    Bisection on ``gamma``: ``gamma`` is above the norm iff the
    ``gamma``-Hamiltonian has no imaginary-axis eigenvalue. Frequencies of
    imaginary-axis eigenvalues are also used to raise the lower bound with
    actual singular values, which speeds things up. The returned value is
    the final upper bound.

    Raises
    ------
    UnstableSystem
        ``A`` is not Hurwitz; the norm is infinite.
    """
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n = A.shape[0]
    dnorm = _sigma_max(D)
    if n == 0:
        return dnorm
    if not is_hurwitz(A, tol=0.0):
        raise UnstableSystem("A is not Hurwitz; the H-infinity norm is infinite")
    if _fro(B) == 0.0 or _fro(C) == 0.0:
        return dnorm

    ev = eigvals(A)
    probe = np.unique(np.concatenate([[0.0], np.abs(ev), np.abs(ev.imag)]))
    lb = max(dnorm, max(_sigma_max(G) for G in freqresp(sys, probe)))
    if lb == 0.0:
        scale = max(np.max(np.abs(ev)), 1.0)
        wide = np.logspace(-6, 6, 121) * scale
        lb = max(_sigma_max(G) for G in freqresp(sys, wide))
        if lb == 0.0:
            return 0.0

    def raise_lb(freqs):
        if freqs.size == 0:
            return lb
        return max(lb, max(_sigma_max(G) for G in freqresp(sys, freqs)))

    ub = 2.0 * lb
    for _ in range(max_iter):
        freqs = _axis_frequencies(sys, ub, axis_tol)
        if freqs.size == 0:
            break
        lb = max(ub, raise_lb(freqs))
        ub = 2.0 * lb
    else:
        raise ConvergenceFailure("could not bracket the H-infinity norm")

    for _ in range(max_iter):
        if ub - lb <= rtol * ub:
            return float(ub)
        gamma = 0.5 * (lb + ub)
        freqs = _axis_frequencies(sys, gamma, axis_tol)
        if freqs.size:
            lb = max(gamma, raise_lb(freqs))
            lb = min(lb, ub)
        else:
            ub = gamma
    raise ConvergenceFailure("H-infinity bisection did not converge")


# ----------------------------------------------------------------------------
# predicates
# ----------------------------------------------------------------------------

def _square(M, name="M"):
    return as_matrix(M, name, square=True)


def is_hermitian(M, tol=1e-9):
    M = _square(M)
    return _fro(M - M.conj().T) <= _thresh(tol, _fro(M))


def is_skew_symmetric(M, tol=1e-9):
    M = _square(M)
    return _fro(M + M.T) <= _thresh(tol, _fro(M))


def _min_herm_eig(M):
    if M.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(hermitian_part(M))[0])


def is_psd(M, tol=1e-9):
    M = _square(M)
    return is_hermitian(M, tol) and _min_herm_eig(M) >= -_thresh(tol, _fro(M))


def is_pd(M, tol=1e-9):
    M = _square(M)
    return is_hermitian(M, tol) and _min_herm_eig(M) > _thresh(tol, _fro(M))


def is_hurwitz(A, tol=1e-9):
    """All eigenvalues have real part below ``-tol * ||A||_F``."""
    A = _square(A, "A")
    if A.size == 0:
        return True
    w = eigvals(A)
    return bool(np.all(w.real < -tol * _fro(A)))


def spectral_radius(M):
    M = _square(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(eigvals(M))))
