"""State-feedback synthesis for a negative-imaginary closed loop.

For the uncertain plant ``x' = A x + B1 w + B2 u``, ``z = C1 x`` a static
gain ``u = K x`` is built so that ``(A + B2 K, B1, C1)`` is NI and the
anti-stable part of the projected dynamics is stabilized. The gain comes
from two Lyapunov equations on the anti-stable Schur block.
"""
from dataclasses import dataclass, field

import numpy as np

from . import numlin
from .exceptions import (
    DimensionMismatch,
    InputError,
    NoAntiStableBlock,
    NumericalError,
    PreconditionRViolated,
    SingularOperator,
    SplitFailure,
    SwapFailure,
    TSGapNotPD,
    LyapunovFailure,
)
from .ni import Classification, RealStateSpace, ni_frequency_oracle
from .numlin import as_matrix

__all__ = [
    "UncertainPlant",
    "SchurSplit",
    "SynthesisResult",
    "schur_split",
    "synthesize_ni_feedback",
    "close_loop",
    "riccati_residual",
]

SPLIT_TOL = 1e-8
GAP_TOL = 1e-9
ARE_TOL = 1e-7
COND_LIMIT = 1e12


def _real(M, name):
    M = as_matrix(M, name)
    if np.iscomplexobj(M):
        raise InputError(f"{name} must be real")
    return M


@dataclass(frozen=True)
class UncertainPlant:
    """Plant ``x' = A x + B1 w + B2 u``, ``z = C1 x``.

    ``C1 B2`` must be square and invertible and
    ``R = C1 B1 + B1^T C1^T`` positive definite.
    """

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray

    def __post_init__(self):
        A = _real(self.A, "A")
        B1 = _real(self.B1, "B1")
        B2 = _real(self.B2, "B2")
        C1 = _real(self.C1, "C1")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B1.shape[0] != n or B2.shape[0] != n or C1.shape[1] != n:
            raise DimensionMismatch(
                f"inconsistent plant dimensions: A{A.shape}, B1{B1.shape}, "
                f"B2{B2.shape}, C1{C1.shape}")
        if C1.shape[0] != B1.shape[1]:
            raise DimensionMismatch(
                f"C1 has {C1.shape[0]} rows but B1 has {B1.shape[1]} columns")
        CB2 = C1 @ B2
        if CB2.shape[0] != CB2.shape[1]:
            raise DimensionMismatch(f"C1 B2 must be square, got {CB2.shape}")
        cond = np.linalg.cond(CB2) if CB2.size else 1.0
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise InputError(f"C1 B2 is singular (condition number {cond:.3e})")
        R = C1 @ B1 + B1.T @ C1.T
        if R.size and np.linalg.eigvalsh(R)[0] <= numlin._thresh(1e-12, numlin._fro(R)):
            raise PreconditionRViolated(
                f"R = C1 B1 + B1^T C1^T is not positive definite "
                f"(min eigenvalue {np.linalg.eigvalsh(R)[0]:.3e})")
        for name, M in (("A", A), ("B1", B1), ("B2", B2), ("C1", C1)):
            object.__setattr__(self, name, M)
        object.__setattr__(self, "cond_C1B2", float(cond))

    @property
    def R(self):
        return self.C1 @ self.B1 + self.B1.T @ self.C1.T

    @property
    def n_states(self):
        return self.A.shape[0]


@dataclass(frozen=True)
class SchurSplit:
    U: np.ndarray
    A11: np.ndarray
    A12: np.ndarray
    A22: np.ndarray
    Bf1: np.ndarray
    Bf2: np.ndarray
    B11: np.ndarray
    B22: np.ndarray

    @property
    def Af(self):
        k = self.A11.shape[0]
        q = self.A22.shape[0]
        return np.block([[self.A11, self.A12], [np.zeros((q, k)), self.A22]])

    @property
    def Bf(self):
        return np.vstack([self.Bf1, self.Bf2])

    @property
    def B1t(self):
        return np.vstack([self.B11, self.B22])

    def __iter__(self):
        return iter((self.U, self.A11, self.A12, self.A22,
                     self.Bf1, self.Bf2, self.B11, self.B22))


@dataclass
class SynthesisResult:
    K: np.ndarray
    P: np.ndarray
    T: np.ndarray
    S: np.ndarray
    U: np.ndarray
    blocks: SchurSplit
    Pf: np.ndarray = None
    are_residual: float = 0.0
    degenerate: bool = False
    ni_verdict: object = None
    closed_loop_eigs: np.ndarray = None
    notes: list = field(default_factory=list)


def _projected(plant):
    A, B1, B2, C1 = plant.A, plant.B1, plant.B2, plant.C1
    CB2 = C1 @ B2
    R = plant.R
    Af = A - B2 @ np.linalg.solve(CB2, C1 @ A)
    Bf = B2 @ np.linalg.inv(CB2) - B1 @ np.linalg.inv(R)
    return Af, Bf


def schur_split(plant):
    """Ordered real Schur split of the projected plant matrix.

    Returns a :class:`SchurSplit` with ``A11`` holding the eigenvalues with
    ``Re <= 1e-8 ||A_f||`` and ``A22`` the strictly anti-stable remainder.
    The result unpacks as ``(U, A11, A12, A22, Bf1, Bf2, B11, B22)``.

    Raises
    ------
    NoAntiStableBlock
        When every eigenvalue lies in the closed left half plane.
    SplitFailure
        When the eigenvalue reordering fails.
    """
    Af, Bf = _projected(plant)
    n = plant.n_states
    tol = SPLIT_TOL * max(numlin._fro(Af), 1.0)
    # the closed left half-plane block leads
    try:
        sf = numlin.ordered_schur(Af, lambda z: z.real <= tol, output="real",
                                  ordering="closed-LHP first")
    except SwapFailure as exc:
        raise SplitFailure(f"Schur reordering failed: {exc}") from exc
    U, Tf, k = sf.U, sf.T, sf.sdim
    if k == n:
        raise NoAntiStableBlock("projected plant matrix has no anti-stable eigenvalues")
    A22 = Tf[k:, k:]
    if np.any(numlin.eigvals(A22).real <= tol):
        raise SplitFailure("anti-stable block contains closed left half-plane eigenvalues")
    Bft = U.T @ Bf
    B1t = U.T @ plant.B1
    return SchurSplit(U=U, A11=Tf[:k, :k], A12=Tf[:k, k:], A22=A22,
                      Bf1=Bft[:k], Bf2=Bft[k:], B11=B1t[:k], B22=B1t[k:])


def riccati_residual(Pf, Af, Bf, B1t, R):
    """Frobenius residual of ``Pf Af + Af^T Pf - Pf Bf R Bf^T Pf + Pf B1t R^-1 B1t^T Pf``."""
    res = (Pf @ Af + Af.T @ Pf - Pf @ Bf @ R @ Bf.T @ Pf
           + Pf @ B1t @ np.linalg.solve(R, B1t.T) @ Pf)
    return numlin._fro(res)


def _gain(plant, P):
    A, B1, B2, C1 = plant.A, plant.B1, plant.B2, plant.C1
    CB2 = C1 @ B2
    R = plant.R
    inner = B1.T @ P - C1 @ A - R @ np.linalg.solve(CB2.T, B2.T @ P)
    return np.linalg.solve(CB2, inner)


def close_loop(plant, K):
    """Closed loop ``(A + B2 K, B1, C1, 0)`` under ``u = K x``."""
    K = _real(K, "K")
    r, n = plant.B2.shape[1], plant.n_states
    if K.shape != (r, n):
        raise DimensionMismatch(f"K must be {r}x{n}, got {K.shape}")
    m = plant.B1.shape[1]
    return RealStateSpace(plant.A + plant.B2 @ K, plant.B1, plant.C1, np.zeros((m, m)))


def _lyap_antistable(A22, Q):
    # -A22 X - X A22^T + Q = 0 with A22 anti-stable, i.e. (-A22) X + X (-A22)^T + Q = 0
    try:
        X = numlin.solve_lyapunov(-A22, Q)
    except (SingularOperator, NumericalError) as exc:
        raise LyapunovFailure(f"Lyapunov solve failed: {exc}") from exc
    X = 0.5 * (X + X.T)
    res = numlin._fro(-A22 @ X - X @ A22.T + Q)
    if res > 1e-9 * max(1.0, numlin._fro(Q), numlin._fro(A22) * numlin._fro(X)):
        raise LyapunovFailure(f"Lyapunov residual {res:.3e} too large")
    return X


def synthesize_ni_feedback(plant, grid=None, verify=True):
    """Static state feedback making the closed loop NI.

    Parameters
    ----------
    plant : UncertainPlant
    grid : array_like, optional
        Frequencies used by the a-posteriori NI check.
    verify : bool
        Run the NI frequency oracle on the closed loop.

    Returns
    -------
    SynthesisResult

    Raises
    ------
    TSGapNotPD
        ``T - S`` is not positive definite; the sufficient condition fails.
    LyapunovFailure
        One of the Lyapunov solves was inaccurate.
    NumericalError
        Postcondition checks on the Riccati residual or on the closed loop failed.
    """
    R = plant.R
    n = plant.n_states
    try:
        blocks = schur_split(plant)
    except NoAntiStableBlock:
        return _degenerate(plant, grid, verify)

    U = blocks.U
    T = _lyap_antistable(blocks.A22, blocks.Bf2 @ R @ blocks.Bf2.T)
    S = _lyap_antistable(blocks.A22, blocks.B22 @ np.linalg.solve(R, blocks.B22.T))
    gap = T - S
    gap_min = float(np.linalg.eigvalsh(gap)[0])
    if gap_min <= GAP_TOL * max(numlin._fro(T), 1.0):
        raise TSGapNotPD(f"T - S is not positive definite (min eigenvalue {gap_min:.3e})",
                         min_eig=gap_min)

    k = blocks.A11.shape[0]
    Pf = np.zeros((n, n))
    Pf[k:, k:] = np.linalg.inv(gap)
    Pf = 0.5 * (Pf + Pf.T)
    res = riccati_residual(Pf, blocks.Af, blocks.Bf, blocks.B1t, R)
    if res > ARE_TOL * max(1.0, numlin._fro(Pf) ** 2):
        raise NumericalError(f"Riccati residual {res:.3e} exceeds tolerance")
    P = U @ Pf @ U.T
    P = 0.5 * (P + P.T)
    K = _gain(plant, P)
    result = SynthesisResult(K=K, P=P, T=T, S=S, U=U, blocks=blocks, Pf=Pf,
                             are_residual=res)
    _postcheck(plant, result, grid, verify)
    return result


def _degenerate(plant, grid, verify):
    n = plant.n_states
    Af, Bf = _projected(plant)
    empty = np.zeros((0, 0))
    blocks = SchurSplit(U=np.eye(n), A11=Af, A12=np.zeros((n, 0)), A22=empty,
                        Bf1=Bf, Bf2=np.zeros((0, Bf.shape[1])),
                        B11=plant.B1, B22=np.zeros((0, plant.B1.shape[1])))
    P = np.zeros((n, n))
    result = SynthesisResult(K=_gain(plant, P), P=P, T=empty, S=empty, U=np.eye(n),
                             blocks=blocks, Pf=P, degenerate=True)
    result.notes.append("degenerate branch: no anti-stable block, P = 0")
    _postcheck(plant, result, grid, verify)
    return result


def _postcheck(plant, result, grid, verify):
    cl = close_loop(plant, result.K)
    result.closed_loop_eigs = numlin.eigvals(cl.A)
    scale = max(numlin._fro(cl.A), 1.0)
    if np.any(result.closed_loop_eigs.real > SPLIT_TOL * scale):
        raise NumericalError("closed loop has eigenvalues in the open right half plane")
    if verify:
        verdict = ni_frequency_oracle(cl, grid=grid)
        result.ni_verdict = verdict
        if verdict.classification is not Classification.NI:
            raise NumericalError(f"closed loop failed the NI check: {verdict.witness}")
