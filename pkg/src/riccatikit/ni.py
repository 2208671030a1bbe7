"""Negative-imaginary (NI) system analysis.

Frequency-domain classification (NI / SNI), verification of LMI
certificates, the Riccati-equation NI test, and the DC-gain test for
positive-feedback interconnections of an NI and an SNI system.
"""
import enum
from dataclasses import dataclass, field

import numpy as np

from . import numlin
from .exceptions import (
    DimensionMismatch,
    DNotSymmetric,
    GridEmpty,
    HypothesisViolation,
    IllConditioned,
    InputError,
    NoStabilizingSolution,
    NotMinimal,
    PreconditionRViolated,
)
from .numlin import StateSpace, as_matrix, eigvals, hermitian_part

__all__ = [
    "Classification",
    "RealStateSpace",
    "NiVerdict",
    "NiCertificate",
    "Residue",
    "StabilityReport",
    "default_grid",
    "is_minimal",
    "ni_frequency_oracle",
    "sni_check",
    "lmi_block",
    "verify_lmi_certificate",
    "ni_riccati_test",
    "interconnection_stability",
    "positive_feedback",
]

AXIS_TOL = 1e-8
LAURENT_TOL = 1e-7


class Classification(str, enum.Enum):
    NI = "NI"
    SNI = "SNI"
    NOT_NI = "NotNI"
    INDETERMINATE = "Indeterminate"


class RealStateSpace(StateSpace):
    """Square, real ``(A, B, C, D)`` realization."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_real:
            raise InputError("RealStateSpace requires real matrices")
        if self.D.shape[0] != self.D.shape[1]:
            raise DimensionMismatch(f"transfer matrix must be square, D is {self.D.shape}")


@dataclass
class Residue:
    pole: complex
    K: np.ndarray
    psd: bool
    asymmetry: float = 0.0


@dataclass
class NiVerdict:
    classification: Classification
    witness: dict = None
    certificate: np.ndarray = None
    residues: list = field(default_factory=list)
    method: str = "frequency"
    min_margin: float = None
    grid_points: int = 0
    notes: list = field(default_factory=list)

    @property
    def is_ni(self):
        return self.classification in (Classification.NI, Classification.SNI)

    @property
    def is_sni(self):
        return self.classification is Classification.SNI


@dataclass(frozen=True)
class NiCertificate:
    P: np.ndarray
    W: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        P = as_matrix(self.P, "P", square=True)
        if not numlin.is_psd(P):
            raise InputError("certificate P must be symmetric positive semidefinite")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "W", as_matrix(self.W, "W"))
        object.__setattr__(self, "L", as_matrix(self.L, "L"))


def default_grid(lo=1e-3, hi=1e3, count=2000):
    """Logarithmically spaced frequencies (rad/s)."""
    return np.logspace(np.log10(lo), np.log10(hi), int(count))


def _check_grid(grid):
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise GridEmpty("frequency grid is empty")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise InputError("frequency grid must be strictly positive and finite")
    return np.sort(grid)


def is_minimal(sys, tol=1e-9):
    """PBH rank tests for controllability and observability."""
    A, B, C = sys.A, sys.B, sys.C
    n = A.shape[0]
    for lam in eigvals(A):
        Ml = np.hstack([A - lam * np.eye(n), B])
        Mr = np.vstack([A - lam * np.eye(n), C])
        for M in (Ml, Mr):
            s = np.linalg.svd(M, compute_uv=False)
            if s.size < n or s[n - 1] <= tol * max(s[0], numlin.ABS_FLOOR):
                return False
    return True


def _ni_matrix(G):
    """``j (G - G^H)`` for a stack of square matrices."""
    return 1j * (G - np.conj(np.swapaxes(G, -1, -2)))


def _min_eigs(G):
    return np.linalg.eigvalsh(_ni_matrix(G))[..., 0]


# ----------------------------------------------------------------------------
# imaginary-axis poles
# ----------------------------------------------------------------------------

def _laurent(sys, lam0, radius):
    """Principal-part coefficients of the transfer matrix at ``lam0``.

    Returns ``[c0, c1, ...]`` with ``G(s) ~ sum_k c_k / (s - lam0)^(k+1)``,
    computed from the spectral projector of the eigenvalue cluster within
    ``radius`` of ``lam0``.
    """
    A = sys.A.astype(complex)
    schur = numlin.ordered_schur(A, lambda z: abs(z - lam0) <= radius, output="complex")
    k = schur.sdim
    if k == 0:
        return []
    U, T = schur.U, schur.T
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    if T22.size:
        Y = numlin.solve_sylvester(T11, -T22, -T12)
    else:
        Y = np.zeros((k, 0), dtype=complex)
    UB = U.conj().T @ sys.B
    b = UB[:k] - Y @ UB[k:]
    c = sys.C @ U[:, :k]
    Nk = T11 - lam0 * np.eye(k)
    coeffs = []
    v = b
    for _ in range(k):
        coeffs.append(c @ v)
        v = Nk @ v
    return coeffs


def _axis_poles(sys):
    """Clusters of eigenvalues of ``A`` on the imaginary axis with ``Im >= 0``."""
    A = sys.A
    scale = max(numlin._fro(A), 1.0)
    w = eigvals(A)
    on_axis = w[np.abs(w.real) <= AXIS_TOL * scale]
    radius = 1e-6 * scale
    reps = []
    for z in sorted(on_axis, key=lambda z: (abs(z.imag), z.imag)):
        if z.imag < -radius:
            continue
        target = complex(0.0, max(z.imag, 0.0)) if abs(z.imag) > radius else 0j
        if not any(abs(target - r) <= radius for r in reps):
            reps.append(target)
    return reps, radius


def _coeff_small(coeff, sys, order):
    scale = (numlin._fro(sys.C) * numlin._fro(sys.B)
             * max(numlin._fro(sys.A), 1.0) ** order)
    return numlin._fro(coeff) <= max(LAURENT_TOL * scale, numlin.ABS_FLOOR)


def _check_axis_poles(sys, tol):
    """Conditions on imaginary-axis poles. Returns (residues, failure-witness)."""
    poles, radius = _axis_poles(sys)
    residues = []
    for p in poles:
        coeffs = _laurent(sys, p, radius)
        if p == 0j:
            # lim s^k G = c_{k-1}; k >= 3 must vanish, s^2 G must be Hermitian PSD
            for j in range(2, len(coeffs)):
                if not _coeff_small(coeffs[j], sys, j):
                    return residues, {
                        "condition": "origin pole order",
                        "reason": "OriginPoleOrderTooHigh",
                        "pole": 0.0,
                        "order": j + 1,
                    }
            c1 = coeffs[1] if len(coeffs) > 1 else np.zeros_like(sys.D, dtype=complex)
            if _coeff_small(c1, sys, 1):
                c1 = np.zeros_like(c1)
            asym = numlin._fro(c1 - c1.conj().T)
            K = hermitian_part(c1)
            psd = numlin.is_psd(K, tol=max(tol, 1e-8)) and asym <= 1e-7 * max(numlin._fro(c1), 1.0)
            residues.append(Residue(pole=0j, K=K, psd=psd, asymmetry=asym))
            if not psd:
                return residues, {
                    "condition": "origin pole: lim s^2 M(s) Hermitian PSD",
                    "reason": "OriginLimitNotPSD",
                    "pole": 0.0,
                    "min_eig": float(np.linalg.eigvalsh(K)[0]),
                }
            continue
        for j in range(1, len(coeffs)):
            if not _coeff_small(coeffs[j], sys, j):
                return residues, {
                    "condition": "simple imaginary-axis pole",
                    "reason": "NonSimplePoleOnAxis",
                    "pole": p,
                    "order": j + 1,
                }
        K = 1j * coeffs[0]
        asym = numlin._fro(K - K.conj().T)
        Kh = hermitian_part(K)
        psd = (asym <= 1e-7 * max(numlin._fro(K), 1.0)
               and numlin.is_psd(Kh, tol=max(tol, 1e-8)))
        residues.append(Residue(pole=p, K=Kh, psd=psd, asymmetry=asym))
        if not psd:
            return residues, {
                "condition": "residue at imaginary-axis pole Hermitian PSD",
                "reason": "ResidueNotPSD",
                "pole": p,
                "asymmetry": asym,
                "min_eig": float(np.linalg.eigvalsh(Kh)[0]),
            }
    return residues, None


# ----------------------------------------------------------------------------
# frequency sweeps
# ----------------------------------------------------------------------------

def _refine(grid, idx):
    """Four-fold log density around the points ``idx`` of ``grid``."""
    extra = []
    lg = np.log10(grid)
    for i in idx:
        lo = lg[max(i - 1, 0)]
        hi = lg[min(i + 1, grid.size - 1)]
        extra.append(np.linspace(lo, lg[i], 5)[1:-1])
        extra.append(np.linspace(lg[i], hi, 5)[1:-1])
    if not extra:
        return np.zeros(0)
    pts = 10.0 ** np.concatenate(extra)
    return np.setdiff1d(np.unique(pts), grid)


def _sweep(sys, grid, tol, pole_freqs):
    """Minimum eigenvalue of ``j(G - G^H)`` and its threshold at each grid point."""
    if pole_freqs:
        pf = np.asarray(pole_freqs)
        keep = np.all(np.abs(grid[:, None] - pf[None, :]) > 1e-9 * np.maximum(pf, 1.0), axis=1)
        grid = grid[keep]
    G = numlin.freqresp(sys, grid)
    finite = np.all(np.isfinite(G), axis=(1, 2))
    grid, G = grid[finite], G[finite]
    mins = _min_eigs(G) if grid.size else np.zeros(0)
    thr = np.maximum(tol * np.linalg.norm(G, axis=(1, 2)), numlin.ABS_FLOOR)
    return grid, mins, thr


def _frequency_margin(sys, grid, tol, pole_freqs, strict):
    grid0, mins, thr = _sweep(sys, grid, tol, pole_freqs)
    close = np.nonzero(np.abs(mins) <= 10.0 * thr)[0]
    if close.size:
        g2, m2, t2 = _sweep(sys, _refine(grid0, close), tol, pole_freqs)
        grid0 = np.concatenate([grid0, g2])
        mins = np.concatenate([mins, m2])
        thr = np.concatenate([thr, t2])
        order = np.argsort(grid0)
        grid0, mins, thr = grid0[order], mins[order], thr[order]
    return grid0, mins, thr


def _asymmetric_d_witness(D):
    if numlin._fro(D - D.T) > max(1e-9 * numlin._fro(D), numlin.ABS_FLOOR):
        return {"condition": "D = D^T", "reason": "DNotSymmetric", "omega": float("inf"),
                "asymmetry": numlin._fro(D - D.T)}
    return None


def ni_frequency_oracle(sys, grid=None, tol=1e-9):
    """Classify ``sys`` as NI or not NI from its frequency response.

    Checks, in order: symmetry of ``D``; no eigenvalue of ``A`` in the open
    right half plane; simple imaginary-axis poles with Hermitian PSD
    residues of ``j M(s)``; order at most two at the origin with
    ``lim s^2 M(s)`` Hermitian PSD; and ``j(M(jw) - M(jw)^H) >= -tol`` on
    ``grid``, refined four-fold near points where the margin is tight.

    The realization is assumed minimal, so eigenvalues of ``A`` are poles.
    A pass is a statement about the tested grid only.
    """
    grid = _check_grid(grid)
    verdict = NiVerdict(Classification.NI, method="frequency")
    wd = _asymmetric_d_witness(sys.D)
    if wd:
        verdict.classification = Classification.NOT_NI
        verdict.witness = wd
        return verdict

    w = eigvals(sys.A)
    scale = max(numlin._fro(sys.A), 1.0)
    unstable = w[w.real > AXIS_TOL * scale]
    if unstable.size:
        verdict.classification = Classification.NOT_NI
        verdict.witness = {"condition": "no poles in Re s > 0", "reason": "UnstablePole",
                           "pole": complex(unstable[-1])}
        return verdict

    residues, failure = _check_axis_poles(sys, tol)
    verdict.residues = residues
    if failure:
        verdict.classification = Classification.NOT_NI
        verdict.witness = failure
        return verdict

    pole_freqs = [r.pole.imag for r in residues if r.pole != 0j]
    g, mins, thr = _frequency_margin(sys, grid, tol, pole_freqs, strict=False)
    verdict.grid_points = int(g.size)
    if g.size:
        rel = mins / thr
        verdict.min_margin = float(np.min(mins))
        bad = np.nonzero(mins < -thr)[0]
        if bad.size:
            k = bad[np.argmin(rel[bad])]
            verdict.classification = Classification.NOT_NI
            verdict.witness = {"condition": "j(M(jw) - M(jw)^H) >= 0", "reason": "NegativeImaginaryPart",
                               "omega": float(g[k]), "min_eig": float(mins[k])}
            return verdict
    verdict.notes.append(
        f"frequency condition verified on {g.size} grid points in "
        f"[{grid[0]:.3g}, {grid[-1]:.3g}] rad/s only")
    return verdict


def sni_check(sys, grid=None, tol=1e-9):
    """Strict NI test on a frequency grid.

    Returns ``SNI`` when ``A`` is Hurwitz and ``j(N(jw) - N(jw)^H)`` is
    positive definite (minimum eigenvalue above ``tol``, relative) at every
    grid point; ``NI`` when only the non-strict inequality holds; ``NotNI``
    with a witness otherwise.
    """
    grid = _check_grid(grid)
    verdict = NiVerdict(Classification.SNI, method="sni")
    wd = _asymmetric_d_witness(sys.D)
    if wd:
        verdict.classification = Classification.NOT_NI
        verdict.witness = wd
        return verdict
    w = eigvals(sys.A)
    scale = max(numlin._fro(sys.A), 1.0)
    bad_poles = w[w.real >= -AXIS_TOL * scale]
    if bad_poles.size:
        verdict.classification = Classification.NOT_NI
        verdict.witness = {"condition": "no poles in Re s >= 0", "reason": "UnstablePole",
                           "pole": complex(bad_poles[-1])}
        return verdict
    g, mins, thr = _frequency_margin(sys, grid, tol, [], strict=True)
    verdict.grid_points = int(g.size)
    verdict.min_margin = float(np.min(mins))
    neg = np.nonzero(mins < -thr)[0]
    if neg.size:
        k = neg[np.argmin(mins[neg] / thr[neg])]
        verdict.classification = Classification.NOT_NI
        verdict.witness = {"condition": "j(N(jw) - N(jw)^H) >= 0", "reason": "NegativeImaginaryPart",
                           "omega": float(g[k]), "min_eig": float(mins[k])}
        return verdict
    weak = np.nonzero(mins <= thr)[0]
    if weak.size:
        k = weak[np.argmin(mins[weak])]
        verdict.classification = Classification.NI
        verdict.witness = {"condition": "j(N(jw) - N(jw)^H) > 0", "reason": "NotStrict",
                           "omega": float(g[k]), "min_eig": float(mins[k])}
        verdict.notes.append("NI but not strictly NI on the tested grid")
        return verdict
    verdict.notes.append(
        f"SNI on tested grid ({g.size} points in [{grid[0]:.3g}, {grid[-1]:.3g}] rad/s)")
    return verdict


# ----------------------------------------------------------------------------
# LMI certificate and Riccati test
# ----------------------------------------------------------------------------

def lmi_block(sys, P):
    """The symmetric block matrix of the NI lemma for a given ``P``."""
    A, B, C = sys.A, sys.B, sys.C
    P = as_matrix(P, "P", square=True)
    if P.shape != A.shape:
        raise DimensionMismatch(f"P must be {A.shape}, got {P.shape}")
    return np.block([[P @ A + A.T @ P, P @ B - A.T @ C.T],
                     [B.T @ P - C @ A, -(C @ B + B.T @ C.T)]])


def verify_lmi_certificate(sys, cert, tol=1e-8):
    """Check an NI-lemma certificate ``(P, W, L)``.

    True iff ``PA + A^T P = -L^T L``, ``PB - A^T C^T = -L^T W``,
    ``CB + B^T C^T = W^T W`` (each to ``tol`` relative) and the block
    matrix is negative semidefinite.
    """
    n, m = sys.n_states, sys.n_inputs
    P, W, L = cert.P, cert.W, cert.L
    if P.shape != (n, n) or W.shape != (m, m) or L.shape != (m, n):
        raise DimensionMismatch(
            f"certificate shapes P{P.shape}, W{W.shape}, L{L.shape} do not match "
            f"n={n}, m={m}")
    A, B, C = sys.A, sys.B, sys.C
    blk = lmi_block(sys, P)
    scale = max(numlin._fro(blk), numlin._fro(L) ** 2, numlin._fro(W) ** 2, 1.0)
    thr = tol * scale
    if numlin._fro(P @ A + A.T @ P + L.T @ L) > thr:
        return False
    if numlin._fro(P @ B - A.T @ C.T + L.T @ W) > thr:
        return False
    if numlin._fro(C @ B + B.T @ C.T - W.T @ W) > thr:
        return False
    return bool(np.linalg.eigvalsh(hermitian_part(blk))[-1] <= thr)


def ni_riccati_test(sys, psd_tol=1e-7):
    """NI test through the Riccati form of the NI lemma.

    With ``R = CB + B^T C^T > 0``, ``A0 = A - B R^{-1} C A`` and
    ``Q = A^T C^T R^{-1} C A``, the system is NI iff ``D = D^T`` and
    ``P A0 + A0^T P + P B R^{-1} B^T P + Q = 0`` has a solution ``P >= 0``.

    Every symmetric solution lies between a minimal and a maximal one;
    both are computed (from the sign-flipped equation, whose Hamiltonian
    always has eigenvalues at the origin here). The verdict is NI with the
    minimal solution as certificate if that is PSD, NotNI if even the
    maximal one is not PSD (or no symmetric solution exists), and
    Indeterminate otherwise.

    Raises
    ------
    DNotSymmetric, PreconditionRViolated, NotMinimal
    """
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    if numlin._fro(D - D.T) > max(1e-9 * numlin._fro(D), numlin.ABS_FLOOR):
        raise DNotSymmetric("D is not symmetric")
    R = C @ B + B.T @ C.T
    if not numlin.is_pd(R):
        raise PreconditionRViolated(
            f"CB + B^T C^T is not positive definite (min eigenvalue "
            f"{np.linalg.eigvalsh(hermitian_part(R))[0]:.3e})")
    if not is_minimal(sys):
        raise NotMinimal("realization is not minimal")

    Rinv_CA = np.linalg.solve(R, C @ A)
    A0 = A - B @ Rinv_CA
    Q = (C @ A).T @ Rinv_CA
    Q = hermitian_part(Q)
    S = hermitian_part(B @ np.linalg.solve(R, B.T))

    verdict = NiVerdict(Classification.INDETERMINATE, method="riccati")
    qscale = max(numlin._fro(Q), 1.0)

    def psd(P):
        if not P.size:
            return True
        return np.linalg.eigvalsh(P)[0] >= -psd_tol * max(numlin._fro(P), 1.0)

    # X = -P solves A0^T X + X A0 - X S X - Q = 0; its maximal solution is -P_min
    try:
        upper = numlin.solve_are_extremal(A0, S, -Q, "stabilizing")
    except (NoStabilizingSolution, IllConditioned) as exc:
        verdict.classification = Classification.NOT_NI
        verdict.witness = {"condition": "Riccati equation has a symmetric solution",
                           "reason": "NoSymmetricSolution", "detail": str(exc)}
        return verdict
    P_min = -upper.X
    min_eig = float(np.linalg.eigvalsh(P_min)[0]) if P_min.size else 0.0
    verdict.notes.append(
        f"minimal solution: residual {upper.residual:.3e}, min eigenvalue {min_eig:.6e}")
    if not upper.strict:
        verdict.notes.append("boundary Riccati solution (Hamiltonian eigenvalues on the imaginary axis)")
    if psd(P_min) and upper.residual <= 1e-8 * qscale:
        verdict.classification = Classification.NI
        verdict.certificate = P_min
        return verdict

    try:
        lower = numlin.solve_are_extremal(A0, S, -Q, "antistabilizing")
    except (NoStabilizingSolution, IllConditioned) as exc:
        verdict.notes.append(f"maximal solution not computed: {exc}")
        return verdict
    P_max = -lower.X
    max_min_eig = float(np.linalg.eigvalsh(P_max)[0]) if P_max.size else 0.0
    verdict.notes.append(
        f"maximal solution: residual {lower.residual:.3e}, min eigenvalue {max_min_eig:.6e}")
    if not psd(P_max):
        verdict.classification = Classification.NOT_NI
        verdict.witness = {"condition": "Riccati equation has a PSD solution",
                           "reason": "MaximalSolutionNotPSD", "min_eig": max_min_eig}
    else:
        verdict.notes.append("minimal solution not PSD but maximal is; intermediate "
                             "solutions were not searched")
    return verdict


# ----------------------------------------------------------------------------
# interconnection stability
# ----------------------------------------------------------------------------

@dataclass
class StabilityReport:
    stable: bool
    lambda_max: float
    dc_eigs: np.ndarray
    closed_loop_eigs: np.ndarray
    closed_loop_hurwitz: bool

    @property
    def agrees(self):
        return self.stable == self.closed_loop_hurwitz


def positive_feedback(M, N):
    """State matrix of the positive-feedback loop ``u_M = y_N``, ``u_N = y_M``."""
    nm, nn = M.n_states, N.n_states
    E = np.eye(M.n_outputs) - M.D @ N.D
    try:
        Einv = np.linalg.inv(E)
    except np.linalg.LinAlgError as exc:
        raise HypothesisViolation("I - M(inf) N(inf) is singular; loop is ill-posed",
                                  hypothesis="well-posedness") from exc
    # y_M = Einv (C_M x_M + D_M C_N x_N); y_N = C_N x_N + D_N y_M
    yM = Einv @ np.hstack([M.C, M.D @ N.C])
    yN = np.hstack([np.zeros((N.n_outputs, nm)), N.C]) + N.D @ yM
    top = np.hstack([M.A, np.zeros((nm, nn))]) + M.B @ yN
    bot = np.hstack([np.zeros((nn, nm)), N.A]) + N.B @ yM
    return np.vstack([top, bot])


def interconnection_stability(M, N, grid=None, tol=1e-9):
    """DC-gain stability test for an NI system ``M`` and an SNI system ``N``.

    All hypotheses are verified first (``M`` NI with no pole at the origin,
    ``N`` SNI, ``M(inf) N(inf) = 0``, ``N(inf) >= 0``); a failure raises
    :class:`HypothesisViolation` naming it. The loop is internally stable
    iff ``lambda_max(M(0) N(0)) < 1``. The closed-loop state matrix is
    reported alongside as an independent check.
    """
    if M.n_outputs != N.n_inputs or N.n_outputs != M.n_inputs:
        raise DimensionMismatch("M and N cannot be connected in feedback")
    vm = ni_frequency_oracle(M, grid, tol)
    if not vm.is_ni:
        raise HypothesisViolation(f"M is not NI: {vm.witness}", hypothesis="M NI")
    scale = max(numlin._fro(M.A), 1.0)
    if M.n_states and np.any(np.abs(eigvals(M.A)) <= AXIS_TOL * scale):
        raise HypothesisViolation("M has a pole at the origin", hypothesis="M no origin pole")
    vn = sni_check(N, grid, tol)
    if not vn.is_sni:
        raise HypothesisViolation(f"N is not SNI: {vn.witness}", hypothesis="N SNI")
    dd = M.D @ N.D
    if numlin._fro(dd) > max(tol * numlin._fro(M.D) * numlin._fro(N.D), numlin.ABS_FLOOR):
        raise HypothesisViolation("M(inf) N(inf) != 0", hypothesis="M(inf)N(inf)=0")
    if not numlin.is_psd(N.D, tol):
        raise HypothesisViolation("N(inf) is not positive semidefinite", hypothesis="N(inf)>=0")

    M0 = numlin.transfer_eval(M, 0.0).real
    N0 = numlin.transfer_eval(N, 0.0).real
    dc = eigvals(M0 @ N0)
    lam = float(np.max(dc.real))
    Acl = positive_feedback(M, N)
    cl = eigvals(Acl)
    hurwitz = numlin.is_hurwitz(Acl, tol=1e-10)
    return StabilityReport(stable=lam < 1.0 - 1e-10, lambda_max=lam, dc_eigs=dc,
                           closed_loop_eigs=cl, closed_loop_hurwitz=hurwitz)
