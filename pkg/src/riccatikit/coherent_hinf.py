"""Coherent quantum H-infinity synthesis.

For a doubled-up quantum plant with disturbance ``w``, control ``u``,
performance output ``z`` and measurement ``y``, the central controller is
built from two coupled Riccati equations. The closed loop is then checked
directly: Hurwitz state matrix and H-infinity norm below one.

The noise channels ``G0`` and ``K20`` are carried along but take no part
in the performance criterion.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import numlin
from .exceptions import (
    CouplingViolated,
    DimensionMismatch,
    IllConditioned,
    InputError,
    NoStabilizingSolution,
    NoStabilizingX,
    NoStabilizingY,
    UnstableSystem,
)
from .numlin import StateSpace, as_matrix
from .qlin import STRUCT_TOL, structure_defect

__all__ = [
    "QuantumPlant",
    "AssumptionReport",
    "RiccatiPair",
    "HinfController",
    "ClosedLoop",
    "check_assumptions",
    "solve_hinf_riccatis",
    "coupling_check",
    "synthesize_controller",
    "assemble_and_verify",
    "scale_plant",
    "hinf_synthesis",
]

AXIS_TOL = 1e-8
PD_TOL = 1e-9
ARE_TOL = 1e-8


def _c(M, name):
    return np.asarray(as_matrix(M, name), dtype=complex)


@dataclass(frozen=True)
class QuantumPlant:
    """Doubled-up plant matrices.

    ``da = F a dt + G0 dv + G1 dw + G2 du``,
    ``dz = H1 a dt + K12 du``, ``dy = H2 a dt + K20 dv + K21 dw``.
    ``G0`` and ``K20`` may be omitted (no extra plant noise).
    """

    F: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    K12: np.ndarray
    K21: np.ndarray
    G0: np.ndarray = None
    K20: np.ndarray = None
    check_structure: bool = True

    def __post_init__(self):
        F = _c(self.F, "F")
        n = F.shape[0]
        if F.shape != (n, n):
            raise DimensionMismatch(f"F must be square, got {F.shape}")
        mats = {name: _c(getattr(self, name), name)
                for name in ("G1", "G2", "H1", "H2", "K12", "K21")}
        G1, G2, H1, H2, K12, K21 = (mats[k] for k in ("G1", "G2", "H1", "H2", "K12", "K21"))
        if G1.shape[0] != n or G2.shape[0] != n or H1.shape[1] != n or H2.shape[1] != n:
            raise DimensionMismatch("G1, G2 need n rows and H1, H2 need n columns")
        if K12.shape != (H1.shape[0], G2.shape[1]):
            raise DimensionMismatch(f"K12 must be {(H1.shape[0], G2.shape[1])}, got {K12.shape}")
        if K21.shape != (H2.shape[0], G1.shape[1]):
            raise DimensionMismatch(f"K21 must be {(H2.shape[0], G1.shape[1])}, got {K21.shape}")
        G0 = np.zeros((n, 0), complex) if self.G0 is None else _c(self.G0, "G0")
        K20 = np.zeros((H2.shape[0], G0.shape[1]), complex) if self.K20 is None else _c(self.K20, "K20")
        if G0.shape[0] != n or K20.shape != (H2.shape[0], G0.shape[1]):
            raise DimensionMismatch("G0/K20 dimensions inconsistent")
        object.__setattr__(self, "F", F)
        for k, v in mats.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "G0", G0)
        object.__setattr__(self, "K20", K20)
        if self.check_structure:
            for name in ("F", "G0", "G1", "G2", "H1", "H2", "K12", "K20", "K21"):
                d = structure_defect(getattr(self, name))
                if d > STRUCT_TOL:
                    raise InputError(f"{name} is not in doubled-up form (defect {d:.3e})")

    @property
    def E1(self):
        return self.K12.conj().T @ self.K12

    @property
    def E2(self):
        return self.K21 @ self.K21.conj().T


@dataclass
class AssumptionReport:
    E1_pd: bool
    E2_pd: bool
    control_rank: bool
    filter_rank: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.E1_pd and self.E2_pd and self.control_rank and self.filter_rank

    def as_dict(self):
        return {"E1_pd": self.E1_pd, "E2_pd": self.E2_pd,
                "control_rank": self.control_rank, "filter_rank": self.filter_rank,
                "witnesses": self.witnesses}


@dataclass
class RiccatiPair:
    X: np.ndarray
    Y: np.ndarray
    residual_X: float
    residual_Y: float


@dataclass
class HinfController:
    Fc: np.ndarray
    Gc: np.ndarray
    Hc: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    rhoXY: float
    structure_defect: float = 0.0


@dataclass
class ClosedLoop:
    Fcl: np.ndarray
    Gcl: np.ndarray
    Hcl: np.ndarray
    hurwitz: bool = False
    hinf: float = None
    verified: bool = False
    notes: list = field(default_factory=list)

    @property
    def system(self):
        return StateSpace(self.Fcl, self.Gcl, self.Hcl,
                          np.zeros((self.Hcl.shape[0], self.Gcl.shape[1])))


def _is_pd(M):
    if M.size == 0:
        return False, 0.0
    lam = float(np.linalg.eigvalsh(numlin.hermitian_part(M))[0])
    return lam > PD_TOL * max(numlin._fro(M), 1.0), lam


def _x_data(plant):
    E1inv = np.linalg.inv(plant.E1)
    Ft = plant.F - plant.G2 @ E1inv @ plant.K12.conj().T @ plant.H1
    proj = np.eye(plant.K12.shape[0]) - plant.K12 @ E1inv @ plant.K12.conj().T
    S = plant.G2 @ E1inv @ plant.G2.conj().T - plant.G1 @ plant.G1.conj().T
    Q = plant.H1.conj().T @ proj @ plant.H1
    return Ft, S, Q, proj @ plant.H1


def _y_data(plant):
    E2inv = np.linalg.inv(plant.E2)
    Ft = plant.F - plant.G1 @ plant.K21.conj().T @ E2inv @ plant.H2
    proj = np.eye(plant.K21.shape[1]) - plant.K21.conj().T @ E2inv @ plant.K21
    S = plant.H2.conj().T @ E2inv @ plant.H2 - plant.H1.conj().T @ plant.H1
    Q = plant.G1 @ proj @ plant.G1.conj().T
    return Ft.conj().T, S, Q, (plant.G1 @ proj).conj().T


def _axis_unobservable(A, C):
    """Imaginary-axis eigenvalues of ``A`` that ``C`` does not observe."""
    scale = max(numlin._fro(A), numlin._fro(C), 1.0)
    hits = []
    for lam in numlin.eigvals(A):
        if abs(lam.real) > AXIS_TOL * scale:
            continue
        M = np.vstack([A - lam * np.eye(A.shape[0]), C])
        if np.linalg.svd(M, compute_uv=False)[-1] <= AXIS_TOL * scale:
            hits.append(float(lam.imag) + 0.0)  # no negative zero
    return sorted(set(hits))


def check_assumptions(plant):
    """Check the four standing assumptions of the synthesis.

    ``E1 = K12^H K12`` and ``E2 = K21 K21^H`` must be positive definite. The
    rank conditions on ``[[F - iw, G2], [H1, K12]]`` and
    ``[[F - iw, G1], [H2, K21]]`` are tested through the equivalent PBH
    tests after the feedthrough is factored out: an imaginary-axis
    eigenvalue of ``F - G2 E1^-1 K12^H H1`` unobserved by
    ``(I - K12 E1^-1 K12^H) H1`` is a rank drop at that frequency (and
    dually for the filter side). Witness frequencies are reported.
    """
    e1, lam1 = _is_pd(plant.E1)
    e2, lam2 = _is_pd(plant.E2)
    rep = AssumptionReport(e1, e2, False, False)
    rep.witnesses["E1_min_eig"] = lam1
    rep.witnesses["E2_min_eig"] = lam2
    if e1:
        Ft, _, _, Ch = _x_data(plant)
        w = _axis_unobservable(Ft, Ch)
        rep.control_rank = not w
        if w:
            rep.witnesses["control_rank_omega"] = w
    if e2:
        Ft, _, _, Bh = _y_data(plant)
        w = _axis_unobservable(Ft, Bh)
        rep.filter_rank = not w
        if w:
            rep.witnesses["filter_rank_omega"] = w
    return rep


def _stabilizing(A, S, Q, err):
    n = A.shape[0]
    if numlin._fro(Q) == 0.0 and numlin.is_hurwitz(A, tol=1e-12):
        # X = 0 solves the equation and leaves A as the closed loop
        return np.zeros((n, n), dtype=complex), 0.0
    try:
        sol = numlin.solve_are(A, S, Q, "stabilizing")
    except (NoStabilizingSolution, IllConditioned) as exc:
        raise err(str(exc)) from exc
    X = numlin.hermitian_part(sol.X)
    if not numlin.is_psd(X, tol=1e-9):
        raise err(f"stabilizing solution is not PSD (min eigenvalue "
                  f"{np.linalg.eigvalsh(X)[0]:.3e})")
    res = numlin._fro(numlin.are_residual(A, S, Q, X))
    if res > ARE_TOL * max(1.0, numlin._fro(Q)):
        raise err(f"Riccati residual {res:.3e} exceeds tolerance")
    return X, res


def solve_hinf_riccatis(plant):
    """Stabilizing PSD solutions of the control and filter Riccati equations.

    Raises
    ------
    NoStabilizingX, NoStabilizingY
        The corresponding equation has no stabilizing PSD solution.
    """
    if not (_is_pd(plant.E1)[0] and _is_pd(plant.E2)[0]):
        raise InputError("E1 and E2 must be positive definite")
    A, S, Q, _ = _x_data(plant)
    X, rx = _stabilizing(A, S, Q, NoStabilizingX)
    A, S, Q, _ = _y_data(plant)
    Y, ry = _stabilizing(A, S, Q, NoStabilizingY)
    return RiccatiPair(X, Y, rx, ry)


def coupling_check(X, Y, margin=1e-9):
    """``True`` when the spectral radius of ``X Y`` is below ``1 - margin``."""
    return numlin.spectral_radius(np.asarray(X) @ np.asarray(Y)) < 1.0 - margin


def synthesize_controller(plant, X, Y):
    """Central controller ``(Fc, Gc, Hc)``.

    Evaluated in the order ``Hc``, ``Gc``, ``Fc``::

        Hc = -E1^-1 (G2^H X + K12^H H1)
        Gc = (I - Y X)^-1 (Y H2^H + G1 K21^H) E2^-1
        Fc = F + G2 Hc - Gc H2 + (G1 - Gc K21) G1^H X

    Raises
    ------
    CouplingViolated
        ``rho(X Y) >= 1``.
    """
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    rho = numlin.spectral_radius(X @ Y)
    if not coupling_check(X, Y):
        raise CouplingViolated(f"spectral radius of XY is {rho:.6g}, not below 1")
    n = plant.F.shape[0]
    Hc = -np.linalg.solve(plant.E1, plant.G2.conj().T @ X + plant.K12.conj().T @ plant.H1)
    rhs = (Y @ plant.H2.conj().T + plant.G1 @ plant.K21.conj().T) @ np.linalg.inv(plant.E2)
    Gc = np.linalg.solve(np.eye(n) - Y @ X, rhs)
    Fc = (plant.F + plant.G2 @ Hc - Gc @ plant.H2
          + (plant.G1 - Gc @ plant.K21) @ plant.G1.conj().T @ X)
    defect = max(structure_defect(M) for M in (Fc, Gc, Hc))
    return HinfController(Fc=Fc, Gc=Gc, Hc=Hc, X=X, Y=Y, rhoXY=rho, structure_defect=defect)


def assemble_and_verify(plant, ctrl, rtol=1e-6):
    """Closed loop of plant and controller, with the two performance checks.

    ``verified`` is true when ``Fcl`` is Hurwitz and the H-infinity norm of
    ``Hcl (sI - Fcl)^-1 Gcl`` (bisection tolerance ``rtol``) is below one.
    """
    Fc, Gc, Hc = (np.asarray(M, dtype=complex) for M in (ctrl.Fc, ctrl.Gc, ctrl.Hc))
    n, nc = plant.F.shape[0], Fc.shape[0]
    if (Fc.shape != (nc, nc) or Gc.shape != (nc, plant.H2.shape[0])
            or Hc.shape != (plant.G2.shape[1], nc)):
        raise DimensionMismatch(
            f"controller dimensions Fc{Fc.shape}, Gc{Gc.shape}, Hc{Hc.shape} do not fit the plant")
    Fcl = np.block([[plant.F, plant.G2 @ Hc], [Gc @ plant.H2, Fc]])
    Gcl = np.vstack([plant.G1, Gc @ plant.K21])
    Hcl = np.hstack([plant.H1, plant.K12 @ Hc])
    cl = ClosedLoop(Fcl, Gcl, Hcl)
    cl.hurwitz = numlin.is_hurwitz(Fcl, tol=0.0)
    if not cl.hurwitz:
        cl.notes.append("closed-loop state matrix is not Hurwitz")
        return cl
    try:
        cl.hinf = numlin.hinf_norm(cl.system, rtol=rtol)
    except UnstableSystem:
        cl.hurwitz = False
        return cl
    cl.verified = cl.hinf < 1.0
    if not cl.verified:
        cl.notes.append(f"closed-loop H-infinity norm {cl.hinf:.6g} is not below 1")
    return cl


def scale_plant(plant, gamma):
    """Plant whose unit-bound problem is the ``gamma``-bound problem of ``plant``.

    The disturbance column (``G1``, ``K21``) is divided by ``gamma``, so every
    closed-loop transfer function from ``w`` is divided by ``gamma``.
    """
    if not gamma > 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    return replace(plant, G1=plant.G1 / gamma, K21=plant.K21 / gamma)


def hinf_synthesis(plant, gamma=1.0):
    """Assumption checks, Riccati solves, controller and closed-loop verification.

    Returns ``(report, controller, closed_loop)``; ``controller`` and
    ``closed_loop`` are ``None`` when the assumptions fail.
    """
    work = plant if gamma == 1.0 else scale_plant(plant, gamma)
    report = check_assumptions(work)
    if not report.ok:
        return report, None, None
    pair = solve_hinf_riccatis(work)
    ctrl = synthesize_controller(work, pair.X, pair.Y)
    cl = assemble_and_verify(work, ctrl)
    return report, ctrl, cl
