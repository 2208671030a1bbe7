"""Command-line interface.

Exit codes: 0 success / positive verdict, 1 negative verdict, 2 indeterminate
or inapplicable, 64 malformed input, 65 dimension mismatch, 70 numerical
failure.
"""
import argparse
import sys

import numpy as np

from . import __version__, coherent_hinf, modelio, ni, ni_synth, numlin, qlin
from .exceptions import (
    DimensionMismatch,
    HypothesisViolation,
    InputError,
    NonSquare,
    NoSkewSolutionFound,
    NumericalError,
    TSGapNotPD,
)
from .modelio import MalformedModel

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INDETERMINATE = 2
EXIT_MALFORMED = 64
EXIT_DIMENSION = 65
EXIT_NUMERICAL = 70

DEFAULT_TOL = 1e-9
DEFAULT_GRID = "1e-3,1e3,2000"
DEFAULT_SEED = 0


def parse_grid(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be lo,hi,count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc
    if not (0 < lo < hi) or count < 1:
        raise argparse.ArgumentTypeError("grid needs 0 < lo < hi and count >= 1")
    return lo, hi, count


def _grid_array(spec):
    lo, hi, count = spec
    return np.logspace(np.log10(lo), np.log10(hi), count)


# ----------------------------------------------------------------------------
# model conversion
# ----------------------------------------------------------------------------

def _require(model, *kinds):
    if model.kind not in kinds:
        raise MalformedModel(
            f"{model.source}: expected kind {' or '.join(kinds)}, got {model.kind!r}")


def _statespace(model, cls=numlin.StateSpace):
    A, B, C = model["A"], model["B"], model["C"]
    D = model.get("D")
    if D is None:
        D = np.zeros((C.shape[0], B.shape[1]))
    if A.size and A.shape[0] != A.shape[1]:
        raise NonSquare(f"A must be square, got {A.shape}")
    return cls(A, B, C, D)


def _real_system(model):
    _require(model, "real_ss")
    return _statespace(model, ni.RealStateSpace)


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------

def cmd_ni_check(args):
    sys_ = _real_system(modelio.load_model(args.model))
    grid = _grid_array(args.grid)
    freq = ni.ni_frequency_oracle(sys_, grid=grid, tol=args.tol)
    report = {"frequency": _verdict_dict(freq)}
    warnings = list(freq.notes)
    riccati = None
    try:
        riccati = ni.ni_riccati_test(sys_)
        report["riccati"] = _verdict_dict(riccati)
    except InputError as exc:
        report["riccati"] = {"applicable": False, "reason": type(exc).__name__,
                             "detail": str(exc)}
    except NumericalError as exc:
        report["riccati"] = {"applicable": True, "error": type(exc).__name__,
                             "detail": str(exc)}
        warnings.append("Riccati test failed numerically")

    f_ni = freq.is_ni
    if riccati is None or riccati.classification is ni.Classification.INDETERMINATE:
        verdict = freq.classification.value
    elif riccati.is_ni == f_ni:
        verdict = freq.classification.value
    else:
        verdict = ni.Classification.INDETERMINATE.value
        warnings.append("frequency and Riccati tests disagree")
    code = {"NI": EXIT_OK, "SNI": EXIT_OK, "NotNI": EXIT_NEGATIVE}.get(verdict, EXIT_INDETERMINATE)
    report["classification"] = verdict
    return report, warnings, code


def _verdict_dict(v):
    out = {"classification": v.classification, "method": v.method,
           "witness": v.witness, "min_margin": v.min_margin,
           "grid_points": v.grid_points, "notes": v.notes,
           "residues": [{"pole": r.pole, "K": r.K, "psd": r.psd} for r in v.residues]}
    if v.certificate is not None:
        out["certificate_P"] = v.certificate
    return out


def cmd_ni_stability(args):
    M = _real_system(modelio.load_model(args.M))
    N = _real_system(modelio.load_model(args.N))
    try:
        rep = ni.interconnection_stability(M, N, grid=_grid_array(args.grid), tol=args.tol)
    except HypothesisViolation as exc:
        return ({"verdict": "inapplicable", "hypothesis": exc.hypothesis, "detail": str(exc)},
                [], EXIT_INDETERMINATE)
    report = {"verdict": "stable" if rep.stable else "unstable",
              "lambda_max": rep.lambda_max, "dc_eigenvalues": rep.dc_eigs,
              "closed_loop_eigenvalues": rep.closed_loop_eigs,
              "closed_loop_hurwitz": rep.closed_loop_hurwitz}
    warnings = [] if rep.agrees else ["DC-gain verdict and closed-loop eigenvalues disagree"]
    return report, warnings, EXIT_OK if rep.stable else EXIT_NEGATIVE


def cmd_ni_synth(args):
    model = modelio.load_model(args.plant)
    _require(model, "uncertain_plant")
    plant = ni_synth.UncertainPlant(model["A"], model["B1"], model["B2"], model["C1"])
    try:
        res = ni_synth.synthesize_ni_feedback(plant, grid=_grid_array(args.grid))
    except TSGapNotPD as exc:
        return ({"verdict": "failed", "reason": "TSGapNotPD", "min_eig": exc.min_eig,
                 "detail": str(exc)}, ["sufficient condition failed; no gain produced"],
                EXIT_NEGATIVE)
    report = {"verdict": "synthesized", "K": res.K, "P": res.P, "T": res.T, "S": res.S,
              "are_residual": res.are_residual, "degenerate": res.degenerate,
              "closed_loop_eigenvalues": res.closed_loop_eigs,
              "closed_loop_classification": res.ni_verdict.classification,
              "C1B2_condition": plant.cond_C1B2}
    return report, list(res.notes), EXIT_OK


def cmd_care_solve(args):
    model = modelio.load_model(args.model)
    _require(model, "real_ss", "complex_ss")
    A, B, C = model["A"], model["B"], model["C"]
    Q = model.get("Q")
    Q = C.conj().T @ C if Q is None else Q
    R = model.get("R")
    R = np.eye(B.shape[1]) if R is None else R
    sol = numlin.solve_care(A, B, Q, R)
    report = {"X": sol.X, "residual": sol.residual,
              "closed_loop_eigenvalues": sol.closed_loop_eigs,
              "equation": "A^H X + X A - X B R^-1 B^H X + Q = 0"}
    return report, [], EXIT_OK


def cmd_quantum_build(args):
    model = modelio.load_model(args.spec)
    _require(model, "quantum_spec", "physreal_spec")
    if model.kind == "physreal_spec":
        spec = qlin.PhysRealSpec(model["R"], model["Lambda"], n_y=model.params.get("n_y"))
        q = qlin.physreal_construct(spec)
        return ({"quadrature": _quad_dict(q),
                 "physically_realizable": qlin.is_physically_realizable(q)}, [], EXIT_OK)
    n = model["M1"].shape[0]
    m = model["N1"].shape[0]
    spec = qlin.QuantumSpec(model["M1"], model.get("M2", np.zeros((n, n))), model["N1"],
                            model.get("N2", np.zeros((m, n))), model.get("S"))
    d = qlin.build_qsde(spec)
    q = qlin.quadrature_transform(d)
    report = {"doubled": {"F": d.F, "G": d.G, "H": d.H, "K": d.K},
              "structure_defect": d.structure_defect(), "quadrature": _quad_dict(q)}
    return report, [], EXIT_OK


def _quad_dict(q):
    return {"A": q.A, "B": q.B, "C": q.C, "D": q.D}


def cmd_quantum_hinf(args):
    model = modelio.load_model(args.plant)
    _require(model, "quantum_plant")
    plant = coherent_hinf.QuantumPlant(
        model["F"], model["G1"], model["G2"], model["H1"], model["H2"],
        model["K12"], model["K21"], G0=model.get("G0"), K20=model.get("K20"))
    rep = coherent_hinf.check_assumptions(plant)
    report = {"assumptions": rep.as_dict()}
    if not rep.ok:
        report["verdict"] = "assumptions_failed"
        return report, [], EXIT_NEGATIVE
    pair = coherent_hinf.solve_hinf_riccatis(plant)
    report.update(X=pair.X, Y=pair.Y, residual_X=pair.residual_X, residual_Y=pair.residual_Y)
    rho = numlin.spectral_radius(pair.X @ pair.Y)
    report["rhoXY"] = rho
    if not coherent_hinf.coupling_check(pair.X, pair.Y):
        report["verdict"] = "coupling_violated"
        return report, [], EXIT_NEGATIVE
    ctrl = coherent_hinf.synthesize_controller(plant, pair.X, pair.Y)
    cl = coherent_hinf.assemble_and_verify(plant, ctrl)
    report.update(Fc=ctrl.Fc, Gc=ctrl.Gc, Hc=ctrl.Hc,
                  controller_structure_defect=ctrl.structure_defect,
                  closed_loop_hurwitz=cl.hurwitz, closed_loop_hinf=cl.hinf,
                  verdict="verified" if cl.verified else "not_verified")
    warnings = list(cl.notes)
    if ctrl.structure_defect > qlin.STRUCT_TOL:
        warnings.append("controller matrices are not in doubled-up form")
    return report, warnings, EXIT_OK if cl.verified else EXIT_NEGATIVE


def cmd_quantum_physreal(args):
    model = modelio.load_model(args.model)
    _require(model, "real_ss", "physreal_spec")
    if model.kind == "physreal_spec":
        spec = qlin.PhysRealSpec(model["R"], model["Lambda"], n_y=model.params.get("n_y"))
        q = qlin.physreal_construct(spec)
        A, Bu, C = q.A, q.B[:, spec.n_y:], q.C
    else:
        A, Bu, C = model["A"], model["B"], model["C"]
        D = model.get("D")
        if D is not None and np.any(D != 0):
            raise MalformedModel("transfer function must be strictly proper (D = 0)")
    try:
        res = qlin.physreal_are_test(A, Bu, C, seed=args.seed, grid=_grid_array(args.grid))
    except NoSkewSolutionFound as exc:
        return ({"verdict": "no_solution_found", "reason": type(exc).__name__,
                 "detail": str(exc)},
                ["search exhausted; this does not prove the system is not realizable"],
                EXIT_NEGATIVE)
    report = {"verdict": "realizable", "X": res.X, "residual": res.residual,
              "skewness": res.skewness, "start": res.start, "T": res.T,
              "realization": _quad_dict(res.system), "transfer_function_error": res.tf_error}
    return report, [], EXIT_OK


# ----------------------------------------------------------------------------
# parser and dispatch
# ----------------------------------------------------------------------------

def _global_flags(parser, defaults):
    kw = (lambda v: {"default": v}) if defaults else (lambda v: {"default": argparse.SUPPRESS})
    parser.add_argument("--tol", type=float, help=f"tolerance (default {DEFAULT_TOL})",
                        **kw(DEFAULT_TOL))
    parser.add_argument("--grid", type=parse_grid, metavar="LO,HI,COUNT",
                        help=f"log-spaced frequency grid (default {DEFAULT_GRID})",
                        **kw(parse_grid(DEFAULT_GRID)))
    parser.add_argument("--seed", type=int, help=f"multistart seed (default {DEFAULT_SEED})",
                        **kw(DEFAULT_SEED))
    parser.add_argument("--output", metavar="PATH", help="write the report to PATH",
                        **kw(None))
    parser.add_argument("--format", choices=("json", "text"), help="report format",
                        **kw("json"))


def build_parser():
    parser = argparse.ArgumentParser(prog="riccatikit",
                                     description="Riccati-equation tools for NI and quantum systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, defaults=True)
    shared = argparse.ArgumentParser(add_help=False)
    _global_flags(shared, defaults=False)
    groups = parser.add_subparsers(dest="group", required=True)

    g_ni = groups.add_parser("ni", help="negative-imaginary analysis and synthesis")
    s_ni = g_ni.add_subparsers(dest="command", required=True)
    p = s_ni.add_parser("check", parents=[shared], help="classify a real_ss model")
    p.add_argument("model")
    p.set_defaults(func=cmd_ni_check)
    p = s_ni.add_parser("stability", parents=[shared], help="DC-gain test for an NI/SNI loop")
    p.add_argument("M")
    p.add_argument("N")
    p.set_defaults(func=cmd_ni_stability)
    p = s_ni.add_parser("synth", parents=[shared], help="NI state-feedback synthesis")
    p.add_argument("plant")
    p.set_defaults(func=cmd_ni_synth)

    g_care = groups.add_parser("care", help="continuous algebraic Riccati equations")
    s_care = g_care.add_subparsers(dest="command", required=True)
    p = s_care.add_parser("solve", parents=[shared], help="stabilizing CARE solution")
    p.add_argument("model")
    p.set_defaults(func=cmd_care_solve)

    g_q = groups.add_parser("quantum", help="linear quantum systems")
    s_q = g_q.add_subparsers(dest="command", required=True)
    p = s_q.add_parser("build", parents=[shared], help="doubled-up and quadrature forms")
    p.add_argument("spec")
    p.set_defaults(func=cmd_quantum_build)
    p = s_q.add_parser("hinf", parents=[shared], help="coherent H-infinity controller")
    p.add_argument("plant")
    p.set_defaults(func=cmd_quantum_hinf)
    p = s_q.add_parser("physreal", parents=[shared], help="skew Riccati realizability test")
    p.add_argument("model")
    p.set_defaults(func=cmd_quantum_physreal)
    return parser


def _settings(args):
    lo, hi, count = args.grid
    return {"tol": args.tol, "grid": {"lo": lo, "hi": hi, "count": count}, "seed": args.seed}


def _echo(args, argv):
    return {"group": args.group, "command": args.command,
            "argv": list(argv)}


def _text(report, indent=0):
    lines = []
    pad = "  " * indent
    for key in sorted(report):
        val = report[key]
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_text(val, indent + 1))
        else:
            lines.append(f"{pad}{key}: {val}")
    return lines


def render(report, fmt):
    if fmt == "json":
        return modelio.dumps_report(report)
    return "\n".join(_text(modelio.encode(report))) + "\n"


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    envelope = {"command": _echo(args, argv), "settings": _settings(args)}
    try:
        result, warnings, code = args.func(args)
        envelope.update(status="ok", result=result, warnings=warnings)
    except MalformedModel as exc:
        code = EXIT_MALFORMED
        envelope.update(status="error", error={"type": "MalformedModel", "detail": str(exc)})
    except (DimensionMismatch, NonSquare) as exc:
        code = EXIT_DIMENSION
        envelope.update(status="error", error={"type": type(exc).__name__, "detail": str(exc)})
    except InputError as exc:
        code = EXIT_MALFORMED
        envelope.update(status="error", error={"type": type(exc).__name__, "detail": str(exc)})
    except (NumericalError, HypothesisViolation, np.linalg.LinAlgError) as exc:
        code = EXIT_NUMERICAL
        envelope.update(status="error", error={"type": type(exc).__name__, "detail": str(exc)})
    envelope["exit_code"] = code
    text = render(envelope, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code != EXIT_OK and envelope["status"] == "error":
        print(f"riccatikit: {envelope['error']['type']}: {envelope['error']['detail']}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
