"""Command line front end.

Every verb reads a lattice either from a JSON file or from the rank-3 family
(``--example3 --alpha1 A --r RE,IM --t RE,IM``) and prints one JSON object.
``purity`` with ``--grid`` sweeps the family; ``--csv`` switches it to CSV
with columns ``r_re,r_im,t_re,t_im,dimH0,pure,sig_plus,sig_minus``.

Exit status: 0 success, 2 invalid input, 3 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import curvature as cv
from .errors import DegenerateError, TerpError, ValidationError
from .example3 import (Example3Config, example3_dC, example3_expected, example3_lattice,
                       example3_reference_flag)
from .hodge import check_DcPMHS, check_PMHS_polarized
from .io import dumps, fmt, lattice_from_dict, load_lattice, matrix_from_json
from .phibound import phi_supremum_search
from .terp import Lattice, check_pairing, hodge_filtration, spectral_numbers
from .twistor import kodaira_spencer, metric_gram, tangent_metric

VERBS = ("spectrum", "pairing", "hodge", "pmhs", "purity", "metric", "curvature",
         "phi-bound", "horizontal-rank", "example3")

PURITY_COLUMNS = ("r_re", "r_im", "t_re", "t_im", "dimH0", "pure", "sig_plus", "sig_minus")


def parse_complex(text: str) -> complex:
    """``"re,im"`` or a plain real number."""
    parts = str(text).split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ValidationError(f"cannot parse complex value {text!r} (use re,im)")


def parse_grid(spec: str):
    """``name=a:b:count`` with inclusive linear spacing; endpoints may be complex."""
    if "=" not in spec:
        raise ValidationError(f"grid spec {spec!r} must look like name=a:b:count")
    name, rng = spec.split("=", 1)
    parts = rng.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid range {rng!r} must be a:b:count")
    a, b = parse_complex(parts[0]), parse_complex(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise ValidationError(f"grid count {parts[2]!r} is not an integer") from None
    if count < 1:
        raise ValidationError("grid count must be positive")
    if count == 1:
        return name.strip(), [a]
    return name.strip(), [a + (b - a) * k / (count - 1) for k in range(count)]


def _example_cfg(args, r=None, t=None) -> Example3Config:
    return Example3Config(Fraction(args.alpha1), r if r is not None else parse_complex(args.r),
                          t if t is not None else parse_complex(args.t))


def _lattice(args) -> Lattice:
    if args.example3:
        return example3_lattice(_example_cfg(args))
    if not args.input:
        raise ValidationError("give an input JSON file or --example3")
    return load_lattice(args.input)


def _matrix_arg(text: str, name: str) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{name}: malformed JSON ({exc})") from None
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{name}: expected a square matrix")
    return matrix_from_json(data, len(data), name)


def _signature(rep):
    return list(rep.signature) if rep.signature is not None else None


# ---------------------------------------------------------------------------
# verbs

def cmd_spectrum(args):
    return {"spectrum": [str(a) for a in spectral_numbers(_lattice(args))]}


def cmd_pairing(args):
    rep = check_pairing(_lattice(args))
    return {"holds": rep.holds, "max_negative": rep.max_negative, "residueGram": rep.residueGram}


def cmd_hodge(args):
    lat = _lattice(args)
    F = hodge_filtration(lat, twisted=not args.untwisted)
    return {"twisted": not args.untwisted,
            "dims": F.dims(),
            "hodge_numbers": F.hodge_numbers(),
            "steps": {p: F.at(p) for p in sorted(F.steps)}}


def cmd_pmhs(args):
    lat = _lattice(args)
    F = hodge_filtration(lat)
    if args.example3:
        F0 = example3_reference_flag(_example_cfg(args).alpha1)
    else:
        F0 = hodge_filtration(Lattice(lat.topo, []), twisted=False)
    d = check_DcPMHS(F, lat.topo, F0)
    p = check_PMHS_polarized(F, lat.topo)
    return {
        "DcPMHS": {"passed": d.passed, "dims_match": d.dims_match, "N_shift": d.N_shift,
                   "primitive_compat": d.primitive_compat, "graded_split": d.graded_split,
                   "S_orthogonal": d.S_orthogonal, "Ms_invariant": d.Ms_invariant,
                   "details": d.details},
        "polarized": {"passed": p.passed, "hodge_decomposition": p.hodge_decomposition,
                      "positive": p.positive, "sign_convention": p.sign_convention,
                      "min_eigenvalues": p.min_eigenvalues, "details": p.details},
    }


def _purity_row(cfg: Example3Config):
    rep = metric_gram(example3_lattice(cfg), strict=False)
    sig = rep.signature if rep.signature is not None else ("", "")
    return (cfg.r.real, cfg.r.imag, cfg.t.real, cfg.t.imag, rep.globalSectionDim,
            rep.pure, sig[0], sig[1])


def cmd_purity(args):
    if not args.grid:
        rep = metric_gram(_lattice(args), strict=False)
        return {"globalSectionDim": rep.globalSectionDim, "pure": rep.pure,
                "signature": _signature(rep), "gram": rep.gram}
    if not args.example3:
        raise ValidationError("--grid sweeps the rank-3 family; add --example3")
    axes = dict(parse_grid(g) for g in args.grid)
    unknown = set(axes) - {"r", "t"}
    if unknown:
        raise ValidationError(f"unknown grid axis {sorted(unknown)}")
    rs = axes.get("r", [parse_complex(args.r)])
    ts = axes.get("t", [parse_complex(args.t)])
    cfgs = [_example_cfg(args, r, t) for r in rs for t in ts]
    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_purity_row, cfgs))
    else:
        rows = [_purity_row(c) for c in cfgs]
    if args.csv:
        buf = _io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(PURITY_COLUMNS)
        for row in rows:
            wr.writerow([fmt(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool)
                         else v for v in row])
        return buf.getvalue()
    return {"columns": PURITY_COLUMNS, "rows": [list(r) for r in rows]}


def cmd_metric(args):
    lat = _lattice(args)
    rep = metric_gram(lat)
    out = {"globalSectionDim": rep.globalSectionDim, "signature": _signature(rep), "gram": rep.gram}
    if args.example3:
        dC = example3_dC(_example_cfg(args), args.direction)
    elif args.dC:
        try:
            dC = [matrix_from_json(m, lat.mu, "dC") for m in json.loads(args.dC)]
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--dC: malformed JSON ({exc})") from None
    else:
        return out
    Delta = kodaira_spencer(lat, dC)
    out["tangent_metric"] = tangent_metric(lat, Delta, rep)
    if args.example3:
        out["direction"] = args.direction
    return out


def cmd_curvature(args):
    if not args.delta:
        raise ValidationError("--delta is required")
    D = _matrix_arg(args.delta, "--delta")
    out = {"n": args.n}
    M = cv.curvature_matrix(D, args.n)
    out["contraction"] = cv.curvature_contraction(D)
    out["tensor_contraction"] = cv.tensor_contraction(D, args.n)
    out["symmetric_nilpotent"] = cv.is_symmetric_nilpotent(D)
    if out["symmetric_nilpotent"]:
        out["phi"] = cv.phi_value(D)
    out["matrix_shape"] = list(M.shape)
    return out


def cmd_phi_bound(args):
    res = phi_supremum_search(args.mu, args.restarts, args.seed)
    return {"phi_sup_estimate": res.value, "mu": args.mu, "restarts": args.restarts,
            "seed": args.seed, "feasible_restarts": res.n_feasible,
            "best_restart": res.best.index}


def cmd_horizontal_rank(args):
    lat = _lattice(args)
    alpha = lat.alpha
    C1 = lat.C[0] if lat.C else np.zeros((lat.mu, lat.mu), dtype=complex)
    U = np.array([[float(alpha[i].rational - 1 - alpha[j].rational) * C1[i, j]
                   for j in range(lat.mu)] for i in range(lat.mu)])
    return {"horizontal_rank": cv.horizontal_rank(U, lat.topo.Pmat, alpha)}


def cmd_example3(args):
    cfg = _example_cfg(args)
    exp = example3_expected(cfg)
    lat = example3_lattice(cfg)
    rep = metric_gram(lat, strict=False)
    out = {"alpha1": str(cfg.alpha1), "r": cfg.r, "t": cfg.t, "rho": exp.rho, "theta": exp.theta,
           "spectrum": [str(a) for a in spectral_numbers(lat)],
           "pure_expected": exp.pure, "pure": rep.pure, "signature": _signature(rep),
           "wall_modulus": exp.wall, "metric_rr_expected": exp.metric_rr}
    if rep.polarized:
        out["metric_rr"] = tangent_metric(lat, kodaira_spencer(lat, example3_dC(cfg, "r")), rep)
    return out


HANDLERS = {
    "spectrum": cmd_spectrum, "pairing": cmd_pairing, "hodge": cmd_hodge, "pmhs": cmd_pmhs,
    "purity": cmd_purity, "metric": cmd_metric, "curvature": cmd_curvature,
    "phi-bound": cmd_phi_bound, "horizontal-rank": cmd_horizontal_rank, "example3": cmd_example3,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="terpgeom", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    def lattice_parser(name, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("input", nargs="?", help="lattice JSON file")
        s.add_argument("--example3", action="store_true", help="use the rank-3 family")
        s.add_argument("--alpha1", default="-5/4", help="family order alpha1 in (-3/2, -1)")
        s.add_argument("--r", default="0", help="family parameter r as re,im")
        s.add_argument("--t", default="0", help="family parameter t as re,im")
        return s

    lattice_parser("spectrum", "spectral numbers")
    lattice_parser("pairing", "pairing test")
    s = lattice_parser("hodge", "Hodge filtration")
    s.add_argument("--untwisted", action="store_true", help="skip the gamma twist")
    lattice_parser("pmhs", "mixed Hodge structure and polarization checks")
    s = lattice_parser("purity", "purity and polarization of the twistor extension")
    s.add_argument("--grid", nargs="+", metavar="AXIS=a:b:count",
                   help="sweep r and/or t (inclusive, count points)")
    s.add_argument("--csv", action="store_true",
                   help="CSV output: " + ",".join(PURITY_COLUMNS))
    s.add_argument("--jobs", type=int, default=1, help="worker threads for grid sweeps")
    s = lattice_parser("metric", "metric gram and tangent metric")
    s.add_argument("--direction", default="r", choices=("r", "t", "inv_r"),
                   help="tangent direction for --example3")
    s.add_argument("--dC", help="JSON list of derivative matrices dC_1..dC_n")
    s = sub.add_parser("curvature", help="curvature of the classifying space at a tangent")
    s.add_argument("--delta", help="Delta_1 as JSON matrix of [re, im] pairs")
    s.add_argument("--n", type=int, default=2, help="pole order")
    s = sub.add_parser("phi-bound", help="multi-start estimate of sup phi")
    s.add_argument("--mu", type=int, required=True)
    s.add_argument("--restarts", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)
    lattice_parser("horizontal-rank", "dimension of horizontal tangent directions")
    lattice_parser("example3", "closed-form expectations and computed values for the family")
    return p


def _emit_error(exc: TerpError, stream) -> int:
    code = exc.exit_code
    kind = "degenerate" if code == 3 else "validation" if code == 2 else "error"
    stream.write(dumps({"error": {"code": kind, "type": type(exc).__name__, "message": str(exc)}}) + "\n")
    return code


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        result = HANDLERS[args.verb](args)
    except TerpError as exc:
        return _emit_error(exc, stderr)
    except np.linalg.LinAlgError as exc:
        return _emit_error(DegenerateError(str(exc)), stderr)
    stdout.write(result if isinstance(result, str) else dumps(result) + "\n")
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
