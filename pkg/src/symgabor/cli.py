"""Command-line interface.

Every subcommand reads lattice or symplectic matrices from JSON documents
{"d": int, "entries": [[expr, ...], ...]} and writes one JSON report.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .errors import ParseError, SymGaborError
from .exprparse import parse_matrix
from .frames import (
    TruncationSpec,
    canonical_dual,
    default_truncation,
    equivalence_residual,
    frame_bounds_estimate,
    janssen_residual,
    wexler_raz_residual,
)
from .gaussian import GaussianAtom, gaussian_atom_samples, gaussian_frame_params, pre_iwasawa, standard_gaussian
from .lattice import bounded_orbit_search, classify
from .metaplectic import (
    conjugation_symmetry_residual,
    full_factorization,
    rho_relatedness_residual,
    two_free_factorization,
)
from .report import JobConfig, dumps, gaussian_block, input_digest, new_report
from .sampling import TFShift, default_grid
from .symplectic import (
    adjoint_matrix,
    covolume,
    half_dim,
    is_symplectic,
    pfaffian,
    symplectic_form_of,
    symplectically_related,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we reserve 2 for parse errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path, **kw):
    text = _read(path)
    return text, parse_matrix(text, **kw)


def _dvec(text, d):
    if text is None:
        return np.ones(d)
    try:
        v = np.array([float(s) for s in text.split(",")])
    except ValueError:
        raise UsageError(f"--dvec must be comma-separated numbers, got {text!r}") from None
    if v.shape != (d,):
        raise UsageError(f"--dvec needs {d} entries")
    return v


def _config(args, d) -> JobConfig:
    try:
        return JobConfig(d=d, n=args.grid, extent=args.extent, trunc=args.trunc, tol=args.tol, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _grid(cfg: JobConfig):
    if cfg.d not in (1, 2):
        raise UsageError("sampled computations support d = 1 and d = 2 only")
    return default_grid(cfg.d, cfg.n, cfg.extent)


def _trunc(cfg: JobConfig):
    return default_truncation(cfg.d) if cfg.trunc is None else TruncationSpec(cfg.trunc)


def _word_json(word):
    return [{"kind": g.kind, "matrix": None if g.mat is None else g.mat} for g in word]


def _grid_aligned_points(grid, count, seed, reach=2.0):
    rng = np.random.default_rng(seed)
    d = grid.d
    x = np.rint(rng.uniform(-reach, reach, (count, d)) / grid.h) * grid.h
    om = np.rint(rng.uniform(-reach, reach, (count, d)) * grid.extent) / grid.extent
    return np.hstack([x, om])


# ---- subcommands -----------------------------------------------------------

def cmd_classify(args):
    text, A = _load(args.input)
    d = half_dim(A)
    cfg = _config(args, d)
    rep = new_report("classify", input_digest(text), cfg)
    c = classify(A, cfg.tol, d_diag=None if args.dvec is None else _dvec(args.dvec, d))
    rep.update(
        theta=c.theta,
        pfaffian=c.pfaffian,
        covolume=c.covolume,
        density_ok=c.density_ok,
        separable_K=c.separable_K,
        k_diagonal=c.K_diagonal,
        gaussian=None if c.gaussian is None else gaussian_block(c.gaussian),
        lagrangian_split=None if c.lagrangian_split is None else
        {"left": c.lagrangian_split.left, "right": c.lagrangian_split.right},
        result={"gaussian_frame_verdict": c.gaussian_frame_verdict},
    )
    return rep


def cmd_relate(args):
    ta, A = _load(args.a)
    tb, B = _load(args.b)
    d = half_dim(A)
    cfg = _config(args, d)
    rep = new_report("relate", input_digest(ta, tb), cfg)
    S = symplectically_related(A, B, cfg.tol)
    M = None
    if S is None and args.search:
        M = bounded_orbit_search(A, B, args.search, cfg.tol)
        if M is not None:
            S = symplectically_related(A @ M, B, 1e-6)
    rep["theta"] = symplectic_form_of(A, cfg.tol)
    rep["result"] = {
        "related": S is not None,
        "S": S,
        "unimodular_M": M,
        "S_symplectic": None if S is None else is_symplectic(S, 1e-10),
    }
    return rep


def cmd_factorize(args):
    text, S = _load(args.input)
    d = half_dim(S)
    cfg = _config(args, d)
    rep = new_report("factorize", input_digest(text), cfg)
    if args.two_free:
        S1, S2 = two_free_factorization(S, cfg.tol)
        rep["result"] = {"S1": S1, "S2": S2}
    else:
        word = full_factorization(S, cfg.tol)
        rep["result"] = {"word": _word_json(word), "free": len(word) == 4}
    return rep


def cmd_pfaffian(args):
    text, A = _load(args.input)
    d = half_dim(A)
    cfg = _config(args, d)
    rep = new_report("pfaffian", input_digest(text), cfg)
    if args.form:
        theta = 0.5 * (A - A.T)
        if np.max(np.abs(A + A.T)) > cfg.tol:
            raise SymGaborError("--form input must be antisymmetric")
    else:
        theta = symplectic_form_of(A, cfg.tol)
        rep["covolume"] = covolume(A)
    rep["theta"] = theta
    rep["pfaffian"] = pfaffian(theta)
    return rep


def cmd_adjoint(args):
    text, A = _load(args.input)
    d = half_dim(A)
    cfg = _config(args, d)
    rep = new_report("adjoint", input_digest(text), cfg)
    Ad = adjoint_matrix(A, cfg.tol)
    rep["theta"] = symplectic_form_of(A, cfg.tol)
    rep["covolume"] = covolume(A)
    rep["result"] = {"adjoint": Ad, "adjoint_theta": symplectic_form_of(Ad, cfg.tol)}
    return rep


def cmd_gaussian(args):
    text, A = _load(args.input)
    d = half_dim(A)
    cfg = _config(args, d)
    rep = new_report("gaussian", input_digest(text), cfg)
    res = gaussian_frame_params(A, _dvec(args.dvec, d), cfg.tol)
    rep["theta"] = symplectic_form_of(A, cfg.tol)
    rep["k_diagonal"] = True
    rep["gaussian"] = gaussian_block(res)
    return rep


def cmd_pre_iwasawa(args):
    text, S = _load(args.input)
    d = half_dim(S)
    cfg = _config(args, d)
    rep = new_report("pre-iwasawa", input_digest(text), cfg)
    pi = pre_iwasawa(S, cfg.tol)
    rep["result"] = {
        "X": pi.x_mat,
        "Y": pi.y_mat,
        "P": pi.p_mat,
        "Q": pi.q_mat,
        "reconstruction_error": float(np.max(np.abs(pi.product() - S))),
    }
    return rep


def cmd_verify(args):
    kind = args.check
    if kind == "equivalence":
        if args.b is None:
            raise UsageError("verify equivalence needs --b")
        ta, A = _load(args.input)
        tb, B = _load(args.b)
        texts = (ta, tb)
    else:
        ta, A = _load(args.input)
        texts = (ta,)
    d = half_dim(A)
    cfg = _config(args, d)
    rep = new_report(f"verify {kind}", input_digest(*texts), cfg)
    grid = _grid(cfg)
    g0 = standard_gaussian(d, grid)
    res = {}
    if kind == "rho":
        zs = _grid_aligned_points(grid, 8, cfg.seed)
        res["rho"] = rho_relatedness_residual(A, g0, zs)
    elif kind == "conjugation":
        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for _ in range(8):
            z = TFShift(rng.uniform(-2, 2, d), rng.uniform(-2, 2, d))
            worst = max(worst, conjugation_symmetry_residual(z, g0))
        res["conjugation"] = worst
    elif kind == "equivalence":
        f = GaussianAtom(2.0 * np.eye(d), 0.5 * np.eye(d))
        fs = gaussian_atom_samples(f, grid)
        res["equivalence"] = equivalence_residual(A, B, g0, fs, _trunc(cfg), cfg.tol)
    elif kind == "janssen":
        res["janssen"] = janssen_residual(g0, g0, g0, A, _trunc(cfg))
    elif kind == "wexler-raz":
        h = canonical_dual(g0, A, trunc=_trunc(cfg))
        res["wexler_raz"] = wexler_raz_residual(g0, h, A, _trunc(cfg))
        res["janssen"] = janssen_residual(g0, h, g0, A, _trunc(cfg))
    rep["residuals"] = res
    return rep


def cmd_bounds(args):
    text, A = _load(args.input)
    d = half_dim(A)
    cfg = _config(args, d)
    rep = new_report("bounds", input_digest(text), cfg)
    grid = _grid(cfg)
    shape = None
    if args.dvec is not None:
        gres = gaussian_frame_params(A, _dvec(args.dvec, d), cfg.tol)
        shape = gres.atom()
        g = gaussian_atom_samples(shape, grid, carrier=True)
        rep["gaussian"] = gaussian_block(gres)
    else:
        g = standard_gaussian(d, grid)
    b = frame_bounds_estimate(g, A, trunc=_trunc(cfg), seed=cfg.seed, order=args.order, shape=shape)
    rep["covolume"] = covolume(A)
    rep["result"] = {"lower": b.lower, "upper": b.upper, "ratio": b.ratio,
                     "iterations": b.iterations, "converged": b.converged}
    return rep


COMMANDS = {
    "classify": cmd_classify,
    "relate": cmd_relate,
    "factorize": cmd_factorize,
    "pfaffian": cmd_pfaffian,
    "adjoint": cmd_adjoint,
    "gaussian": cmd_gaussian,
    "pre-iwasawa": cmd_pre_iwasawa,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, default=None, help="grid points per axis (even)")
    common.add_argument("--extent", type=float, default=None, help="window length T")
    common.add_argument("--trunc", type=int, default=None, help="lattice truncation radius R")
    common.add_argument("--tol", type=float, default=1e-9, help="algebraic tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--verbose", "-v", action="store_true", help="summary on stderr")

    p = _Parser(prog="symgabor", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("classify", parents=[common], help="form, covolume, separability, Gaussian verdict")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--dvec", default=None, help="diagonal of D, e.g. '1,1'")

    s = sub.add_parser("relate", parents=[common], help="symplectic S with B = S A")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--search", type=int, default=0, metavar="RADIUS",
                   help="if the forms differ, search unimodular changes of basis of A")

    s = sub.add_parser("factorize", parents=[common], help="generator word of a symplectic matrix")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--two-free", action="store_true", help="stop at the split into two free factors")

    s = sub.add_parser("pfaffian", parents=[common], help="Pfaffian of the form of a lattice matrix")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--form", action="store_true", help="input is already an antisymmetric form")

    s = sub.add_parser("adjoint", parents=[common], help="adjoint lattice matrix -J A^{-T}")
    s.add_argument("--input", "-i", required=True)

    s = sub.add_parser("gaussian", parents=[common], help="Gaussian frame parameters X, Y")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--dvec", default=None)

    s = sub.add_parser("pre-iwasawa", parents=[common], help="S = V_Y M_{X^1/2} O")
    s.add_argument("--input", "-i", required=True)

    s = sub.add_parser("verify", parents=[common], help="numerical identity checks")
    s.add_argument("check", choices=["rho", "equivalence", "janssen", "wexler-raz", "conjugation"])
    s.add_argument("--input", "-i", required=True, help="S for rho, lattice matrix otherwise")
    s.add_argument("--b", default=None, help="second lattice matrix for equivalence")

    s = sub.add_parser("bounds", parents=[common], help="frame bound estimates")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--dvec", default=None, help="use the adapted Gaussian for this D instead of g0")
    s.add_argument("--order", type=int, default=None, help="probe space order")
    return p


def _summary(rep) -> str:
    lines = [f"command: {rep['command']}"]
    for key in ("pfaffian", "covolume", "density_ok", "k_diagonal"):
        if rep[key] is not None:
            lines.append(f"{key}: {rep[key]}")
    if rep["gaussian"] is not None:
        lines.append(f"is_frame: {rep['gaussian']['is_frame']}")
    for k, v in (rep["residuals"] or {}).items():
        lines.append(f"residual {k}: {v:.3e}")
    return "\n".join(lines) + "\n"


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        rep = COMMANDS[args.command](args)
        text = dumps(rep)
    except UsageError as exc:
        stderr.write(f"symgabor: error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        stderr.write(f"symgabor: parse error: {exc}\n")
        return EXIT_PARSE
    except SymGaborError as exc:
        stderr.write(f"symgabor: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        stderr.write(f"symgabor: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    # the report is complete before anything is written
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            stderr.write(f"symgabor: cannot write {args.output}: {exc.strerror}\n")
            return EXIT_USAGE
    else:
        stdout.write(text)
    if args.verbose:
        stderr.write(_summary(rep))
    return EXIT_OK


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
