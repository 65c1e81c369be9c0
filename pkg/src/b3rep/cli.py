"""``b3rep`` command line: check, scan, unitarize, verify.

Exit codes: 0 ok, 2 usage error, 3 negative/boundary/not-simple verdict,
4 internal inconsistency (including failed verification properties).
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from typing import Optional

import numpy as np

from . import algebra_tools as at
from . import rep_builder as rb
from . import scanner as sc
from . import spectra as sp
from .errors import B3RepError, InconsistencyError, InputError, NotPositiveDefiniteError, ReconstructionFailed

log = logging.getLogger("b3rep")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NEGATIVE = 3
EXIT_INTERNAL = 4

ROUND_TRIP_TOL = 1e-8


class UsageError(Exception):
    pass


# -- serialization helpers -----------------------------------------------------------

def cjson(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def mjson(m) -> list:
    return [[cjson(x) for x in row] for row in np.asarray(m)]


def mfromjson(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)


def parse_angles(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse angles {text!r}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- spectrum and representation from arguments --------------------------------------

def _spectrum(args) -> sp.Spectrum:
    if args.angles is None:
        raise UsageError("--angles is required")
    angles = parse_angles(args.angles)
    branch = args.gamma_branch
    if args.d >= 4 and branch is None and args.delta_root is None:
        raise UsageError(f"d={args.d} needs --gamma-branch or --delta-root")
    if args.d >= 4 and branch is None:
        branch = 0  # placeholder until the reconstruction identifies the branch
    return sp.spectrum_from_angles(args.d, angles, branch)


def _build(s: sp.Spectrum, args):
    """Reconstruct; with --delta-root the branch is read off the result."""
    if s.d == 2:
        return s, rb.build_d2(s)
    if s.d >= 4 and args.delta_root is not None:
        roots = rb.delta_roots(s)
        if not 0 <= args.delta_root < len(roots):
            raise UsageError(f"--delta-root must lie in 0..{len(roots) - 1}")
        r = rb.build_newton(s, roots[args.delta_root], seed=args.seed)
        branch = rb.match_branch(s.angles, r)
        if args.gamma_branch is not None and branch != args.gamma_branch:
            raise UsageError(
                f"--delta-root {args.delta_root} gives branch {branch}, not --gamma-branch {args.gamma_branch}"
            )
        return s.with_branch(branch), r
    return s, rb.build_newton(s, seed=args.seed)


def spectrum_report(s: sp.Spectrum) -> dict:
    out = {
        "spectrum": {"d": s.d, "angles": list(s.angles), "lambdas": [cjson(z) for z in s.lambdas]},
        "gamma": None if s.gamma is None else {"branch": s.gamma_branch, "value": cjson(s.gamma)},
        "q_values": {f"{r}{c}": cjson(q) for (r, c), q in sp.q_values(s).items()},
    }
    verdict = sp.unitarizable(s)
    if verdict is sp.Verdict.NOT_SIMPLE:
        out["mu_closed"] = None
    else:
        out["mu_closed"] = list(sp.mu_row(s).values)
    out["verdict"] = verdict.value
    return out


def deep_report(s: sp.Spectrum, r) -> dict:
    """Numeric side of a check: mu table, delta, form signature, unitary matrices."""
    out = {"delta": cjson(r.delta), "mu_numeric": at.mu_numeric_table(r, s).tolist()}
    g = at.gram_form(r, s)
    out["signature"] = list(g.signature)
    out["residuals"] = {
        "braid": r.braid_residual,
        "spectrum": r.spectrum_residual,
        "central": r.central_residual,
        "form_invariance": g.invariance_residual,
    }
    out["matrices"] = {"A": mjson(r.A), "B": mjson(r.B)}
    if g.definite:
        U_A, U_B = at.unitarize(r, g)
        out["matrices"].update({"U_A": mjson(U_A), "U_B": mjson(U_B)})
    return out


def _format_text(doc: dict) -> str:
    lines = []
    spec = doc["spectrum"]
    lines.append(f"d = {spec['d']}  angles = {', '.join('%.12g' % t for t in spec['angles'])}")
    if doc.get("gamma"):
        g = doc["gamma"]
        lines.append(f"gamma (branch {g['branch']}) = {g['value'][0]:+.12g} {g['value'][1]:+.12g}i")
    if doc.get("mu_closed") is not None:
        lines.append("mu_1i (closed) = " + ", ".join("%.12g" % m for m in doc["mu_closed"]))
    if "mu_numeric" in doc:
        row = doc["mu_numeric"][0][1:]
        lines.append("mu_1i (numeric) = " + ", ".join("%.12g" % m for m in row))
        lines.append(f"delta = {doc['delta'][0]:+.12g} {doc['delta'][1]:+.12g}i")
        lines.append(f"signature = {tuple(doc['signature'])}")
    lines.append(f"verdict: {doc['verdict']}")
    return "\n".join(lines) + "\n"


# -- commands -------------------------------------------------------------------------

def cmd_check(args) -> int:
    s = _spectrum(args)
    deep = args.deep or (s.d >= 4 and args.delta_root is not None)
    if deep and sp.is_simple(s):
        s, r = _build(s, args)
        doc = spectrum_report(s)
        doc.update(deep_report(s, r))
        verdict = sp.Verdict(doc["verdict"])
        if verdict in (sp.Verdict.UNITARIZABLE, sp.Verdict.NOT_UNITARIZABLE):
            definite = tuple(doc["signature"]) == (s.d, 0)
            if definite != (verdict is sp.Verdict.UNITARIZABLE):
                raise InconsistencyError(
                    f"closed-form verdict {verdict.value} contradicts form signature {doc['signature']}"
                )
    else:
        doc = spectrum_report(s)
    text = json.dumps(doc, indent=2) + "\n" if args.format == "json" else _format_text(doc)
    _emit(text, args.out)
    return EXIT_OK if doc["verdict"] == sp.Verdict.UNITARIZABLE.value else EXIT_NEGATIVE


def cmd_scan(args) -> int:
    res = args.resolution
    if args.d in (2, 3):
        if args.format not in ("pgm", "csv", "json"):
            raise UsageError("raster scans write pgm, csv or json")
        try:
            raster = sc.scan_raster(args.d, res, args.boundary_eps, args.jobs)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.format == "pgm":
            data = raster.to_pgm()
            if args.out:
                with open(args.out, "wb") as fh:
                    fh.write(data)
                if args.d == 3:
                    with open(_lines_path(args.out), "wb") as fh:
                        fh.write(sc.mask_to_pgm(raster.line_mask()))
            else:
                sys.stdout.write(data.decode("ascii"))
        elif args.format == "csv":
            _emit(raster.to_csv(), args.out)
        else:
            _emit(json.dumps(raster.to_json_dict()) + "\n", args.out)
        return EXIT_OK
    if args.format != "csv":
        raise UsageError(f"d={args.d} scans write csv only")
    if args.gamma_branch is None:
        raise UsageError(f"d={args.d} scans need --gamma-branch")
    if not 0 <= args.gamma_branch < sp.n_branches(args.d):
        raise UsageError(f"--gamma-branch must lie in 0..{sp.n_branches(args.d) - 1}")
    if not sc.MIN_RESOLUTION <= res <= sc.MAX_RESOLUTION:
        raise UsageError(f"resolution must lie in [{sc.MIN_RESOLUTION}, {sc.MAX_RESOLUTION}]")
    angles, mu, cls = sc.scan_samples(args.d, res, args.gamma_branch, args.seed, args.boundary_eps, args.jobs)
    buf = io.StringIO()
    sc.write_csv(buf, angles, args.gamma_branch, mu, cls)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _lines_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".lines.pgm"


def unitary_document(s: sp.Spectrum, U_A, U_B) -> dict:
    return {
        "spectrum": {"d": s.d, "angles": list(s.angles), "gamma_branch": s.gamma_branch},
        "U_A": mjson(U_A),
        "U_B": mjson(U_B),
        "residuals": unitary_residuals(U_A, U_B, s.lambdas),
    }


def unitary_residuals(U_A, U_B, lambdas) -> dict:
    d = U_A.shape[0]
    eye = np.eye(d)
    return {
        "unitarity_A": float(np.linalg.norm(U_A.conj().T @ U_A - eye)),
        "unitarity_B": float(np.linalg.norm(U_B.conj().T @ U_B - eye)),
        "braid": rb.braid_residual(U_A, U_B),
        "spectrum_A": rb.spectrum_residual(U_A, lambdas),
        "spectrum_B": rb.spectrum_residual(U_B, lambdas),
    }


def verify_unitary_document(doc: dict) -> dict:
    """Recompute residuals of a unitarize output; raises if any exceeds 1e-8."""
    spec = doc["spectrum"]
    lam = np.exp(2j * np.pi * np.asarray(spec["angles"], dtype=float))
    res = unitary_residuals(mfromjson(doc["U_A"]), mfromjson(doc["U_B"]), lam)
    bad = {k: v for k, v in res.items() if not v <= ROUND_TRIP_TOL}
    if bad:
        raise InconsistencyError(f"unitarized matrices fail re-verification: {bad}")
    return res


def cmd_unitarize(args) -> int:
    s = _spectrum(args)
    if s.d >= 4 and args.delta_root is not None and sp.is_simple(s):
        s, r = _build(s, args)
    else:
        r = None
    verdict = sp.unitarizable(s)
    if verdict is not sp.Verdict.UNITARIZABLE:
        row = "" if verdict is sp.Verdict.NOT_SIMPLE else ", ".join("%.12g" % m for m in sp.mu_row(s).values)
        sys.stderr.write(f"verdict {verdict.value}; mu_1i = ({row}); refusing to unitarize\n")
        return EXIT_NEGATIVE
    if r is None:
        s, r = _build(s, args)
    g = at.gram_form(r, s)
    try:
        U_A, U_B = at.unitarize(r, g)
    except NotPositiveDefiniteError as exc:
        raise InconsistencyError(f"closed form says unitarizable but {exc}") from None
    doc = unitary_document(s, U_A, U_B)
    text = json.dumps(doc, indent=2) + "\n"
    verify_unitary_document(json.loads(text))
    _emit(text, args.out)
    return EXIT_OK


def _prop(name: str, passed: bool, residual=None, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "residual": residual, "detail": detail}


def verify_properties(s: sp.Spectrum, args) -> tuple[list[dict], Optional[dict]]:
    props = []
    simple = sp.is_simple(s)
    props.append(_prop("is_simple", simple, min(abs(q) for q in sp.q_values(s).values())))
    if not simple:
        props.append(_prop("downstream", False, None, "skipped: spectrum is not simple"))
        return props, None
    try:
        s, r = _build(s, args)
    except (ReconstructionFailed, InconsistencyError) as exc:
        props.append(_prop("reconstruction", False, None, str(exc)))
        return props, None
    rep = rb.verify_rep(r, s)
    props.append(_prop("braid relation", rep.braid_residual <= rb.BRAID_TOL, rep.braid_residual))
    props.append(_prop("spectra", rep.spectrum_residual <= rb.SPECTRUM_TOL, rep.spectrum_residual))
    props.append(_prop("(AB)^3 scalar", rep.central_residual <= rb.CENTRAL_TOL, rep.central_residual))
    props.append(_prop("basis S rank d^2", rep.simple, rep.basis_singular_ratio, f"rank {rep.basis_rank}"))
    checks = at.projector_set(r, s).check()
    for k, v in checks.items():
        if k.endswith("rank_one"):
            props.append(_prop(f"e_{k[0]},i rank one", v == 1.0, v))
        else:
            props.append(_prop(f"e_{k}", v <= 1e-8, v))
    table = at.mu_numeric_table(r, s)
    rs = float(np.max(np.abs(table.sum(axis=1) - 1.0)))
    props.append(_prop("mu row sums = 1", rs <= 1e-7, rs))
    closed = np.array(sp.mu_row(s).values)
    diff = float(np.max(np.abs(table[0, 1:] - closed) / np.maximum(1.0, np.abs(closed))))
    props.append(_prop("mu numeric = closed (row 1)", diff <= 1e-7, diff))
    for name, v in at.involution_residuals(r, s, np.random.default_rng(args.seed)).items():
        props.append(_prop(name, v <= 1e-7, v))
    g = at.gram_form(r, s)
    gd = float(max(abs(a - b) for a, b in zip(g.gram_diagonal, [1.0, *closed])) / max(1.0, np.max(np.abs(closed))))
    props.append(_prop("Gram diagonal = (1, mu_12, ...)", gd <= 1e-7, gd))
    H = at.invariant_form_oracle(r)
    Hg = g.H / g.H.flat[np.argmax(np.abs(g.H))]
    Ho = H / H.flat[np.argmax(np.abs(g.H))]
    od = float(np.linalg.norm(Hg - Ho) / np.linalg.norm(Hg))
    props.append(_prop("oracle form proportional to Gram form", od <= 1e-7, od))
    verdict = sp.unitarizable(s)
    if verdict in (sp.Verdict.UNITARIZABLE, sp.Verdict.NOT_UNITARIZABLE):
        agree = at.oracle_is_definite(H) == (verdict is sp.Verdict.UNITARIZABLE)
        props.append(_prop("sign test = oracle definiteness", agree, None, f"signature {g.signature}"))
    if g.definite:
        U_A, U_B = at.unitarize(r, g)
        res = unitary_residuals(U_A, U_B, s.lambdas)
        worst = max(res.values())
        props.append(_prop("unitarization", worst <= 1e-8, worst))
    table_doc = None
    if s.d >= 4:
        table_doc = branch_table(s, args.seed)
    return props, table_doc


def branch_table(s: sp.Spectrum, seed: int) -> dict:
    """For each delta root: the matched gamma branch, or why there is none."""
    rows = {}
    for k, delta in enumerate(rb.delta_roots(s)):
        try:
            r = rb.build_newton(s, delta, seed=seed)
            rows[str(k)] = {"delta": cjson(delta), "branch": rb.match_branch(s.angles, r)}
        except B3RepError as exc:
            rows[str(k)] = {"delta": cjson(delta), "branch": None, "detail": type(exc).__name__}
    return rows


def cmd_verify(args) -> int:
    s = _spectrum(args)
    props, table = verify_properties(s, args)
    doc = spectrum_report(s)
    doc["properties"] = props
    if table is not None:
        doc["branch_table"] = table
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = []
        for p in props:
            res = "" if p["residual"] is None else f"  ({p['residual']:.3e})"
            extra = f"  {p['detail']}" if p["detail"] else ""
            lines.append(f"{'PASS' if p['passed'] else 'FAIL'}  {p['name']}{res}{extra}")
        if table is not None:
            for k, row in table.items():
                lines.append(f"delta root {k}: branch {row['branch']}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    if not props[0]["passed"]:
        return EXIT_NEGATIVE
    return EXIT_OK if all(p["passed"] for p in props) else EXIT_INTERNAL


# -- argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, required=True, choices=(2, 3, 4, 5), help="dimension")
    common.add_argument("--angles", help="comma-separated angles in turns, t1,...,td")
    common.add_argument("--gamma-branch", type=int, default=None, help="gamma root branch (d = 4, 5)")
    common.add_argument("--delta-root", type=int, default=None,
                        help="central scalar exp(2 pi i (6 sum t + k) / d); identifies the branch")
    common.add_argument("--seed", type=int, default=0, help="seed for restarts and sampling")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out", default=None, help="output path (stdout if omitted)")
    common.add_argument("--boundary-eps", type=float, default=sp.BOUNDARY_EPS,
                        help="half-width of the boundary band for |mu|")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="b3rep", description="Unitarizability of simple B3 representations, d <= 5.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="closed-form verdict for one spectrum")
    c.add_argument("--deep", action="store_true", help="also reconstruct and build the invariant form")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("scan", parents=[common], help="classify a grid (d = 2, 3) or random samples (d = 4, 5)")
    s.add_argument("--resolution", type=int, default=256)
    s.add_argument("--format", choices=("pgm", "csv", "json"), default="csv")
    s.set_defaults(func=cmd_scan)

    u = sub.add_parser("unitarize", parents=[common], help="write unitary U_A, U_B as JSON")
    u.set_defaults(func=cmd_unitarize)

    v = sub.add_parser("verify", parents=[common], help="run every property check on one spectrum")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        sys.stderr.write("b3rep: --jobs must be at least 1\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, InputError) as exc:
        sys.stderr.write(f"b3rep: {exc}\n")
        return EXIT_USAGE
    except InconsistencyError as exc:
        sys.stderr.write(f"b3rep: internal inconsistency: {exc}\n")
        return EXIT_INTERNAL
    except B3RepError as exc:
        sys.stderr.write(f"b3rep: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    except BrokenPipeError:
        # reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
