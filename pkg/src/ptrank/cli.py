"""Command-line front end.

Every command prints a JSON report (seed, input hashes, results, wall time).
Objects produced by a command go to ``--out`` when given, else into the report.
Exit codes: 0 success, 1 a check failed (invalid certificate, violated bound,
failed criterion), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import jsonio
from .fieldlinalg import rank
from .ptcore import (
    BudgetExceeded, DEFAULT_BUDGET, InvalidCertificate, PTCertificate, example_3_squared,
    example_identity_certificate, fully_symmetric_orbits, partial_transpose, pt_rank_exact,
    pt_rank_search, ptrank_census, verify_pt_certificate,
)
from .soslink import InvalidSoS
from .tensorspace import HyperMatrix, Tensor


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


def _sha(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load(path: str, inputs: dict, kind=None):
    try:
        obj = jsonio.load(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}")
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse {path}: {exc}")
    inputs[path] = _sha(path)
    if kind is not None and not isinstance(obj, kind):
        raise UsageError(f"{path} holds a {type(obj).__name__}, expected {kind.__name__}")
    return obj


def _kappa(text: str) -> tuple:
    if not text:
        return ()
    return tuple(sorted(int(t) for t in text.split(",") if t))


def _emit_object(obj, args, report: dict, key: str = "object"):
    if args.out:
        jsonio.dump(obj, args.out)
        report[f"{key}_path"] = args.out
    else:
        report[key] = jsonio.emit(obj)


# --------------------------------------------------------------------------
# gen


def cmd_gen(args, report, inputs):
    field = args.field_obj
    rng = np.random.default_rng(args.seed)
    fam = args.family
    if fam == "identity":
        obj = HyperMatrix.identity(args.n, args.d, field)
    elif fam == "random":
        obj = HyperMatrix.from_array(args.n, args.d, field.random(rng, (args.n**args.d,) * 2), field)
    elif fam == "random-fully-symmetric":
        orbit = fully_symmetric_orbits(args.n, args.d)
        vals = field.random(rng, (int(orbit.max()) + 1,))
        obj = HyperMatrix.from_array(args.n, args.d, vals[orbit].reshape((args.n**args.d,) * 2), field)
    elif fam == "example-3-squared":
        obj = example_3_squared(field)
    elif fam == "example-identity-decomposition":
        obj = example_identity_certificate(field)
    elif fam == "wt":
        from .candidates import build_wt, cauchy_T, check_parameters, cyclic_T, triangular_T
        check_parameters(args.n, args.d, args.relax)
        T = {"cauchy": lambda: cauchy_T(args.d, args.n), "cyclic": lambda: cyclic_T(args.d),
             "triangular": lambda: triangular_T(args.d),
             "identity": lambda: np.eye(args.d, dtype=np.int64)}[args.T]()
        obj = build_wt(T, args.n, field)
        report["T"] = T.tolist()
    else:
        raise UsageError(f"unknown family {fam!r}")
    report["family"] = fam
    _emit_object(obj, args, report)


# --------------------------------------------------------------------------
# pt


def _save_cert(cert, args, report):
    if args.cert_out:
        jsonio.dump(cert, args.cert_out)
        report["certificate_path"] = args.cert_out
    else:
        report["certificate"] = jsonio.emit(cert)


def cmd_pt(args, report, inputs):
    op = args.op
    if op == "census":
        report["result"] = ptrank_census(args.n, args.d, args.field_obj, mode=args.mode,
                                         count=args.count, seed=args.seed, symmetry=args.symmetry)
        return
    if not args.input:
        raise UsageError(f"pt {op} needs an input file")
    obj = _load(args.input, inputs)
    if op == "verify":
        if not isinstance(obj, PTCertificate):
            raise UsageError("pt verify needs a certificate")
        try:
            report["value"] = verify_pt_certificate(obj)
            report["valid"] = True
        except InvalidCertificate as exc:
            report["valid"] = False
            report["reason"] = str(exc)
            raise CheckFailed(str(exc))
        return
    M = obj.target if isinstance(obj, PTCertificate) else obj
    if not isinstance(M, HyperMatrix):
        raise UsageError("input must be a hypermatrix or certificate")
    if op == "transpose":
        P = partial_transpose(M, _kappa(args.kappa))
        report["kappa"] = list(_kappa(args.kappa))
        report["rank"] = rank(P.body)
        _emit_object(P, args, report)
    elif op == "exact":
        value, cert = pt_rank_exact(M, budget=args.budget, threads=args.threads, method=args.method)
        report["value"] = value
        _save_cert(cert, args, report)
    elif op == "search":
        cert = pt_rank_search(M, strategy=args.strategy, seed=args.seed)
        report["upper_bound"] = cert.value
        _save_cert(cert, args, report)
    elif op == "rank":
        report["matrix_rank"] = rank(M.body)
        ub = pt_rank_search(M, strategy="greedy-peel", seed=args.seed)
        report["upper_bound"] = ub.value
        try:
            value, cert = pt_rank_exact(M, budget=args.budget, threads=args.threads)
            report["value"] = value
            _save_cert(cert, args, report)
        except (BudgetExceeded, ValueError) as exc:
            report["value"] = None
            report["note"] = str(exc)
            _save_cert(ub, args, report)


# --------------------------------------------------------------------------
# sos


def cmd_sos(args, report, inputs):
    from .soslink import SoSCertificate, compose_sos, pt_to_sos, sos_to_pt, verify_sos

    field = args.field_obj
    if args.op == "compose":
        cert = compose_sos(args.n, args.d, field)
        report["terms"] = len(cert.terms)
        _emit_object(cert, args, report)
        return
    if not args.input:
        raise UsageError(f"sos {args.op} needs an input file")
    obj = _load(args.input, inputs)
    if args.op == "from-pt":
        if not isinstance(obj, PTCertificate):
            raise UsageError("sos from-pt needs a PT certificate")
        cert = pt_to_sos(obj)
        report["terms"] = len(cert.terms)
        report["source_value"] = obj.value
        _emit_object(cert, args, report)
        return
    if not isinstance(obj, SoSCertificate):
        raise UsageError(f"sos {args.op} needs an SoS certificate")
    target = _load(args.target, inputs, HyperMatrix) if args.target else \
        HyperMatrix.identity(obj.n, obj.d, obj.field)
    if args.op == "verify":
        ok = verify_sos(target, obj, path=args.path)
        report["accepted"] = ok
        if not ok:
            raise CheckFailed("SoS certificate rejected")
    elif args.op == "to-pt":
        cert = sos_to_pt(target, obj)
        report["value"] = cert.value
        _emit_object(cert, args, report)


# --------------------------------------------------------------------------
# rho


def cmd_rho(args, report, inputs):
    from .pathmeasures import PathGraph, lemma_suite, rho_exact, rho_pt_identity_check

    if args.op == "lemma-suite":
        reports = lemma_suite(seed=args.seed, trials=args.trials)
        report["lemmas"] = reports
        bad = [r["lemma"] for r in reports if r["failures"] and r["lemma"] != "deficit2-literal"]
        report["all_pass"] = not bad
        if bad:
            raise CheckFailed(f"lemma failures: {bad}")
        return
    if not args.input:
        raise UsageError(f"rho {args.op} needs an input file")
    if args.op == "exact":
        A = _load(args.input, inputs, Tensor)
        edges = sorted({max(u, v) for u, v in A.labels})
        res = rho_exact(A, PathGraph(edges), budget=args.budget)
        report.update({"rho": str(res.value), "per_gamma": {str(k): v for k, v in res.per_gamma.items()},
                       "enumerated": res.enumerated})
    elif args.op == "check-identity":
        M = _load(args.input, inputs, HyperMatrix)
        res = rho_pt_identity_check(M, restricted=not args.unrestricted, budget=args.budget)
        report.update(res)
        if not res["equal"]:
            raise CheckFailed("identity check failed")


# --------------------------------------------------------------------------
# abp


def cmd_abp(args, report, inputs):
    from .abpformula import OrderedABP, abp_eval, abp_for_imm, abp_to_pt_cert

    if args.imm:
        n, d = args.imm
        abp = abp_for_imm(n, d, args.field_obj, corner=args.corner)
    elif args.input:
        abp = _load(args.input, inputs, OrderedABP)
    else:
        raise UsageError("give an ABP file or --imm N D")
    report["widths"] = abp.widths
    if args.op == "eval":
        _emit_object(abp_eval(abp), args, report)
    elif args.op == "to-pt":
        cert = abp_to_pt_cert(abp, provider=args.provider)
        report["value"] = cert.value
        report["chain"] = cert.metadata["chain"]
        _emit_object(cert, args, report)


# --------------------------------------------------------------------------
# candidates


def cmd_candidates(args, report, inputs):
    from .candidates import (
        cauchy_T, check_parameters, cyclic_T, dual_context_report, triangular_T,
        triangular_flattening_check, contexts,
    )

    if args.op == "triangular":
        check_parameters(args.n, args.d, args.relax)
        report["contexts"] = [triangular_flattening_check(args.n, args.d, ctx)
                              for ctx in contexts(args.n)[1:]]
        if not all(r["ok"] and r["abp_matches"] for r in report["contexts"]):
            raise CheckFailed("triangular flattening bound violated")
        return
    check_parameters(args.n, args.d, args.relax)
    T = {"cauchy": lambda: cauchy_T(args.d, args.n), "cyclic": lambda: cyclic_T(args.d),
         "triangular": lambda: triangular_T(args.d),
         "identity": lambda: np.eye(args.d, dtype=np.int64)}[args.T]()
    res = dual_context_report(T, args.n)
    for c in res["contexts"]:
        c["kappa_ranks"] = {",".join(map(str, k)): v for k, v in c["kappa_ranks"].items()}
        c["lambda_ranks"] = {",".join(map(str, k)): v for k, v in c["lambda_ranks"].items()}
    report["result"] = res
    if not res["agree"]:
        raise CheckFailed("contexts disagree")


# --------------------------------------------------------------------------
# verify-paper


def cmd_verify_paper(args, report, inputs):
    from .acceptance import CRITERIA, GROUPS, fault_table, format_line, run_suite

    only = set()
    for tok in (args.only or []):
        for t in tok.split(","):
            if t.isdigit():
                only.add(int(t))
            elif t in GROUPS:
                only.update(GROUPS[t])
            else:
                raise UsageError(f"unknown criterion or group {t!r}")
    opts = {"seed": args.seed, "exhaustive": args.exhaustive, "threads": args.threads}
    if args.inject_fault == "base-identity":
        opts["base_table"] = fault_table()
    elif args.inject_fault:
        raise UsageError(f"unknown fault {args.inject_fault!r}")
    results = run_suite(sorted(only) if only else sorted(CRITERIA), opts)
    for r in results:
        print(format_line(r), file=sys.stderr)
    report["criteria"] = [r.as_dict() for r in results]
    report["all_pass"] = all(r.passed and r.within_time for r in results)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=1, sort_keys=True)
    if not report["all_pass"]:
        raise CheckFailed("some criteria failed")


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="gf2", help="gf2, gf3, gfp:P, complex[:EPS], rational, cycmod:N[:I]")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--out", default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--relax", action="store_true", help="skip the default candidate parameter policy")

    p = argparse.ArgumentParser(prog="ptrank", description="PT-rank workbench")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a matrix or certificate")
    g.add_argument("family", choices=["identity", "random", "random-fully-symmetric", "example-3-squared",
                                      "example-identity-decomposition", "wt"])
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--T", default="cauchy", choices=["cauchy", "cyclic", "triangular", "identity"])

    pt = sub.add_parser("pt", parents=[common], help="partial transposes and PT-rank")
    pt.add_argument("op", choices=["rank", "transpose", "exact", "search", "census", "verify"])
    pt.add_argument("input", nargs="?")
    pt.add_argument("--kappa", default="")
    pt.add_argument("--method", default="exhaustive", choices=["exhaustive", "table"])
    pt.add_argument("--strategy", default="greedy-peel", choices=["single-kappa", "greedy-peel", "restart-local"])
    pt.add_argument("--cert-out", default=None)
    pt.add_argument("--n", type=int, default=2)
    pt.add_argument("--d", type=int, default=2)
    pt.add_argument("--mode", default="exhaustive", choices=["exhaustive", "sample"])
    pt.add_argument("--count", type=int, default=100)
    pt.add_argument("--symmetry", default="all", choices=["all", "fully-symmetric"])

    s = sub.add_parser("sos", parents=[common], help="sum-of-squares certificates")
    s.add_argument("op", choices=["compose", "verify", "to-pt", "from-pt"])
    s.add_argument("input", nargs="?")
    s.add_argument("--target", default=None, help="target hypermatrix (default: identity)")
    s.add_argument("--path", default="auto", choices=["auto", "gram", "coeff"])
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--d", type=int, default=2)

    r = sub.add_parser("rho", parents=[common], help="relative rank measure")
    r.add_argument("op", choices=["exact", "check-identity", "lemma-suite"])
    r.add_argument("input", nargs="?")
    r.add_argument("--trials", type=int, default=200)
    r.add_argument("--unrestricted", action="store_true")

    a = sub.add_parser("abp", parents=[common], help="ordered ABPs")
    a.add_argument("op", choices=["eval", "to-pt"])
    a.add_argument("input", nargs="?")
    a.add_argument("--imm", type=int, nargs=2, metavar=("N", "D"))
    a.add_argument("--corner", action="store_true")
    a.add_argument("--provider", default="builtin", choices=["builtin", "trivial"])

    c = sub.add_parser("candidates", parents=[common], help="W_T candidate checks")
    c.add_argument("op", choices=["scan", "triangular"])
    c.add_argument("--T", default="cauchy", choices=["cauchy", "cyclic", "triangular", "identity"])
    c.add_argument("--n", type=int, default=5)
    c.add_argument("--d", type=int, default=2)

    v = sub.add_parser("verify-paper", parents=[common], help="run the acceptance suite")
    v.add_argument("--only", action="append", help="criterion numbers or groups (pt, sos, candidates, rho, abp, io)")
    v.add_argument("--exhaustive", action="store_true", help="criterion 4 from the exhaustive GF(3) run")
    v.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    return p


COMMANDS = {"gen": cmd_gen, "pt": cmd_pt, "sos": cmd_sos, "rho": cmd_rho, "abp": cmd_abp,
            "candidates": cmd_candidates, "verify-paper": cmd_verify_paper}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    report = {"command": args.command, "seed": args.seed}
    inputs: dict = {}
    start = time.perf_counter()
    code = 0
    try:
        if args.budget <= 0:
            raise UsageError("budget must be positive")
        args.field_obj = jsonio.parse_field_spec(args.field)
        report["field"] = jsonio.field_to_json(args.field_obj)
        COMMANDS[args.command](args, report, inputs)
    except UsageError as exc:
        report["error"] = str(exc)
        code = 2
    except CheckFailed as exc:
        report["failure"] = str(exc)
        code = 1
    except (InvalidCertificate, InvalidSoS) as exc:
        report["failure"] = str(exc)
        code = 1
    except (BudgetExceeded, ValueError) as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        code = 2
    report["inputs"] = inputs
    report["exit_code"] = code
    report["wall_time"] = round(time.perf_counter() - start, 3)
    print(json.dumps(jsonio._jsonable(report), sort_keys=True, indent=1))
    return code


if __name__ == "__main__":
    sys.exit(main())
