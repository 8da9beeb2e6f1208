"""Command-line entry point.

Exit codes: 0 found/verified, 1 proven absent or failed (with certificate),
2 usage or resource error.  Results go to stdout as JSON, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

from . import algebra, kwitness, solver
from .core.identity import KINDS, IdentitySpec
from .core.operation import Operation
from .core.structure import StructureError, load_structure
from .core.verify import DEFAULT_SAMPLES, Policy, is_polymorphism, satisfies_identity

EXIT_OK, EXIT_ABSENT, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _emit(obj, output: str | None = None):
    text = _dump(obj)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _log(msg: str):
    print(msg, file=sys.stderr)


def bundled_k_text() -> str:
    return resources.files("polysym").joinpath("data/k.json").read_text()


def _read_structure(path: str):
    text = bundled_k_text() if path in ("K", "k") else open(path).read()
    try:
        return load_structure(text)
    except StructureError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _policy(args) -> Policy:
    return Policy(getattr(args, "mode", "auto"), samples=args.samples, seed=args.seed)


# commands ------------------------------------------------------------------

def cmd_poly_find(args) -> int:
    S = _read_structure(args.structure)
    spec = IdentitySpec(args.identity, args.arity)
    start = time.perf_counter()
    ind = solver.build_indicator(S, args.arity, spec)
    outcome = solver.solve(ind)
    _log(f"{len(ind)} classes, {outcome.nodes} search nodes, {time.perf_counter() - start:.2f}s")
    head = {"identity": args.identity, "arity": args.arity}
    if isinstance(outcome, solver.Witness):
        op = solver.decode_witness(ind, outcome.assignment)
        _emit({"result": "witness", **head, "operation": op.to_dict()}, args.output)
        return EXIT_OK
    _emit({"result": "unsat", **head, "certificate": outcome.certificate()}, args.output)
    return EXIT_ABSENT


def cmd_poly_verify(args) -> int:
    S = _read_structure(args.structure)
    with open(args.operation) as fh:
        op = Operation.from_json(fh.read())
    policy = _policy(args)
    poly = is_polymorphism(op, S, policy)
    out = {"polymorphism": poly.to_dict(), "identity": None}
    ok = poly.passed
    if args.identity:
        ident = satisfies_identity(op, IdentitySpec(args.identity, op.arity), policy)
        out["identity"] = ident.to_dict()
        ok = ok and ident.passed
    _emit(out, args.output)
    return EXIT_OK if ok else EXIT_ABSENT


def cmd_k_verify(args) -> int:
    if not 2 <= args.min_arity <= args.max_arity <= kwitness.MAX_ARITY:
        raise UsageError(f"arities must satisfy 2 <= min <= max <= {kwitness.MAX_ARITY}")
    W = kwitness.default_witness()
    policy = Policy("auto", samples=args.samples, seed=args.seed)
    arities = range(args.min_arity, args.max_arity + 1)

    def run(n):
        start = time.perf_counter()
        rep = W.verify_kop(n, policy)
        _log(f"c'{n}: {rep.mode}, {rep.checks_run} checks, {rep.violation_count} violations, "
             f"{time.perf_counter() - start:.1f}s")
        return n, rep

    for n in arities:
        W.kop(n)
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(run, arities))
    tables = kwitness.check_block_tables(W.tables, W.K)
    reports = [{"arity": n, "construction": kwitness.construction(n), **rep.to_dict()} for n, rep in results]
    ok = tables.passed and all(rep.passed for _, rep in results)
    _emit({"verdict": "pass" if ok else "fail", "block_tables": tables.to_dict(),
           "provenance": W.tables.provenance_dict(), "reports": reports}, args.output)
    return EXIT_OK if ok else EXIT_ABSENT


def cmd_k_export(args) -> int:
    if not 2 <= args.arity <= 5:
        raise UsageError("k-export writes tables for arities 2..5 only")
    W = kwitness.default_witness()
    _emit(W.kop(args.arity).to_dict(), args.output)
    if args.provenance:
        with open(args.provenance, "w") as fh:
            fh.write(_dump({"construction": kwitness.construction(args.arity),
                            **W.tables.provenance_dict()}) + "\n")
    return EXIT_OK


def _read_algebra(path: str):
    try:
        with open(path) as fh:
            return algebra.load_algebra(fh.read())
    except algebra.AlgebraError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_alg_auts(args) -> int:
    A = _read_algebra(args.algebra)
    auts = algebra.automorphisms(A, args.cap_universe)
    fpf = [p for p in auts if not p.fixed_points()]
    pairs = algebra.aut_pairs_without_common_fixed_point(A, args.cap_universe)
    _emit({"automorphisms": [p.to_list() for p in auts],
           "fixed_point_free": [p.to_list() for p in fpf],
           "pairs_without_common_fixed_point": [pr.to_dict() for pr in pairs]}, args.output)
    return EXIT_OK


def cmd_alg_term(args) -> int:
    A = _read_algebra(args.algebra)
    find = algebra.exists_symmetric_term if args.identity == "symmetric" else algebra.exists_cyclic_term
    res = find(A, args.arity, args.cap_closure)
    head = {"identity": args.identity, "arity": args.arity, "closure_size": len(res.closure)}
    if isinstance(res, algebra.TermWitness):
        _emit({"result": "witness", **head, "operation": res.operation.to_dict()}, args.output)
        return EXIT_OK
    out = {"result": "no", **head, "closure": [list(v) for v in res.closure]}
    if res.pair is not None:
        out["pair"] = res.pair.to_dict()
    else:
        out["automorphism"] = res.automorphism.to_list()
        out["fixed_point_free"] = not res.automorphism.fixed_points()
    _emit(out, args.output)
    return EXIT_ABSENT


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the JSON result here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker threads (runtime only)")
    common.add_argument("--seed", type=int, default=42, help="seed for sampled verification")
    common.add_argument("--cap-closure", type=int, default=algebra.DEFAULT_CAP_CLOSURE,
                        help="maximum subpower closure size")
    common.add_argument("--cap-universe", type=int, default=algebra.DEFAULT_CAP_UNIVERSE,
                        help="largest universe for automorphism enumeration")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)

    p = argparse.ArgumentParser(prog="polysym", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("poly-find", parents=[common], help="search for a polymorphism satisfying an identity")
    f.add_argument("structure", help="structure JSON file, or K for the bundled structure")
    f.add_argument("--arity", type=int, required=True)
    f.add_argument("--identity", choices=KINDS, required=True)
    f.set_defaults(func=cmd_poly_find)

    v = sub.add_parser("poly-verify", parents=[common, sampling], help="check an operation table")
    v.add_argument("structure")
    v.add_argument("operation", help="operation JSON file")
    v.add_argument("--identity", choices=KINDS)
    v.add_argument("--mode", choices=("auto", "exhaustive", "sampled"), default="auto")
    v.set_defaults(func=cmd_poly_verify)

    k = sub.add_parser("k-verify", parents=[common, sampling], help="verify c'_n on K for a range of arities")
    k.add_argument("--max-arity", type=int, default=kwitness.MAX_ARITY)
    k.add_argument("--min-arity", type=int, default=2)
    k.set_defaults(func=cmd_k_verify)

    e = sub.add_parser("k-export", parents=[common], help="write the table of c'_n (n <= 5)")
    e.add_argument("--arity", type=int, required=True)
    e.add_argument("--provenance", help="also write block-table provenance here")
    e.set_defaults(func=cmd_k_export)

    a = sub.add_parser("alg-auts", parents=[common], help="automorphisms of a finite algebra")
    a.add_argument("algebra")
    a.set_defaults(func=cmd_alg_auts)

    t = sub.add_parser("alg-term", parents=[common], help="decide whether a symmetric/cyclic term exists")
    t.add_argument("algebra")
    t.add_argument("--arity", type=int, required=True)
    t.add_argument("--identity", choices=("symmetric", "cyclic"), required=True)
    t.set_defaults(func=cmd_alg_term)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_ERROR
    except algebra.CapExceeded as exc:
        _log(f"resource cap exceeded: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
