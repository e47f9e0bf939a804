"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 data or precision problem,
3 bad usage. JSON goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import spaces
from .arith import prime_divisors
from .atkinlehner import verify_theorem1
from .errors import Gamma0Error
from .exactlin import DEFAULT_SEED
from .hecke import hecke_matrix, hecke_space, newform_inventory, verify_theorem2
from .qseries import sturm_bound
from .tensorlemmas import fuzz

GRID_WEIGHTS = (2, 4, 6, 8, 12)
GRID_LEVELS = tuple(range(1, 41))
T1_EXTRA = ((2, 44),)
T2_GRID = ((2, 22), (2, 33), (2, 44), (2, 55), (12, 1))

EXIT_OK, EXIT_FAIL, EXIT_DATA, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _primes_arg(text: str) -> list[int]:
    try:
        out = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty prime list")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--data-dir", default=None, help=f"basis-file directory (env {spaces.DATA_ENV})")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)

    ap = _Parser(prog="gamma0", description="Exact modular-form spaces for Gamma0(N) and Atkin-Lehner checks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def level_args(p, name="N", required=True):
        p.add_argument("--k", type=int, required=required)
        p.add_argument(f"--{name}", dest="N", type=int, required=required)

    p = sub.add_parser("dims", parents=[common], help="dimensions and Gamma0(N) invariants")
    level_args(p)
    p = sub.add_parser("cusps", parents=[common], help="cusp representatives and widths")
    p.add_argument("--N", dest="N", type=int, required=True)
    p = sub.add_parser("basis", parents=[common], help="echelon q-expansion basis")
    level_args(p)
    p.add_argument("--prec", type=int)
    p.add_argument("--space", choices=("S", "M"), default="S")
    p = sub.add_parser("hecke", parents=[common], help="Hecke matrices T_m, gcd(m, N) = 1")
    level_args(p)
    p.add_argument("--primes", type=_primes_arg, required=True, help="comma-separated indices m")
    p.add_argument("--prec", type=int)
    p = sub.add_parser("newforms", parents=[common], help="orbit inventory with minimal levels")
    level_args(p)
    p.add_argument("--primes", type=_primes_arg)
    checks = (
        ("verify-t1", "N", "coprime-vanishing forms equal the old sum"),
        ("verify-t2", "M", "isotypic blocks equal sums of degeneracy images"),
    )
    for name, label, summary in checks:
        p = sub.add_parser(name, parents=[common], help=summary)
        level_args(p, label, required=False)
        p.add_argument("--grid", action="store_true", help="run the whole acceptance grid")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for --grid")
        if name == "verify-t1":
            p.add_argument("--space", choices=("S", "M"), default="S")
            p.add_argument("--no-bases", action="store_true", help="omit echelon bases from the report")
        else:
            p.add_argument("--primes", type=_primes_arg)
    p = sub.add_parser("lemmas-fuzz", parents=[common], help="random checks of the two tensor lemmas")
    p.add_argument("--iters", type=int, default=500)
    p.set_defaults(seed=42)
    p = sub.add_parser("ingest", parents=[common], help="validate and load a basis file")
    p.add_argument("path")
    p.add_argument("--show", action="store_true", help="include the canonical basis")
    p = sub.add_parser("export", parents=[common], help="write a basis file")
    level_args(p)
    p.add_argument("path")
    p.add_argument("--prec", type=int)
    p.add_argument("--space", choices=("S", "M"), default="S")
    return ap


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit code)


def _rows(m) -> list[list[str]]:
    return [[str(x) for x in row] for row in m.flint.table()]


def cmd_dims(a):
    inv = spaces.gamma0_invariants(a.N)
    dm, ds, de = spaces.dim_spaces(a.k, a.N)
    return {
        "k": a.k,
        "N": a.N,
        "dim_M": dm,
        "dim_S": ds,
        "dim_Eis": de,
        "index": inv.index,
        "nu2": inv.nu2,
        "nu3": inv.nu3,
        "nu_inf": inv.nu_inf,
        "genus": inv.genus,
        "sturm": sturm_bound(a.k, a.N),
    }, EXIT_OK


def cmd_cusps(a):
    cs = spaces.enumerate_cusps(a.N)
    return {
        "N": a.N,
        "count": len(cs),
        "width_sum": sum(c.width for c in cs),
        "cusps": [{"a": c.numerator, "c": c.denominator, "width": c.width} for c in cs],
    }, EXIT_OK


def cmd_basis(a):
    S = spaces.get_space(a.k, a.N, a.prec, a.space == "S", a.data_dir)
    return {
        "k": S.weight,
        "N": S.level,
        "prec": S.prec,
        "cuspidal": S.cuspidal,
        "source": S.source,
        "dim": S.dim,
        "basis": _rows(S.basis),
    }, EXIT_OK


def cmd_hecke(a):
    bad = [m for m in a.primes if m < 1 or any(a.N % p == 0 for p in prime_divisors(m))]
    if bad:
        raise UsageError(f"indices {bad} are not coprime to N={a.N}")
    top = max(p for m in a.primes for p in prime_divisors(m)) if any(m > 1 for m in a.primes) else 1
    S = hecke_space(a.k, a.N, [top], a.data_dir, extra_prec=a.prec or 0)
    mats = {m: hecke_matrix(S, m).matrix for m in a.primes}
    keys = list(mats)
    commute = all(mats[x] @ mats[y] == mats[y] @ mats[x] for i, x in enumerate(keys) for y in keys[i + 1 :])
    return {
        "k": a.k,
        "N": a.N,
        "prec": S.prec,
        "source": S.source,
        "dim": S.dim,
        "operators": {str(m): _rows(mats[m]) for m in keys},
        "commute": commute,
    }, EXIT_OK


def cmd_newforms(a):
    return newform_inventory(a.k, a.N, a.primes, a.seed, a.data_dir), EXIT_OK


def _t1_one(args):
    k, N, cuspidal, data_dir, bases = args
    try:
        return verify_theorem1(k, N, cuspidal, data_dir).to_dict(bases=bases)
    except Gamma0Error as exc:
        return {"k": k, "N": N, "cuspidal": cuspidal, "error": exc.to_dict()}


def _t2_one(args):
    k, M, primes, seed, data_dir = args
    try:
        return verify_theorem2(k, M, primes, seed, data_dir)
    except Gamma0Error as exc:
        return {"k": k, "M": M, "error": exc.to_dict(), "passed": False}


def _fan_out(fn, jobs, work):
    if jobs <= 1:
        return [fn(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, work))


def cmd_verify_t1(a):
    cuspidal = a.space == "S"
    if a.grid:
        work = [(k, N, cuspidal, a.data_dir, False) for k in GRID_WEIGHTS for N in GRID_LEVELS]
        work += [(k, N, cuspidal, a.data_dir, False) for k, N in T1_EXTRA]
        results = _fan_out(_t1_one, a.jobs, work)
        checked = [r for r in results if "error" not in r]
        skipped = [{"k": r["k"], "N": r["N"], "reason": r["error"]["code"]} for r in results if "error" in r]
        failed = [r for r in checked if not (r["equal"] and r["oldsum_in_K0"])]
        payload = {
            "grid": {
                "weights": list(GRID_WEIGHTS),
                "levels": [GRID_LEVELS[0], GRID_LEVELS[-1]],
                "extra": [list(x) for x in T1_EXTRA],
                "cuspidal": cuspidal,
            },
            "checked": len(checked),
            "from_basis_files": sum(1 for r in checked if r["source"] == "ingested"),
            "nontrivial": sum(1 for r in checked if r["dim_K0"] > 0),
            "failed": [{"k": r["k"], "N": r["N"]} for r in failed],
            "skipped": skipped,
            "results": checked,
            "passed": not failed,
        }
        return payload, EXIT_OK if not failed else EXIT_FAIL
    _need(a, "k", "N")
    rep = verify_theorem1(a.k, a.N, cuspidal, a.data_dir)
    out = rep.to_dict(bases=not a.no_bases)
    out["passed"] = rep.passed
    return out, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify_t2(a):
    if a.grid:
        work = [(k, M, a.primes, a.seed, a.data_dir) for k, M in T2_GRID]
        results = _fan_out(_t2_one, a.jobs, work)
        ok = all(r.get("passed") for r in results)
        return {"grid": [list(x) for x in T2_GRID], "results": results, "passed": ok}, EXIT_OK if ok else EXIT_FAIL
    _need(a, "k", "N")
    rep = verify_theorem2(a.k, a.N, a.primes, a.seed, a.data_dir)
    return rep, EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_lemmas(a):
    if a.iters < 1:
        raise UsageError("--iters must be positive")
    rep = fuzz(a.iters, a.seed)
    return rep, EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_ingest(a):
    S = spaces.ingest_basis(a.path)
    out = {"k": S.weight, "N": S.level, "prec": S.prec, "cuspidal": S.cuspidal, "dim": S.dim, "source": S.source}
    if a.show:
        out["basis"] = _rows(S.basis)
    return out, EXIT_OK


def cmd_export(a):
    S = spaces.get_space(a.k, a.N, a.prec, a.space == "S", a.data_dir)
    path = spaces.export_basis(S, a.path)
    return {"path": str(path), "k": S.weight, "N": S.level, "prec": S.prec, "cuspidal": S.cuspidal, "dim": S.dim}, EXIT_OK


COMMANDS = {
    "dims": cmd_dims,
    "cusps": cmd_cusps,
    "basis": cmd_basis,
    "hecke": cmd_hecke,
    "newforms": cmd_newforms,
    "verify-t1": cmd_verify_t1,
    "verify-t2": cmd_verify_t2,
    "lemmas-fuzz": cmd_lemmas,
    "ingest": cmd_ingest,
    "export": cmd_export,
}


def _need(a, *names):
    missing = [n for n in names if getattr(a, n, None) is None]
    if missing:
        raise UsageError(f"missing --{', --'.join(missing)} (or use --grid)")


# ---------------------------------------------------------------------------
# rendering


def _render_table(payload, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(payload, dict):
        for key, val in payload.items():
            if isinstance(val, (dict, list)) and val and not _flat_list(val):
                lines.append(f"{pad}{key}:")
                lines.extend(_render_table(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(val)}")
    elif isinstance(payload, list):
        for item in payload:
            if isinstance(item, dict):
                lines.append(pad + "  ".join(f"{k}={_scalar(v)}" for k, v in item.items()))
            else:
                lines.append(pad + _scalar(item))
    else:
        lines.append(pad + _scalar(payload))
    return lines


def _flat_list(val) -> bool:
    return isinstance(val, list) and all(not isinstance(x, (dict, list)) for x in val)


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if isinstance(v, dict):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def _emit(payload, fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps(payload, indent=1) + "\n")
    else:
        stream.write("\n".join(_render_table(payload)) + "\n")


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    fmt = "table" if "table" in argv and "--format" in argv else "json"
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        stderr.write(f"gamma0: usage error: {exc}\n")
        if fmt == "json":
            _emit({"error": {"code": "usage", "message": str(exc)}}, fmt, stdout)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    if args.data_dir is None and os.environ.get(spaces.DATA_ENV):
        args.data_dir = os.environ[spaces.DATA_ENV]
    if args.data_dir is not None and not Path(args.data_dir).is_dir():
        stderr.write(f"gamma0: data directory {args.data_dir} does not exist\n")
        _emit({"error": {"code": "missing-data", "message": f"no directory {args.data_dir}"}}, args.format, stdout)
        return EXIT_DATA
    try:
        payload, code = COMMANDS[args.command](args)
    except UsageError as exc:
        stderr.write(f"gamma0: usage error: {exc}\n")
        _emit({"error": {"code": "usage", "message": str(exc)}}, args.format, stdout)
        return EXIT_USAGE
    except Gamma0Error as exc:
        stderr.write(f"gamma0: {exc.code}: {exc}\n")
        _emit({"error": exc.to_dict()}, args.format, stdout)
        return exc.exit_code
    _emit(payload, args.format, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
