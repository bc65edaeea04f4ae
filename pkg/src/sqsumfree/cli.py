"""Command-line entry point: ``sqsumfree <subcommand> [options]``.

Every run prints a report holding the subcommand, the full solver config,
the instance, the result and its certificates. Output is JSON unless ``--csv``.

CSV columns per subcommand:
  sf            n,sf,exact,witness,ratio,nodes,ms
  construct     index,element
  square-in-gap w,x1,x2,path
  congruence    x,z,bound_used,verified
  weyl          a,q,theta,start,N,M,sum,ratio
  bump          x,f  (or lambda,re,im,abs with --lam)
  divisor       n,k,d,tau_n,tau_d,ok
  poisson       T,t,lhs,rhs,diff
  structure     branch,d,q,z,offset,steps,sizes
  report        n,sf,exact,witness,ratio,nodes,ms

Exit codes: 0 success, 1 a certificate failed to verify, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .analytic import (
    BumpSpec,
    WeylInstance,
    bump_build,
    bump_eval,
    bump_fourier,
    divisor_sweep,
    divisor_witness,
    poisson_check,
    weyl_audit_corpus,
    weyl_bound_ratio,
    weyl_sum,
)
from .congruence import CongruenceInstance, NoSolutionInBound, brute_force_congruence, solve_quadratic_congruence
from .core import DEFAULT_CONFIG, BudgetExceeded, IntegerSet, SolverConfig, VerificationError
from .extremal import construct_example1, construct_example2, scaling_report, sf_exact
from .gap_squares import (
    ApSquareInstance,
    Gap2SquareInstance,
    NoResidueRoot,
    find_pz2_in_ap,
    find_pz2_in_gap2,
)
from .structure import dichotomy, verify_outcome

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2


class UsageError(ValueError):
    """Bad or inconsistent arguments."""


@dataclass
class RunReport:
    subcommand: str
    config: dict
    instance: Any
    result: Any
    certificates: dict = field(default_factory=dict)
    timing: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "instance": self.instance,
            "result": self.result,
            "certificates": self.certificates,
            "timing": self.timing,
        }


@dataclass
class Outcome:
    instance: Any
    result: Any
    certificates: dict
    header: list[str]
    rows: list[list]


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


# ---------------------------------------------------------------- handlers

def _sf_rows(rows: list[dict]) -> list[list]:
    return [[r["n"], r["sf"], r["exact"], " ".join(map(str, r["witness"])), r["ratio"], r["nodes"], r["ms"]] for r in rows]


SF_HEADER = ["n", "sf", "exact", "witness", "ratio", "nodes", "ms"]


def run_sf(ns, config: SolverConfig) -> Outcome:
    if ns.n_values:
        ns_list = _ints(ns.n_values)
    elif ns.n is not None:
        ns_list = [ns.n]
    else:
        raise UsageError("sf needs --n or --n-values")
    if any(n < 1 for n in ns_list):
        raise UsageError("n must be positive")
    rows = []
    for n in ns_list:
        if n <= config.sf_max_n:
            row = sf_exact(n, config).to_dict()
        else:
            row = scaling_report([n], config)[0]
            row["lower_construction_size"] = row.pop("lower")
        if not ns.timing:
            row["ms"] = 0.0
        rows.append(row)
    result = rows[0] if len(rows) == 1 else rows
    certs = {"square_sum_free_witness": {"verified": True}}
    return Outcome({"n": ns_list if len(ns_list) > 1 else ns_list[0]}, result, certs, SF_HEADER, _sf_rows(rows))


def run_construct(ns, config: SolverConfig) -> Outcome:
    if ns.n is None or ns.n < 1:
        raise UsageError("construct needs a positive --n")
    if ns.example == 1:
        A = construct_example1(ns.n)
        result = {"elements": list(A.elements), "size": len(A), "p": A.elements[0]}
        certs = {"square_sum_free": {"verified": True}}
    else:
        A, Q = construct_example2(ns.n, ns.q1, ns.q2, ns.N)
        result = {"elements": list(A.elements), "size": len(A), "container": Q.to_dict()}
        certs = {"subset_sums_in_container": {"verified": True}}
    rows = [[i, v] for i, v in enumerate(result["elements"])]
    return Outcome({"n": ns.n, "example": ns.example}, result, certs, ["index", "element"], rows)


def run_square_in_gap(ns, config: SolverConfig) -> Outcome:
    if ns.q1 is not None:
        inst = Gap2SquareInstance(ns.r, ns.q, ns.q1, ns.q2, ns.L1, ns.L2, ns.p)
        res = find_pz2_in_gap2(inst)
        instance = {"r": ns.r, "q": ns.q, "q1": ns.q1, "q2": ns.q2, "L1": ns.L1, "L2": ns.L2, "p": ns.p}
        if res is None:
            result = {"found": False}
            rows = [["", "", "", "none"]]
        else:
            result = {"found": True, "w": res.w, "value": ns.p * res.w * res.w, "x": [res.x1, res.x2], "window": res.window}
            rows = [[res.w, res.x1, res.x2, res.window]]
    else:
        if ns.L is None:
            raise UsageError("square-in-gap needs --L (rank 1) or --q1/--q2/--L1/--L2 (rank 2)")
        inst = ApSquareInstance(ns.r, ns.q, ns.L, ns.p)
        res = find_pz2_in_ap(inst)
        instance = {"r": ns.r, "q": ns.q, "L": ns.L, "p": ns.p}
        if res is None:
            result = {"found": False, "condition": inst.solvability_condition()}
            rows = [["", "", "", "none"]]
        else:
            result = {
                "found": True,
                "w": res.z,
                "value": ns.p * res.z * res.z,
                "x": [res.x],
                "path": res.path,
                "constructive": res.constructive,
                "condition": inst.solvability_condition(),
            }
            rows = [[res.z, res.x, "", res.path]]
    return Outcome(instance, result, {"membership": {"verified": True}}, ["w", "x1", "x2", "path"], rows)


def run_congruence(ns, config: SolverConfig) -> Outcome:
    inst = CongruenceInstance(tuple(_ints(ns.a)), ns.r, ns.p, ns.q)
    D = config.D
    if ns.brute is not None:
        sol = brute_force_congruence(inst, ns.brute)
        if sol is None:
            raise NoSolutionInBound(f"no solution in the box [0, {ns.brute}]")
    else:
        sol = solve_quadratic_congruence(inst, D)
    d = sol.to_dict()
    rows = [[" ".join(map(str, d["x"])), d["z"], d["bound_used"], True]]
    return Outcome(inst.to_dict(D), d, {"congruence": {"verified": True}}, ["x", "z", "bound_used", "verified"], rows)


def run_weyl(ns, config: SolverConfig) -> Outcome:
    header = ["a", "q", "theta", "start", "N", "M", "sum", "ratio"]
    if ns.audit:
        corpus = weyl_audit_corpus(config.seed)
        rows, worst = [], 0.0
        for inst in corpus:
            s = weyl_sum(inst)
            ratio = weyl_bound_ratio(inst, ns.alpha)
            worst = max(worst, ratio)
            rows.append([inst.a, inst.q, inst.theta, inst.start, inst.N, inst.M, s, ratio])
        result = {"instances": len(corpus), "max_ratio": worst, "alpha": ns.alpha}
        return Outcome({"audit_seed": config.seed}, result, {}, header, rows)
    for name in ("a", "q", "N", "M"):
        if getattr(ns, name) is None:
            raise UsageError(f"weyl needs --{name} (or --audit)")
    inst = WeylInstance(ns.a, ns.q, ns.theta, ns.start, ns.N, ns.M)
    s = weyl_sum(inst)
    ratio = None
    try:
        ratio = weyl_bound_ratio(inst, ns.alpha)
    except ValueError:
        pass
    result = {"sum": s, "ratio": ratio, "alpha": ns.alpha}
    rows = [[inst.a, inst.q, inst.theta, inst.start, inst.N, inst.M, s, "" if ratio is None else ratio]]
    return Outcome(inst.to_dict(), result, {}, header, rows)


def run_bump(ns, config: SolverConfig) -> Outcome:
    spec = BumpSpec(ns.M, ns.N, ns.delta)
    f = bump_build(spec)
    instance = spec.to_dict()
    if ns.lam:
        lam = np.array(_floats(ns.lam))
        vals = np.atleast_1d(bump_fourier(f, lam))
        bound = 16 * f.f_hat0 * np.exp(-(ns.delta / 2) * np.sqrt(np.abs(lam * ns.N)))
        ok = bool(np.all(np.abs(vals) <= bound))
        result = {
            "f_hat0": f.f_hat0,
            "values": [{"lambda": float(l), "re": float(v.real), "im": float(v.imag), "abs": float(abs(v))} for l, v in zip(lam, vals)],
            "decay_ok": ok,
        }
        rows = [[float(l), float(v.real), float(v.imag), float(abs(v))] for l, v in zip(lam, vals)]
        return Outcome(instance, result, {"decay": {"verified": ok}}, ["lambda", "re", "im", "abs"], rows)
    xs = _floats(ns.x) if ns.x else [ns.M, ns.M + ns.N / 2, ns.M + ns.N]
    vals = [float(bump_eval(f, x)) for x in xs]
    result = {"f_hat0": f.f_hat0, "values": [{"x": x, "f": v} for x, v in zip(xs, vals)]}
    return Outcome(instance, result, {}, ["x", "f"], [[x, v] for x, v in zip(xs, vals)])


def run_divisor(ns, config: SolverConfig) -> Outcome:
    header = ["n", "k", "d", "tau_n", "tau_d", "ok"]
    if ns.sweep is not None:
        if ns.sweep < 1:
            raise UsageError("--sweep must be positive")
        res = divisor_sweep(ns.sweep)
        rows = [[ns.sweep, k, "", "", "", v == 0] for k, v in res["violations"].items()]
        return Outcome({"sweep": ns.sweep}, res, {"sweep": {"verified": res["ok"]}}, header, rows)
    if ns.n is None or ns.k is None:
        raise UsageError("divisor needs --n and --k (or --sweep)")
    w = divisor_witness(ns.n, ns.k)
    d = w.to_dict()
    return Outcome({"n": ns.n, "k": ns.k}, d, {"witness": {"verified": True}}, header, [[w.n, w.k, w.d, w.tau_n, w.tau_d, True]])


def run_poisson(ns, config: SolverConfig) -> Outcome:
    spec = BumpSpec(ns.M, ns.N, ns.delta)
    f = bump_build(spec)
    Ts = _floats(ns.T)
    ts = _floats(ns.t)
    rows, results = [], []
    ok = True
    for T in Ts:
        for t in ts:
            r = poisson_check(f, T, t, config.tol)
            ok &= r.diff <= config.tol * f.f_hat0
            results.append(r.to_dict())
            rows.append([r.T, r.t, r.lhs, r.rhs, r.diff])
    result = {"f_hat0": f.f_hat0, "checks": results, "within_tol": bool(ok)}
    return Outcome(spec.to_dict(), result, {"poisson": {"verified": bool(ok)}}, ["T", "t", "lhs", "rhs", "diff"], rows)


def run_structure(ns, config: SolverConfig) -> Outcome:
    if ns.elements:
        A = IntegerSet.of(_ints(ns.elements))
    elif ns.range:
        lo, hi, step = (_ints(ns.range) + [1])[:3]
        A = IntegerSet.of(range(lo, hi + 1, step))
    else:
        raise UsageError("structure needs --elements or --range")
    out = dichotomy(A, ns.p, config)
    verify_outcome(A, out)
    d = out.to_dict()
    if out.trace is not None and ns.trace:
        for t, b in enumerate(out.trace.b, start=1):
            sys.stderr.write(json.dumps({"t": t, "b": b, "l": out.trace.l[t - 1], "m": out.trace.m[t - 1]}) + "\n")
    Q = out.gap
    rows = [[
        out.branch,
        "" if out.d is None else out.d,
        "" if out.q is None else out.q,
        "" if out.z is None else out.z,
        "" if Q is None else Q.offset,
        "" if Q is None else " ".join(map(str, Q.steps)),
        "" if Q is None else " ".join(map(str, Q.sizes)),
    ]]
    certs = {"outcome": {"verified": out.branch != "inconclusive", "branch": out.branch}}
    return Outcome({"elements": list(A.elements), "p": ns.p}, d, certs, ["branch", "d", "q", "z", "offset", "steps", "sizes"], rows)


def run_report(ns, config: SolverConfig) -> Outcome:
    n_values = _ints(ns.n_values) if ns.n_values else list(range(1, 31))
    rows = scaling_report(n_values, config)
    if not ns.timing:
        for r in rows:
            r["ms"] = 0.0
    corpus = weyl_audit_corpus(config.seed)
    weyl_max = max(weyl_bound_ratio(i, 6.0) for i in corpus)
    result = {"scaling": rows, "weyl_max_ratio": weyl_max, "weyl_instances": len(corpus)}
    return Outcome({"n_values": n_values}, result, {"sf_witnesses": {"verified": True}}, SF_HEADER, _sf_rows(rows))


HANDLERS: dict[str, Callable] = {
    "sf": run_sf,
    "construct": run_construct,
    "square-in-gap": run_square_in_gap,
    "congruence": run_congruence,
    "weyl": run_weyl,
    "bump": run_bump,
    "divisor": run_divisor,
    "poisson": run_poisson,
    "structure": run_structure,
    "report": run_report,
}


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with solver config fields")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--c", type=float, dest="cfg_c", help="merge growth constant")
    common.add_argument("--h", type=int, dest="cfg_h", help="elements of A'' per merge")
    common.add_argument("--D", type=int, dest="cfg_D", help="congruence bound exponent")
    common.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    common.add_argument("--compact", action="store_true", help="single-line JSON")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings")
    common.add_argument("--batch", action="store_true", help="read one JSON object of options per stdin line")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for --batch")
    common.add_argument("--trace", action="store_true", help="emit merge trace lines on stderr")

    parser = argparse.ArgumentParser(
        prog="sqsumfree",
        description="Square-sum-free sets: exact search, constructions and certificate-checked kernels.",
        epilog=__doc__.split("\n\n", 2)[2] if __doc__ else None,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sf", parents=[common], help="exact SF(n) with witness")
    p.add_argument("--n", type=int)
    p.add_argument("--n-values", help="comma-separated list of n")

    p = sub.add_parser("construct", parents=[common], help="lower-bound constructions")
    p.add_argument("--n", type=int)
    p.add_argument("--example", type=int, choices=(1, 2), default=1)
    p.add_argument("--q1", type=int)
    p.add_argument("--q2", type=int)
    p.add_argument("--N", type=int)

    p = sub.add_parser("square-in-gap", parents=[common], help="p*w^2 inside a rank-1 or rank-2 GAP")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--L", type=int)
    p.add_argument("--q1", type=int)
    p.add_argument("--q2", type=int)
    p.add_argument("--L1", type=int)
    p.add_argument("--L2", type=int)

    p = sub.add_parser("congruence", parents=[common], help="bounded quadratic congruence solve")
    p.add_argument("--a", required=True, help="comma-separated coefficients")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--brute", type=int, help="exhaustive search of [0, BOX]^d instead")

    p = sub.add_parser("weyl", parents=[common], help="quadratic Weyl sum and bound ratio")
    p.add_argument("--a", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--alpha", type=float, default=6.0)
    p.add_argument("--audit", action="store_true", help="run the seeded corpus")

    for name, helptext in (("bump", "smooth bump values or Fourier transform"), ("poisson", "Poisson summation check")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--M", type=float, default=0.0)
        p.add_argument("--N", type=float, default=1000.0)
        p.add_argument("--delta", type=float, default=0.03)
        if name == "bump":
            p.add_argument("--x", help="comma-separated evaluation points")
            p.add_argument("--lam", help="comma-separated frequencies")
        else:
            p.add_argument("--T", required=True, help="comma-separated periods")
            p.add_argument("--t", required=True, help="comma-separated shifts")

    p = sub.add_parser("divisor", parents=[common], help="small divisor witness")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--sweep", type=int, help="check every n up to this limit for k = 3, 4, 5")

    p = sub.add_parser("structure", parents=[common], help="divisor-or-GAP dichotomy")
    p.add_argument("--elements", help="comma-separated elements of A")
    p.add_argument("--range", help="lo,hi[,step] for A = range(lo, hi+1, step)")
    p.add_argument("--p", type=int, default=1)

    p = sub.add_parser("report", parents=[common], help="scaling table and Weyl audit summary")
    p.add_argument("--n-values", help="comma-separated list of n (default 1..30)")
    return parser


def _load_config(ns) -> SolverConfig:
    base: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    cfg = SolverConfig.from_dict(base) if base else DEFAULT_CONFIG
    overrides = {}
    if ns.seed is not None:
        overrides["seed"] = ns.seed
    for key in ("c", "h", "D"):
        v = getattr(ns, f"cfg_{key}")
        if v is not None:
            overrides[key] = v
    return replace(cfg, **overrides) if overrides else cfg


def _execute(ns) -> tuple[int, dict, Optional[Outcome]]:
    """Run one parsed command; returns (exit code, report or error dict, outcome)."""
    try:
        config = _load_config(ns)
        t0 = time.perf_counter()
        out = HANDLERS[ns.command](ns, config)
        ms = (time.perf_counter() - t0) * 1000
    except VerificationError as exc:
        return EXIT_VERIFY, {"subcommand": ns.command, "error": f"verification failed: {exc}"}, None
    except (UsageError, ValueError, BudgetExceeded, OverflowError, NoResidueRoot, NoSolutionInBound) as exc:
        return EXIT_INPUT, {"subcommand": ns.command, "error": str(exc) or type(exc).__name__}, None
    report = RunReport(ns.command, config.to_dict(), out.instance, out.result, out.certificates, {"ms": ms} if ns.timing else None)
    return EXIT_OK, report.to_dict(), out


def _render(ns, payload: dict, out: Optional[Outcome]) -> str:
    if ns.csv and out is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.header)
        w.writerows(out.rows)
        return buf.getvalue()
    if ns.compact or ns.batch:
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _batch_line(args: tuple[str, str]) -> tuple[int, str]:
    command, line = args
    parser = build_parser()
    try:
        obj = json.loads(line)
        if not isinstance(obj, dict):
            raise UsageError("batch lines must be JSON objects")
        argv = [command]
        for key, value in obj.items():
            flag = "--" + key.replace("_", "-") if len(key) > 1 else "--" + key
            if value is True:
                argv.append(flag)
            elif value is False or value is None:
                continue
            elif isinstance(value, list):
                argv += [flag, ",".join(str(v) for v in value)]
            else:
                argv += [flag, str(value)]
        ns = _parse(parser, argv)
    except (UsageError, json.JSONDecodeError, SystemExit) as exc:
        return EXIT_INPUT, json.dumps({"error": f"bad batch line: {exc}"}, sort_keys=True) + "\n"
    ns.batch = True
    code, payload, out = _execute(ns)
    return code, _render(ns, payload, out)


def _parse(parser: argparse.ArgumentParser, argv: Sequence[str]):
    ns = parser.parse_args(list(argv))
    return ns


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = _parse(parser, sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    if ns.batch:
        lines = [ln for ln in sys.stdin.read().splitlines() if ln.strip()]
        jobs = [(ns.command, ln) for ln in lines]
        if ns.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
                results = list(pool.map(_batch_line, jobs))
        else:
            results = [_batch_line(j) for j in jobs]
        worst = 0
        for code, text in results:
            sys.stdout.write(text)
            worst = max(worst, code)
        return worst
    code, payload, out = _execute(ns)
    sys.stdout.write(_render(ns, payload, out))
    return code


if __name__ == "__main__":
    sys.exit(main())
