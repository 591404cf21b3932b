"""Command-line front end.

Exit codes: 0 success, 1 validation error (bad flags, config or model),
2 runtime error (including an oracle mismatch).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import contiguity as ct
from . import inference as inf
from . import regimes
from .config import load_experiment_config
from .contiguity import ModelPair, fmt
from .errors import RCGraphError
from .experiments import run_experiment, write_aggregate_csv, write_raw_csv
from .graph_core import EdgeProbModel, components, degree_histogram, read_edge_list, sample, write_edge_list

ORACLE_TOL = 1e-12


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _grid(text: str) -> list[int]:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rcgraph", description="Remote-contiguity tools for Erdos-Renyi graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("zeta", help="survival probability of a Poisson branching process")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-12)

    s = sub.add_parser("regime-constants", help="zeta, I and (optionally) the critical schedule")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--theta", type=float)
    s.add_argument("--n", type=int)

    s = sub.add_parser("sample", help="sample a homogeneous ER graph as an edge list")
    s.add_argument("--n", type=int, required=True)
    m = s.add_mutually_exclusive_group(required=True)
    m.add_argument("--lambda", dest="lam", type=float)
    m.add_argument("--theta", type=float, help="critical schedule 1 + theta n^(-1/3)")
    m.add_argument("--log-multiple", type=float, help="lambda_n = c log n")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", type=Path)

    s = sub.add_parser("analyze", help="components and degrees of an edge-list file")
    s.add_argument("file", type=Path)

    def pair_args(s):
        s.add_argument("--n", type=int, required=True)
        s.add_argument("--p-lambda", type=float, required=True, help="base lambda (p = lambda/n)")
        s.add_argument("--q-lambda", type=float, required=True, help="perturbed lambda")

    s = sub.add_parser("contiguity-report", help="KL, s_n^2, r_n, R_n and affinity for a homogeneous pair")
    pair_args(s)
    s.add_argument("--rate", type=float, action="append", default=[], help="a_n for delta margins (repeatable)")
    s.add_argument("--csv", action="store_true")

    s = sub.add_parser("rate-margin", help="log a_n + R_n along a grid for the supercritical perturbation")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    r = s.add_mutually_exclusive_group(required=True)
    r.add_argument("--rate-exponent", type=float, help="a_n = n^(-e)")
    r.add_argument("--rate-multiple", type=float, help="a_n = exp(-m R_n)")
    s.add_argument("--grid", type=_grid, default=[10**3, 10**4, 10**5, 10**6])

    s = sub.add_parser("risk", help="Monte Carlo weighted risk of the likelihood-ratio test")
    pair_args(s)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, required=True)

    s = sub.add_parser("clt-check", help="KS distance of normalized log-LR sums to N(0,1)")
    pair_args(s)
    s.add_argument("--reps", type=int, default=2000)
    s.add_argument("--seed", type=int, required=True)

    s = sub.add_parser("oracle", help="closed forms vs exhaustive enumeration (n <= 5)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--a", type=float, default=0.5)

    s = sub.add_parser("experiment", help="run a Monte Carlo regime experiment")
    s.add_argument("name")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--aggregate-out", type=Path)
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    return p


def _pair(args) -> ModelPair:
    return ModelPair.homogeneous(args.n, args.p_lambda, args.q_lambda)


def _cmd_zeta(args, out):
    print(fmt(regimes.survival_probability(args.lam, args.tol)), file=out)


def _cmd_regime_constants(args, out):
    rc = regimes.regime_constants(args.lam)
    print(f"lambda={fmt(rc.lam)}\nzeta={fmt(rc.zeta)}\nI={fmt(rc.I)}", file=out)
    if 0 < rc.lam < 1:
        print(f"inverse_I={fmt(1 / rc.I)}", file=out)
    if args.theta is not None:
        if args.n is None:
            raise RCGraphError("--theta needs --n")
        print(f"critical_lambda={fmt(regimes.critical_schedule(args.theta, args.n))}", file=out)


def _cmd_sample(args, out):
    if args.lam is not None:
        lam = args.lam
    elif args.theta is not None:
        lam = regimes.critical_schedule(args.theta, args.n)
    else:
        lam = args.log_multiple * math.log(args.n)
    g = sample(EdgeProbModel.homogeneous(args.n, lam), args.seed)
    write_edge_list(g, args.out if args.out else out)


def _cmd_analyze(args, out):
    try:
        g = read_edge_list(args.file)
    except (OSError, ValueError) as exc:
        raise RCGraphError(str(exc)) from exc
    cs = components(g)
    print(f"n={g.n}\nm={g.m}\ncomponents={len(cs.sizes)}\nmax_size={cs.max_size}\nconnected={int(cs.is_connected)}",
          file=out)
    for k, c in sorted(degree_histogram(g).counts.items()):
        print(f"degree[{k}]={c}", file=out)


def _cmd_contiguity_report(args, out):
    rep = ct.contiguity_report(_pair(args), args.rate)
    if args.csv:
        print(",".join(ct.REPORT_COLUMNS), file=out)
        print(",".join(rep.csv_row()), file=out)
    else:
        out.write(rep.to_text())


def _cmd_rate_margin(args, out):
    lam, delta = args.lam, args.delta

    def family(n):
        return ModelPair.homogeneous(n, lam, regimes.supercritical_schedule(lam, delta, n))

    if args.rate_exponent is not None:
        e = args.rate_exponent
        curve = ct.rate_margin_curve(family, None, args.grid, log_a_fn=lambda n: -e * math.log(n))
    else:
        mult = args.rate_multiple
        curve = ct.rate_margin_curve(family, None, args.grid, log_a_fn=lambda n: -mult * ct.rate_quantities(family(n))[1])
    print("n,R,margin,normalized", file=out)
    for n, R, mg, z in zip(curve.grid, curve.R, curve.margins, curve.normalized):
        print(f"{n},{fmt(R)},{fmt(mg)},{fmt(z)}", file=out)
    print(f"classification={curve.classification.value}", file=out)


def _cmd_risk(args, out):
    rep = inf.weighted_risk_mc(_pair(args), args.a, args.reps, args.seed)
    for key in ("a_n", "type1_weighted", "type2", "total", "type1_weighted_stderr", "type2_stderr", "total_stderr"):
        print(f"{key}={fmt(getattr(rep, key))}", file=out)
    print(f"reps={rep.reps}", file=out)


def _cmd_clt_check(args, out):
    print(f"ks={fmt(inf.clt_check(_pair(args), args.reps, args.seed))}", file=out)


def _cmd_oracle(args, out) -> int:
    pair = ModelPair.from_probabilities(args.n, args.p, args.q)
    region = lambda g: inf.lr_test(pair, g, args.a)  # noqa: E731
    enum = inf.enumerate_exact(pair, region)
    p_reg, q_reg = inf.lr_region_probabilities(pair, args.a)
    checks = [
        ("kl", ct.kl_divergence(pair), enum.kl),
        ("affinity", ct.hellinger_affinity(pair), enum.affinity),
        ("lr_region_P", p_reg, enum.p_event),
        ("lr_region_Q", q_reg, enum.q_event),
    ]
    ok = True
    for name, closed, exact in checks:
        good = abs(closed - exact) <= ORACLE_TOL
        ok &= good
        print(f"{name} closed={fmt(closed)} enumerated={fmt(exact)} diff={abs(closed - exact):.3g} "
              f"{'PASS' if good else 'FAIL'}", file=out)
    print("PASS" if ok else "FAIL", file=out)
    return 0 if ok else 2


def _cmd_experiment(args, out):
    spec, threads = load_experiment_config(args.name, args.config, args.seed)
    if args.threads is not None:
        if args.threads < 1:
            raise RCGraphError("--threads must be >= 1")
        threads = args.threads
    result = run_experiment(spec, threads=threads)
    write_raw_csv(result, args.out)
    agg = args.aggregate_out or args.out.with_name(args.out.stem + ".aggregate.csv")
    write_aggregate_csv(result, agg)
    write_aggregate_csv(result, out)


COMMANDS = {
    "zeta": _cmd_zeta,
    "regime-constants": _cmd_regime_constants,
    "sample": _cmd_sample,
    "analyze": _cmd_analyze,
    "contiguity-report": _cmd_contiguity_report,
    "rate-margin": _cmd_rate_margin,
    "risk": _cmd_risk,
    "clt-check": _cmd_clt_check,
    "oracle": _cmd_oracle,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    out, err = sys.stdout, sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=err)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        code = COMMANDS[args.command](args, out)
    except RCGraphError as exc:
        print(f"error: {exc}", file=err)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {type(exc).__name__}: {exc}", file=err)
        return 2
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
