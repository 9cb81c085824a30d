"""Command line entry point: ``susceptibility <subcommand> [options]``.

Exit codes: 0 success, 1 usage or input error, 2 a ``verify`` suite ran and
at least one statistical verdict failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time

from . import borel as bo
from .experiments import SUITES, ExperimentConfig, run_replicates, run_suite, solve_rho
from .graph import SnapshotSummary, density_from_nt, make_rng, pair_count, trajectory
from .poly import PolyFamilyCache, conjecture_report, default_cache

log = logging.getLogger("susceptibility")

FAMILIES = {
    "p": (2, "p"),
    "q": (3, "q"),
    "pi": (2, "pi"),
    "r": (0, "r"),
    "px": (2, "px"),
    "py": (2, "py"),
    "hp": (2, "hp"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(s)) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# ---------------------------------------------------------------------------
# rendering helpers
# ---------------------------------------------------------------------------


def emit_table(family: str, k: int, l: int | None = None, *, k_min: int | None = None,
               single: bool = False, fmt: str = "text",
               cache: PolyFamilyCache | None = None) -> str:
    """Render a polynomial family for indices up to ``k`` (and ``l`` for ``hp``).

    Ordering is ascending ``k`` and then ``l``; ``hp`` lists ``l <= k`` since
    it is symmetric.
    """
    if family not in FAMILIES:
        raise UsageError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    cache = cache or default_cache()
    lo = FAMILIES[family][0]
    if k < lo:
        raise UsageError(f"family {family} starts at index {lo}, got {k}")
    build = getattr(cache, family)
    entries = []
    if family == "hp":
        l = k if l is None else l
        if l < 2:
            raise UsageError(f"family hp needs l >= 2, got {l}")
        if single:
            pairs = [(k, l)]
        else:
            start = lo if k_min is None else k_min
            pairs = [(a, b) for a in range(start, k + 1) for b in range(2, min(a, l) + 1)]
        for a, b in pairs:
            entries.append((f"hp_{a},{b}", a, b, build(a, b)))
    else:
        start = k if single else (lo if k_min is None else max(k_min, lo))
        for a in range(start, k + 1):
            entries.append((f"{family}_{a}", a, None, build(a)))
    if fmt == "text":
        return "".join(f"{name}(x) = {poly.render()}\n" for name, _, _, poly in entries)
    if fmt == "json":
        rows = [
            {"family": family, "k": a, "l": b, "degree": poly.degree,
             "coeffs": poly.coeff_strings(), "text": poly.render()}
            for _, a, b, poly in entries
        ]
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "k", "l", "degree", "coeffs", "text"])
    for _, a, b, poly in entries:
        w.writerow([family, a, "" if b is None else b, poly.degree,
                    json.dumps(poly.coeff_strings()), poly.render()])
    return buf.getvalue()


def _snapshots_csv(rows: list[SnapshotSummary], kmax: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SnapshotSummary.csv_header(kmax))
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def _snapshots_out(rows, kmax, fmt):
    if fmt == "json":
        return json.dumps([r.as_dict() for r in rows], indent=2) + "\n"
    if fmt == "text":
        lines = [f"rep={r.replicate} m={r.m} chi={r.chi:.6f} S={list(r.S)} "
                 f"largest=({r.largest1},{r.largest2})" for r in rows]
        return "\n".join(lines) + "\n"
    return _snapshots_csv(rows, kmax)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_polys(args) -> tuple[str, int]:
    cache = PolyFamilyCache(max_index=args.max_index)
    out = emit_table(args.family, args.k, args.l, k_min=args.k_min, single=args.single,
                     fmt=args.format or "text", cache=cache)
    return out, 0


def cmd_conjecture(args) -> tuple[str, int]:
    rows = conjecture_report()
    fmt = args.format or "text"
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n", 0
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "l", "stated", "computed", "identical", "leading_agrees"])
        for r in rows:
            w.writerow([r["k"], r["l"], r["stated"], r["computed"], r["identical"],
                        r["leading_agrees"]])
        return buf.getvalue(), 0
    lines = []
    for r in rows:
        lines.append(f"(k,l)=({r['k']},{r['l']})")
        label = f"hp_{r['k']},{r['l']}"
        width = max(len(label), len("stated"))
        lines.append(f"  {'stated':<{width}} : {r['stated']}")
        lines.append(f"  {label:<{width}} : {r['computed']}")
        if r["identical"]:
            lines.append("  coefficient-identical")
        else:
            for d in r["differences"]:
                lines.append(f"  x^{d['power']}: stated {d['stated']}, computed {d['computed']}")
    return "\n".join(lines) + "\n", 0


def cmd_borel(args) -> tuple[str, int]:
    lam = args.lam
    table = bo.moment_table(lam, args.orders)
    pmf = [[j, bo.borel_pmf(lam, j)] for j in range(1, args.jmax + 1)]
    doc = {
        "lambda": lam,
        "pmf": pmf,
        "moments": {str(m): v for m, v in table.moments.items()},
        "cumulants": {str(m): v for m, v in table.cumulants.items()},
        "size_biased_moments": {str(m): v for m, v in table.size_biased_moments.items()},
    }
    if args.sample:
        rng = make_rng(args.seed)
        draws = [bo.sample_borel(lam, rng) for _ in range(args.sample)]
        doc["sample"] = {"size": args.sample, "mean": sum(draws) / len(draws),
                         "seed": args.seed}
    fmt = args.format or "json"
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n", 0
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "pmf"])
        w.writerows([[j, repr(v)] for j, v in pmf])
        return buf.getvalue(), 0
    lines = [f"Borel(lambda={lam})"]
    for m in table.moments:
        c = table.cumulants.get(m)
        lines.append(
            f"  m={m}: E b^m = {table.moments[m]!r}"
            + (f", kappa_m = {c!r}" if c is not None else "")
            + f", E hat_b^m = {table.size_biased_moments[m]!r}"
        )
    lines += [f"  P(b={j}) = {v!r}" for j, v in pmf]
    return "\n".join(lines) + "\n", 0


def cmd_rho(args) -> tuple[str, int]:
    rho = solve_rho(args.lam)
    fmt = args.format or "text"
    if fmt == "json":
        return json.dumps({"lambda": args.lam, "rho": rho}) + "\n", 0
    if fmt == "csv":
        return f"lambda,rho\n{args.lam!r},{rho:.12f}\n", 0
    return f"{rho:.12f}\n", 0


def _density_kwargs(args) -> dict:
    given = {k: getattr(args, k) for k in ("p", "t", "m") if getattr(args, k) is not None}
    if len(given) > 1:
        raise UsageError("give at most one of --p, --t, --m (or --nt)")
    if given:
        return {"nt": None, **given}
    return {"nt": args.nt}


def cmd_simulate(args) -> tuple[str, int]:
    cfg = ExperimentConfig(n=args.n, kmax=args.kmax, replicates=args.replicates,
                           master_seed=args.seed, kind="lln", threads=args.threads,
                           **_density_kwargs(args))
    rows = run_replicates(cfg)
    return _snapshots_out(rows, args.kmax, args.format or "csv"), 0


def cmd_trajectory(args) -> tuple[str, int]:
    if args.checkpoints and args.nt_checkpoints:
        raise UsageError("give either --checkpoints or --nt-checkpoints")
    if args.checkpoints:
        cps = args.checkpoints
    elif args.nt_checkpoints:
        N = pair_count(args.n)
        cps = [round(N * density_from_nt(args.n, v)[0]) for v in args.nt_checkpoints]
    else:
        raise UsageError("trajectory needs --checkpoints or --nt-checkpoints")
    rows = trajectory(args.n, args.kmax, cps, seed=args.seed)
    return _snapshots_out(rows, args.kmax, args.format or "csv"), 0


def cmd_verify(args) -> tuple[str, int]:
    t0 = time.perf_counter()
    report = run_suite(
        args.suite, n=args.n, nt=args.nt, replicates=args.replicates, seed=args.seed,
        kmax=args.kmax, threads=args.threads, lam=args.lam, n_list=args.n_list,
        nt_grid=args.nt_grid, windows=args.windows,
    )
    log.info("suite %s: %s in %.1f s", args.suite,
             "pass" if report["passed"] else "FAIL", time.perf_counter() - t0)
    fmt = args.format or "json"
    if fmt == "json":
        out = json.dumps(report, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "empirical", "theory", "se", "z", "verdict", "criterion"])
        for s in report["per_statistic"]:
            w.writerow([s["name"], repr(s["empirical"]), repr(s["theory"]),
                        "" if s["se"] is None else repr(s["se"]),
                        "" if s["z"] is None else repr(s["z"]), s["verdict"],
                        s["criterion"]])
        out = buf.getvalue()
    else:
        lines = [f"suite {args.suite}: {'PASS' if report['passed'] else 'FAIL'}"]
        for s in report["per_statistic"]:
            z = "" if s["z"] is None else f" z={s['z']:+.2f}"
            lines.append(f"  [{s['verdict']}] {s['name']}: empirical={s['empirical']:.6g} "
                         f"theory={s['theory']:.6g}{z} ({s['criterion']})")
        out = "\n".join(lines) + "\n"
    return out, 0 if report["passed"] else 2


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Global flags are accepted both before and after the subcommand.  The
    # subcommand copies use SUPPRESS defaults so they do not overwrite a value
    # given before the subcommand name.
    def d(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed", type=int, default=d(0),
                        help="master seed (default 0; never taken from the clock)")
    parser.add_argument("--format", choices=("csv", "json", "text"), default=d(None),
                        help="output format (default depends on the subcommand)")
    parser.add_argument("--out", metavar="PATH", default=d(None),
                        help="write output here instead of stdout")
    parser.add_argument("--threads", type=int, default=d(1),
                        help="worker processes for replicates; never changes results")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    parser = _Parser(
        prog="susceptibility",
        description="Component-size moments and susceptibility of Erdos-Renyi graphs.",
    )
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "polys", parents=[common],
        help="print polynomial families",
        description="Print the moment polynomials p_k (E S_k ~ n p_k(1/(1-nt)), "
                    "tabulated for k <= 8), the covariance polynomials hp_k,l "
                    "(Cov(S_k,S_l) ~ n hp_k,l(1/(1-nt)), tabulated for k,l <= 4), and "
                    "the related families q, pi, r, px, py.",
    )
    p.add_argument("--family", choices=tuple(FAMILIES), default="p")
    p.add_argument("--k", type=int, required=True, help="largest index (m for family r)")
    p.add_argument("--l", type=int, default=None, help="largest second index for hp")
    p.add_argument("--k-min", type=int, default=None, help="smallest index to print")
    p.add_argument("--single", action="store_true", help="print only index k (and l)")
    p.add_argument("--max-index", type=int, default=64,
                   help="guardrail on the largest index built (default 64)")
    p.set_defaults(func=cmd_polys)

    p = sub.add_parser(
        "conjecture", parents=[common],
        help="compare the stated conjectural variance polynomials with hp_k,l",
        description="Print the stated qm polynomials for (2,2), (3,3), (2,3) next to "
                    "hp_k,l with a coefficient diff; no verdict is given.",
    )
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser(
        "borel", parents=[common],
        help="Borel distribution pmf, moments and cumulants",
        description="Borel(lambda) pmf table, moments E b^m = p_{m+1}(1/(1-lambda)), "
                    "cumulants and size-biased moments.",
    )
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--jmax", type=int, default=20, help="pmf table length")
    p.add_argument("--orders", type=int, default=6, help="highest moment order")
    p.add_argument("--sample", type=int, default=0,
                   help="also draw this many branching-process samples")
    p.set_defaults(func=cmd_borel)

    p = sub.add_parser(
        "rho", parents=[common],
        help="giant-component fraction rho(lambda)",
        description="Solve rho = 1 - exp(-lambda rho), the survival probability of a "
                    "Poisson(lambda) Galton-Watson tree, by bisection.",
    )
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_rho)

    def density_flags(q):
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--nt", type=float, default=0.5, help="n times process time (default)")
        q.add_argument("--p", type=float, default=None, help="edge probability")
        q.add_argument("--t", type=float, default=None, help="process time")
        q.add_argument("--m", type=int, default=None, help="fixed edge count (G(n,m))")

    p = sub.add_parser(
        "simulate", parents=[common],
        help="independent G(n,p) replicates as CSV",
        description="Draw seeded G(n,p) replicates and report S_1..S_kmax, chi and the "
                    "two largest components per replicate.",
    )
    density_flags(p)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--replicates", type=int, default=10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "trajectory", parents=[common],
        help="one random graph process observed at several edge counts",
        description="Add distinct uniformly random edges one at a time and report the "
                    "moments at each checkpoint, with p = m/N and t = -log(1-p).",
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--checkpoints", type=_int_list, default=None,
                   help="comma-separated increasing edge counts")
    p.add_argument("--nt-checkpoints", type=_float_list, default=None,
                   help="comma-separated nt values, converted to edge counts")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser(
        "verify", parents=[common],
        help="run a Monte Carlo verification suite",
        description="Statistical checks: subcritical/lln (means of chi and S_k), clt and "
                    "covariance (variances, covariances via hp_k,l and Jarque-Bera "
                    "normality of chi), supercritical (giant size vs rho), "
                    "critical_scaling (n^(-4/3) S_2 at p=1/n), inverse_chi "
                    "(1/chi vs (1-np)_+), drift (S_2 increments vs exact drift). "
                    "Exit status 2 when a verdict fails.",
    )
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--nt", type=float, default=0.5)
    p.add_argument("--replicates", type=int, default=200)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--lambda", dest="lam", type=float, default=1.5,
                   help="mean degree for the supercritical suite")
    p.add_argument("--n-list", type=_int_list, default=None,
                   help="comma-separated n values (critical_scaling, inverse_chi)")
    p.add_argument("--nt-grid", type=_float_list, default=None,
                   help="comma-separated nt grid for inverse_chi")
    p.add_argument("--windows", type=int, default=500, help="windows for the drift suite")
    p.set_defaults(func=cmd_verify)
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        out, code = args.func(args)
    except (UsageError, ValueError, ArithmeticError) as exc:
        print(f"susceptibility {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
        sys.stdout.flush()
    return code


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
