"""Command-line front end: ``qmcdisc gen|metric|experiment|greedy|universal``."""

import argparse
import math
import os
import sys

import numpy as np

from . import cubature, discrepancy, dispersion, greedy, pointgen, report, universal
from .errors import QMCError
from ._util import loglog_slope, ordered_map


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# gen


def _generate(args):
    g = args.generator
    if g == "fibonacci":
        return pointgen.fibonacci_set(_need(args.n, "--n"))
    if g == "frolov":
        return pointgen.frolov_points(pointgen.frolov_basis(_need(args.d, "--d")), _need(args.a, "--a"))
    if g == "frolov-periodic":
        pf = pointgen.frolov_periodized(pointgen.frolov_basis(_need(args.d, "--d")), _need(args.a, "--a"))
        return pf.points
    if g == "corput":
        return pointgen.corput_net(_need(args.r, "--r"))
    if g == "halton":
        return pointgen.halton_set(_need(args.m, "--m"), _need(args.d, "--d"))
    if g == "grid":
        return pointgen.regular_grid(_need(args.k, "--k"), _need(args.d, "--d"))
    if g == "random":
        return pointgen.random_uniform(_need(args.m, "--m"), _need(args.d, "--d"), _seed(args))
    raise UsageError(f"unknown generator {g!r}")


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required here")
    return value


def _seed(args):
    if args.seed is None:
        raise UsageError("--seed is required for randomized commands")
    return args.seed


def cmd_gen(args):
    ps = _generate(args)
    text = pointgen.format_points(ps)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"{len(ps)} {ps.provenance}")
    else:
        sys.stdout.write(text)
        print(f"{len(ps)} {ps.provenance}", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# metric


def _emit(args, rows):
    if args.output:
        report.append_rows(args.output, rows)


def cmd_metric(args):
    P = pointgen.read_points(args.input)
    name = args.metric
    d = P.dim
    budget = args.budget
    params = {"input": os.path.basename(args.input), "m": len(P), "d": d}
    lines = []
    if name == "star":
        est = discrepancy.star_discrepancy_exact(P, **_kw(budget=budget, seed=args.seed))
        row = report.make_row("star", est.value, params, est.exact, est.witness, est.budget, args.seed)
    elif name == "l2star":
        v = discrepancy.l2_star_discrepancy(P)
        row = report.make_row("l2star", v, params, True)
    elif name == "lq":
        q = _need(args.q, "--q")
        v, se = discrepancy.lq_discrepancy_mc(P, q, args.samples, _seed(args))
        params.update(q=q, samples=args.samples)
        row = report.make_row("lq", v, params, False, seed=args.seed, stderr=se)
        lines.append(f"stderr {se!r}")
    elif name in ("smooth", "fixedvol"):
        r = _need(args.r, "--r")
        kw = _kw(budget=budget)
        if name == "smooth":
            est = discrepancy.smooth_discrepancy(P, r, **kw)
        else:
            est = discrepancy.fixed_volume_discrepancy(P, r, _need(args.V, "--V"), **kw)
            params["V"] = args.V
        params["r"] = r
        row = report.make_row(name, est.value, params, est.exact, est.witness, est.budget)
    elif name == "smooth-opt":
        r = _need(args.r, "--r")
        est = discrepancy.optimized_smooth_discrepancy(P, r, **_kw(box_budget=budget))
        params["r"] = r
        row = report.make_row(name, est.value, params, est.exact, est.witness, est.budget)
    elif name == "periodic":
        r = _need(args.r, "--r")
        p1, p2 = _norm_exp(args.p1), _norm_exp(args.p2)
        v = discrepancy.periodic_smooth_discrepancy(P, r, p1, p2)
        params.update(r=r, p1=args.p1, p2=args.p2)
        row = report.make_row(name, v, params, False)
    elif name == "rdisc2":
        r = _need(args.r, "--r")
        v = discrepancy.r_discrepancy_l2(P, r)
        params["r"] = r
        row = report.make_row(name, v, params, True)
    elif name == "dispersion":
        res = dispersion.dispersion(P, **({"budget": int(budget)} if budget and d != 2 else {}))
        row = report.make_row(name, res.value, params, res.method != "sampled",
                              res.witness.as_dict(), method=res.method)
        lines.append(f"value*m {res.value * len(P)!r}")
    elif name in ("wce", "diaphony"):
        r = 1 if name == "diaphony" else _need(args.r, "--r")
        rule = cubature.CubatureRule.equal_weights(P)
        res = cubature.worst_case_error_w2r(rule, r, kmax=args.kmax, tol=args.tol)
        params.update(r=r, tol=args.tol, kmax=res.kmax, method=res.method)
        row = report.make_row(name, res.value, params, res.method == "closed-form",
                              tail_bound=res.tail_bound, tail_dominated=res.tail_dominated)
        lines.append(f"tail-bound {res.tail_bound!r}")
    else:
        raise UsageError(f"unknown metric {name!r}")
    print(repr(float(row["value"])))
    for line in lines:
        print(line)
    _emit(args, [row])
    return 0


def _kw(**kwargs):
    return {k: (int(v) if k in ("budget", "box_budget") else v)
            for k, v in kwargs.items() if v is not None}


def _norm_exp(v):
    return math.inf if v in (None, "inf") else float(v)


# --------------------------------------------------------------------------
# experiment


def parse_config(text):
    """key = value lines; '#' comments; lists as 'a,b,c' or 'lo..hi'."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise UsageError(f"config line {lineno}: empty key")
        cfg[key] = value
    if "kind" not in cfg:
        raise UsageError("config needs a 'kind'")
    return cfg


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _cfg_get(cfg, key, conv, default=None):
    if key not in cfg:
        if default is None:
            raise UsageError(f"config needs '{key}'")
        return default
    try:
        return conv(cfg[key])
    except ValueError as exc:
        raise UsageError(f"bad value for '{key}': {cfg[key]!r}") from exc


def _series(family, metric, sizes, values):
    slope, _ = loglog_slope(sizes, values) if len(sizes) > 1 else (None, None)
    recs = []
    for i, (s, v) in enumerate(zip(sizes, values)):
        recs.append({"family": family, "size": s, "metric": metric, "value": v,
                     "slope": slope if i == len(sizes) - 1 else None})
    return recs


def _run_rate(cfg, threads):
    family = _cfg_get(cfg, "family", str)
    r = _cfg_get(cfg, "r", float, 1.0)
    r = int(r) if r.is_integer() else r
    d = _cfg_get(cfg, "d", int, 2)
    sizes = _cfg_get(cfg, "sizes", _int_list)
    seeds = _cfg_get(cfg, "seeds", _int_list, [0])
    tol = _cfg_get(cfg, "tol", float, 1e-4)
    rows, recs = [], []
    for seed in seeds if family == "random" else seeds[:1]:
        def one(s):
            rule = cubature._family_rule(family, s, d, seed)
            res = cubature.worst_case_error_w2r(rule, r, tol=tol)
            return len(rule.points), res
        out = ordered_map(one, sizes, threads)
        ns = [n for n, _ in out]
        vals = [res.value for _, res in out]
        for s, (n, res) in zip(sizes, out):
            rows.append(report.make_row("wce", res.value,
                                        {"family": family, "size": s, "n": n, "r": r, "d": d},
                                        res.method == "closed-form", seed=seed,
                                        tail_bound=res.tail_bound))
        recs += _series(f"{family}" + (f"[seed={seed}]" if family == "random" else ""), "wce",
                        ns, vals)
    return rows, recs


def _run_dispersion(cfg, threads):
    family = _cfg_get(cfg, "family", str)
    sizes = _cfg_get(cfg, "sizes", _int_list)
    seed = _cfg_get(cfg, "seed", int, 0)

    def one(s):
        P, _ = dispersion._family_set(family, s, seed)
        return len(P), dispersion.dispersion(P)

    out = ordered_map(one, sizes, threads)
    rows = [report.make_row("dispersion", res.value, {"family": family, "size": s, "n": n},
                            res.method != "sampled", res.witness.as_dict(), seed=seed)
            for s, (n, res) in zip(sizes, out)]
    recs = _series(family, "dispersion", [n for n, _ in out], [res.value for _, res in out])
    return rows, recs


def _run_universality(cfg, threads):
    family = _cfg_get(cfg, "family", str)
    size = _cfg_get(cfg, "size", int)
    seed = _cfg_get(cfg, "seed", int)
    trials = _cfg_get(cfg, "trials", int, 100)
    c_scan = _cfg_get(cfg, "c_scan", _int_list, [4])
    P, _ = dispersion._family_set(family, size, seed)
    table = ordered_map(lambda c: universal.universality_vs_dispersion(P, [c], trials, seed),
                        c_scan, threads)
    rows, recs = [], []
    for part in table:
        for row in part:
            rows.append(report.make_row("universality", row["c1_hat"],
                                        {"family": family, "size": size, "c": row["c"],
                                         "n": row["n"], "trials": trials},
                                        False, row["witness"], seed=seed,
                                        disp_times_2n=row["disp_times_2n"]))
            recs.append({"family": family, "size": row["n"], "metric": "c1_hat",
                         "value": row["c1_hat"], "slope": None})
    return rows, recs


def _run_greedy(cfg, threads):
    kernel = _cfg_get(cfg, "kernel", str, "bernoulli")
    d = _cfg_get(cfg, "d", int, 1)
    p = _cfg_get(cfg, "p", float, 2.0)
    grid = _cfg_get(cfg, "grid", int, 256 if d == 1 else 64)
    sizes = _cfg_get(cfg, "sizes", _int_list)
    K = _greedy_kernel(kernel, d)
    space = greedy.DiscretizedSpace.tensor(grid, d, p)
    vals, res = greedy.greedy_rate(K, space, sizes)
    rows = [report.make_row("greedy", v, {"kernel": kernel, "d": d, "p": p, "m": m,
                                           "grid": grid, "beta": res.beta}, False)
            for m, v in zip(sizes, vals)]
    return rows, _series(f"greedy-{kernel}", "discrepancy", sizes, vals)


def _greedy_kernel(name, d):
    if name == "bernoulli":
        return greedy.periodic_bernoulli_kernel(2)
    if name == "indicator":
        return greedy.periodic_indicator_kernel([(np.full(d, 0.1), np.full(d, 0.4)),
                                                 (np.full(d, 0.5), np.full(d, 0.6))])
    raise UsageError(f"unknown kernel {name!r}")


_RUNNERS = {"rate": _run_rate, "dispersion": _run_dispersion,
            "universality": _run_universality, "greedy": _run_greedy}


def cmd_experiment(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    kinds = [k.strip() for k in cfg["kind"].split(",")]
    for k in kinds:
        if k not in _RUNNERS:
            raise UsageError(f"unknown experiment kind {k!r}")
    out = args.output or "experiment.jsonl"
    csv_path = args.csv or os.path.splitext(out)[0] + ".csv"
    rows, recs, status = [], [], 0
    for k in kinds:
        try:
            r, c = _RUNNERS[k](cfg, args.threads)
        except UsageError:
            raise
        except (QMCError, ArithmeticError, ValueError) as exc:
            rows.append(report.make_row("failure", None, {"kind": k}, error=str(exc)))
            status = 1
            continue
        rows += r
        recs += c
    report.write_rows(out, rows)
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(report.csv_summary(recs))
    for rec in recs:
        if rec["slope"] is not None:
            print(f"{rec['family']} {rec['metric']} slope {rec['slope']!r}")
    return status


# --------------------------------------------------------------------------
# greedy and universal


def cmd_greedy(args):
    K = _greedy_kernel(args.kernel, args.d)
    grid = args.grid or (256 if args.d == 1 else 64)
    space = greedy.DiscretizedSpace.tensor(grid, args.d, args.p)
    res = greedy.greedy_cubature(K, space, args.m, beta=args.beta)
    print(f"discrepancy {res.discrepancy!r}")
    print(f"beta {res.beta!r}")
    if args.output:
        pointgen.write_points(args.output, res.rule.points)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(res.trace.to_jsonl())
    return 0


def cmd_universal(args):
    P = pointgen.read_points(args.input)
    seed = _seed(args)
    if args.n is not None:
        ratio, witness = universal.universal_linf_check(P, args.n, args.trials, seed)
        rows = [report.make_row("universality", ratio, {"n": args.n, "trials": args.trials},
                                False, witness, seed=seed)]
        print(repr(ratio))
    else:
        c_scan = _int_list(args.c_scan)
        parts = ordered_map(lambda c: universal.universality_vs_dispersion(P, [c], args.trials, seed),
                            c_scan, args.threads)
        rows = []
        for part in parts:
            for row in part:
                rows.append(report.make_row("universality", row["c1_hat"],
                                            {"c": row["c"], "n": row["n"], "trials": args.trials},
                                            False, row["witness"], seed=seed,
                                            disp_times_2n=row["disp_times_2n"]))
                print(f"c={row['c']} n={row['n']} c1={row['c1_hat']!r} "
                      f"disp*2^n={row['disp_times_2n']!r}")
    _emit(args, rows)
    return 0


# --------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--budget", type=float)
    common.add_argument("--tol", type=float, default=1e-4)

    parser = argparse.ArgumentParser(prog="qmcdisc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a point set")
    g.add_argument("generator", choices=["fibonacci", "frolov", "frolov-periodic", "corput",
                                         "halton", "grid", "random"])
    for flag in ("--n", "--d", "--r", "--m", "--k"):
        g.add_argument(flag, type=int)
    g.add_argument("--a", type=float)
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("metric", parents=[common], help="evaluate a quality metric")
    m.add_argument("metric", choices=["star", "l2star", "lq", "smooth", "smooth-opt", "fixedvol",
                                      "periodic", "rdisc2", "dispersion", "wce", "diaphony"])
    m.add_argument("-i", "--input", required=True)
    m.add_argument("--r", type=int)
    m.add_argument("--q", type=float)
    m.add_argument("--V", type=float)
    m.add_argument("--p1", default="inf")
    m.add_argument("--p2", default="inf")
    m.add_argument("--samples", type=int, default=100_000)
    m.add_argument("--kmax", type=int)
    m.set_defaults(func=cmd_metric)

    e = sub.add_parser("experiment", parents=[common], help="run a configured experiment")
    e.add_argument("config")
    e.add_argument("--csv")
    e.set_defaults(func=cmd_experiment)

    gr = sub.add_parser("greedy", parents=[common], help="greedy equal-weight cubature")
    gr.add_argument("--kernel", choices=["bernoulli", "indicator"], default="bernoulli")
    gr.add_argument("--d", type=int, default=1)
    gr.add_argument("--p", type=float, default=2.0)
    gr.add_argument("--m", type=int, required=True)
    gr.add_argument("--grid", type=int)
    gr.add_argument("--beta", type=float, default=1.0)
    gr.add_argument("--trace")
    gr.set_defaults(func=cmd_greedy)

    u = sub.add_parser("universal", parents=[common], help="universal discretization check")
    u.add_argument("-i", "--input", required=True)
    u.add_argument("--n", type=int)
    u.add_argument("--c-scan", default="4")
    u.add_argument("--trials", type=int, default=100)
    u.set_defaults(func=cmd_universal)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qmcdisc: error: {exc}", file=sys.stderr)
        return 2
    except (QMCError, ArithmeticError, ValueError, OSError) as exc:
        print(f"qmcdisc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
