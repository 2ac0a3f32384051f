"""Command-line interface: ``bipgenus <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import harness
from .genus import DEFAULT_EXACT_MAX_STATES, DEFAULT_J_RANGE, exact_genus_small, genus_interval
from .graph_core import BipartiteGraph, component_table, read_graph, write_graph
from .planarity import is_planar
from .projection import two_centre
from .sampler import SeedSpec, sample_binomial_graph, sample_bipartite
from .structure import ClassifierThresholds, johansson_gap_check, structure_report
from .theory import gamma_const, mu, nu


def _dump(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_sample(args) -> int:
    seed = SeedSpec(args.seed, args.trial)
    if args.model == "bipartite":
        if args.n2 is None:
            raise SystemExit("--n2 is required for the bipartite model")
        p = args.p if args.p is not None else args.d / math.sqrt(args.n1 * args.n2)
        g = sample_bipartite(args.n1, args.n2, p, seed)
    else:
        if args.p is None:
            raise SystemExit("--p is required for the binomial model")
        g = sample_binomial_graph(args.n1, args.p, seed)
    write_graph(g, args.out)
    return 0


def _bipartite(path: str) -> BipartiteGraph:
    g = read_graph(path)
    if not isinstance(g, BipartiteGraph):
        raise SystemExit(f"{path}: expected a bipartite graph")
    return g


def cmd_analyze(args) -> int:
    g = _bipartite(args.input)
    th = ClassifierThresholds(args.beta0, args.beta1, args.balance_factor)
    t = component_table(g)
    rep = structure_report(g, args.p, th, table=t)
    if args.json:
        _dump(rep.to_dict())
    else:
        ok, bad = johansson_gap_check(t, g.n1, th)
        for k, v in rep.to_dict().items():
            print(f"{k:34s} {v}")
        print(f"{'gap_check':34s} {'ok' if ok else 'violated ' + str(bad)}")
    return 0


def cmd_project(args) -> int:
    rep = two_centre(_bipartite(args.input))
    write_graph(rep.h, args.out)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_planar(args) -> int:
    planar = is_planar(read_graph(args.input))
    _dump({"planar": planar})
    return 0 if planar else 1


def cmd_genus(args) -> int:
    g = read_graph(args.input)
    if args.oracle:
        out = {"exact_genus": exact_genus_small(g, args.exact_max_states)}
    else:
        out = genus_interval(g, args.j).to_dict()
    if args.json:
        _dump(out)
    else:
        for k, v in out.items():
            print(f"{k:18s} {v}")
    return 0


def _constant(fn: str, d: float, lam: float, tol: float, closed_form: bool):
    if fn == "mu":
        return mu(d, tol)
    if fn == "nu":
        return nu(d, lam, tol)
    return gamma_const(d, lam, tol, closed_form=closed_form)


def cmd_constants(args) -> int:
    if args.action == "table":
        rows = []
        for d in args.d_grid:
            for lam in args.lambda_grid:
                n = nu(d, lam, args.tol)
                g = gamma_const(d, lam, args.tol)
                rows.append([d, lam, n.value, n.tail_bound, int(n.converged), g.value, g.tail_bound])
        header = ["d", "lambda", "nu", "nu_tail_bound", "nu_converged", "gamma", "gamma_tail_bound"]
        if args.csv:
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(header)
            w.writerows([[repr(x) if isinstance(x, float) else x for x in r] for r in rows])
        else:
            print("  ".join(f"{h:>14s}" for h in header))
            for r in rows:
                print("  ".join(f"{x:14.8g}" for x in r))
        return 0
    if args.fn is None or args.d is None:
        raise SystemExit("constants needs --fn and --d")
    res = _constant(args.fn, args.d, args.lam, args.tol, args.closed_form)
    if args.json:
        _dump({"fn": args.fn, "d": args.d, "lambda": args.lam, "tol": args.tol, **res.to_dict()})
    else:
        print(f"{args.fn}({args.d}{'' if args.fn == 'mu' else ', ' + str(args.lam)}) = {res.value!r}")
        print(f"terms {res.terms_used}  tail_bound {res.tail_bound:.3e}  converged {res.converged}")
    return 0 if res.converged else 2


def cmd_experiment(args) -> int:
    if args.action == "list":
        for eid, spec in harness.EXPERIMENTS.items():
            print(f"{eid:28s} {spec.description}")
        return 0
    if not args.config:
        raise SystemExit("experiment run needs --config")
    cfg = harness.load_config(args.config)
    report, _ = harness.run_experiment(cfg, args.out, args.workers)
    for name, ok in sorted(report.pass_flags.items()):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bipgenus", description="Random bipartite graphs, genus bounds and experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a random graph to a file")
    s.add_argument("--model", choices=["bipartite", "binomial"], default="bipartite")
    s.add_argument("--n1", type=int, required=True, help="first side (vertex count for binomial)")
    s.add_argument("--n2", type=int)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", type=float)
    g.add_argument("--d", type=float, help="p = d / sqrt(n1 n2)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("analyze", help="component structure report")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--beta0", type=float, default=1.0)
    s.add_argument("--beta1", type=float, default=1.0)
    s.add_argument("--balance-factor", type=float, default=2.0)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("project", help="2-centre projection")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("planar", help="planarity test (exit 0 planar, 1 otherwise)")
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(func=cmd_planar)

    s = sub.add_parser("genus", help="genus interval or exact genus")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--j", type=int, nargs="*", default=list(DEFAULT_J_RANGE))
    s.add_argument("--exact-max-states", type=int, default=DEFAULT_EXACT_MAX_STATES)
    s.add_argument("--oracle", action="store_true", help="exhaustive rotation-system search")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_genus)

    s = sub.add_parser("constants", help="evaluate mu, nu, gamma")
    s.add_argument("action", nargs="?", choices=["table"])
    s.add_argument("--fn", choices=["mu", "nu", "gamma"])
    s.add_argument("--d", type=float)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--closed-form", action="store_true", help="gamma via the d < 1 closed form of nu")
    s.add_argument("--d-grid", type=float, nargs="+", default=[0.5, 1.5, 2.0, 3.0])
    s.add_argument("--lambda-grid", type=float, nargs="+", default=[0.25, 0.5, 1.0])
    s.add_argument("--csv", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("experiment", help="seeded Monte Carlo experiments")
    s.add_argument("action", choices=["run", "list"])
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=None, help="processes (default: all cores)")
    s.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
