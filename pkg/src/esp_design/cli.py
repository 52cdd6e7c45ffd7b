"""
Command-line front end.

Subcommands::

    esp-design datagen  --kind sparse --n 300 --m 20 --density 0.6 --seed 1 --out X.csv
    esp-design solve    --input X.csv --l 10 --k 40 --method greedy --method sample
    esp-design compare  --kind sparse --n 300 --m 20 --l 10 --ks 40,80 --out-dir tables/
    esp-design verify   [--only esp] [--inject NAME]

Exit codes: 0 success, 2 usage or input error, 3 infeasible problem,
4 numeric failure.  ``ESP_DESIGN_THREADS`` caps BLAS threads.
"""
import argparse
import csv
from itertools import combinations
import logging
import os
from pathlib import Path
import sys

from .data import SyntheticKind, SyntheticSpec, generate, load_csv
from .discretize import MethodTag
from .errors import (
    CannotRoundError,
    EspDesignError,
    InfeasibleDesignError,
    InfeasibleProblemError,
    InputError,
    NumericFailure,
    StuckInfeasibleError,
)
from .pipeline import records_to_csv, run_methods
from .relax import SolverConfig
from .verify import CHECKS, GROUPS, run_checks

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4

logger = logging.getLogger("esp_design")


def _density(text):
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"density must lie in (0, 1], got {v}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _non_negative(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {v}")
    return v


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_instance_args(p):
    g = p.add_argument_group("instance")
    g.add_argument("--input", help="CSV file with a header row, one experiment per row")
    g.add_argument("--response", help="name or zero-based index of a response column to drop")
    g.add_argument("--normalize", action="store_true", help="scale feature columns to unit norm")
    g.add_argument("--kind", choices=[k.value for k in SyntheticKind], default="sparse")
    g.add_argument("--n", type=_positive_int, default=300)
    g.add_argument("--m", type=_positive_int, default=20)
    g.add_argument("--density", type=_density, default=0.6)
    g.add_argument("--alpha", type=_non_negative, default=1.0)
    g.add_argument("--data-seed", type=int, default=0, help="seed of the generated instance")


def _add_solver_args(p):
    g = p.add_argument_group("solver")
    g.add_argument("--l", type=_positive_int, required=True, help="ESP order, 1 <= l <= m")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-iters", type=_positive_int, default=2000)
    g.add_argument("--step-init", type=float, default=1.0)
    g.add_argument("--tol-obj", type=float, default=1e-9)
    g.add_argument("--tol-grad", type=float, default=1e-7)
    g.add_argument("--max-sweeps", type=_positive_int, default=1000)


def build_parser():
    parser = argparse.ArgumentParser(prog="esp-design", description=__doc__.split("\n")[1])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datagen", help="write a synthetic design matrix to CSV")
    p.add_argument("--kind", choices=[k.value for k in SyntheticKind], required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--density", type=_density, default=0.6)
    p.add_argument("--alpha", type=_non_negative, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    methods = [t.value for t in MethodTag]
    p = sub.add_parser("solve", help="select k experiments with one or more methods")
    _add_instance_args(p)
    _add_solver_args(p)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--method", action="append", choices=methods,
                   help="repeatable; defaults to greedy")
    p.add_argument("--out", help="also write the records to this CSV file")

    p = sub.add_parser("compare", help="tables comparing methods over several budgets")
    _add_instance_args(p)
    _add_solver_args(p)
    p.add_argument("--ks", type=_int_list, required=True, help="comma-separated budgets")
    p.add_argument("--method", action="append", choices=methods,
                   help="repeatable; defaults to all methods")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("verify", help="run oracle and invariant checks")
    p.add_argument("--only", action="append", choices=GROUPS + sorted(CHECKS),
                   help="restrict to a group or a single check (repeatable)")
    p.add_argument("--inject", action="append", default=[], choices=sorted(CHECKS),
                   help="force the named check to fail (harness self-test)")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _instance(args):
    if args.input:
        ds = load_csv(args.input, args.response, args.normalize)
        return ds.X
    spec = SyntheticSpec(args.kind, args.n, args.m, args.density, args.alpha, args.data_seed)
    return generate(spec).X


def _config(args):
    return SolverConfig(max_iters=args.max_iters, step_init=args.step_init,
                        tol_obj=args.tol_obj, tol_grad=args.tol_grad, seed=args.seed)


def cmd_datagen(args):
    spec = SyntheticSpec(args.kind, args.n, args.m, args.density, args.alpha, args.seed)
    generate(spec).to_csv(args.out)
    return EXIT_OK


def cmd_solve(args):
    X = _instance(args)
    methods = args.method or [MethodTag.GREEDY.value]
    records = run_methods(X, args.k, args.l, methods, args.seed, _config(args), args.max_sweeps)
    for r in records:
        print(r.to_json())
    if args.out:
        records_to_csv(records, args.out)
    return EXIT_OK


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_compare(args):
    X = _instance(args)
    n, m = X.shape
    methods = args.method or [t.value for t in MethodTag]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config(args)

    objectives, runtimes, inter, supports, all_records = [], [], [], [], []
    for k in args.ks:
        recs = run_methods(X, k, args.l, methods, args.seed, cfg, args.max_sweeps)
        all_records.extend(recs)
        for r in recs:
            print(r.to_json())
            tag = r.method.value
            objectives.append([tag, k, repr(r.objective)])
            runtimes.append([tag, k, f"{r.wall_time_s:.6f}"])
            if tag == MethodTag.RELAX.value:
                supports.append([k, r.extras["support_size"], k + m * (m + 1) // 2])
        discrete = [r for r in recs if r.method is not MethodTag.RELAX]
        for a, b in combinations(discrete, 2):
            inter.append([k, a.method.value, b.method.value, len(set(a.subset) & set(b.subset))])

    _write_csv(out / "objectives.csv", ["method", "k", "objective"], objectives)
    _write_csv(out / "runtimes.csv", ["method", "k", "wall_time_s"], runtimes)
    _write_csv(out / "intersections.csv", ["k", "method_a", "method_b", "common"], inter)
    _write_csv(out / "support.csv", ["k", "support_size", "support_bound"], supports)
    records_to_csv(all_records, out / "records.csv")
    return EXIT_OK


def cmd_verify(args):
    failed = 0
    for res in run_checks(args.only, set(args.inject), args.seed):
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name} residual={res.residual:.3e} tol={res.tol:.1e}")
        failed += not res.passed
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}")
    return EXIT_OK if not failed else 1


COMMANDS = {"datagen": cmd_datagen, "solve": cmd_solve, "compare": cmd_compare, "verify": cmd_verify}


def _limit_threads():
    cap = os.environ.get("ESP_DESIGN_THREADS")
    if not cap:
        return None
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return None
    return threadpool_limits(limits=max(1, int(cap)))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _limit_threads()
    try:
        return COMMANDS[args.command](args)
    except (InfeasibleDesignError, InfeasibleProblemError, CannotRoundError, StuckInfeasibleError) as exc:
        print(f"esp-design: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericFailure as exc:
        print(f"esp-design: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, EspDesignError, OSError) as exc:
        print(f"esp-design: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
