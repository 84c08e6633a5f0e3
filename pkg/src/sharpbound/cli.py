"""Command-line interface: ``sharpbound {constants,verify,falsify,sweep,demo}``.

Exit status: 0 on success, 1 when a requested check fails or the search
backstop trips, 2 on configuration errors.
"""

import argparse
import json
import sys

from . import bounds as bd
from .errors import InvalidBounds, ParseError, SharpboundError
from .instances import equality_witness, load_instance
from .linalg import TOL_ENV, default_rel_tol, set_eigh_method
from .means import MeanSpec
from .runner import DEFAULT_MEANS, BulkConfig, expand_checks, run_bulk, summarize
from .search import TARGETS, falsify, rows_to_csv, sweep
from .verify import ALL_CHECKS, MEAN_CHECKS, check_dm, check_polya_szego, run_check

DEMO_SEED = 20240101
DEMO_COUNT = 40


class ConfigError(Exception):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def _dump(obj):
    return json.dumps(obj, allow_nan=True)


def _int_list(text, field):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(field, f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise ConfigError(field, f"expected positive integers, got {text!r}")
    return vals


def _float_list(text, field):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(field, f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not v >= 1 for v in vals):
        raise ConfigError(field, f"ratios must be >= 1, got {text!r}")
    return vals


def _bounds(args):
    try:
        return bd.SpectralBounds(args.m1, args.M1, args.m2, args.M2)
    except InvalidBounds as exc:
        raise ConfigError("--m1/--M1/--m2/--M2", str(exc)) from None


def _mean(text, field="--mean"):
    try:
        return MeanSpec.from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(field, f"invalid JSON: {exc.msg}") from None
    except ParseError as exc:
        raise ConfigError(field, str(exc)) from None


def _tol(args):
    if getattr(args, "tol", None) is not None:
        if not args.tol > 0:
            raise ConfigError("--tol", "must be positive")
        return args.tol
    try:
        return default_rel_tol()
    except ValueError as exc:
        raise ConfigError(TOL_ENV, str(exc)) from None


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def cmd_constants(args, out):
    b = _bounds(args)
    mean = _mean(args.mean) if args.mean else MeanSpec.geometric()
    bs = bd.bound_set(b)
    alpha_f = bd.alpha_general(mean, b)
    result = {
        "m1": b.m1, "M1": b.M1, "m2": b.m2, "M2": b.M2,
        "alpha": bs.alpha,
        "beta": bs.beta,
        "dm": bs.dm,
        "K": bs.dm_squared,
        "K_sq": bs.dm_squared**2,
        "gruss": bs.gruss,
        "kantorovich": bs.kantorovich,
        "alpha_sq": bs.alpha**2,
        "dm_sq": bs.dm**2,
        "mean": mean.label,
        "alpha_general": alpha_f,
        "beta_general": bd.beta_general(mean, b, alpha_f),
    }
    if mean.kind == "weighted_geometric":
        result["alpha_weighted_closed"] = bd.alpha_weighted_geometric_closed(mean.mu, b)
    out.write(_dump(result) + "\n")
    return 0


def cmd_verify(args, out):
    checks = args.checks
    try:
        checks = expand_checks(checks)
    except ValueError as exc:
        raise ConfigError("--checks", str(exc)) from None
    means = [_mean(m) for m in args.mean] if args.mean else list(DEFAULT_MEANS)
    rel_tol = _tol(args)

    if args.instance:
        try:
            inst = load_instance(args.instance)
        except OSError as exc:
            raise ConfigError("--instance", str(exc)) from None
        reports = []
        for name in checks:
            if name == "fujii_squaring":
                continue
            for mean in (means if name in MEAN_CHECKS else [None]):
                reports.append(run_check(name, inst, mean, None, rel_tol))
    else:
        if args.seed is None:
            raise ConfigError("--seed", "required (no wall-clock seeding)")
        if args.count < 1:
            raise ConfigError("--count", "must be at least 1")
        cfg = BulkConfig(
            seed=args.seed,
            bounds=_bounds(args),
            dims=tuple(_int_list(args.dims, "--dims")),
            count=args.count,
            checks=tuple(checks),
            means=tuple(means),
            rel_tol=rel_tol,
        )
        reports = run_bulk(cfg, jobs=args.jobs)

    if args.out:
        _write(args.out, "".join(_dump(r.to_json()) + "\n" for r in reports))
    summary = summarize(reports)
    failing = [r for r in reports if not r.all_hold]
    result = {"ok": not failing, "rel_tol": rel_tol, "summaries": summary}
    if failing:
        result["failures"] = [r.to_json() for r in failing]
    text = _dump(result)
    if args.summary:
        _write(args.summary, text + "\n")
    out.write(text + "\n")
    return 0 if not failing else 1


def cmd_falsify(args, out):
    if args.target not in TARGETS:
        raise ConfigError("--target", f"expected one of {', '.join(TARGETS)}")
    if args.budget < 1:
        raise ConfigError("--budget", "must be at least 1")
    if args.dim < 1:
        raise ConfigError("--dim", "must be at least 1")
    rep = falsify(args.target, _bounds(args), args.dim, args.budget, args.seed, jobs=args.jobs)
    data = rep.to_json()
    if args.out:
        _write(args.out, json.dumps(data, indent=1) + "\n")
    brief = {k: v for k, v in data.items() if k != "best_instance"}
    out.write(_dump(brief) + "\n")
    return 0 if rep.backstop_ok else 1


def cmd_sweep(args, out):
    ratios = _float_list(args.ratios, "--ratios")
    if args.budget < 1:
        raise ConfigError("--budget", "must be at least 1")
    rows, ok = sweep(ratios, args.dim, args.budget, args.seed, jobs=args.jobs)
    text = rows_to_csv(rows)
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    return 0 if ok else 1


def demo_lines():
    """Human-readable table of equality cases and one bulk pass at n = 4."""
    lines = [f"{'check':<34}{'constant':>14}{'optimal':>14}{'slack':>12}"]

    def row(label, rep):
        lines.append(
            f"{label:<34}{rep.theorem_constant:>14.8f}{rep.optimal_constant:>14.8f}{rep.slack:>12.2e}"
        )

    for b in (bd.SpectralBounds(1, 2, 1, 2), bd.SpectralBounds(1, 4, 1, 4), bd.SpectralBounds(1, 3, 1, 1.5)):
        w = equality_witness(b)
        tag = f"({b.m1:g},{b.M1:g},{b.m2:g},{b.M2:g})"
        row(f"witness {tag} polya_szego", check_polya_szego(w))
        row(f"witness {tag} dm", check_dm(w))
    b = bd.SpectralBounds(1, 2, 1, 2)
    cfg = BulkConfig(seed=DEMO_SEED, bounds=b, dims=(4,), count=DEMO_COUNT, checks=ALL_CHECKS,
                     means=(MeanSpec.weighted(0.25),))
    summary = summarize(run_bulk(cfg))
    lines.append("")
    lines.append(f"bulk n=4, {DEMO_COUNT} instances, bounds (1,2,1,2), seed {DEMO_SEED}")
    lines.append(f"{'check':<34}{'failures':>10}{'max optimal':>14}{'min margin':>14}")
    for s in summary:
        lines.append(
            f"{s['check_name']:<34}{s['failures']:>10d}{s['max_optimal_constant']:>14.8f}{s['min_margin']:>14.3e}"
        )
    return lines


def cmd_demo(args, out):
    out.write("\n".join(demo_lines()) + "\n")
    return 0


def _add_bounds(p, default=None):
    req = default is None
    d = default or (None, None, None, None)
    p.add_argument("--m1", type=float, default=d[0], required=req)
    p.add_argument("--M1", type=float, default=d[1], required=req)
    p.add_argument("--m2", type=float, default=d[2], required=req)
    p.add_argument("--M2", type=float, default=d[3], required=req)


def build_parser():
    parser = argparse.ArgumentParser(prog="sharpbound", description=__doc__.splitlines()[0])
    parser.add_argument("--eigensolver", choices=("lapack", "jacobi"), default="lapack")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print every bound constant as JSON")
    _add_bounds(p)
    p.add_argument("--mean", help='mean as JSON, e.g. \'{"kind":"weighted","mu":0.25}\'')
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("verify", help="check the inequalities on seeded random instances")
    _add_bounds(p, (1.0, 2.0, 1.0, 2.0))
    p.add_argument("--dims", default="1,2,4,8")
    p.add_argument("--count", type=int, default=500, help="instances per dimension")
    p.add_argument("--seed", type=int)
    p.add_argument("--checks", default="all", help=f"comma list of: all, {', '.join(ALL_CHECKS)}")
    p.add_argument("--mean", action="append", help="mean JSON for general_* checks (repeatable)")
    p.add_argument("--tol", type=float, help=f"relative order tolerance (overrides ${TOL_ENV})")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--instance", help="verify a single instance file instead")
    p.add_argument("--out", help="write one JSON report per line here")
    p.add_argument("--summary", help="also write the summary JSON here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("falsify", help="search for a counterexample to a conjectured constant")
    p.add_argument("--target", required=True)
    _add_bounds(p)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--budget", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write the full report JSON here")
    p.set_defaults(func=cmd_falsify)

    p = sub.add_parser("sweep", help="CSV of constants and search results over a ratio grid")
    p.add_argument("--ratios", default="1,2,4,8")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--budget", type=int, default=1000, help="search budget per cell and target")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo", help="equality witnesses and a small bulk run")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    set_eigh_method(args.eigensolver)
    if getattr(args, "jobs", 1) < 1:
        print("sharpbound: error: --jobs: must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"sharpbound: error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, SharpboundError) as exc:
        print(f"sharpbound: error: {exc}", file=sys.stderr)
        return 2


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
