"""Command-line front end: replica fan-out, CSV/JSON emission and figures.

Exit status: 0 ok, 1 parameter or usage error, 2 numerical failure (a JSON
error record is written to stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import branching as br
from . import limit_laws as ll
from . import stats, trees
from .errors import ConvergenceError, InvariantViolation, ParameterError
from .models import BAry, ScaleFree, TreeModel, UniformRecursive, p_of

REPLICA_COLUMNS = ["replica", "model", "b_or_a", "c", "n", "p", "root_cluster", "largest_cluster",
                   "z0", "z_mut", "mutations", "statistic_value", "extinct"]
KAPPA_COLUMNS = ["model", "b_or_a", "shape", "value", "tail_bound", "terms"]
LIMIT_COLUMNS = ["theorem", "c", "shape", "x", "cdf"]
CF_COLUMNS = ["check", "theta", "estimate_re", "estimate_im", "se_re", "se_im",
              "reference_re", "reference_im", "z_re", "z_im"]

DEFAULT_THETAS = "-1,-0.5,-0.25,0.25,0.5,1"


class UsageError(ParameterError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    return obj


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--model", choices=["bary", "scalefree", "urt"], default="bary")
    g.add_argument("--b", type=int, help="arity of b-ary trees (default 2)")
    g.add_argument("--a", type=float, help="affine weight of scale-free trees (default 0)")
    g.add_argument("--c", type=float, help="percolation constant (default 1)")
    g.add_argument("--n", type=int, default=100, help="tree size")
    g.add_argument("--p", type=float, help="retention probability; overrides 1 - c/ln n")
    r = common.add_argument_group("run")
    r.add_argument("--reps", type=int, default=1000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--tol", type=float, default=1e-8)
    r.add_argument("--theta-grid", type=_float_list, default=_float_list(DEFAULT_THETAS))
    o = common.add_argument_group("output")
    o.add_argument("--output", choices=["csv", "json"], default="csv")
    o.add_argument("--out", type=Path, help="output file (default stdout)")
    o.add_argument("--figures", type=Path, metavar="DIR", help="also write PNG figures to DIR")

    parser = _Parser(prog="yuleperc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("percolate", parents=[common], help="direct tree percolation")
    p.add_argument("--largest", action="store_true", help="also track the largest cluster")
    p.add_argument("--statistic", choices=["raw", "recentered"], default="raw")

    p = sub.add_parser("branch", parents=[common], help="branching system with rare mutations")
    p.add_argument("--stop", choices=["total", "ancestral"], default="total")
    p.add_argument("--mode", choices=["jump", "continuous"], default="jump")
    p.add_argument("--statistic", choices=["raw", "recentered"], default="raw")
    p.add_argument("--target", type=float, help="stop mass (default: the mass at tree size n)")

    p = sub.add_parser("couple-check", parents=[common],
                       help="two-sample KS of tree vs coupled root-cluster sizes")

    p = sub.add_parser("germ", parents=[common], help="germ statistics of the mutant mass")
    p.add_argument("--statistic", choices=["raw", "germ"], default="germ")

    p = sub.add_parser("limit", parents=[common], help="tabulate a limit CDF")
    p.add_argument("--theorem", choices=[t.value for t in ll.Theorem])
    p.add_argument("--x-grid", type=_float_list, default=_float_list("-2,-1,-0.5,0,0.5,1,2"))

    sub.add_parser("kappa", parents=[common], help="kappa constants with tail bounds")

    p = sub.add_parser("cf-check", parents=[common],
                       help="empirical vs closed-form characteristic functions")
    p.add_argument("--time", type=float, default=1.0)
    return parser


def _given(args, name: str) -> bool:
    return getattr(args, name, None) is not None


def validate(args) -> None:
    """Reject inconsistent flag combinations before any work."""
    if args.b is not None and args.model != "bary":
        raise UsageError("--b is only valid with --model bary")
    if args.a is not None and args.model != "scalefree":
        raise UsageError("--a is only valid with --model scalefree")
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.c is not None and not args.c > 0:
        raise UsageError("--c must be positive")
    if args.command in ("branch", "germ") and args.model == "urt":
        raise UsageError(f"{args.command} needs --model bary or scalefree")
    if args.command == "cf-check" and args.model == "urt":
        raise UsageError("cf-check needs --model bary or scalefree")
    if args.command == "kappa" and args.model == "urt":
        raise UsageError("kappa needs --model bary or scalefree")
    if args.command == "germ" and args.n < 3:
        raise UsageError("germ needs --n >= 3")
    if getattr(args, "statistic", None) == "recentered" and args.n < 3:
        raise UsageError("recentring needs --n >= 3")
    if args.command == "limit" and args.theorem is not None:
        needs = {"T1": "bary", "T2": "bary", "T3": "scalefree", "T3G": "scalefree", "E19": "urt"}
        if needs[args.theorem] != args.model:
            raise UsageError(f"--theorem {args.theorem} needs --model {needs[args.theorem]}")
    if args.command == "branch" and args.target is not None and not args.target > 0:
        raise UsageError("--target must be positive")


def model_of(args) -> TreeModel:
    if args.model == "bary":
        return BAry(2 if args.b is None else args.b)
    if args.model == "scalefree":
        return ScaleFree(0.0 if args.a is None else args.a)
    return UniformRecursive()


def _c(args) -> float:
    return 1.0 if args.c is None else float(args.c)


def _p(args) -> Optional[float]:
    if args.p is not None:
        return float(args.p)
    if args.model == "bary" and args.n == 1:
        return None  # a single internal vertex has no edge to percolate
    return p_of(_c(args), args.n)


def _b_or_a(model) -> Optional[float]:
    if isinstance(model, BAry):
        return model.b
    if isinstance(model, ScaleFree):
        return model.a
    return None


def spec_for(model, c: float, *, clone_mass: bool = False) -> ll.LimitSpec:
    if isinstance(model, BAry):
        return ll.LimitSpec(ll.Theorem.T2_BRANCHING if clone_mass else ll.Theorem.T1_BARY, c, model.beta)
    if isinstance(model, ScaleFree):
        return ll.LimitSpec(ll.Theorem.T3_BRANCHING if clone_mass else ll.Theorem.T3_SCALEFREE,
                            c, model.alpha)
    return ll.LimitSpec(ll.Theorem.E19_URT, c)


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out", "figures", "threads")}
    return _jsonable(cfg)


def _cf_table(sample, thetas, reference) -> tuple[list[dict], float]:
    rows = []
    worst = 0.0
    for th, (v, se_re, se_im) in zip(thetas, stats.empirical_cf(sample, thetas)):
        ref = complex(reference(th))
        worst = max(worst, abs(v - ref))
        rows.append({"theta": th, "empirical": v, "se_re": se_re, "se_im": se_im, "reference": ref,
                     "abs_diff": abs(v - ref)})
    return rows, worst


# ---------------------------------------------------------------------------
# subcommands; each returns (rows, columns, summary, figures callback)


def _replica_row(r, model, c, n, p, **fields) -> dict:
    row = dict.fromkeys(REPLICA_COLUMNS)
    row.update(replica=r, model=model.label, b_or_a=_b_or_a(model), c=c, n=n, p=p)
    row.update(fields)
    return row


def cmd_percolate(args):
    model = model_of(args)
    c, n, p = _c(args), args.n, _p(args)
    batch = trees.percolate_replicas(model, n, 1.0 if p is None else p, args.reps, args.seed,
                                     args.threads, args.largest)
    ratio = batch.root_cluster / n
    spec = spec_for(model, c)
    stat = ll.recenter(ratio, n, spec) if args.statistic == "recentered" else ratio
    rows = [
        _replica_row(r, model, c, n, p, root_cluster=batch.root_cluster[r],
                     largest_cluster=None if batch.largest_cluster is None else batch.largest_cluster[r],
                     statistic_value=stat[r])
        for r in range(len(batch))
    ]
    summary = {"root_cluster": stats.summarize(batch.root_cluster).as_dict(),
               "ratio": stats.summarize(ratio).as_dict(),
               "lln_center": spec.center,
               "statistic": stats.summarize(stat).as_dict()}
    if batch.largest_cluster is not None:
        summary["largest_cluster"] = stats.summarize(batch.largest_cluster).as_dict()
    if args.statistic == "recentered":
        table, worst = _cf_table(stat, args.theta_grid,
                                 lambda th: ll.limit_variable_cf(th, spec, min(args.tol, 1e-10)))
        summary["cf_vs_limit"] = {"theorem": spec.theorem.value, "table": table, "sup_abs_diff": worst}

    def figures(d: Path):
        from . import plotting
        ref = None
        if args.statistic == "recentered":
            ref = np.vectorize(lambda x: ll.limit_cdf(x, spec, 1e-6))
        plotting.ecdf_figure({"simulated": stat}, d / "percolate_statistic.png",
                             xlabel=f"{args.statistic} statistic", reference=ref)

    return rows, REPLICA_COLUMNS, summary, figures


def _branch_stop(args, params):
    if args.stop == "total":
        target = params.total_for_size() if args.target is None else args.target
        return br.TotalReaches(target)
    target = params.total_for_size() if args.target is None else args.target
    return br.AncestralReaches(target)


def _branch_params(args, model):
    if args.p is not None:
        return br.BranchingParams(model, args.n, float(args.p), _c(args))
    return br.BranchingParams.from_c(model, _c(args), args.n)


def cmd_branch(args):
    model = model_of(args)
    params = _branch_params(args, model)
    c, n = _c(args), args.n
    batch = br.run_replicas(params, _branch_stop(args, params), args.reps, args.seed, args.mode,
                            args.threads)
    z0 = batch.z0
    ratio = z0 / n
    spec = spec_for(model, c, clone_mass=True)
    stat = ll.recenter(ratio, n, spec) if args.statistic == "recentered" else ratio
    rows = [
        _replica_row(r, model, c, n, params.p,
                     root_cluster=None if batch.cluster[r] < 0 else batch.cluster[r],
                     z0=z0[r], z_mut=batch.z_mut[r], mutations=batch.mutations[r],
                     statistic_value=stat[r], extinct=bool(batch.extinct[r]))
        for r in range(len(batch))
    ]
    alive = ~batch.extinct
    summary = {"z0": stats.summarize(z0).as_dict(),
               "z_mut": stats.summarize(batch.z_mut).as_dict(),
               "mutations": stats.summarize(batch.mutations).as_dict(),
               "statistic": stats.summarize(stat).as_dict(),
               "extinct": int(batch.extinct.sum())}
    if np.any(alive) and np.any(batch.cluster[alive] >= 0):
        summary["derived_cluster"] = stats.summarize(batch.cluster[batch.cluster >= 0]).as_dict()
    if args.mode == "continuous":
        summary["time"] = stats.summarize(batch.time).as_dict()
    if args.statistic == "recentered":
        table, worst = _cf_table(stat, args.theta_grid,
                                 lambda th: ll.limit_variable_cf(th, spec, min(args.tol, 1e-10)))
        summary["cf_vs_limit"] = {"theorem": spec.theorem.value, "table": table, "sup_abs_diff": worst}

    def figures(d: Path):
        from . import plotting
        plotting.ecdf_figure({"z0 / n": ratio}, d / "branch_clone_ratio.png", xlabel="z0 / n")

    return rows, REPLICA_COLUMNS, summary, figures


def cmd_couple_check(args):
    model = model_of(args)
    if isinstance(model, UniformRecursive):
        raise UsageError("couple-check needs --model bary or scalefree")
    params = _branch_params(args, model)
    c, n, p = _c(args), args.n, params.p
    tb = trees.percolate_replicas(model, n, p, args.reps, args.seed, args.threads)
    bb = br.run_replicas(params, br.TotalReaches(params.total_for_size()), args.reps, args.seed,
                         br.Mode.JUMP, args.threads)
    rows = []
    for r in range(args.reps):
        rows.append(_replica_row(r, model, c, n, p, root_cluster=tb.root_cluster[r],
                                 statistic_value=tb.root_cluster[r] / n))
        rows.append(_replica_row(r, model, c, n, p, root_cluster=bb.cluster[r], z0=bb.z0[r],
                                 z_mut=bb.z_mut[r], mutations=bb.mutations[r],
                                 statistic_value=bb.cluster[r] / n, extinct=False))
    ks = stats.ks_two_sample(tb.root_cluster, bb.cluster)
    summary = {"tree_root_cluster": stats.summarize(tb.root_cluster).as_dict(),
               "coupled_root_cluster": stats.summarize(bb.cluster).as_dict(),
               "ks": ks.as_dict()}
    sys.stderr.write(f"ks_statistic={ks.statistic:.6g} threshold_1e-3={ks.threshold_at(1e-3):.6g}\n")

    def figures(d: Path):
        from . import plotting
        plotting.ecdf_figure({"tree": tb.root_cluster, "coupling": bb.cluster},
                             d / "couple_check_ecdf.png", xlabel="root cluster size")

    return rows, REPLICA_COLUMNS, summary, figures


def cmd_germ(args):
    model = model_of(args)
    params = _branch_params(args, model)
    c, n = _c(args), args.n
    samples = br.germ_replicas(params, args.reps, args.seed, args.threads)
    delta0 = np.array([s.delta0 for s in samples], dtype=float)
    delta = np.array([s.delta for s in samples], dtype=float)
    extinct = np.array([s.extinct for s in samples], dtype=bool)
    spec = spec_for(model, c)
    stat = ll.germ_recenter(delta0, n, spec) if args.statistic == "germ" else delta0
    rows = [_replica_row(r, model, c, n, params.p, z_mut=delta[r], statistic_value=stat[r],
                         extinct=bool(extinct[r]))
            for r in range(len(samples))]
    big_l, threshold = br.germ_thresholds(params)
    summary = {"L": big_l, "threshold": threshold,
               "delta": stats.summarize(delta).as_dict(),
               "statistic": stats.summarize(stat).as_dict(),
               "extinct": int(extinct.sum())}
    if np.any(~extinct):
        summary["statistic_non_extinct"] = stats.summarize(stat[~extinct]).as_dict()
    if args.statistic == "germ":
        table, worst = _cf_table(stat, args.theta_grid,
                                 lambda th: ll.germ_limit_cf(th, spec, min(args.tol, 1e-10)))
        summary["cf_vs_limit"] = {"table": table, "sup_abs_diff": worst}

    def figures(d: Path):
        from . import plotting
        plotting.ecdf_figure({"all": stat, "non-extinct": stat[~extinct]} if np.any(~extinct)
                             else {"all": stat}, d / "germ_statistic.png",
                             xlabel=f"{args.statistic} statistic")

    return rows, REPLICA_COLUMNS, summary, figures


def cmd_limit(args):
    model = model_of(args)
    c = _c(args)
    if args.theorem is None:
        spec = spec_for(model, c)
    else:
        th = ll.Theorem(args.theorem)
        spec = spec_for(model, c, clone_mass=th in (ll.Theorem.T2_BRANCHING, ll.Theorem.T3_BRANCHING))
    xs = list(args.x_grid)
    cdf = [ll.limit_cdf(x, spec, args.tol) for x in xs]
    rows = [{"theorem": spec.theorem.value, "c": c, "shape": spec.shape, "x": x, "cdf": f}
            for x, f in zip(xs, cdf)]
    summary = {"theorem": spec.theorem.value, "center": spec.center, "scale": spec.scale,
               "shift": spec.shift(min(args.tol, 1e-10)), "cdf": rows}

    def figures(d: Path):
        from . import plotting
        plotting.curve_figure(xs, cdf, d / "limit_cdf.png", xlabel="x", ylabel="CDF")

    return rows, LIMIT_COLUMNS, summary, figures


def cmd_kappa(args):
    model = model_of(args)
    if isinstance(model, BAry):
        res = ll.kappa_beta(model.beta, args.tol)
        shape = model.beta
    else:
        res = ll.kappa_alpha_prime(model.alpha, args.tol)
        shape = model.alpha
    row = {"model": model.label, "b_or_a": _b_or_a(model), "shape": shape, "value": res.value,
           "tail_bound": res.tail_bound, "terms": res.terms}
    return [row], KAPPA_COLUMNS, {"kappa": row}, None


def cmd_cf_check(args):
    model = model_of(args)
    t = float(args.time)
    if not t >= 0:
        raise UsageError("--time must be >= 0")
    thetas = list(args.theta_grid)
    # founder family: a single mutant of the branching system evolves as the Yule process
    params = br.BranchingParams.with_p(model, 1.0)
    mv = br._moves(model)
    founder = br.BranchingState(br.Mass(0, 0), mv.new_mutant, 1, 0, 0.0, mv.a)
    yb = br.run_replicas(params, br.TimeReaches(t), args.reps, args.seed, br.Mode.CONTINUOUS,
                         args.threads, initial=founder)
    rows = []

    def add(check, est, ref):
        z_re = (est[0].real - ref.real) / est[1] if est[1] > 0 else 0.0
        z_im = (est[0].imag - ref.imag) / est[2] if est[2] > 0 else 0.0
        rows.append({"check": check, "theta": th, "estimate_re": est[0].real,
                     "estimate_im": est[0].imag, "se_re": est[1], "se_im": est[2],
                     "reference_re": ref.real, "reference_im": ref.imag, "z_re": z_re, "z_im": z_im})

    for th, est in zip(thetas, stats.empirical_cf(yb.z_mut, thetas)):
        add("yule", est, complex(br.mutant_founder_cf(th, t, model)))

    fp_params = _branch_params(args, model) if args.p is not None or args.c is not None \
        else br.BranchingParams.with_p(model, 0.7)
    direct, mixed = br.filtered_poisson_estimates(fp_params, t, thetas, args.reps, args.seed,
                                                  args.threads)
    exact = br.conditional_mutation_estimates(fp_params, t, thetas, args.reps, args.seed,
                                              args.threads)
    for d, m, e in zip(direct, mixed, exact):
        th = d.theta
        # combined standard errors of the two independent estimates
        add("filtered_poisson", (d.value, math.hypot(d.se_re, m.se_re), math.hypot(d.se_im, m.se_im)),
            m.value)
        add("mutation_times", (d.value, math.hypot(d.se_re, e.se_re), math.hypot(d.se_im, e.se_im)),
            e.value)
    summary = {"time": t, "p": fp_params.p, "rows": rows,
               "max_abs_z": {chk: max(max(abs(r["z_re"]), abs(r["z_im"])) for r in rows
                                      if r["check"] == chk)
                             for chk in ("yule", "filtered_poisson", "mutation_times")}}

    def figures(d: Path):
        from . import plotting
        yrows = [r for r in rows if r["check"] == "yule"]
        plotting.cf_figure([r["theta"] for r in yrows],
                           [complex(r["estimate_re"], r["estimate_im"]) for r in yrows],
                           [complex(r["reference_re"], r["reference_im"]) for r in yrows],
                           d / "cf_yule.png", title=f"founder CF at t={t:g}")

    return rows, CF_COLUMNS, summary, figures


COMMANDS = {
    "percolate": cmd_percolate,
    "branch": cmd_branch,
    "couple-check": cmd_couple_check,
    "germ": cmd_germ,
    "limit": cmd_limit,
    "kappa": cmd_kappa,
    "cf-check": cmd_cf_check,
}


# ---------------------------------------------------------------------------
# emission


def render_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(col)) for col in columns])
    return buf.getvalue()


def render_json(args, summary: dict) -> str:
    doc = {"command": args.command, "config": _config(args), "summary": _jsonable(summary)}
    return json.dumps(doc, indent=2) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        validate(args)
        rows, columns, summary, figures = COMMANDS[args.command](args)
    except ParameterError as exc:
        sys.stderr.write(f"yuleperc: error: {exc}\n")
        return 1
    except (ConvergenceError, InvariantViolation) as exc:
        kind = "invariant" if isinstance(exc, InvariantViolation) else "convergence"
        record = {"error": kind, "type": type(exc).__name__, "message": str(exc),
                  "command": args.command}
        sys.stderr.write(json.dumps(record) + "\n")
        return 2
    text = render_json(args, summary) if args.output == "json" else render_csv(rows, columns)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    if args.figures is not None and figures is not None:
        figures(args.figures)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))
