"""``putlab`` command line.

Exit codes: 0 success, 1 usage or I/O error, 2 a bound or exactness check
was violated.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import io as pio
from .bounds import BoundReport, HolderSpec, finfo_holder_constants, pc_holder_constants, theorem1_bound
from .experiments import montecarlo_theorem1, validate_lemma2
from .measures import MetricSpec, builtin_generators, parse_metric
from .prob import (
    Alphabet,
    BallSpec,
    MarginalLowerBound,
    devroye_radius,
    empirical_from_samples,
    merge_rare_symbols,
    parse_family,
)
from .solver import (
    MAX_GRID_X,
    SolveConfig,
    put_curve,
    solve_put_grid,
    solve_put_local,
    solve_robust,
)

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _labels(s: str | None):
    return None if s is None else Alphabet(x.strip() for x in s.split(","))


def _metrics(args) -> tuple[MetricSpec, MetricSpec]:
    leak = parse_metric(args.metric)
    util = parse_metric(args.util_metric) if args.util_metric else leak
    return leak, util


def _config(args, x_size: int) -> SolveConfig:
    return SolveConfig(
        grid_resolution=args.grid,
        restarts=args.restarts,
        local_steps=args.steps,
        seed=args.seed if args.seed is not None else 0,
    )


def _method(args, x_size: int) -> str:
    method = args.method
    if method == "auto":
        method = "grid" if x_size <= MAX_GRID_X else "local"
    if method == "local" and args.seed is None:
        raise UsageError("--seed is required for the local solver")
    return method


# -- commands -------------------------------------------------------------------


def cmd_estimate(args) -> int:
    samples = pio.read_samples_csv(args.samples)
    s_alpha = _labels(args.s_labels) or Alphabet(sorted({s for s, _ in samples.pairs}))
    x_alpha = _labels(args.x_labels) or Alphabet(sorted({x for _, x in samples.pairs}))
    dev = devroye_radius(args.lam, len(s_alpha), len(x_alpha), samples.n)
    pmf = empirical_from_samples(samples, s_alpha, x_alpha)
    pio.write_json(args.out, pio.pmf_to_dict(pmf))
    report = args.report or str(Path(args.out).with_suffix(".devroye.json"))
    pio.write_json(report, dev.to_dict())
    print(f"n={samples.n} M={dev.big_m} radius={dev.radius!r} beta={dev.beta!r}")
    return EXIT_OK


def cmd_certify(args) -> int:
    spec = parse_metric(args.metric)
    if spec.generator is None:
        raise UsageError("certify needs an f-information metric (tv, chi2, hellinger:<alpha>)")
    f = spec.generator
    p_hat = pio.load_pmf(args.pmf)
    merged, mm = merge_rare_symbols(p_hat, args.gamma)
    ms_emp = float(p_hat.row_marginal().min())
    mx = merged.col_marginal()
    if not mm.dropped:
        mx = mx[:-1]  # an empty sink is not a symbol
    mx_emp = float(mx.min())
    m_s = min(ms_emp, args.ms_floor) if args.ms_floor is not None else ms_emp
    m_x = min(mx_emp, args.mx_floor) if args.mx_floor is not None else mx_emp
    ns, nx = p_hat.shape
    notes = []
    if args.ms_floor is None or args.mx_floor is None:
        notes.append("true-marginal floors not asserted; m_s/m_x use empirical marginals only")
    if len(mx) == 1:
        # one merged symbol: Y0 is independent of S and X, both informations vanish
        dev = devroye_radius(args.lam, ns, nx, args.n)
        report = BoundReport(
            kind="theorem1",
            inputs={"generator": f.name, "lambda": args.lam, "s_size": ns, "x_size": nx,
                    "n": args.n, "m_s": m_s, "m_x": 1.0, "delta": 1.0},
            bound_values={"leakage_gap": 0.0, "utility_gap": 0.0, "radius": dev.radius},
            probability=1.0 - dev.beta,
            notes=notes + ["single merged symbol: released output carries no information"],
        )
    else:
        if m_s <= 0 or m_x <= 0:
            raise UsageError(f"least-likely mass is zero (m_s={m_s}, m_x={m_x}); raise --gamma")
        report = theorem1_bound(f, args.lam, ns, nx, args.n, m_s, m_x)
        report.notes.extend(notes)
    report.inputs.update({
        "pmf": str(args.pmf), "gamma": args.gamma, "kept": list(mm.kept), "sink": mm.sink,
        "ms_floor": args.ms_floor, "mx_floor": args.mx_floor,
        "m_s_empirical": ms_emp, "m_x_empirical": mx_emp,
    })
    _emit(args.out, pio.dumps(report.to_dict()))
    return EXIT_OK


def cmd_solve(args) -> int:
    p = pio.load_pmf(args.pmf)
    leak, util = _metrics(args)
    cfg = _config(args, len(p.cols))
    method = _method(args, len(p.cols))
    solve = solve_put_grid if method == "grid" else solve_put_local
    sol = solve(p, leak, util, args.eps, cfg)
    _emit(args.out, pio.dumps(pio.solution_to_dict(sol)))
    return EXIT_OK


def _holder(args, leak: MetricSpec, util: MetricSpec, family) -> HolderSpec:
    if args.holder:
        parts = [float(v) for v in args.holder.split(",")]
        c_l, c_u = parts[0], parts[1]
        alpha = parts[2] if len(parts) > 2 else 1.0
        return HolderSpec(r0=float("inf"), alpha=alpha, c_l=c_l, c_u=c_u, certified=False)
    if leak.generator is None and util.generator is None:
        return pc_holder_constants()
    if not isinstance(family, MarginalLowerBound):
        raise UsageError("f-information metrics need --family gamma:<g> (or explicit --holder)")
    pc = pc_holder_constants()
    hl = pc if leak.generator is None else finfo_holder_constants(leak.generator, family.gamma)
    hu = pc if util.generator is None else finfo_holder_constants(util.generator, family.gamma)
    return HolderSpec(r0=float("inf"), alpha=1.0, c_l=hl.c_l, c_u=hu.c_u,
                      certified=hl.certified and hu.certified)


def cmd_robust(args) -> int:
    center = pio.load_pmf(args.pmf)
    leak, util = _metrics(args)
    family = parse_family(args.family)
    ball = BallSpec(center, args.radius, family)
    holder = _holder(args, leak, util, family)
    cfg = replace(_config(args, len(center.cols)), ball_samples=args.ball_samples)
    sol = solve_robust(ball, leak, util, args.eps, holder, cfg)
    _emit(args.out, pio.dumps(pio.robust_to_dict(sol)))
    if sol.sampled_max_leakage > args.eps + cfg.tolerance:
        print(f"leakage {sol.sampled_max_leakage!r} exceeds eps on a ball sample", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _eps_grid(args) -> list[float]:
    if args.eps_grid:
        return [float(v) for v in args.eps_grid.split(",")]
    if args.eps_min is None or args.eps_max is None:
        raise UsageError("give --eps-grid or both --eps-min and --eps-max")
    k = args.eps_steps
    if k < 2:
        return [args.eps_min]
    step = (args.eps_max - args.eps_min) / (k - 1)
    return [args.eps_min + i * step for i in range(k)]


def cmd_curve(args) -> int:
    p = pio.load_pmf(args.pmf)
    leak, util = _metrics(args)
    cfg = _config(args, len(p.cols))
    method = _method(args, len(p.cols))
    points = put_curve(p, leak, util, _eps_grid(args), cfg, method=method)
    _emit(args.out, pio.curve_to_csv(points))
    if any(pt.monotone_violation for pt in points):
        print("privacy-utility curve decreases beyond grid slack", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    spec = parse_metric(args.metric)
    if spec.generator is None:
        raise UsageError("montecarlo-t1 needs an f-information metric")
    p = pio.load_pmf(args.pmf)
    mech = None if args.mechanism == "random" else pio.load_mechanism(args.mechanism)
    records, summary = montecarlo_theorem1(p, spec.generator, args.lam, args.n, args.gamma,
                                           args.trials, args.seed, mech)
    summary["pmf"] = str(args.pmf)
    summary["mechanism_source"] = args.mechanism
    _emit(args.out, pio.records_to_csv(records))
    summary_path = args.summary or (str(Path(args.out).with_suffix(".summary.json")) if args.out else None)
    if summary_path:
        pio.write_json(summary_path, summary)
    else:
        sys.stdout.write(pio.dumps(summary))
    return EXIT_OK if summary["passed"] else EXIT_VIOLATION


def cmd_lemma2(args) -> int:
    gens = builtin_generators() if args.metric == "all" else [parse_metric(args.metric).generator]
    if gens[0] is None:
        raise UsageError("validate-lemma2 needs f-information metrics")
    gammas = tuple(float(g) for g in args.gammas.split(","))
    summary = validate_lemma2(args.trials, args.seed, gammas, gens)
    _emit(args.out, pio.dumps(summary))
    return EXIT_OK if summary["passed"] else EXIT_VIOLATION


# -- parser ---------------------------------------------------------------------


def _solver_flags(sp, seed_required=False):
    sp.add_argument("--metric", default="pc", help="leakage metric: pc, tv, chi2, hellinger:A")
    sp.add_argument("--util-metric", default=None, help="utility metric (defaults to --metric)")
    sp.add_argument("--grid", type=int, default=None, help="simplex lattice denominator")
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--steps", type=int, default=400)
    sp.add_argument("--seed", type=int, required=seed_required, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="putlab", description="privacy-utility trade-off toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("estimate", help="empirical pmf and concentration radius from samples")
    sp.add_argument("--samples", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--s-labels", default=None)
    sp.add_argument("--x-labels", default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", default=None)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("certify", help="high-probability leakage/utility gap bounds")
    sp.add_argument("--pmf", required=True)
    sp.add_argument("--metric", default="tv")
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--ms-floor", type=float, default=None)
    sp.add_argument("--mx-floor", type=float, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("solve", help="best mechanism under a leakage budget")
    sp.add_argument("--pmf", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--method", choices=("auto", "grid", "local"), default="auto")
    _solver_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("robust", help="mechanism private for every pmf in an l1 ball")
    sp.add_argument("--pmf", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--radius", type=float, required=True)
    sp.add_argument("--family", default="full", help="full, gamma:<g> or pq")
    sp.add_argument("--holder", default=None, help="explicit c_l,c_u[,alpha]")
    sp.add_argument("--ball-samples", type=int, default=256)
    _solver_flags(sp, seed_required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_robust)

    sp = sub.add_parser("curve", help="tabulate the privacy-utility function")
    sp.add_argument("--pmf", required=True)
    sp.add_argument("--eps-grid", default=None)
    sp.add_argument("--eps-min", type=float, default=None)
    sp.add_argument("--eps-max", type=float, default=None)
    sp.add_argument("--eps-steps", type=int, default=11)
    sp.add_argument("--method", choices=("auto", "grid", "local"), default="auto")
    _solver_flags(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("montecarlo-t1", help="Monte Carlo check of the empirical gap bounds")
    sp.add_argument("--pmf", required=True, help="true joint pmf")
    sp.add_argument("--mechanism", default="random")
    sp.add_argument("--metric", default="tv")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", default=None, help="per-trial CSV")
    sp.add_argument("--summary", default=None, help="summary JSON")
    sp.set_defaults(func=cmd_montecarlo)

    sp = sub.add_parser("validate-lemma2", help="check that rare-symbol merging is lossless")
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--gammas", default="0,0.1,0.3")
    sp.add_argument("--metric", default="all")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_lemma2)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as e:
        print(f"putlab {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
