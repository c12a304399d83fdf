"""Command-line harness: reproducible experiments with config echo and CSV
emission.  Exit codes: 0 success, 2 precondition violations, 3 invariant
failures, 1 internal errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback

import numpy as np

from . import estimates, lifespan, picard
from .core import (
    ProblemSpec,
    RadialGrid,
    WeightParams,
    critical_exponents,
    lambda_norms,
    norm_report,
)
from .errors import GlasseyLabError, PreconditionViolation
from .report import fmt_value, read_config, write_config, write_csv, write_series
from .solver import DataProfile, energy, evolve, make_profile

SUBCOMMANDS = ("solve", "ineq", "kss", "picard", "lifespan", "norms")


class InvariantFailure(Exception):
    """An asserted bound or band was breached by the measured data."""


def _add_common(parser):
    parser.add_argument("--n", type=int, default=3, help="space dimension")
    parser.add_argument("--p", type=float, default=2.0, help="nonlinearity power")
    parser.add_argument("--a", type=float, default=1.0, help="|u_t|^p coefficient")
    parser.add_argument("--b", type=float, default=0.0, help="|grad u|^p coefficient")
    parser.add_argument("--rmax", type=float, default=20.0, help="domain radius")
    parser.add_argument("--cells", type=int, default=2000, help="grid cells")
    parser.add_argument("--cfl", type=float, default=0.25, help="dt / dr ratio")
    parser.add_argument("--out", type=str, default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=7, help="base seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel tasks")
    parser.add_argument("--config", type=str, default=None, help="config file with flag defaults")


def _add_profile(parser, include_eps=True):
    parser.add_argument("--profile", choices=("gaussian", "smooth_bump", "from_file"),
                        default="gaussian")
    if include_eps:
        parser.add_argument("--eps", type=float, default=1.0, help="data amplitude")
    parser.add_argument("--width", type=float, default=1.0)
    parser.add_argument("--center", type=float, default=0.0)
    parser.add_argument("--assigns", choices=("to_u0", "to_u1", "split"), default="to_u0")
    parser.add_argument("--data-file", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glassey-lab",
        description="Numerical laboratory for radial derivative-nonlinearity waves.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_solve = sub.add_parser("solve", help="evolve one data profile")
    _add_common(p_solve)
    _add_profile(p_solve)
    p_solve.add_argument("--t-end", type=float, default=1.0)
    p_solve.add_argument("--linear", action="store_true", help="drop the nonlinearity")
    p_solve.add_argument("--stride", type=int, default=10)

    p_ineq = sub.add_parser("ineq", help="seeded inequality suite")
    _add_common(p_ineq)
    p_ineq.add_argument("--lemma", choices=("hardy", "trace", "trace_variant"), required=True)
    p_ineq.add_argument("--s", type=float, required=True)
    p_ineq.add_argument("--samples", type=int, default=200)
    p_ineq.add_argument("--tol", type=float, default=estimates.DEFAULT_TOL)

    p_kss = sub.add_parser("kss", help="uniform-in-T space-time bounds")
    _add_common(p_kss)
    _add_profile(p_kss)
    p_kss.add_argument("--variant", choices=("hom", "inhom"), default="hom")
    p_kss.add_argument("--delta", type=float, default=0.3)
    p_kss.add_argument("--delta-prime", type=float, default=0.2)
    p_kss.add_argument("--t-list", type=str, default="1,10,100")
    p_kss.add_argument("--band", type=float, default=estimates.KSS_BAND)
    p_kss.add_argument("--stride", type=int, default=10)

    p_pic = sub.add_parser("picard", help="contraction-map iteration")
    _add_common(p_pic)
    _add_profile(p_pic)
    p_pic.add_argument("--t-end", type=float, default=10.0)
    p_pic.add_argument("--max-iters", type=int, default=12)
    p_pic.add_argument("--tol", type=float, default=1e-8)
    p_pic.add_argument("--stride", type=int, default=10)

    p_life = sub.add_parser("lifespan", help="epsilon sweep and scaling-law fit")
    _add_common(p_life)
    _add_profile(p_life, include_eps=False)
    p_life.add_argument("--eps-list", "--eps", dest="eps_list", type=str,
                        default="0.7,1.0,1.4,2.0,2.8",
                        help="comma list of sweep amplitudes")
    p_life.add_argument("--horizon", type=float, default=40.0)
    p_life.add_argument("--ladder", type=str, default=None,
                        help="comma list of cell counts; default cells/2,cells")
    p_life.add_argument("--stride", type=int, default=10)
    # defaults sized for the stock subcritical battery
    p_life.set_defaults(rmax=48.0, cells=3840, assigns="split", stride=20)

    p_norms = sub.add_parser("norms", help="norm report for a linear evolution")
    _add_common(p_norms)
    _add_profile(p_norms)
    p_norms.add_argument("--t-end", type=float, default=10.0)
    p_norms.add_argument("--delta", type=float, default=0.3)
    p_norms.add_argument("--delta-prime", type=float, default=0.2)
    p_norms.add_argument("--stride", type=int, default=10)

    return parser


def _profile_from(args) -> DataProfile:
    return DataProfile(
        family=args.profile,
        epsilon=getattr(args, "eps", 1.0),
        width=args.width,
        center=args.center,
        assigns=args.assigns,
        path=args.data_file,
    )


def _echo_config(args, parser_keys):
    values = {k: getattr(args, k) for k in parser_keys if k != "config"}
    values["subcommand"] = args.subcommand
    write_config(os.path.join(args.out, "config.txt"), values)


def _parse_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _run_solve(args):
    spec = ProblemSpec(n_dim=args.n, p=args.p, a=args.a, b=args.b)
    grid = RadialGrid(r_max=args.rmax, num_cells=args.cells)
    data = make_profile(_profile_from(args), grid)
    outcome = evolve(
        spec, data.u0, data.u1, grid, args.t_end,
        linear_only=args.linear, cfl=args.cfl, sample_stride=args.stride,
    )
    rows = []
    for state in outcome.trajectory.states:
        rows.append({
            "t": state.time,
            "energy": energy(state, args.n),
            "max_v": float(np.max(np.abs(state.v.values))),
            "max_u": float(np.max(np.abs(state.u.values))),
        })
    write_csv(os.path.join(args.out, "series.csv"), "solve",
              ("t", "energy", "max_v", "max_u"), rows)
    write_series(os.path.join(args.out, "energy_series.txt"), "t energy",
                 [(row["t"], row["energy"]) for row in rows])
    write_csv(os.path.join(args.out, "outcome.csv"), "solve",
              ("status", "t_blowup", "peak_gradient", "t_end"),
              [{"status": outcome.status, "t_blowup": outcome.t_blowup,
                "peak_gradient": outcome.peak_gradient,
                "t_end": outcome.trajectory.t_end}])
    print(f"solve: {outcome.status} t_end={fmt_value(outcome.trajectory.t_end)} "
          f"peak={fmt_value(outcome.peak_gradient)}")


def _run_ineq(args):
    samples = estimates.run_ineq_suite(
        args.lemma, args.n, args.s, args.samples, args.seed,
        r_max=args.rmax, num_cells=args.cells, tol=args.tol, jobs=args.jobs,
    )
    write_csv(os.path.join(args.out, "ineq.csv"), "ineq",
              estimates.SUITE_COLUMNS, [s.row() for s in samples])
    violations = sum(1 for s in samples if s.violation)
    print(f"ineq {args.lemma}: {len(samples)} samples, {violations} violations, "
          f"max ratio {fmt_value(max(s.ratio for s in samples))}")
    if violations:
        bad = [s for s in samples if s.violation][:5]
        for s in bad:
            print(f"  violation: {s.row()}")
        raise InvariantFailure(f"{violations} bound violations in {args.lemma} suite")


def _run_kss(args):
    t_list = _parse_list(args.t_list)
    rows = []
    if args.variant == "hom":
        grid = RadialGrid(r_max=args.rmax, num_cells=args.cells)
        data = make_profile(_profile_from(args), grid)
        samples, details = estimates.kss_hom_check(
            data.u0, data.u1, args.n, args.delta, args.delta_prime, t_list,
            cfl=args.cfl, sample_stride=args.stride,
        )
        for s in samples:
            row = s.row()
            row.update({k: v for k, v in details[s.params["T"]].items()})
            rows.append(row)
        columns = estimates.SUITE_COLUMNS + ("e1", "le1", "deriv", "field", "log", "horizon")
    else:
        forcing = estimates.ForcingSpec(
            amplitude=args.eps, space_center=args.center, space_width=args.width,
            t_on=0.0, t_off=1.0,
        )
        samples = [
            estimates.kss_inhom_check(
                forcing, args.n, args.delta, args.delta_prime, T,
                cfl=args.cfl, sample_stride=args.stride,
            )
            for T in t_list
        ]
        rows = [s.row() for s in samples]
        columns = estimates.SUITE_COLUMNS
    write_csv(os.path.join(args.out, "kss.csv"), "kss", columns, rows)
    write_series(os.path.join(args.out, "band_series.txt"), "T ratio",
                 [(s.params["T"], s.ratio) for s in samples])
    ratios = [fmt_value(s.ratio) for s in samples]
    print(f"kss {args.variant}: ratios {ratios}")
    if not estimates.kss_band_ok(samples, band=args.band):
        for row in rows:
            print(f"  breakdown: {row}")
        raise InvariantFailure(f"kss {args.variant} ratios breach the {args.band:.0%} band")


def _run_picard(args):
    spec = ProblemSpec(n_dim=args.n, p=args.p, a=args.a, b=args.b)
    grid = RadialGrid(r_max=args.rmax, num_cells=args.cells)
    data = make_profile(_profile_from(args), grid)
    result = picard.picard_run(
        spec, data.u0, data.u1, grid, args.t_end,
        max_iters=args.max_iters, tol=args.tol, cfl=args.cfl, sample_stride=args.stride,
    )
    rows = [{
        "iteration": t.iteration, "rho_step": t.rho_step,
        "e1": t.e1, "e2": t.e2, "le1": t.le1, "le2": t.le2,
    } for t in result.trace]
    write_csv(os.path.join(args.out, "picard_trace.csv"), "picard",
              ("iteration", "rho_step", "e1", "e2", "le1", "le2"), rows)
    write_series(os.path.join(args.out, "rho_series.txt"), "iteration rho",
                 [(t.iteration, t.rho_step) for t in result.trace])
    print(f"picard: converged={result.converged} iterations={len(result.trace)} "
          f"delta={fmt_value(result.weights.delta)} "
          f"delta_prime={fmt_value(result.weights.delta_prime)}")
    if not result.converged:
        raise InvariantFailure("picard iteration did not converge")


def _run_lifespan(args):
    spec = ProblemSpec(n_dim=args.n, p=args.p, a=args.a, b=args.b)
    eps = _parse_list(args.eps_list)
    if args.ladder:
        ladder = [int(c) for c in _parse_list(args.ladder)]
    else:
        ladder = [args.cells // 2, args.cells]
    profile = _profile_from(args)
    records = lifespan.sweep(
        spec, profile, eps, ladder, args.horizon, args.rmax,
        cfl=args.cfl, sample_stride=args.stride, jobs=args.jobs,
    )
    write_csv(os.path.join(args.out, "sweep.csv"), "lifespan",
              lifespan.SWEEP_COLUMNS, [r.row() for r in records])
    write_series(os.path.join(args.out, "sweep_series.txt"), "epsilon t_observed",
                 [(r.epsilon, r.t_observed) for r in records])
    law = lifespan.predicted_law(spec)
    fits = []
    if law.regime == "subcritical":
        fits.append(lifespan.fit_power(records, spec))
    elif law.regime == "critical":
        fits.append(lifespan.fit_exponential(records, spec))
    write_csv(os.path.join(args.out, "fit.csv"), "lifespan",
              lifespan.FIT_COLUMNS, [f.row() for f in fits])
    print(f"lifespan: regime={law.regime} records={len(records)} "
          f"censored={sum(1 for r in records if r.censored)}")
    for f in fits:
        print(f"  fit {f.model}: slope={fmt_value(f.slope)} r2={fmt_value(f.r_squared)} "
              f"verdict={f.verdict}")


def _run_norms(args):
    spec = ProblemSpec(n_dim=args.n, p=args.p, a=args.a, b=args.b)
    grid = RadialGrid(r_max=args.rmax, num_cells=args.cells)
    data = make_profile(_profile_from(args), grid)
    outcome = evolve(
        spec, data.u0, data.u1, grid, args.t_end,
        linear_only=True, cfl=args.cfl, sample_stride=args.stride,
    )
    w = WeightParams(delta=args.delta, delta_prime=args.delta_prime, horizon=args.t_end)
    report = norm_report(outcome.trajectory, w)
    lam = lambda_norms(data.u0, data.u1, args.n)
    exps = critical_exponents(spec)
    rows = [
        {"quantity": "p_c", "value": exps.p_c},
        {"quantity": "s_c", "value": exps.s_c},
        {"quantity": "lambda1", "value": lam.lambda1},
        {"quantity": "lambda2", "value": lam.lambda2},
        {"quantity": "e1", "value": report.e1},
        {"quantity": "e2", "value": report.e2},
        {"quantity": "le1", "value": report.le1},
        {"quantity": "le2", "value": report.le2},
    ]
    for name, val in report.components.items():
        rows.append({"quantity": f"le1_{name}", "value": val})
    write_csv(os.path.join(args.out, "norms.csv"), "norms", ("quantity", "value"), rows)
    print(f"norms: e1={fmt_value(report.e1)} le1={fmt_value(report.le1)}")


_RUNNERS = {
    "solve": _run_solve,
    "ineq": _run_ineq,
    "kss": _run_kss,
    "picard": _run_picard,
    "lifespan": _run_lifespan,
    "norms": _run_norms,
}


def _apply_config(argv):
    """Fold `--config file` defaults in front of the explicit flags."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        raise PreconditionViolation("--config needs a file path")
    path = argv[at + 1]
    values = read_config(path)
    sub = argv[0] if argv and not argv[0].startswith("-") else values.get("subcommand")
    if sub is None:
        raise PreconditionViolation("config file does not name a subcommand")
    rest = argv[1:] if argv and not argv[0].startswith("-") else argv
    folded = [sub]
    for key, val in sorted(values.items()):
        if key == "subcommand" or val == "":
            continue
        flag = "--" + key.replace("_", "-")
        if val == "true":
            folded.append(flag)
        elif val == "false":
            continue
        else:
            folded.extend([flag, val])
    folded.extend(rest)
    return folded


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
    except (GlasseyLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    keys = [k for k in vars(args) if k != "subcommand"]
    try:
        os.makedirs(args.out, exist_ok=True)
        _echo_config(args, keys)
        _RUNNERS[args.subcommand](args)
        return 0
    except InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        _print_params(args)
        return 3
    except GlasseyLabError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        _print_params(args)
        return 2
    except Exception:
        traceback.print_exc()
        _print_params(args)
        return 1


def _print_params(args):
    params = {k: v for k, v in vars(args).items() if k != "config"}
    print(f"parameters: {params}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
