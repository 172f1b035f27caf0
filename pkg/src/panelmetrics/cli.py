"""Command-line surface.

Subcommands:
  formula   evaluate the closed-form panel law over a range of n
  plan      invert the law: smallest panel reaching a target precision
  curves    simulate single-scorer precision curves plus endpoint anchors
  scaling   fit the efficiency exponent over a (q, rho) grid
  analyze   full report over a real score table

Global flags: --seed, --threads, --out, --format. Exit codes: 0 ok,
2 bad arguments, 3 plan unachievable, 4 invalid input data.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .anchors import compute_anchors
from .emit import PlotSeries, fmt6, svg_line_plot, write_csv, write_json, write_run_config
from .empirics import build_report, load_scores
from .errors import ConfigError, DataValidationError, DomainError, PanelMetricsError
from .laws import (
    PanelQuery,
    effective_rho,
    efficiency_exponent,
    panel_precision,
    required_panel_size,
)
from .precision import log_q_grid, top_count
from .simulate import PRESETS, UniverseConfig, b_grid_scan, regress_b_on_rho
from .streams import (
    DistributionSpec,
    SeededStream,
    TailTransform,
    add_calibrated_noise,
    sample_signal,
)

_CURVE_DISTRIBUTIONS = ("normal", "lognormal", "pareto", "student_t")


def _parse_int_list(text: str) -> list[int]:
    """Accept "7", "1,3,5", or "1..5"."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def _parse_float_list(text: str) -> list[float]:
    values = [float(part) for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _parse_formats(text: str) -> list[str]:
    formats = [part.strip() for part in text.split(",") if part.strip()]
    bad = [f for f in formats if f not in ("csv", "json", "svg")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(bad)}")
    return formats


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    common.add_argument(
        "--threads", type=int, default=1, help="worker threads for grid scans"
    )
    common.add_argument(
        "--out", type=Path, default=None, help="output directory for result files"
    )
    common.add_argument(
        "--format",
        type=_parse_formats,
        default=["csv", "json"],
        help="comma list of csv,json,svg (default csv,json)",
    )

    parser = argparse.ArgumentParser(
        prog="panelmetrics",
        description="Panel selection precision: formulas, simulations, analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("formula", parents=[common], help="evaluate the panel law")
    p.add_argument("--q", type=float, required=True, help="selection quantile in (0,1]")
    p.add_argument("--rho", type=float, required=True, help="mean pairwise correlation")
    p.add_argument(
        "--n", type=_parse_int_list, default=[1], help='panel sizes: "3", "1,5", "1..10"'
    )
    p.add_argument(
        "--unclipped",
        action="store_true",
        help="use the raw-q exponent instead of clipping q into [0.07, 0.22]",
    )
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("plan", parents=[common], help="panel size for a precision target")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--target", type=float, required=True, help="precision target in (0,1)")
    p.add_argument("--n-max", type=int, default=30, help="largest panel considered")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("curves", parents=[common], help="simulated P1(q) curves + anchors")
    p.add_argument("--m", type=int, default=2000, help="candidates per trial")
    p.add_argument("--rho", type=float, default=0.8, help="scorer-truth correlation")
    p.add_argument("--trials", type=int, default=500, help="trials per distribution")
    p.add_argument("--t-dof", type=float, default=4.0, help="Student-t degrees of freedom")
    p.add_argument("--points", type=int, default=50, help="quantile grid points")
    p.add_argument(
        "--anchor-trials", type=int, default=20000, help="trials for the t anchor"
    )
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("scaling", parents=[common], help="exponent fits over a (q, rho) grid")
    p.add_argument("--q", type=_parse_float_list, default=[0.2], help="comma list of q")
    p.add_argument(
        "--rho",
        type=_parse_float_list,
        default=[0.30, 0.40, 0.50, 0.60, 0.70, 0.80],
        help="comma list of target rho",
    )
    p.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        default="desk",
        help="scan size preset (desk is laptop-scale; paper matches the source runs)",
    )
    p.add_argument(
        "--boost", type=float, default=0.0, help="superstar tail boost (0 disables)"
    )
    p.add_argument(
        "--samples", type=int, default=None, help="override preset panels per size"
    )
    p.add_argument(
        "--max-size", type=int, default=None, help="override preset largest panel"
    )
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("analyze", parents=[common], help="report over a score table")
    p.add_argument("input", type=Path, help="score table (.csv or .json)")
    p.add_argument("--q-points", type=int, default=50, help="quantile grid points")
    p.set_defaults(func=cmd_analyze)

    return parser


def _prepare_out(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo_config(out: Path | None, args, **extra) -> None:
    if out is None:
        return
    config = {
        "command": args.command,
        "seed": args.seed,
        "threads": args.threads,
        "format": list(args.format),
        **extra,
    }
    write_run_config(out, config, __version__)


def _regime_warning(q: float, rho: float) -> str | None:
    if q < 0.05 or rho > 0.9:
        return (
            "warning: q < 0.05 or rho > 0.9 is outside the regime the "
            "exponent law was fitted on; treat values as extrapolation"
        )
    return None


def _print_table(header: Sequence[str], rows: Sequence[Sequence]) -> None:
    print(",".join(header))
    for row in rows:
        print(",".join(fmt6(cell) for cell in row))


def cmd_formula(args) -> int:
    warn = _regime_warning(args.q, args.rho)
    if warn:
        print(warn, file=sys.stderr)
    clipped = not args.unclipped
    rows = []
    for n in args.n:
        b = efficiency_exponent(args.q, args.rho, clipped=clipped)
        rows.append(
            (
                n,
                b,
                effective_rho(n, args.rho, b),
                panel_precision(PanelQuery(q=args.q, rho=args.rho, n=n), clipped=clipped),
            )
        )
    header = ("n", "b", "rho_n", "precision")
    _print_table(header, rows)

    out = _prepare_out(args)
    if out is not None:
        doc = {
            "q": args.q,
            "rho": args.rho,
            "clipped": clipped,
            "regime_warning": warn,
            "rows": [dict(zip(header, row)) for row in rows],
        }
        if "csv" in args.format:
            write_csv(out / "formula.csv", header, rows)
        if "json" in args.format:
            write_json(out / "formula.json", doc)
        _echo_config(out, args, q=args.q, rho=args.rho, n=args.n, clipped=clipped)
    return 0


def cmd_plan(args) -> int:
    n = required_panel_size(args.q, args.rho, args.target, args.n_max)
    out = _prepare_out(args)
    achieved = (
        None if n is None else panel_precision(PanelQuery(q=args.q, rho=args.rho, n=n))
    )
    if out is not None:
        doc = {
            "q": args.q,
            "rho": args.rho,
            "target": args.target,
            "n_max": args.n_max,
            "required_n": n,
            "achieved_precision": achieved,
        }
        if "json" in args.format:
            write_json(out / "plan.json", doc)
        if "csv" in args.format:
            write_csv(
                out / "plan.csv",
                ("q", "rho", "target", "n_max", "required_n", "achieved_precision"),
                [(args.q, args.rho, args.target, args.n_max, n, achieved)],
            )
        _echo_config(out, args, q=args.q, rho=args.rho, target=args.target, n_max=args.n_max)
    if n is None:
        print(
            f"target {fmt6(args.target)} unachievable within n <= {args.n_max} "
            f"at q={fmt6(args.q)}, rho={fmt6(args.rho)}"
        )
        return 3
    print(
        f"panel of {n} reaches precision {fmt6(achieved)} "
        f"(target {fmt6(args.target)}) at q={fmt6(args.q)}, rho={fmt6(args.rho)}"
    )
    return 0


def _simulate_distribution_curve(
    spec: DistributionSpec,
    m: int,
    rho: float,
    trials: int,
    q_grid: np.ndarray,
    stream: SeededStream,
) -> np.ndarray:
    """Average precision over the grid for one signal distribution.

    Per trial: draw the signal, add calibrated noise, rank both, and
    count top-k overlaps for every grid point in one vectorized sweep.
    """
    ks = np.array([top_count(q, m) for q in q_grid])
    signal_root = stream.derive(0)
    noise_root = stream.derive(1)
    totals = np.zeros(q_grid.size)
    for trial in range(trials):
        nu = sample_signal(spec, m, signal_root.derive(trial))
        x = add_calibrated_noise(nu, rho, noise_root.derive(trial))
        rank_nu = np.empty(m, dtype=np.int64)
        rank_nu[np.argsort(-nu, kind="stable")] = np.arange(1, m + 1)
        rank_x = np.empty(m, dtype=np.int64)
        rank_x[np.argsort(-x, kind="stable")] = np.arange(1, m + 1)
        in_nu = rank_nu[None, :] <= ks[:, None]
        in_x = rank_x[None, :] <= ks[:, None]
        totals += (in_nu & in_x).sum(axis=1) / ks
    return totals / trials


def cmd_curves(args) -> int:
    if args.m < 10:
        raise DomainError("m must be at least 10")
    if args.trials < 1:
        raise DomainError("trials must be at least 1")
    if not 0.0 < args.rho < 1.0:
        raise DomainError("rho must lie strictly between 0 and 1")

    grid = log_q_grid(args.m, args.points)
    root = SeededStream(args.seed)
    curves = {}
    for index, kind in enumerate(_CURVE_DISTRIBUTIONS):
        spec = DistributionSpec(kind, t_dof=args.t_dof)
        curves[kind] = _simulate_distribution_curve(
            spec, args.m, args.rho, args.trials, grid, root.derive(index)
        )

    near_02 = int(np.argmin(np.abs(grid - 0.2)))
    p_avg_02 = float(np.mean([curves[kind][near_02] for kind in _CURVE_DISTRIBUTIONS]))
    anchors = compute_anchors(
        args.m,
        args.rho,
        args.t_dof,
        args.anchor_trials,
        root.derive(len(_CURVE_DISTRIBUTIONS)),
        p_avg_02,
    )
    ref = 1.0 + (1.0 - p_avg_02) / 0.8 * (grid - 1.0)

    print(
        f"m={args.m} rho={fmt6(args.rho)} trials={args.trials}: "
        f"avg P(0.2)={fmt6(p_avg_02)} "
        f"anchors: normal={fmt6(anchors.normal_limit)} "
        f"t={fmt6(anchors.t_limit)} heavy={fmt6(anchors.heavy_tail_estimate)}"
    )

    out = _prepare_out(args)
    if out is not None:
        header = ("q", *(f"p_{kind}" for kind in _CURVE_DISTRIBUTIONS), "reference")
        rows = [
            (grid[i], *(curves[kind][i] for kind in _CURVE_DISTRIBUTIONS), ref[i])
            for i in range(grid.size)
        ]
        if "csv" in args.format:
            write_csv(out / "curves.csv", header, rows)
            write_csv(
                out / "anchors.csv",
                ("q_anchor", "normal_limit", "t_limit", "heavy_tail_estimate", "p_avg_02"),
                [
                    (
                        anchors.q_anchor,
                        anchors.normal_limit,
                        anchors.t_limit,
                        anchors.heavy_tail_estimate,
                        anchors.p_avg_02,
                    )
                ],
            )
        if "json" in args.format:
            write_json(
                out / "curves.json",
                {
                    "m": args.m,
                    "rho": args.rho,
                    "trials": args.trials,
                    "t_dof": args.t_dof,
                    "q_grid": grid,
                    "curves": curves,
                    "reference": ref,
                    "anchors": anchors,
                },
            )
        if "svg" in args.format:
            series = [
                PlotSeries(kind, grid, curves[kind]) for kind in _CURVE_DISTRIBUTIONS
            ]
            series.append(PlotSeries("reference", grid, ref))
            series.append(
                PlotSeries(
                    "anchors",
                    np.full(3, anchors.q_anchor),
                    np.array(
                        [
                            anchors.normal_limit,
                            anchors.t_limit,
                            anchors.heavy_tail_estimate,
                        ]
                    ),
                    kind="points",
                )
            )
            svg_line_plot(
                out / "curves.svg",
                series,
                title=f"P1(q) at rho={fmt6(args.rho)}, m={args.m}",
                xlabel="q (log scale)",
                ylabel="precision",
                xlog=True,
            )
        _echo_config(
            out,
            args,
            m=args.m,
            rho=args.rho,
            trials=args.trials,
            t_dof=args.t_dof,
            points=args.points,
            anchor_trials=args.anchor_trials,
        )
    return 0


def cmd_scaling(args) -> int:
    preset = PRESETS[args.preset]
    cfg = UniverseConfig(
        target_rho=args.rho[0],
        n_ais=preset.n_ais,
        m_candidates=preset.m_candidates,
        tail=TailTransform(boost=args.boost),
    )
    max_size = preset.max_size if args.max_size is None else args.max_size
    samples = preset.samples_per_size if args.samples is None else args.samples
    sizes = tuple(range(1, min(max_size, preset.n_ais) + 1))
    rows = b_grid_scan(
        args.q,
        args.rho,
        cfg,
        args.seed,
        sizes=sizes,
        samples_per_size=samples,
        threads=args.threads,
    )

    regressions = []
    regression_errors = []
    for q in args.q:
        q_rows = [row for row in rows if row.q == q]
        try:
            regressions.append(regress_b_on_rho(q_rows))
        except DomainError as exc:
            regression_errors.append({"q": q, "error": str(exc)})
            print(f"regression skipped for q={fmt6(q)}: {exc}", file=sys.stderr)

    grid_header = ("q", "target_rho", "measured_rho", "best_b")
    _print_table(
        grid_header,
        [(r.q, r.target_rho, r.measured_rho, r.best_b) for r in rows],
    )
    for reg in regressions:
        print(
            f"q={fmt6(reg.q)}: b ~ {fmt6(reg.intercept)} + {fmt6(reg.slope)}*rho "
            f"(R^2={fmt6(reg.r_squared)})"
        )

    out = _prepare_out(args)
    if out is not None:
        if "csv" in args.format:
            write_csv(
                out / "b_grid.csv",
                grid_header,
                [(r.q, r.target_rho, r.measured_rho, r.best_b) for r in rows],
            )
            write_csv(
                out / "regression.csv",
                ("q", "slope", "intercept", "r_squared"),
                [(r.q, r.slope, r.intercept, r.r_squared) for r in regressions],
            )
        if "json" in args.format:
            write_json(
                out / "b_grid.json",
                {
                    "preset": args.preset,
                    "rows": rows,
                    "regressions": regressions,
                    "regression_errors": regression_errors,
                },
            )
        _echo_config(
            out,
            args,
            q=args.q,
            rho=args.rho,
            preset=args.preset,
            boost=args.boost,
            sizes=list(sizes),
            samples_per_size=samples,
            n_ais=preset.n_ais,
            m_candidates=preset.m_candidates,
        )
    return 0


def cmd_analyze(args) -> int:
    table = load_scores(args.input)
    report = build_report(table, q_points=args.q_points)

    for task in report.tasks:
        print(
            f"task {task.name}: rho_bar={fmt6(task.rho_bar)} "
            f"intercept={fmt6(task.intercept)} "
            f"({task.intercept_vs_rho_pct:+.1f}% vs rho_bar)"
        )
        for row in task.sb_rows:
            print(
                f"  panel of {row.size}: observed {fmt6(row.observed)} "
                f"vs Spearman-Brown {fmt6(row.predicted)} "
                f"({row.pct_pred_vs_obs:+.1f}%)"
            )
    print(
        f"overall: mean={report.summary.mean:.2f} sd={report.summary.sd:.2f} "
        f"range [{report.summary.min:.2f}, {report.summary.max:.2f}]"
    )
    for level, stats in report.summary.by_attr.items():
        print(f"  {level}: mean={stats.mean:.2f} sd={stats.sd:.2f} (n={stats.count})")
    for vq in (report.variance_weighted, report.variance_unweighted):
        print(
            f"variance-quality ({vq.truth_mode}): r={fmt6(vq.r)} p={fmt6(vq.p_value)}"
        )

    out = _prepare_out(args)
    if out is not None:
        if "json" in args.format:
            write_json(out / "report.json", report)
        if "csv" in args.format:
            write_csv(
                out / "tasks.csv",
                ("task", "rho_bar", "intercept", "intercept_vs_rho_pct"),
                [
                    (t.name, t.rho_bar, t.intercept, t.intercept_vs_rho_pct)
                    for t in report.tasks
                ],
            )
            write_csv(
                out / "subsets.csv",
                ("task", "size", "n_subsets", "avg_intercept", "improvement_pct"),
                [
                    (t.name, r.size, r.n_subsets, r.avg_intercept, r.improvement_pct)
                    for t in report.tasks
                    for r in t.subset_rows
                ],
            )
            write_csv(
                out / "spearman_brown.csv",
                (
                    "task",
                    "size",
                    "observed",
                    "predicted",
                    "pct_pred_vs_obs",
                    "pct_obs_vs_pred",
                ),
                [
                    (
                        t.name,
                        r.size,
                        r.observed,
                        r.predicted,
                        r.pct_pred_vs_obs,
                        r.pct_obs_vs_pred,
                    )
                    for t in report.tasks
                    for r in t.sb_rows
                ],
            )
            write_csv(
                out / "curves.csv",
                ("task", "q", "p_avg", *(f"p_{ai}" for ai in report.ai_names)),
                [
                    (
                        t.name,
                        t.q_grid[i],
                        t.average_values[i],
                        *(t.per_ai_values[j, i] for j in range(len(report.ai_names))),
                    )
                    for t in report.tasks
                    for i in range(t.q_grid.size)
                ],
            )
            write_csv(
                out / "qq.csv",
                ("theoretical", "sample"),
                [tuple(pair) for pair in report.qq_pairs],
            )
            write_csv(
                out / "variance_quality.csv",
                ("truth_mode", "task", "ai", "variance", "corr_with_truth"),
                [
                    (vq.truth_mode, r.task, r.ai, r.variance, r.corr_with_truth)
                    for vq in (report.variance_weighted, report.variance_unweighted)
                    for r in vq.rows
                ],
            )
        if "svg" in args.format:
            for t in report.tasks:
                series = [
                    PlotSeries(ai, t.q_grid, t.per_ai_values[j])
                    for j, ai in enumerate(report.ai_names)
                ]
                series.append(PlotSeries("average", t.q_grid, t.average_values))
                svg_line_plot(
                    out / f"curves_{t.name}.svg",
                    series,
                    title=f"Precision curves: {t.name}",
                    xlabel="q",
                    ylabel="precision",
                )
        _echo_config(out, args, input=str(args.input), q_points=args.q_points)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DomainError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PanelMetricsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
