"""Analysis of real score tables: one row per (task, candidate), one
column per scorer.

The chain mirrors the synthetic pipeline but starts from data: build a
proxy ground truth from optimal scorer weights, measure per-scorer and
panel-subset precision curves against it, summarize each curve by the
intercept of a constrained linear fit, and compare panel gains with the
Spearman-Brown prediction. Diagnostics (summary stats, QQ pairs,
variance-vs-quality correlation) live here too.
"""
from __future__ import annotations

import csv
import dataclasses
import itertools
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataValidationError, DomainError, NumericalError
from .laws import spearman_brown
from .precision import PrecisionCurve, precision_curve
from .simulate import mean_offdiag_correlation
from .special import std_normal_quantile, student_t_sf_two_sided

__all__ = [
    "TaskScores",
    "ScoreTable",
    "TaskReport",
    "SubsetSizeRow",
    "SBComparisonRow",
    "SummaryStats",
    "VarianceQualityRow",
    "VarianceQualityResult",
    "EmpiricalReport",
    "load_scores",
    "save_scores",
    "optimal_weights",
    "pairwise_correlations",
    "per_ai_precision_curves",
    "constrained_intercept_fit",
    "panel_subset_analysis",
    "spearman_brown_comparison",
    "summary_stats",
    "qq_data",
    "variance_quality",
    "build_report",
]


@dataclasses.dataclass(frozen=True)
class TaskScores:
    """Scores of all candidates for one task."""

    name: str
    candidate_ids: tuple[str, ...]
    attrs: tuple[str, ...]
    matrix: np.ndarray  # m x n_ai


@dataclasses.dataclass(frozen=True)
class ScoreTable:
    ai_names: tuple[str, ...]
    tasks: tuple[TaskScores, ...]


def _validate_table(table: ScoreTable) -> ScoreTable:
    if len(table.ai_names) < 2:
        raise DataValidationError("need at least 2 scorer columns")
    if not table.tasks:
        raise DataValidationError("no data rows found")
    for task in table.tasks:
        mat = task.matrix
        if mat.ndim != 2 or mat.shape[1] != len(table.ai_names):
            raise DataValidationError(
                f"task {task.name!r}: score matrix is not rectangular"
            )
        if len(task.candidate_ids) != mat.shape[0] or len(task.attrs) != mat.shape[0]:
            raise DataValidationError(f"task {task.name!r}: row metadata misaligned")
        if not np.all(np.isfinite(mat)):
            raise DataValidationError(f"task {task.name!r}: non-finite score")
    return table


def load_scores(path: str | Path, format: str | None = None) -> ScoreTable:
    """Read a ScoreTable from CSV or JSON.

    CSV schema: header ``task,candidate_id,attr,ai_1,...,ai_n`` and one
    row per (task, candidate). The JSON form is the same data nested by
    task; ``save_scores`` writes both. Errors name the offending line.
    """
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format not in ("csv", "json"):
        raise DataValidationError(f"unknown score-table format {format!r}")
    try:
        return _load_csv(path) if format == "csv" else _load_json(path)
    except OSError as exc:
        raise DataValidationError(f"cannot read {path}: {exc.strerror}") from None


def _load_csv(path: Path) -> ScoreTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: file is empty") from None
        if len(header) < 5 or [h.strip() for h in header[:3]] != [
            "task",
            "candidate_id",
            "attr",
        ]:
            raise DataValidationError(
                f"{path}: header must be task,candidate_id,attr,<ai columns> "
                "with at least 2 ai columns"
            )
        ai_names = tuple(h.strip() for h in header[3:])

        order: list[str] = []
        rows: dict[str, list[tuple[str, str, list[float]]]] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3 + len(ai_names):
                raise DataValidationError(
                    f"{path}:{line_no}: expected {3 + len(ai_names)} fields, "
                    f"got {len(row)}"
                )
            task, cand, attr = (cell.strip() for cell in row[:3])
            try:
                scores = [float(cell) for cell in row[3:]]
            except ValueError:
                raise DataValidationError(
                    f"{path}:{line_no}: non-numeric score"
                ) from None
            if task not in rows:
                rows[task] = []
                order.append(task)
            rows[task].append((cand, attr, scores))

    tasks = tuple(
        TaskScores(
            name=name,
            candidate_ids=tuple(cand for cand, _, _ in rows[name]),
            attrs=tuple(attr for _, attr, _ in rows[name]),
            matrix=np.array([scores for _, _, scores in rows[name]], dtype=float),
        )
        for name in order
    )
    return _validate_table(ScoreTable(ai_names=ai_names, tasks=tasks))


def _load_json(path: Path) -> ScoreTable:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"{path}: invalid JSON: {exc}") from None
    try:
        ai_names = tuple(str(n) for n in doc["ai_names"])
        tasks = tuple(
            TaskScores(
                name=str(t["name"]),
                candidate_ids=tuple(str(c["id"]) for c in t["candidates"]),
                attrs=tuple(str(c.get("attr", "")) for c in t["candidates"]),
                matrix=np.array(
                    [[float(s) for s in c["scores"]] for c in t["candidates"]],
                    dtype=float,
                ),
            )
            for t in doc["tasks"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataValidationError(f"{path}: malformed score table: {exc}") from None
    return _validate_table(ScoreTable(ai_names=ai_names, tasks=tasks))


def save_scores(table: ScoreTable, path: str | Path, format: str | None = None) -> None:
    """Write a ScoreTable; the output reloads to an identical table."""
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["task", "candidate_id", "attr", *table.ai_names])
            for task in table.tasks:
                for cand, attr, scores in zip(
                    task.candidate_ids, task.attrs, task.matrix
                ):
                    # repr of a Python float round-trips exactly
                    writer.writerow(
                        [task.name, cand, attr, *(repr(float(s)) for s in scores)]
                    )
        return
    if format == "json":
        doc = {
            "ai_names": list(table.ai_names),
            "tasks": [
                {
                    "name": task.name,
                    "candidates": [
                        {"id": cand, "attr": attr, "scores": [float(s) for s in scores]}
                        for cand, attr, scores in zip(
                            task.candidate_ids, task.attrs, task.matrix
                        )
                    ],
                }
                for task in table.tasks
            ],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        return
    raise DataValidationError(f"unknown score-table format {format!r}")


def _standardized_columns(matrix: np.ndarray) -> np.ndarray:
    sd = matrix.std(axis=0)
    if np.any(sd == 0.0):
        raise DomainError("constant scorer column; cannot standardize")
    return (matrix - matrix.mean(axis=0)) / sd


def optimal_weights(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Leading-eigenvector weights and the weighted proxy truth.

    Weights are proportional to the first principal eigenvector of the
    inter-scorer correlation matrix (power iteration, tolerance 1e-10),
    normalized to sum 1, then applied to the raw columns. For a
    correlation matrix with all entries positive the eigenvector is
    entrywise positive (Perron-Frobenius), making the weights a proper
    mixture.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] < 2:
        raise DomainError("need a 2-d matrix with at least 2 columns")
    std = _standardized_columns(matrix)
    corr = (std.T @ std) / std.shape[0]

    n = corr.shape[1]
    vec = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(10000):
        nxt = corr @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            raise NumericalError("power iteration collapsed to zero")
        nxt /= norm
        if np.max(np.abs(nxt - vec)) < 1e-10:
            vec = nxt
            break
        vec = nxt
    else:
        raise NumericalError("power iteration did not converge")

    if vec.sum() < 0:
        vec = -vec
    weights = vec / vec.sum()
    proxy = matrix @ weights
    return weights, proxy


def pairwise_correlations(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Full Pearson correlation matrix and its mean off-diagonal value."""
    matrix = np.asarray(matrix, dtype=float)
    rho_bar = mean_offdiag_correlation(matrix)
    return np.corrcoef(matrix, rowvar=False), rho_bar


def per_ai_precision_curves(
    matrix: np.ndarray, y: np.ndarray, q_grid: np.ndarray
) -> tuple[list[PrecisionCurve], PrecisionCurve]:
    """Precision curve of each scorer column against y, plus their mean."""
    matrix = np.asarray(matrix, dtype=float)
    curves = [precision_curve(matrix[:, i], y, q_grid) for i in range(matrix.shape[1])]
    avg = np.mean([c.values for c in curves], axis=0)
    return curves, PrecisionCurve(np.asarray(q_grid, dtype=float), avg)


def constrained_intercept_fit(curve: PrecisionCurve) -> float:
    """Intercept at q=0 of the least-squares line through (1, 1).

    Fitting P(q) = 1 + s*(q - 1) leaves one free parameter; the
    intercept 1 - s summarizes the whole curve the way a correlation
    would under the linear single-scorer law.
    """
    dq = curve.q_grid - 1.0
    denom = float(dq @ dq)
    if denom == 0.0:
        # grid is the single point q=1, where every curve passes through 1
        return 1.0
    slope = float((curve.values - 1.0) @ dq) / denom
    return 1.0 - slope


@dataclasses.dataclass(frozen=True)
class SubsetSizeRow:
    size: int
    n_subsets: int
    avg_intercept: float
    improvement_pct: float | None  # vs the previous size in the scan


def panel_subset_analysis(
    matrix: np.ndarray,
    y: np.ndarray,
    sizes: Sequence[int] = (2, 3, 4),
    q_grid: np.ndarray | None = None,
) -> list[SubsetSizeRow]:
    """Average constrained intercept of every k-scorer sub-panel.

    For each size, every subset of scorer columns is averaged into a
    panel score, its precision curve against y measured, and the
    constrained intercepts averaged over subsets.
    """
    matrix = np.asarray(matrix, dtype=float)
    n_ai = matrix.shape[1]
    sizes = [int(k) for k in sizes]
    if any(k < 1 or k > n_ai for k in sizes):
        raise DomainError(f"subset sizes must lie in 1..{n_ai}")
    if q_grid is None:
        q_grid = np.linspace(1.0 / matrix.shape[0], 1.0, 50)

    rows: list[SubsetSizeRow] = []
    prev: float | None = None
    for k in sizes:
        intercepts = []
        for combo in itertools.combinations(range(n_ai), k):
            panel = matrix[:, combo].mean(axis=1)
            intercepts.append(
                constrained_intercept_fit(precision_curve(panel, y, q_grid))
            )
        avg = float(np.mean(intercepts))
        pct = None if prev is None else (avg - prev) / prev * 100.0
        rows.append(
            SubsetSizeRow(
                size=k,
                n_subsets=len(intercepts),
                avg_intercept=avg,
                improvement_pct=pct,
            )
        )
        prev = avg
    return rows


@dataclasses.dataclass(frozen=True)
class SBComparisonRow:
    size: int
    observed: float
    predicted: float
    pct_pred_vs_obs: float  # (predicted - observed) / observed
    pct_obs_vs_pred: float  # (observed - predicted) / predicted


def spearman_brown_comparison(
    rho_bar: float, observed: Sequence[tuple[int, float]]
) -> list[SBComparisonRow]:
    """Spearman-Brown predictions against observed per-size intercepts.

    The source tables mix percentage conventions, so both directions are
    carried explicitly.
    """
    rows = []
    for size, obs in observed:
        if size < 2:
            raise DomainError("comparison sizes start at 2")
        pred = spearman_brown(size, rho_bar)
        rows.append(
            SBComparisonRow(
                size=size,
                observed=obs,
                predicted=pred,
                pct_pred_vs_obs=(pred - obs) / obs * 100.0,
                pct_obs_vs_pred=(obs - pred) / pred * 100.0,
            )
        )
    return rows


@dataclasses.dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    sd: float
    min: float
    max: float
    by_attr: dict[str, "SummaryStats"]


def _stats_of(values: np.ndarray) -> dict:
    return {
        "count": int(values.size),
        "mean": float(values.mean()),
        "sd": float(values.std()),
        "min": float(values.min()),
        "max": float(values.max()),
    }


def summary_stats(table: ScoreTable) -> SummaryStats:
    """Pooled score statistics, overall and per attribute level.

    The sd uses the population divisor. Rows with an empty attribute
    stay out of the per-group breakdown.
    """
    all_scores = np.concatenate([t.matrix.ravel() for t in table.tasks])
    groups: dict[str, list[np.ndarray]] = {}
    for task in table.tasks:
        for attr, row in zip(task.attrs, task.matrix):
            if attr:
                groups.setdefault(attr, []).append(row)
    by_attr = {
        level: SummaryStats(by_attr={}, **_stats_of(np.concatenate(rows)))
        for level, rows in sorted(groups.items())
    }
    return SummaryStats(by_attr=by_attr, **_stats_of(all_scores))


def qq_data(scores: np.ndarray) -> np.ndarray:
    """Normal QQ pairs: column 0 theoretical quantiles, column 1 sample.

    The sample is standardized (population divisor) and sorted;
    theoretical quantiles use the midpoint plotting positions
    (i - 0.5)/m.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    m = scores.size
    if m < 3:
        raise DomainError("need at least 3 values for a QQ plot")
    sd = scores.std()
    if sd == 0.0:
        raise DomainError("constant sample has no QQ representation")
    sample = np.sort((scores - scores.mean()) / sd)
    theo = std_normal_quantile((np.arange(1, m + 1) - 0.5) / m)
    return np.column_stack([theo, sample])


@dataclasses.dataclass(frozen=True)
class VarianceQualityRow:
    task: str
    ai: str
    variance: float
    corr_with_truth: float


@dataclasses.dataclass(frozen=True)
class VarianceQualityResult:
    truth_mode: str
    rows: list[VarianceQualityRow]
    r: float
    p_value: float


def variance_quality(table: ScoreTable, truth_mode: str = "weighted") -> VarianceQualityResult:
    """Does spreading scores out go with being right?

    Per (task, scorer): the column's score variance and its correlation
    with that task's truth proxy ("weighted" = optimal-weight proxy,
    "unweighted" = plain column mean). Across all rows, the global
    Pearson r between variance and correlation, with a two-sided
    Student-t p-value on n - 2 degrees of freedom.
    """
    if truth_mode not in ("weighted", "unweighted"):
        raise DomainError(f"truth_mode must be weighted or unweighted, got {truth_mode!r}")
    rows: list[VarianceQualityRow] = []
    for task in table.tasks:
        mat = task.matrix
        if truth_mode == "weighted":
            _, truth = optimal_weights(mat)
        else:
            truth = mat.mean(axis=1)
        for i, ai in enumerate(table.ai_names):
            col = mat[:, i]
            rows.append(
                VarianceQualityRow(
                    task=task.name,
                    ai=ai,
                    variance=float(col.var()),
                    corr_with_truth=float(np.corrcoef(col, truth)[0, 1]),
                )
            )
    if len(rows) < 3:
        raise DomainError("need at least 3 (task, scorer) rows for the global test")
    var = np.array([row.variance for row in rows])
    cor = np.array([row.corr_with_truth for row in rows])
    r = float(np.corrcoef(var, cor)[0, 1])
    n = len(rows)
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = abs(r) * np.sqrt((n - 2) / (1.0 - r * r))
        p = student_t_sf_two_sided(t, n - 2)
    return VarianceQualityResult(truth_mode=truth_mode, rows=rows, r=r, p_value=p)


@dataclasses.dataclass(frozen=True)
class TaskReport:
    name: str
    rho_bar: float
    correlation: np.ndarray
    weights: np.ndarray
    q_grid: np.ndarray
    per_ai_values: np.ndarray  # n_ai x len(q_grid)
    average_values: np.ndarray
    intercept: float
    intercept_vs_rho_pct: float  # (intercept - rho_bar) / rho_bar
    subset_rows: list[SubsetSizeRow]
    sb_rows: list[SBComparisonRow]


@dataclasses.dataclass(frozen=True)
class EmpiricalReport:
    ai_names: tuple[str, ...]
    tasks: list[TaskReport]
    summary: SummaryStats
    qq_pairs: np.ndarray
    variance_weighted: VarianceQualityResult
    variance_unweighted: VarianceQualityResult


def build_report(table: ScoreTable, q_points: int = 50) -> EmpiricalReport:
    """Run the full analysis chain over every task in the table.

    Curves are evaluated on a uniform quantile grid from 1/m to 1; the
    constrained intercept is grid-weighted, and a uniform grid keeps it
    comparable with the linear law it summarizes.
    """
    if q_points < 2:
        raise DomainError("q_points must be at least 2")
    task_reports: list[TaskReport] = []
    for task in table.tasks:
        mat = task.matrix
        m, n_ai = mat.shape
        corr, rho_bar = pairwise_correlations(mat)
        weights, proxy = optimal_weights(mat)
        q_grid = np.linspace(1.0 / m, 1.0, q_points)
        curves, avg_curve = per_ai_precision_curves(mat, proxy, q_grid)
        intercept = constrained_intercept_fit(avg_curve)

        sizes = [k for k in (2, 3, 4) if k <= n_ai]
        subset_rows = panel_subset_analysis(mat, proxy, sizes, q_grid)
        sb_rows = spearman_brown_comparison(
            rho_bar, [(row.size, row.avg_intercept) for row in subset_rows]
        )
        task_reports.append(
            TaskReport(
                name=task.name,
                rho_bar=rho_bar,
                correlation=corr,
                weights=weights,
                q_grid=q_grid,
                per_ai_values=np.array([c.values for c in curves]),
                average_values=avg_curve.values,
                intercept=intercept,
                intercept_vs_rho_pct=(intercept - rho_bar) / rho_bar * 100.0,
                subset_rows=subset_rows,
                sb_rows=sb_rows,
            )
        )

    pooled = np.concatenate([t.matrix.ravel() for t in table.tasks])
    return EmpiricalReport(
        ai_names=table.ai_names,
        tasks=task_reports,
        summary=summary_stats(table),
        qq_pairs=qq_data(pooled),
        variance_weighted=variance_quality(table, "weighted"),
        variance_unweighted=variance_quality(table, "unweighted"),
    )
