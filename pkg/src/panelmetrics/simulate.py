"""Panel-scaling simulator.

Builds synthetic universes of correlated scorers, measures how top-q
precision grows with panel size, fits the efficiency exponent b per
universe, and regresses b on the measured correlation over a (q, rho)
grid. Every stochastic step takes an explicit stream, and grid cells
own independent derived streams, so results never depend on execution
order or thread count.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import math
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .precision import top_count, top_set
from .streams import SeededStream, TailTransform, superstar_transform

__all__ = [
    "UniverseConfig",
    "Universe",
    "PanelScanResult",
    "BGridRow",
    "BRegressionRow",
    "ScanPreset",
    "PRESETS",
    "OBSERVED_RHO_MEAN",
    "OBSERVED_RHO_SD",
    "generate_universe",
    "mean_offdiag_correlation",
    "panel_precision_scan",
    "fit_exponent_b",
    "b_grid_scan",
    "regress_b_on_rho",
    "sample_target_rho_like_observed",
]

#: distribution of observed inter-scorer correlations in the motivating data
OBSERVED_RHO_MEAN = 0.534
OBSERVED_RHO_SD = 0.136

_R_CLIP = (0.01, 0.999)
_B_BOUNDS = (0.01, 1.5)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclasses.dataclass(frozen=True)
class UniverseConfig:
    """Parameters of one synthetic scorer universe.

    Each scorer i gets a latent share r_i of common signal and a score
    scale s_i, drawn jointly so that higher-correlation scorers tend to
    spread their scores more (rho_sig_corr). Scores are built from a
    shared factor, optionally tail-boosted, standardized, then mapped
    onto the s_i scale around t_mean.
    """

    target_rho: float
    n_ais: int = 100
    m_candidates: int = 2000
    sig_rho: float = 0.05
    rho_sig_corr: float = 0.78
    scale_min: float = 0.2
    scale_max: float = 1.2
    scale_sd: float = 0.2
    t_mean: float = 7.0
    tail: TailTransform = TailTransform()

    def __post_init__(self) -> None:
        if not 0.0 < self.target_rho < 1.0:
            raise ConfigError("target_rho must lie strictly between 0 and 1")
        if self.n_ais < 2:
            raise ConfigError("need at least 2 scorers")
        if self.m_candidates < 2:
            raise ConfigError("need at least 2 candidates")
        if self.sig_rho < 0 or self.scale_sd < 0:
            raise ConfigError("spread parameters must be non-negative")
        if not -1.0 <= self.rho_sig_corr <= 1.0:
            raise ConfigError("rho_sig_corr must lie in [-1, 1]")
        if not self.scale_min < self.scale_max:
            raise ConfigError("scale_min must be below scale_max")


@dataclasses.dataclass(frozen=True)
class Universe:
    """Realized score matrix plus its derived ground truth."""

    scores: np.ndarray  # m_candidates x n_ais
    y_true: np.ndarray  # row means of scores
    measured_rho: float


@dataclasses.dataclass(frozen=True)
class PanelScanResult:
    q: float
    panel_sizes: tuple[int, ...]
    avg_precisions: np.ndarray
    samples_per_size: int
    measured_rho: float
    fitted_b: float


@dataclasses.dataclass(frozen=True)
class BGridRow:
    q: float
    target_rho: float
    measured_rho: float
    best_b: float


@dataclasses.dataclass(frozen=True)
class BRegressionRow:
    q: float
    slope: float
    intercept: float
    r_squared: float


@dataclasses.dataclass(frozen=True)
class ScanPreset:
    """Bundle of scan sizes; paper scale vs something a laptop finishes."""

    n_ais: int
    m_candidates: int
    samples_per_size: int
    max_size: int


PRESETS = {
    "paper": ScanPreset(n_ais=100, m_candidates=2000, samples_per_size=4000, max_size=30),
    "desk": ScanPreset(n_ais=40, m_candidates=1000, samples_per_size=800, max_size=30),
}


def generate_universe(cfg: UniverseConfig, stream: SeededStream) -> Universe:
    """Draw one universe: per-scorer (r_i, s_i), then the score matrix.

    (r_i, s_i) come from a bivariate normal written in conditional form
    (s_i regressed on the same shock as r_i), which behaves at
    sig_rho = 0 where a covariance factorization would not. Column i is
    sqrt(r_i) * Z_common + sqrt(1 - r_i) * Z_i, so two columns with
    shares r correlate at about r before the tail transform.
    """
    g = stream.generator()
    n, m = cfg.n_ais, cfg.m_candidates

    e0 = g.standard_normal(n)
    e1 = g.standard_normal(n)
    r = np.clip(cfg.target_rho + cfg.sig_rho * e0, *_R_CLIP)
    c = cfg.rho_sig_corr
    s_center = 0.5 * (cfg.scale_min + cfg.scale_max)
    s_shock = c * e0 + math.sqrt(1.0 - c * c) * e1
    s = np.clip(s_center + cfg.scale_sd * s_shock, cfg.scale_min, cfg.scale_max)

    z_common = g.standard_normal(m)
    z_own = g.standard_normal((m, n))
    raw = np.sqrt(r)[None, :] * z_common[:, None] + np.sqrt(1.0 - r)[None, :] * z_own
    raw = superstar_transform(raw, cfg.tail)

    sd = raw.std(axis=0)
    if np.any(sd == 0.0):
        raise DomainError("degenerate universe: a scorer column is constant")
    scores = (raw - raw.mean(axis=0)) / sd * s[None, :] + cfg.t_mean

    y_true = scores.mean(axis=1)
    return Universe(
        scores=scores,
        y_true=y_true,
        measured_rho=mean_offdiag_correlation(scores),
    )


def mean_offdiag_correlation(scores: np.ndarray) -> float:
    """Average pairwise Pearson correlation over all off-diagonal pairs."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[1] < 2:
        raise DomainError("need a 2-d matrix with at least 2 columns")
    if np.any(scores.std(axis=0) == 0.0):
        raise DomainError("constant column has undefined correlation")
    corr = np.corrcoef(scores, rowvar=False)
    n = corr.shape[0]
    return float((corr.sum() - n) / (n * (n - 1)))


def panel_precision_scan(
    u: Universe,
    q: float,
    stream: SeededStream,
    sizes: Sequence[int] | None = None,
    samples_per_size: int = 4000,
) -> PanelScanResult:
    """Average top-q precision of random k-scorer panels, for each k.

    For every panel size, draws random subsets of scorers without
    replacement, scores each candidate by the subset mean, and measures
    precision against y_true. The subset means are computed as one
    matrix product with a sparse 0/1-weight matrix; per-sample top sets
    use the same stable ordering as the precision module.
    """
    m, n_ais = u.scores.shape
    if sizes is None:
        sizes = tuple(range(1, min(30, n_ais) + 1))
    else:
        sizes = tuple(int(k) for k in sizes)
    if any(k < 1 or k > n_ais for k in sizes):
        raise DomainError(f"panel sizes must lie in 1..{n_ais}")
    if samples_per_size < 1:
        raise DomainError("samples_per_size must be at least 1")

    ksel = top_count(q, m)
    true_mask = np.zeros(m, dtype=bool)
    true_mask[top_set(u.y_true, ksel)] = True

    g = stream.generator()
    avg = np.empty(len(sizes))
    for i, k in enumerate(sizes):
        weights = np.zeros((n_ais, samples_per_size))
        for j in range(samples_per_size):
            weights[g.choice(n_ais, k, replace=False), j] = 1.0 / k
        estimates = u.scores @ weights
        top = np.argsort(-estimates, axis=0, kind="stable")[:ksel]
        avg[i] = true_mask[top].sum() / (ksel * samples_per_size)

    fitted = fit_exponent_b(sizes, avg, u.measured_rho, q)
    return PanelScanResult(
        q=q,
        panel_sizes=sizes,
        avg_precisions=avg,
        samples_per_size=samples_per_size,
        measured_rho=u.measured_rho,
        fitted_b=fitted,
    )


def _panel_law(k: np.ndarray, b: float, rho: float, q: float) -> np.ndarray:
    nb = k**b
    return (nb * rho + q * (1.0 - rho)) / (1.0 + (nb - 1.0) * rho)


def fit_exponent_b(
    sizes: Sequence[int],
    precisions: Sequence[float],
    rho: float,
    q: float,
) -> float:
    """Least-squares exponent b of the panel law against observed precisions.

    Golden-section search on [0.01, 1.5]; the sum of squares is smooth
    and in practice unimodal there, and the bracket keeps the fit from
    wandering when the data carry no panel gain at all.
    """
    k = np.asarray(sizes, dtype=float)
    p = np.asarray(precisions, dtype=float)
    if k.shape != p.shape or k.size == 0:
        raise DomainError("sizes and precisions must align and be non-empty")
    if not 0.0 < rho < 1.0:
        raise DomainError("rho must lie strictly between 0 and 1")

    def sse(b: float) -> float:
        resid = p - _panel_law(k, b, rho, q)
        return float(resid @ resid)

    lo, hi = _B_BOUNDS
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = sse(x1), sse(x2)
    while hi - lo > 1e-5:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = sse(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = sse(x2)
    return 0.5 * (lo + hi)


def _run_cell(
    q: float,
    target_rho: float,
    cfg: UniverseConfig,
    cell_stream: SeededStream,
    sizes: Sequence[int] | None,
    samples_per_size: int,
) -> BGridRow:
    cell_cfg = dataclasses.replace(cfg, target_rho=target_rho)
    universe = generate_universe(cell_cfg, cell_stream.derive(0))
    scan = panel_precision_scan(
        universe, q, cell_stream.derive(1), sizes, samples_per_size
    )
    return BGridRow(
        q=q,
        target_rho=target_rho,
        measured_rho=universe.measured_rho,
        best_b=scan.fitted_b,
    )


def b_grid_scan(
    q_values: Sequence[float],
    rho_targets: Sequence[float],
    cfg: UniverseConfig,
    base_seed: int,
    sizes: Sequence[int] | None = None,
    samples_per_size: int = 4000,
    threads: int = 1,
) -> list[BGridRow]:
    """Fit b in every (q, rho) cell of the grid.

    Cell index runs rho-fastest. Each cell derives its own stream from
    (base_seed, cell index), so the table is identical for any thread
    count and any execution order.
    """
    q_values = list(q_values)
    rho_targets = list(rho_targets)
    if not q_values or not rho_targets:
        raise DomainError("q_values and rho_targets must be non-empty")
    if threads < 1:
        raise DomainError("threads must be at least 1")

    root = SeededStream(base_seed)
    cells = [
        (q, rho, root.derive(i_q * len(rho_targets) + i_r))
        for i_q, q in enumerate(q_values)
        for i_r, rho in enumerate(rho_targets)
    ]

    def run(cell):
        q, rho, cell_stream = cell
        return _run_cell(q, rho, cfg, cell_stream, sizes, samples_per_size)

    if threads == 1:
        return [run(cell) for cell in cells]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, cells))


def regress_b_on_rho(rows: Sequence[BGridRow]) -> BRegressionRow:
    """OLS of fitted b on measured rho for one q's rows."""
    rows = list(rows)
    if len(rows) < 2:
        raise DomainError("need at least 2 rows to regress")
    q_set = {row.q for row in rows}
    if len(q_set) != 1:
        raise DomainError("rows must all share one q")
    x = np.array([row.measured_rho for row in rows])
    y = np.array([row.best_b for row in rows])
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise DomainError("measured rho values are all equal; slope undefined")
    slope = float(xc @ (y - y.mean())) / denom
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return BRegressionRow(
        q=q_set.pop(),
        slope=slope,
        intercept=intercept,
        r_squared=min(max(r_squared, 0.0), 1.0),
    )


def sample_target_rho_like_observed(count: int, stream: SeededStream) -> np.ndarray:
    """Correlation targets mimicking the observed inter-scorer distribution."""
    if count < 1:
        raise DomainError("count must be at least 1")
    g = stream.generator()
    draws = g.normal(OBSERVED_RHO_MEAN, OBSERVED_RHO_SD, count)
    return np.clip(draws, *_R_CLIP)
