"""Closed-form selection-precision laws.

The central object is the panel precision law

    P(q) = (rho * n**b + q * (1 - rho)) / (1 + (n**b - 1) * rho)

for a panel of n scorers whose pairwise score correlation is rho, with
an empirically fitted efficiency exponent b = q* + 0.8*(1 - rho). The
module also carries the single-scorer approximations, the classical
Spearman-Brown reliability step-up, and the noise-model Pearson map.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import dataclasses

from .errors import DomainError

__all__ = [
    "PanelQuery",
    "LinearScoreModel",
    "clip_quantile",
    "efficiency_exponent",
    "effective_rho",
    "panel_precision",
    "single_precision_linear",
    "p20_single",
    "single_precision_above20",
    "spearman_brown",
    "pearson_from_model",
    "required_panel_size",
]

CLIP_LO = 0.07
CLIP_HI = 0.22


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q <= 1.0:
        raise DomainError(f"q must lie in (0, 1], got {q}")
    return q


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    return rho


@dataclasses.dataclass(frozen=True)
class PanelQuery:
    """One evaluation point of the panel law: quantile, correlation, panel size."""

    q: float
    rho: float
    n: int

    def __post_init__(self) -> None:
        _check_q(self.q)
        _check_rho(self.rho)
        if not (isinstance(self.n, int) and self.n >= 1):
            raise DomainError(f"n must be an integer >= 1, got {self.n!r}")


@dataclasses.dataclass(frozen=True)
class LinearScoreModel:
    """Additive score model x = a*v + c + eps for one scorer."""

    a: float
    c: float
    sigma_v: float
    sigma_eps: float

    def __post_init__(self) -> None:
        if not self.sigma_v > 0:
            raise DomainError("sigma_v must be positive")
        if self.sigma_eps < 0:
            raise DomainError("sigma_eps must be non-negative")


def clip_quantile(q: float) -> float:
    """Clamp q into the [0.07, 0.22] window where the exponent fit holds."""
    return min(max(_check_q(q), CLIP_LO), CLIP_HI)


def efficiency_exponent(q: float, rho: float, clipped: bool = True) -> float:
    """Panel efficiency exponent b = q* + 0.8*(1 - rho).

    With clipped=True (default) q* is the clamped quantile; clipped=False
    uses q as-is, which extrapolates outside the fitted window.
    """
    q = _check_q(q)
    rho = _check_rho(rho)
    q_star = clip_quantile(q) if clipped else q
    return q_star + 0.8 * (1.0 - rho)


def effective_rho(n: int, rho: float, b: float) -> float:
    """Panel-of-n effective correlation rho*n**b / (1 + (n**b - 1)*rho)."""
    rho = _check_rho(rho)
    if n < 1:
        raise DomainError("n must be at least 1")
    if not b > 0:
        raise DomainError("b must be positive")
    nb = float(n) ** b
    return rho * nb / (1.0 + (nb - 1.0) * rho)


def panel_precision(query: PanelQuery, clipped: bool = True) -> float:
    """Top-q precision of an n-scorer panel under the fitted exponent law."""
    b = efficiency_exponent(query.q, query.rho, clipped=clipped)
    nb = float(query.n) ** b
    return (query.rho * nb + query.q * (1.0 - query.rho)) / (1.0 + (nb - 1.0) * query.rho)


def single_precision_linear(q: float, rho: float) -> float:
    """Single-scorer linear law rho + q*(1 - rho); the n=1 panel case."""
    return _check_rho(rho) + _check_q(q) * (1.0 - rho)


def p20_single(rho: float) -> float:
    """Refined single-scorer precision at the top-20% cut.

    0.2 + 0.5*rho + 0.3*rho**10; exact at both endpoints, and the rho**10
    term supplies the late upturn the linear law misses above rho ~ 0.9.
    """
    rho = _check_rho(rho)
    return 0.2 + 0.5 * rho + 0.3 * rho**10


def single_precision_above20(q: float, rho: float, crude: bool = False) -> float:
    """Single-scorer precision for cuts at or above the top 20%.

    q + (1 - q)*(0.625*rho + 0.375*rho**10), or the cruder
    (0.6*rho + 0.4*rho**10) bracket with crude=True. Below q = 0.2 the
    interpolation is unsupported; computed anyway, callers should warn.
    """
    q = _check_q(q)
    rho = _check_rho(rho)
    blend = (0.6 * rho + 0.4 * rho**10) if crude else (0.625 * rho + 0.375 * rho**10)
    return q + (1.0 - q) * blend


def spearman_brown(n: int, rho_bar: float) -> float:
    """Reliability of the mean of n parallel scorers: n*rho/(1+(n-1)*rho)."""
    if n < 1:
        raise DomainError("n must be at least 1")
    rho_bar = _check_rho(rho_bar)
    return n * rho_bar / (1.0 + (n - 1.0) * rho_bar)


def pearson_from_model(model: LinearScoreModel) -> float:
    """Pearson correlation between scores and truth implied by the model.

    a*sigma_v / sqrt(a**2*sigma_v**2 + sigma_eps**2); invariant to joint
    rescaling of (a, sigma_eps), and the offset c never enters.
    """
    if model.a <= 0:
        raise DomainError("scorer gain a must be positive")
    signal = model.a * model.sigma_v
    return signal / (signal**2 + model.sigma_eps**2) ** 0.5


def required_panel_size(
    q: float, rho: float, target: float, n_max: int
) -> int | None:
    """Smallest panel size reaching the target precision, or None.

    Linear scan; the law is increasing in n so the first hit is minimal.
    """
    if not 0.0 < target < 1.0:
        raise DomainError("target must lie strictly between 0 and 1")
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    for n in range(1, n_max + 1):
        if panel_precision(PanelQuery(q=q, rho=rho, n=n)) >= target:
            return n
    return None
