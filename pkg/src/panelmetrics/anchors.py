"""Limit values of single-scorer precision at the extreme quantile q = 1/m.

At q = 1/m "top-q selection" degenerates to picking the single winner,
and simulation gets expensive exactly where curves are most interesting.
Three anchors estimate that endpoint instead: an exact bivariate-normal
calculation for normal signal, a finite-sample simulation for Student-t
signal, and a log-linear interpolation for heavy-tailed signal.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import DomainError
from .special import bivariate_normal_cdf, std_normal_quantile
from .streams import SeededStream

__all__ = [
    "AnchorSet",
    "normal_limit_anchor",
    "student_t_anchor",
    "heavy_tail_anchor",
    "reference_line",
    "compute_anchors",
]

_TRIAL_BATCH = 512


@dataclasses.dataclass(frozen=True)
class AnchorSet:
    """Endpoint estimates for one (m, rho) setting."""

    q_anchor: float
    normal_limit: float
    t_limit: float
    heavy_tail_estimate: float
    p_avg_02: float

    def __post_init__(self) -> None:
        for name in (
            "q_anchor",
            "normal_limit",
            "t_limit",
            "heavy_tail_estimate",
            "p_avg_02",
        ):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {val}")


def normal_limit_anchor(m: int, rho: float) -> float:
    """Exact P(1/m) when signal and score are jointly normal.

    With q = 1/m and z the upper-q quantile, the expected overlap is
    m * P(X > z, V > z), so P(q) = Phi2(-z, -z; rho) / q. The survival
    form avoids the cancellation in 1 - 2*(1-q) + Phi2(z, z; rho) when
    q is tiny.
    """
    if m < 2:
        raise DomainError("m must be at least 2")
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    if rho == 1.0:
        return 1.0
    q = 1.0 / m
    z = std_normal_quantile(1.0 - q)
    return bivariate_normal_cdf(-z, -z, rho) / q


def student_t_anchor(
    m: int, rho: float, dof: float, trials: int, stream: SeededStream
) -> float:
    """Simulated winner-match probability for Student-t signal.

    Each trial draws m signal values from t(dof), adds normal noise
    calibrated on the realized sample sd (the randgen convention), and
    counts whether the highest observed score belongs to the true
    winner. Unlike the normal anchor this is the finite-sample argmax
    probability, not a threshold-exceedance expectation; the two differ
    noticeably at small m.

    Signal and noise consume separate derived streams, so the result
    depends only on (stream, trials), not on the internal batch size.
    """
    if m < 2:
        raise DomainError("m must be at least 2")
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    if not dof > 2:
        raise DomainError("dof must exceed 2")
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if rho == 1.0:
        return 1.0
    g_signal = stream.derive(0).generator()
    g_noise = stream.derive(1).generator()
    noise_factor = math.sqrt(1.0 / rho**2 - 1.0)
    hits = 0
    done = 0
    while done < trials:
        b = min(_TRIAL_BATCH, trials - done)
        nu = g_signal.standard_t(dof, size=(b, m))
        eps = g_noise.standard_normal((b, m))
        sd = nu.std(axis=1, keepdims=True)
        x = nu + eps * (sd * noise_factor)
        hits += int(np.count_nonzero(np.argmax(x, axis=1) == np.argmax(nu, axis=1)))
        done += b
    return hits / trials


def heavy_tail_anchor(m: int, p_avg_02: float) -> float:
    """Log-linear estimate of P(1/m) for heavy-tailed signal.

    Assumes P(1/(10m)) = 1 and interpolates linearly in log10(q) down to
    the measured P(0.2) = p_avg_02, then reads the line at q = 1/m.
    Needs 1/m < 0.2, i.e. m >= 6, so the anchor sits inside the segment.
    """
    if m < 6:
        raise DomainError("m must be at least 6 so that 1/m lies below 0.2")
    if not 0.0 <= p_avg_02 <= 1.0:
        raise DomainError("p_avg_02 must lie in [0, 1]")
    lo = math.log10(1.0 / (10.0 * m))
    f = (math.log10(1.0 / m) - lo) / (math.log10(0.2) - lo)
    return 1.0 - f * (1.0 - p_avg_02)


def reference_line(q_grid: np.ndarray, p_avg_02: float) -> np.ndarray:
    """Straight line through (1, 1) and (0.2, p_avg_02), evaluated on a grid."""
    if not 0.0 <= p_avg_02 <= 1.0:
        raise DomainError("p_avg_02 must lie in [0, 1]")
    q = np.asarray(q_grid, dtype=float)
    slope = (1.0 - p_avg_02) / 0.8
    return 1.0 + slope * (q - 1.0)


def compute_anchors(
    m: int,
    rho: float,
    dof: float,
    trials: int,
    stream: SeededStream,
    p_avg_02: float,
) -> AnchorSet:
    """Bundle all three endpoint estimates for one setting."""
    return AnchorSet(
        q_anchor=1.0 / m,
        normal_limit=normal_limit_anchor(m, rho),
        t_limit=student_t_anchor(m, rho, dof, trials, stream),
        heavy_tail_estimate=heavy_tail_anchor(m, p_avg_02),
        p_avg_02=p_avg_02,
    )
