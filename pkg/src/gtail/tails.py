"""Empirical left-tail curves ``log P(X < -L)`` and their comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError

__all__ = ["TailCurve", "tail_curve", "SlopeFit", "fit_tail_slope", "two_sample_ks"]

MIN_COUNT = 25
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class TailCurve:
    """Empirical log-probabilities on a grid of ``L`` values.

    Entries with fewer than ``MIN_COUNT`` samples below ``-L`` are ``nan`` and
    excluded by ``defined``.
    """

    L_grid: np.ndarray
    empirical_log_prob: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray
    n_samples: int

    @property
    def defined(self) -> np.ndarray:
        return self.counts >= MIN_COUNT

    def rows(self):
        for L, lp, se, c in zip(self.L_grid, self.empirical_log_prob, self.stderr, self.counts):
            yield {"L": float(L), "empirical_log_prob": float(lp), "stderr": float(se),
                   "count": int(c), "n_samples": self.n_samples}


def tail_curve(samples, L_grid, min_samples: int = MIN_SAMPLES) -> TailCurve:
    """Empirical ``log P(X < -L)`` with delta-method standard errors.

    ``stderr = sqrt((1 - p) / (n p))``, the binomial error on the log scale.
    Values of ``-inf`` (no particle or eigenvalue at all) count as below every
    threshold.
    """
    x = np.asarray(samples, dtype=float)
    L = np.atleast_1d(np.asarray(L_grid, dtype=float))
    if L.size == 0:
        raise DomainError("empty L grid")
    if x.size < min_samples:
        raise DomainError(f"need at least {min_samples} samples, got {x.size}")
    if np.any(np.isnan(x)):
        raise DomainError("samples contain nan")
    xs = np.sort(x)
    counts = np.searchsorted(xs, -L, side="left")
    n = x.size
    p = counts / n
    ok = counts >= MIN_COUNT
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.where(ok, np.log(p), np.nan)
        se = np.where(ok, np.sqrt((1 - p) / (n * p)), np.nan)
    return TailCurve(L, lp, se, counts.astype(int), int(n))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    slope_stderr: float
    n_points: int


def fit_tail_slope(curve: TailCurve, lo: float = 0.5, hi: float = 1.5) -> SlopeFit:
    """Weighted least-squares line through the defined points with ``lo <= L <= hi``.

    Neighbouring points share samples, so ``slope_stderr`` treats them as
    independent and is optimistic.
    """
    sel = curve.defined & (curve.L_grid >= lo) & (curve.L_grid <= hi)
    if sel.sum() < 2:
        raise DomainError("fewer than two usable points in the fit window")
    x, y, s = curve.L_grid[sel], curve.empirical_log_prob[sel], curve.stderr[sel]
    w = 1 / s ** 2
    X = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    beta = cov @ (X.T @ (w * y))
    return SlopeFit(float(beta[1]), float(beta[0]), float(math.sqrt(cov[1, 1])), int(sel.sum()))


def two_sample_ks(a, b):
    """Two-sample Kolmogorov-Smirnov test; returns ``(statistic, p_value)``."""
    r = stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(r.statistic), float(r.pvalue)
