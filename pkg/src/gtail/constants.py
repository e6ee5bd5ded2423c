r"""The edge constant, the bulk constant and the leading slope.

.. math::

    C_e = \tfrac12\log 2 + \frac{1}{4\pi}\sum_{n\geq1}\frac1n
          \Big(\sum_{m=1}^{n-1}\frac{1}{\sqrt{m(n-m)}} - \pi\Big),
    \qquad C_b = C_e + \tfrac12\log 2,
    \qquad \kappa = \frac{\zeta(3/2)}{2\sqrt{2\pi}}.

The series terms decay like :math:`2\zeta(1/2)\,n^{-3/2}`, so the raw tail
after ``N`` terms is :math:`O(N^{-1/2})` and a tail correction is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError
from .special import zeta_three_halves

__all__ = [
    "SeriesTerm",
    "ConstantResult",
    "inner_sum",
    "series_term",
    "series_terms",
    "c_edge",
    "c_bulk",
    "kappa",
    "TAIL_METHODS",
]

TAIL_METHODS = ("raw", "tail_corrected", "asymptotic")

# exact summation up to here; beyond, the endpoint expansion is accurate to ~1e-19
_EXACT_MAX = 2048
_ASYM_ORDER = 8


@dataclass(frozen=True)
class SeriesTerm:
    n: int
    inner_sum: float
    term: float


@dataclass(frozen=True)
class ConstantResult:
    """A series constant at a given cutoff.

    ``tail_estimate`` is the magnitude of the contribution beyond ``cutoff``;
    it is added to ``value`` for the corrected methods and only reported for
    ``"raw"``.
    """

    value: float
    cutoff: int
    tail_estimate: float
    method: str


def inner_sum(n: int) -> float:
    r"""Exact :math:`\sum_{m=1}^{n-1} 1/\sqrt{m(n-m)}` using the pairing m <-> n-m."""
    n = int(n)
    if n < 1:
        raise DomainError(f"inner_sum requires n >= 1, got {n}")
    if n == 1:
        return 0.0
    half = (n - 1) // 2
    m = np.arange(1, half + 1, dtype=float)
    total = 2.0 * math.fsum(1.0 / np.sqrt(m * (n - m)))
    if n % 2 == 0:
        total += 2.0 / n
    return total


def series_term(n: int) -> SeriesTerm:
    s = inner_sum(n)
    return SeriesTerm(n, s, (s - math.pi) / n)


def _asym_coefficients(order: int = _ASYM_ORDER) -> np.ndarray:
    # inner_sum(n) - pi ~ 2 sum_j binom(2j, j) 4^-j zeta(1/2 - j) n^(-1/2 - j)
    j = np.arange(order)
    return 2.0 * special.binom(2 * j, j) / 4.0 ** j * special.zeta(0.5 - j)


def _inner_minus_pi_asym(n: np.ndarray) -> np.ndarray:
    coef = _asym_coefficients()
    n = np.asarray(n, dtype=float)
    powers = n[..., None] ** (-0.5 - np.arange(coef.size))
    return powers @ coef


@lru_cache(maxsize=8)
def _terms_cached(cutoff: int) -> np.ndarray:
    out = np.empty(cutoff)
    n_exact = min(cutoff, _EXACT_MAX)
    for n in range(1, n_exact + 1):
        out[n - 1] = (inner_sum(n) - math.pi) / n
    if cutoff > _EXACT_MAX:
        n = np.arange(_EXACT_MAX + 1, cutoff + 1, dtype=float)
        out[_EXACT_MAX:] = _inner_minus_pi_asym(n) / n
    out.flags.writeable = False
    return out


def series_terms(cutoff: int) -> np.ndarray:
    r"""Terms :math:`(1/n)(\mathrm{inner}(n) - \pi)` for ``n = 1..cutoff``.

    Terms with ``n > 2048`` come from the endpoint-singularity expansion of the
    inner sum, which agrees with direct summation to ~1e-19 there.
    """
    if cutoff < 1:
        raise DomainError("cutoff must be >= 1")
    return _terms_cached(int(cutoff))


def _series_value(cutoff: int, tail: str) -> tuple[float, float]:
    """Return (series sum including tail when requested, tail magnitude)."""
    if tail not in TAIL_METHODS:
        raise DomainError(f"tail must be one of {TAIL_METHODS}, got {tail!r}")
    if cutoff < 2:
        raise DomainError(f"cutoff must be >= 2, got {cutoff}")
    terms = series_terms(cutoff)
    partial = math.fsum(terms)
    if tail == "asymptotic":
        if cutoff < 64:
            raise DomainError("the asymptotic tail needs cutoff >= 64")
        coef = _asym_coefficients()
        hz = special.zeta(1.5 + np.arange(coef.size), cutoff + 1)
        contrib = coef * hz
        return partial + math.fsum(contrib), abs(math.fsum(contrib))
    # fit c n^{-3/2} over the final decade and sum the model tail exactly
    lo = max(1, cutoff // 10)
    n = np.arange(lo, cutoff + 1, dtype=float)
    w = n ** -1.5
    c = float(np.dot(terms[lo - 1:], w) / np.dot(w, w))
    model_tail = c * float(special.zeta(1.5, cutoff + 1))
    if tail == "raw":
        return partial, abs(model_tail)
    return partial + model_tail, abs(model_tail)


def c_edge(cutoff: int = 100_000, tail: str = "tail_corrected") -> ConstantResult:
    """The edge constant C_e; ``exp(C_e)`` is close to 0.75.

    Parameters
    ----------
    cutoff : int
        Number of explicitly summed series terms (>= 2).
    tail : {"raw", "tail_corrected", "asymptotic"}
        ``"raw"`` is the plain partial sum. ``"tail_corrected"`` adds the tail
        of a ``c n^{-3/2}`` model fitted over the last decade of terms.
        ``"asymptotic"`` adds the tail of the full endpoint expansion and is
        accurate to round-off for ``cutoff >= 64``.
    """
    s, t = _series_value(int(cutoff), tail)
    return ConstantResult(0.5 * math.log(2) + s / (4 * math.pi), int(cutoff), t / (4 * math.pi), tail)


def c_bulk(cutoff: int = 100_000, tail: str = "tail_corrected") -> ConstantResult:
    """The bulk constant C_b, which shares the series of :func:`c_edge`."""
    s, t = _series_value(int(cutoff), tail)
    return ConstantResult(math.log(2) + s / (4 * math.pi), int(cutoff), t / (4 * math.pi), tail)


@lru_cache(maxsize=1)
def kappa() -> float:
    """Leading tail slope zeta(3/2) / (2 sqrt(2 pi))."""
    return zeta_three_halves().value / (2 * math.sqrt(2 * math.pi))
