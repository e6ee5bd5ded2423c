r"""Scalar special functions with explicit truncation bounds.

The central object is the theta-type sum

.. math:: \Omega(t) = \sum_{k\geq 1} e^{-\pi k^2 t},

related to Jacobi's theta function by :math:`\theta_3(0, it) = 1 + 2\Omega(t)`
and obeying the modular identity
:math:`1 + 2\Omega(1/t) = \sqrt{t}\,(1 + 2\Omega(t))`.

Every scalar routine returns a :class:`SpecialValue` carrying a bound on the
truncation error so that callers can propagate error budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError

__all__ = [
    "Tolerance",
    "SpecialValue",
    "omega",
    "omega_array",
    "zeta_three_halves",
    "euler_mascheroni_theta",
    "euler_mascheroni_harmonic",
    "check_modular",
]

# below this argument the raw sum needs O(t**-0.5) terms; the modular form needs O(1)
MODULAR_SWITCH = 0.2


@dataclass(frozen=True)
class Tolerance:
    """Absolute accuracy target and work limit for a truncated series."""

    abs_tol: float = 1e-15
    max_terms: int = 100_000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


@dataclass(frozen=True)
class SpecialValue:
    """A computed value together with a bound on its truncation error."""

    value: float
    tail_bound: float
    terms_used: int

    def __float__(self):
        return float(self.value)


def _omega_direct(t: float, tol: Tolerance) -> SpecialValue:
    terms = []
    for k in range(1, tol.max_terms + 1):
        terms.append(math.exp(-math.pi * k * k * t))
        # consecutive-term ratios beyond k+1 are at most exp(-pi t (2k+3))
        head = math.exp(-math.pi * (k + 1) ** 2 * t)
        bound = head / -math.expm1(-math.pi * t * (2 * k + 3))
        if bound <= tol.abs_tol:
            return SpecialValue(math.fsum(terms), bound, k)
    raise ConvergenceError(
        f"omega({t}) needs more than {tol.max_terms} terms for abs_tol={tol.abs_tol}"
    )


def omega(t: float, tol: Tolerance | None = None, method: str = "auto") -> SpecialValue:
    r"""Evaluate :math:`\Omega(t) = \sum_{k\geq1} e^{-\pi k^2 t}`.

    Parameters
    ----------
    t : float
        Positive argument.
    tol : Tolerance, optional
        Absolute accuracy target; defaults to ``Tolerance()``.
    method : {"auto", "direct", "modular"}
        ``"direct"`` sums the series as written. ``"modular"`` evaluates
        :math:`\Omega(1/t)` and maps back through the modular identity.
        ``"auto"`` uses the modular route for ``t < 0.2``.

    Returns
    -------
    SpecialValue
        ``tail_bound`` bounds the truncation error of ``value``.
    """
    tol = tol or Tolerance()
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"omega requires a finite t > 0, got {t}")
    if method == "auto":
        method = "modular" if t < MODULAR_SWITCH else "direct"
    if method == "direct":
        return _omega_direct(t, tol)
    if method != "modular":
        raise DomainError(f"unknown method {method!r}")
    root = math.sqrt(t)
    inner = _omega_direct(1.0 / t, Tolerance(tol.abs_tol * root, tol.max_terms))
    value = (0.5 + inner.value) / root - 0.5
    return SpecialValue(value, inner.tail_bound / root, inner.terms_used)


def omega_array(t) -> np.ndarray:
    """Vectorized :func:`omega` at double precision (no bound reported)."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)) or not np.all(np.isfinite(t)):
        raise DomainError("omega_array requires finite t > 0")
    if t.size == 0:
        return t.copy()
    small = t < MODULAR_SWITCH
    s = np.where(small, 1.0 / t, t)
    # e^{-pi k^2 s} < 1e-18 for k beyond this
    kmax = int(math.ceil(math.sqrt(42.0 / (math.pi * float(s.min()))))) + 1
    k2 = np.arange(1, kmax + 1, dtype=float) ** 2
    raw = np.exp(-math.pi * np.multiply.outer(s, k2)).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mod = (0.5 + raw) / np.sqrt(t) - 0.5
    return np.where(small, mod, raw)


# Euler-Maclaurin corrections beyond the half-term; the remainder of a
# completely monotone summand is bounded by the first omitted term.
_EM_ORDER = 4


def _em_terms(s: float, N: int, order: int) -> list[float]:
    bern = special.bernoulli(2 * order + 2)
    out = []
    for j in range(1, order + 2):
        rising = special.poch(s, 2 * j - 1)
        out.append(bern[2 * j] / math.factorial(2 * j) * rising * N ** (-s - 2 * j + 1))
    return out


def zeta_three_halves(tol: Tolerance | None = None) -> SpecialValue:
    r"""Riemann :math:`\zeta(3/2)` by partial sum plus Euler-Maclaurin tail.

    The tail :math:`\sum_{n\geq N} n^{-3/2}` is replaced by the integral
    :math:`2/\sqrt{N}`, the half-term :math:`N^{-3/2}/2` and four Bernoulli
    corrections; the first omitted correction bounds the remainder.
    """
    tol = tol or Tolerance()
    s = 1.5
    N = 8
    while True:
        if N - 1 > tol.max_terms:
            raise ConvergenceError(
                f"zeta(3/2) needs more than {tol.max_terms} terms for abs_tol={tol.abs_tol}"
            )
        corr = _em_terms(s, N, _EM_ORDER)
        bound = abs(corr[-1])
        if bound <= tol.abs_tol:
            break
        N *= 2
    head = math.fsum(n ** -s for n in range(1, N))
    tail = 2.0 / math.sqrt(N) + 0.5 * N ** -s + math.fsum(corr[:-1])
    return SpecialValue(head + tail, bound, N - 1)


def euler_mascheroni_theta(tol: Tolerance | None = None) -> SpecialValue:
    r"""Euler's constant from the theta integral.

    .. math:: \gamma = \log(4\pi) - 2 + 2\int_1^\infty (1+\sqrt{t})\,\frac{\Omega(t)}{t}\,dt

    The integral is split at a point ``T`` where the exponential tail bound
    :math:`\int_T^\infty (1+\sqrt t)\,t^{-1} e^{-\pi t}/(1-e^{-\pi t})\,dt`
    falls below a tenth of the target, and ``[1, T]`` is integrated adaptively.
    """
    tol = tol or Tolerance(abs_tol=1e-12)
    inner_tol = Tolerance(min(1e-16, tol.abs_tol), tol.max_terms)

    def tail_bound(T):
        return (1 + math.sqrt(T)) / T * math.exp(-math.pi * T) / (
            math.pi * -math.expm1(-math.pi * T)
        )

    T = 2.0
    while tail_bound(T) > tol.abs_tol / 20:
        T += 1.0
    integrand = lambda t: (1 + math.sqrt(t)) * omega(t, inner_tol).value / t
    val, err, info = integrate.quad(
        integrand, 1.0, T, epsabs=tol.abs_tol / 20, epsrel=0.0, limit=200, full_output=1
    )[:3]
    trunc = inner_tol.abs_tol * (math.log(T) + 2 * (math.sqrt(T) - 1))
    bound = 2 * (err + tail_bound(T) + trunc)
    if bound > tol.abs_tol:
        raise ConvergenceError(f"theta integral for gamma reached only {bound:.3g}")
    value = math.log(4 * math.pi) - 2 + 2 * val
    return SpecialValue(value, bound, info["neval"])


def euler_mascheroni_harmonic(N: int) -> float:
    r"""Harmonic-sum estimate :math:`\sum_{n\leq N} 1/n - \log N` (error ~ 1/(2N))."""
    if N < 1:
        raise DomainError("N must be positive")
    return math.fsum(1.0 / n for n in range(1, N + 1)) - math.log(N)


def check_modular(t: float, tol: Tolerance | None = None) -> float:
    r"""Signed residual :math:`(1+2\Omega(1/t)) - \sqrt{t}(1+2\Omega(t))`.

    Both sides are summed directly (never through the identity being
    checked), so the small-``t`` side exercises the slowly converging branch.
    """
    t = float(t)
    if not t > 0:
        raise DomainError(f"check_modular requires t > 0, got {t}")
    tol = tol or Tolerance(abs_tol=1e-16)
    lhs = 1 + 2 * omega(1.0 / t, tol, method="direct").value
    rhs = math.sqrt(t) * (1 + 2 * omega(t, tol, method="direct").value)
    return lhs - rhs
