r"""Tail prediction for the largest real eigenvalue and the pieces behind it.

The prediction is

.. math:: \log P(\lambda_{\max} < -L) \approx -\kappa L + C_e .

It is assembled from the summands ``p_n(L)``. For ``n <= L^(2-eps)`` the
range cap is inactive and ``p_n`` is close to the Kac-type value
``inner_sum(n) / (2 pi n)``. Beyond that the walk is replaced by Brownian
motion and ``p_n`` by the capped-range expectation. The finite-``L`` value of
the log-probability itself is available through :func:`finite_l_log_prob`,
which evaluates the exit probability and the range-deficit series directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import walks
from .brownian import capped_range_expectation
from .constants import c_edge, inner_sum, kappa
from .errors import ConvergenceError, DomainError
from .mc import McEstimate
from .special import euler_mascheroni_theta
from .special import omega as omega_scalar
from .special import omega_array
from .transfer import transfer_exit

__all__ = [
    "PnValue",
    "PredictionBreakdown",
    "ExpectationBreakdown",
    "IdentityCheck",
    "FiniteLResult",
    "C_GAMMA",
    "GAMMA",
    "e1_bound",
    "e2_bound",
    "p_small",
    "p_large",
    "calibrate_c_gamma",
    "expectation_min_term",
    "expectation_min_term_details",
    "r_of_l",
    "r_of_l_identity_check",
    "identity_integrand_small",
    "identity_integrand_large",
    "predict",
    "finite_l_log_prob",
]

# Holder exponent for the large-n error bound and its working constant:
# three times the calibrated value from calibrate_c_gamma() at L in {10, 20, 40}
GAMMA = 0.1
C_GAMMA = 0.886
CUTOFF_POLICIES = ("hurwitz", "integral")


@dataclass(frozen=True)
class PnValue:
    n: int
    L: float | None
    value: float
    regime: str
    error_bound: float
    bound_available: bool = True


@dataclass(frozen=True)
class PredictionBreakdown:
    L: float
    leading: float
    constant: float
    predicted_log_prob: float
    predicted_prob: float
    error_order: str = "o(L^{-1+})"


def e1_bound(n: int, L: float, epsilon: float) -> float:
    r"""Small-``n`` error bound :math:`\sqrt{8/(\pi n^3)}\,L\,e^{-2L^2/n}/(1-e^{-2L^\epsilon})`."""
    return math.sqrt(8 / (math.pi * n ** 3)) * L * math.exp(-2 * L * L / n) / -math.expm1(-2 * L ** epsilon)


def e2_bound(n: int, gamma: float = GAMMA, c_gamma: float = C_GAMMA) -> float:
    """Large-``n`` error bound ``c_gamma n^(-3/2 + gamma)``."""
    return c_gamma * n ** (-1.5 + gamma)


def _check_eps(epsilon):
    if not 0 < epsilon < 2:
        raise DomainError(f"epsilon must lie in (0, 2), got {epsilon}")


def p_small(n: int, L: float | None = None, epsilon: float = 0.5) -> PnValue:
    """Small-``n`` approximation ``inner_sum(n) / (2 pi n)`` of ``p_n(L)``.

    The error bound needs ``L``; without it the bound is reported as 0 with
    ``bound_available=False``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    value = inner_sum(n) / (2 * math.pi * n)
    if L is None:
        return PnValue(int(n), None, value, "small_n", 0.0, False)
    if not L > 0:
        raise DomainError("L must be positive")
    _check_eps(epsilon)
    return PnValue(int(n), float(L), value, "small_n", e1_bound(n, L, epsilon))


def p_large(n: int, L: float, gamma: float = GAMMA, c_gamma: float = C_GAMMA) -> PnValue:
    r"""Large-``n`` approximation of ``p_n(L)`` by the Brownian capped range.

    .. math:: \frac{1}{2n} - \sqrt{\frac{2}{\pi n^3}}\,L\,\Omega\Big(\frac{2L^2}{\pi n}\Big)
    """
    if n < 1 or not L > 0:
        raise DomainError("need n >= 1 and L > 0")
    value = max(0.0, float(capped_range_expectation(n, L)))
    return PnValue(int(n), float(L), value, "large_n", e2_bound(n, gamma, c_gamma))


def calibrate_c_gamma(Ls=(10.0, 20.0, 40.0), ns=(100, 316, 1000, 3162, 10_000), gamma: float = GAMMA,
                      n_samples: int = 4000, seed: int = 0, workers: int = 1) -> float:
    """Empirical constant for the large-``n`` error: ``max (|E2| + 2 se) n^(3/2 - gamma)``.

    ``E2`` is the coupled walk-minus-Brownian estimate from
    :func:`gtail.walks.lattice_error`.
    """
    cfg = walks.WalkConfig(seed=seed, workers=workers)
    worst = 0.0
    for L in Ls:
        for n in ns:
            e = walks.lattice_error(int(n), float(L), cfg, n_samples)
            worst = max(worst, (abs(e.mean) + 2 * e.stderr) * n ** (1.5 - gamma))
    return worst


@dataclass(frozen=True)
class ExpectationBreakdown:
    """Parts of the two-regime evaluation of ``E(min(L, M) delta_0(B))`` at ``tau_0``."""

    value: float
    L: float
    epsilon: float
    split: int
    small_part: float
    large_part: float
    tail_part: float
    error_bound: float
    cutoff_policy: str


def _g(x):
    # large-n summand in the scaled variable x = n / L^2, times L^2
    x = np.asarray(x, dtype=float)
    return 1 / (2 * x) - np.sqrt(2 / (math.pi * x ** 3)) * omega_array(2 / (math.pi * x))


def _scaled_tail_integral(lo: float) -> float:
    """Integral of the scaled large-n summand over ``[lo, inf)``."""

    def f(u):
        # x = u^-2 maps [1, inf) to (0, 1]; the image tends to sqrt(2/pi) at u = 0
        if u == 0:
            return math.sqrt(2 / math.pi)
        return float(_g(1 / (u * u))) * 2 / u ** 3

    head = integrate.quad(_g, lo, 1.0, limit=200)[0] if lo <= 1 else -integrate.quad(_g, 1.0, lo, limit=200)[0]
    return head + integrate.quad(f, 0.0, 1.0, limit=200)[0]


def expectation_min_term_details(L: float, epsilon: float = 0.5, cutoff_policy: str = "hurwitz",
                                 gamma: float = GAMMA, c_gamma: float = C_GAMMA) -> ExpectationBreakdown:
    """Two-regime evaluation of the stopped capped-maximum expectation.

    Summands ``n <= floor(L^(2-eps))`` use :func:`p_small`, the rest
    :func:`p_large`. With ``cutoff_policy="hurwitz"`` the large-``n`` sum is
    explicit up to ``n = 100 L^2``, where the theta sum is far below round-off,
    and the remaining ``L n^(-3/2) / sqrt(2 pi)`` tail is a Hurwitz zeta value.
    With ``"integral"`` the whole large-``n`` sum is replaced by the midpoint
    integral of the scaled summand, whose error is of order ``L^(-2+eps)``
    and is not included in ``error_bound``.
    """
    if not L > 1:
        raise DomainError(f"L must exceed 1, got {L}")
    _check_eps(epsilon)
    if cutoff_policy not in CUTOFF_POLICIES:
        raise DomainError(f"cutoff_policy must be one of {CUTOFF_POLICIES}")
    N = int(math.floor(L ** (2 - epsilon)))
    n = np.arange(1, N + 1)
    small = math.fsum(inner_sum(int(k)) / (2 * math.pi * k) for k in n)
    bound = math.fsum(e1_bound(int(k), L, epsilon) for k in n)
    if cutoff_policy == "hurwitz":
        K = max(N + 1, int(math.ceil(100 * L * L)))
        big = np.arange(N + 1, K + 1, dtype=float)
        large = math.fsum(np.clip(capped_range_expectation(big, L), 0, None))
        tail = L / math.sqrt(2 * math.pi) * float(special.zeta(1.5, K + 1))
    else:
        large = _scaled_tail_integral((N + 0.5) / (L * L))
        tail = 0.0
    # sum of c n^(-3/2+gamma) over n > N, by the integral comparison
    bound += c_gamma * N ** (-0.5 + gamma) / (0.5 - gamma)
    return ExpectationBreakdown(small + large + tail, float(L), float(epsilon), N, small, large, tail,
                                bound, cutoff_policy)


def expectation_min_term(L: float, epsilon: float = 0.5, cutoff_policy: str = "hurwitz") -> float:
    """Value of :func:`expectation_min_term_details`."""
    return expectation_min_term_details(L, epsilon, cutoff_policy).value


def r_of_l(L: float, epsilon: float = 0.5, cutoff_policy: str = "hurwitz") -> float:
    """Constant-order remainder ``E/2 - log(L)/2 - log(2)/4``; tends to ``C_e``."""
    return 0.5 * expectation_min_term(L, epsilon, cutoff_policy) - 0.5 * math.log(L) - 0.25 * math.log(2)


def identity_integrand_small(x):
    r""":math:`\sqrt{2/(\pi x^3)}\,\Omega(2/(\pi x))` on ``(0, 1]``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return np.sqrt(2 / (math.pi * x ** 3)) * omega_array(2 / (math.pi * x))


def identity_integrand_large(x):
    r""":math:`1/(2x) - \sqrt{2/(\pi x^3)}\,\Omega(2/(\pi x))` on ``[1, \infty)``."""
    return _g(x)


@dataclass(frozen=True)
class IdentityCheck:
    residual: float
    gamma_theta: float
    integral_small: float
    integral_large: float
    quad_error: float


def r_of_l_identity_check(tol: float = 1e-12) -> IdentityCheck:
    r"""Check that the regime split collapses to ``log(2) / 2``.

    Evaluates

    .. math:: \frac\gamma4 - \frac{\log 2}{4} - \frac12\int_0^1 \sqrt{\tfrac{2}{\pi x^3}}\,\Omega\big(\tfrac{2}{\pi x}\big)dx
              + \frac12\int_1^\infty\Big(\frac{1}{2x} - \sqrt{\tfrac{2}{\pi x^3}}\,\Omega\big(\tfrac{2}{\pi x}\big)\Big)dx

    and returns its difference from ``log(2) / 2``. Euler's constant comes from
    its theta-integral representation. The first integral is taken in
    ``t = 2 / (pi x)``, where it reads ``int_{2/pi}^inf Omega(t) t^(-1/2) dt``;
    the second in ``x = u^-2``, which makes the integrand bounded on ``[0, 1]``.
    """
    gam = euler_mascheroni_theta().value
    om = lambda t: omega_scalar(t).value
    # Omega(t) < 1e-40 beyond t = 30
    i0, e0 = integrate.quad(lambda t: om(t) / math.sqrt(t), 2 / math.pi, 30.0, epsabs=tol, epsrel=0, limit=200)

    def f(u):
        if u == 0:
            return math.sqrt(2 / math.pi)
        x = 1 / (u * u)
        return (0.5 / x - math.sqrt(2 / (math.pi * x ** 3)) * om(2 / (math.pi * x))) * 2 / u ** 3

    i1, e1 = integrate.quad(f, 0.0, 1.0, epsabs=tol, epsrel=0, limit=200)
    if e0 > 100 * tol or e1 > 100 * tol:
        raise ConvergenceError(f"identity quadrature errors {e0:.2g}, {e1:.2g}")
    combo = gam / 4 - 0.25 * math.log(2) - 0.5 * i0 + 0.5 * i1
    return IdentityCheck(combo - 0.5 * math.log(2), gam, i0, i1, e0 + e1)


@lru_cache(maxsize=1)
def _c_edge_default() -> float:
    return c_edge().value


def predict(L: float) -> PredictionBreakdown:
    """Leading-order prediction ``-kappa L + C_e`` of ``log P(lambda_max < -L)``.

    ``L = 0`` is accepted as a diagnostic, although the asymptotic form makes
    no accuracy claim there.
    """
    L = float(L)
    if not L >= 0 or not math.isfinite(L):
        raise DomainError(f"L must be finite and >= 0, got {L}")
    lead = -kappa() * L
    const = _c_edge_default()
    return PredictionBreakdown(L, lead, const, lead + const, math.exp(lead + const))


@dataclass(frozen=True)
class FiniteLResult:
    """Finite-``L`` evaluation of ``log P(lambda_max < -L)``.

    ``log_prob = log(exit_probability) / 2 - deficit.mean / 2``; only the
    deficit series is random.
    """

    L: float
    log_prob: float
    stderr: float
    exit_probability: float
    deficit: McEstimate
    terms_used: int


def finite_l_log_prob(L: float, n_samples: int = 20_000, seed: int = 0, workers: int = 1,
                      abs_tol: float = 1e-7, n_max: int = 5000) -> FiniteLResult:
    r"""Exact-in-distribution value of ``log P(lambda_max < -L)`` at finite ``L``.

    Combines the walk representation of the gap probability with the cyclic
    shift identity, which turns the two stopped expectations into

    .. math:: \log P = \tfrac12 \log P(\tau_L < \tau_0)
              - \tfrac12 \sum_{n\ge1} \tfrac1n E\big((L - M_{2n} + m_{2n})_+\,\delta_0(B_{2n})\big).

    The exit probability comes from the transfer operator. The deficit terms
    are bridge Monte Carlo estimates; the series is stopped once three
    consecutive terms fall below ``abs_tol`` (upper 3-sigma), at which point
    the Brownian value of the remaining terms is below round-off of the sum.
    """
    if not L > 0:
        raise DomainError("L must be positive")
    cfg = walks.WalkConfig(seed=seed, workers=workers)
    p_exit = transfer_exit(L)
    means, variances = [], []
    quiet = 0
    n = 0
    while quiet < 3:
        n += 1
        if n > n_max:
            raise ConvergenceError(f"deficit series not below {abs_tol} by n={n_max}")
        e = walks.bridge_expectation(n, "range_deficit", cfg, L, n_samples).scaled(1.0 / n)
        means.append(e.mean)
        variances.append(e.stderr ** 2)
        quiet = quiet + 1 if e.mean + 3 * e.stderr < abs_tol else 0
    total = math.fsum(means)
    se = math.sqrt(math.fsum(variances))
    deficit = McEstimate(total, se, n_samples, seed)
    return FiniteLResult(float(L), 0.5 * math.log(p_exit) - 0.5 * total, 0.5 * se, p_exit, deficit, n)
