r"""Gaussian random walks, their stopping times, and bridge-conditioned estimators.

The walk ``B`` has ``N(0, 1/2)`` increments and starts at zero. ``tau_L`` is
the first odd time with ``B >= L`` and ``tau_0`` the first even time
``>= 2`` with ``B <= 0``. ``M`` is the maximum over odd times before time
``2n`` and ``m`` the minimum over even times up to ``2n`` (time 0 included).

Expectations of the form :math:`E(X\,\delta_0(S_{2n}))` are computed as
:math:`E(X \mid S_{2n}=0)\,\rho_{2n}(0)`. For Gaussian increments the
conditioned path is exactly ``S_k - (k/2n) S_{2n}``, and the endpoint density
at zero is known in closed form, so no smoothing is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import integrate

from .brownian import bridge_max, bridge_min
from .errors import ConvergenceError, DomainError
from .mc import McEstimate, estimate, map_blocks

__all__ = [
    "NOT_REACHED",
    "WalkConfig",
    "StopRecord",
    "WalkBatch",
    "sample_walk",
    "exit_probability_mc",
    "walk_bridges",
    "FUNCTIONALS",
    "bridge_expectation",
    "p_n_direct",
    "p_n_shifted",
    "shift_path",
    "cyclic_shift_hits",
    "kac_lhs",
    "kac_rhs",
    "kac_closed_form",
    "dyson_rhs",
    "hoelder_diagnostic",
    "HoelderFit",
    "hoelder_slope",
    "lattice_error",
    "density_at_zero",
]

NOT_REACHED = -1


@dataclass(frozen=True)
class WalkConfig:
    """Parameters shared by the walk and bridge estimators.

    ``horizon`` caps the number of simulated steps for unconditioned walks;
    ``batch`` is the number of samples per random-stream block.
    """

    increment_variance: float = 0.5
    horizon: int = 100_000
    seed: int = 0
    batch: int = 4096
    workers: int = 1

    def __post_init__(self):
        if not self.increment_variance > 0:
            raise DomainError("increment_variance must be positive")
        if self.horizon < 2 or self.horizon % 2:
            raise DomainError(f"horizon must be a positive even integer, got {self.horizon}")
        if self.batch < 1:
            raise DomainError("batch must be >= 1")


@dataclass(frozen=True)
class StopRecord:
    """Stopping data of one walk.

    ``tau_L`` is recorded only if it occurs before ``tau_0``; ``odd_max``,
    ``even_min`` and ``endpoint`` are taken at ``tau_0``, or at the horizon
    when ``truncated``.
    """

    tau_L: int
    tau_0: int
    odd_max: float
    even_min: float
    endpoint: float
    truncated: bool


@dataclass(frozen=True)
class WalkBatch:
    tau_L: np.ndarray
    tau_0: np.ndarray
    odd_max: np.ndarray
    even_min: np.ndarray
    endpoint: np.ndarray
    L: float
    seed: int

    @property
    def truncated(self) -> np.ndarray:
        return self.tau_0 == NOT_REACHED

    def records(self) -> Iterator[StopRecord]:
        for i in range(self.tau_0.size):
            yield StopRecord(int(self.tau_L[i]), int(self.tau_0[i]), float(self.odd_max[i]),
                             float(self.even_min[i]), float(self.endpoint[i]),
                             bool(self.tau_0[i] == NOT_REACHED))

    def __len__(self):
        return self.tau_0.size


def _first_true(mask: np.ndarray) -> np.ndarray:
    idx = mask.argmax(axis=1)
    return np.where(mask[np.arange(mask.shape[0]), idx], idx, -1)


def _simulate(gen, count, L, sigma, horizon, stop_on_exit):
    """Vectorized walk simulation in geometrically growing time chunks."""
    tau_L = np.full(count, NOT_REACHED, dtype=np.int64)
    tau_0 = np.full(count, NOT_REACHED, dtype=np.int64)
    odd_max = np.full(count, -np.inf)
    even_min = np.zeros(count)
    endpoint = np.zeros(count)
    active = np.arange(count)
    pos = np.zeros(count)
    t = 0
    chunk = 64
    while active.size and t < horizon:
        c = min(chunk, horizon - t)
        path = pos[active, None] + np.cumsum(gen.standard_normal((active.size, c)) * sigma, axis=1)
        times = np.arange(t + 1, t + c + 1)
        odd = times % 2 == 1
        i0 = _first_true((path <= 0) & ~odd)
        iL = _first_true((path >= L) & odd)
        # restrict the extrema to columns up to the stopping column
        stop_col = np.where(i0 >= 0, i0, c - 1)
        if stop_on_exit:
            stop_col = np.where((iL >= 0) & ((i0 < 0) | (iL < i0)), iL, stop_col)
        cols = np.arange(c)
        upto = cols[None, :] <= stop_col[:, None]
        om = np.where(upto & odd, path, -np.inf).max(axis=1)
        em = np.where(upto & ~odd, path, np.inf).min(axis=1)
        odd_max[active] = np.maximum(odd_max[active], om)
        even_min[active] = np.minimum(even_min[active], em)
        newL = (iL >= 0) & ((i0 < 0) | (iL < i0)) & (tau_L[active] == NOT_REACHED)
        tau_L[active[newL]] = t + 1 + iL[newL]
        hit0 = i0 >= 0
        if stop_on_exit:
            hit0 &= ~newL
        tau_0[active[hit0]] = t + 1 + i0[hit0]
        endpoint[active] = path[np.arange(active.size), stop_col]
        done = hit0 | (newL if stop_on_exit else False)
        pos[active] = path[:, -1]
        active = active[~done]
        t += c
        chunk = min(chunk * 2, 4096)
    return tau_L, tau_0, odd_max, even_min, endpoint


def sample_walk(config: WalkConfig, L: float, n_samples: int) -> WalkBatch:
    """Simulate ``n_samples`` independent walks until ``tau_0`` or the horizon.

    Walks that do not reach ``tau_0`` within ``config.horizon`` steps are kept
    and flagged through :attr:`WalkBatch.truncated`.
    """
    if not L > 0:
        raise DomainError("L must be positive")
    sigma = math.sqrt(config.increment_variance)

    def block(gen, count):
        out = _simulate(gen, count, L, sigma, config.horizon, stop_on_exit=False)
        return np.column_stack([o.astype(float) for o in out])

    arr = map_blocks(block, n_samples, config.batch, config.seed, f"walk:{L}", config.workers)
    return WalkBatch(arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2],
                     arr[:, 3], arr[:, 4], float(L), config.seed)


def exit_probability_mc(L: float, n_samples: int = 100_000, config: WalkConfig | None = None) -> McEstimate:
    """Monte Carlo estimate of P(tau_L < tau_0).

    Each walk stops at the first of its two stopping times. Walks undecided at
    the horizon score zero and are reported in ``truncated_fraction``.
    """
    config = config or WalkConfig()
    if not L > 0:
        raise DomainError("L must be positive")
    sigma = math.sqrt(config.increment_variance)

    def block(gen, count):
        tl, t0, *_ = _simulate(gen, count, L, sigma, config.horizon, stop_on_exit=True)
        return np.column_stack([(tl != NOT_REACHED).astype(float),
                                ((tl == NOT_REACHED) & (t0 == NOT_REACHED)).astype(float)])

    arr = map_blocks(block, n_samples, config.batch, config.seed, f"exit:{L}", config.workers)
    return McEstimate.from_samples(arr[:, 0], config.seed, float(arr[:, 1].mean()))


def walk_bridges(gen: np.random.Generator, count: int, n_steps: int, variance: float) -> np.ndarray:
    """Gaussian walks of ``n_steps`` steps conditioned to end at zero.

    Returns an array of shape ``(count, n_steps + 1)`` with zero first and last
    columns.
    """
    inc = gen.standard_normal((count, n_steps)) * math.sqrt(variance)
    path = np.zeros((count, n_steps + 1))
    np.cumsum(inc, axis=1, out=path[:, 1:])
    path -= (np.arange(n_steps + 1) / n_steps) * path[:, -1:]
    path[:, -1] = 0.0
    return path


def density_at_zero(n_steps: int, variance: float) -> float:
    return 1.0 / math.sqrt(2 * math.pi * n_steps * variance)


def _odd_max(path):
    return path[:, 1::2].max(axis=1)


def _even_min(path):
    return path[:, 0::2].min(axis=1)


def _tau0_is_end(path):
    inner_even = path[:, 2:-1:2]
    return np.all(inner_even > 0, axis=1)


def _need_L(L):
    if L is None or not L > 0:
        raise DomainError("this functional needs L > 0")
    return L


FUNCTIONALS = {
    "one": lambda p, L: np.ones(p.shape[0]),
    "odd_max": lambda p, L: _odd_max(p),
    "even_min": lambda p, L: _even_min(p),
    "range_capped": lambda p, L: np.minimum(_need_L(L), _odd_max(p) - _even_min(p)),
    "range_deficit": lambda p, L: np.clip(_need_L(L) - (_odd_max(p) - _even_min(p)), 0, None),
    "max_nonneg": lambda p, L: np.maximum(0.0, p[:, 1:-1].max(axis=1, initial=0.0)),
    "tau0_capped": lambda p, L: _tau0_is_end(p) * np.minimum(_need_L(L), _odd_max(p)),
}


def bridge_expectation(n: int, functional: str, config: WalkConfig | None = None, L: float | None = None,
                       n_samples: int = 100_000) -> McEstimate:
    r"""Estimate :math:`E(F(S)\,\delta_0(S_{2n}))` for a named path functional.

    Parameters
    ----------
    n : int
        Half the number of steps; the walk runs for ``2n`` steps.
    functional : str
        One of ``FUNCTIONALS``: ``"one"``, ``"odd_max"``, ``"even_min"``,
        ``"range_capped"`` (``min(L, M - m)``), ``"range_deficit"``
        (``(L - M + m)_+``), ``"max_nonneg"`` and ``"tau0_capped"``
        (``1(tau_0 = 2n) min(L, M)``).
    config : WalkConfig, optional
        Increment variance, seed, block size and worker count.
    L : float, optional
        Cap used by the capped functionals.
    """
    config = config or WalkConfig()
    if n < 1:
        raise DomainError("n must be >= 1")
    try:
        fn = FUNCTIONALS[functional]
    except KeyError:
        raise DomainError(f"unknown functional {functional!r}; choose from {sorted(FUNCTIONALS)}") from None
    if functional in ("range_capped", "range_deficit", "tau0_capped"):
        _need_L(L)
    var = config.increment_variance
    rho0 = density_at_zero(2 * n, var)
    block_size = max(16, min(config.batch, 4_000_000 // (2 * n + 1)))

    def block(gen, count):
        return fn(walk_bridges(gen, count, 2 * n, var), L) * rho0

    tag = f"bridge:{functional}:{n}:{L}:{var}"
    return estimate(block, n_samples, block_size, config.seed, tag, config.workers)


def p_n_direct(n: int, L: float, config: WalkConfig | None = None, n_samples: int = 100_000) -> McEstimate:
    """p_n(L) = E(min(L, M_2n) 1(tau_0 = 2n) delta_0(B_2n)) from its definition."""
    return bridge_expectation(n, "tau0_capped", config, L, n_samples)


def p_n_shifted(n: int, L: float, config: WalkConfig | None = None, n_samples: int = 100_000) -> McEstimate:
    """p_n(L) through the cyclic-shift form (1/n) E(min(L, M_2n - m_2n) delta_0(B_2n))."""
    return bridge_expectation(n, "range_capped", config, L, n_samples).scaled(1.0 / n)


def shift_path(path: np.ndarray, p: int) -> np.ndarray:
    """Walk built from the increments cyclically shifted by ``p`` steps."""
    inc = np.diff(path, axis=1)
    out = np.zeros_like(path)
    np.cumsum(np.roll(inc, -p, axis=1), axis=1, out=out[:, 1:])
    return out


def cyclic_shift_hits(path: np.ndarray) -> np.ndarray:
    """Boolean ``(count, n)`` array: does the shift by ``2p`` have ``tau_0 = 2n``?"""
    n = (path.shape[1] - 1) // 2
    return np.column_stack([_tau0_is_end(shift_path(path, 2 * p)) for p in range(n)])


def kac_lhs(n: int, config: WalkConfig | None = None, n_samples: int = 1_000_000) -> McEstimate:
    r"""Monte Carlo :math:`\rho^{(n)}(0)\,E(\max(0, S_1, \dots, S_{n-1}) \mid S_n = 0)`.

    Uses ``N(0, 1)`` increments unless ``config`` says otherwise.
    """
    config = config or WalkConfig(increment_variance=1.0)
    if n < 2:
        raise DomainError("n must be >= 2")
    var = config.increment_variance
    rho0 = density_at_zero(n, var)

    def block(gen, count):
        p = walk_bridges(gen, count, n, var)
        return np.maximum(0.0, p[:, 1:-1].max(axis=1)) * rho0

    return estimate(block, n_samples, config.batch, config.seed, f"kac:{n}:{var}", config.workers)


def dyson_rhs(n: int, config: WalkConfig | None = None, n_samples: int = 1_000_000) -> McEstimate:
    r"""Monte Carlo :math:`\rho^{(n)}(0)\sum_{k<n}\frac1k E((S_k)_+ \mid S_n = 0)`."""
    config = config or WalkConfig(increment_variance=1.0)
    if n < 2:
        raise DomainError("n must be >= 2")
    var = config.increment_variance
    rho0 = density_at_zero(n, var)
    w = 1.0 / np.arange(1, n)

    def block(gen, count):
        p = walk_bridges(gen, count, n, var)
        return np.clip(p[:, 1:-1], 0, None) @ w * rho0

    return estimate(block, n_samples, config.batch, config.seed, f"dyson:{n}:{var}", config.workers)


def kac_closed_form(n: int) -> float:
    r"""Gaussian value of both sides of Kac's identity: :math:`\frac{1}{4\pi}\sum_{k<n} 1/\sqrt{k(n-k)}`.

    It does not depend on the increment variance.
    """
    k = np.arange(1, n, dtype=float)
    return float(np.sum(1 / np.sqrt(k * (n - k))) / (4 * math.pi))


def kac_rhs(n: int, variance: float = 1.0, quad_tol: float = 1e-12) -> float:
    r"""Quadrature of :math:`\frac n2\int_0^\infty x\sum_k \rho^{(k)}\rho^{(n-k)}/(k(n-k))\,dx`.

    Each Gaussian integral is cross-checked against its closed form
    :math:`\sqrt{ab}/(2\pi(a+b))` with ``a = k variance``, ``b = (n-k) variance``.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    total = 0.0
    for k in range(1, n):
        a, b = k * variance, (n - k) * variance
        f = lambda x: x * math.exp(-x * x * (a + b) / (2 * a * b)) / (2 * math.pi * math.sqrt(a * b))
        upper = 40 * math.sqrt(a * b / (a + b))
        val, err = integrate.quad(f, 0.0, upper, epsabs=quad_tol, epsrel=0.0, limit=200)
        closed = math.sqrt(a * b) / (2 * math.pi * (a + b))
        if err > 10 * quad_tol or abs(val - closed) > 10 * quad_tol + 1e-14:
            raise ConvergenceError(f"Kac integral k={k} off by {abs(val - closed):.3g}")
        total += val / (k * (n - k))
    return 0.5 * n * total


def hoelder_diagnostic(n: int, gamma: float = 0.1, config: WalkConfig | None = None,
                       n_samples: int = 4000) -> McEstimate:
    r"""Discretization gap of the maximum.

    Estimates :math:`\frac1n E(|\sup_{[0,2n]} B - \max_{\text{odd } k} B_k|\,\delta_0(B_{2n}))`
    for the rate-1/2 Brownian motion interpolating the walk; the continuum
    maximum between integer times is sampled exactly. The bound behind the
    large-``n`` error term predicts decay like ``n^{-3/2+gamma}``.
    """
    if not 0 < gamma < 0.5:
        raise DomainError("gamma must lie in (0, 1/2)")
    config = config or WalkConfig()
    var = config.increment_variance
    weight = density_at_zero(2 * n, var) / n
    block_size = max(16, min(config.batch, 4_000_000 // (2 * n + 1)))

    def block(gen, count):
        p = walk_bridges(gen, count, 2 * n, var)
        cont = bridge_max(gen, p[:, :-1], p[:, 1:], 1.0, var).max(axis=1)
        return (cont - _odd_max(p)) * weight

    return estimate(block, n_samples, block_size, config.seed, f"hoelder:{n}:{var}", config.workers)


@dataclass(frozen=True)
class HoelderFit:
    ns: tuple
    estimates: tuple
    slope: float
    intercept: float
    theory_slope: float


def hoelder_slope(ns=(100, 1000, 10_000), gamma: float = 0.1, config: WalkConfig | None = None,
                  n_samples: int = 4000) -> HoelderFit:
    """Log-log slope of :func:`hoelder_diagnostic` over ``ns``."""
    ests = tuple(hoelder_diagnostic(int(n), gamma, config, n_samples) for n in ns)
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log([e.mean for e in ests])
    slope, intercept = np.polyfit(x, y, 1)
    return HoelderFit(tuple(int(n) for n in ns), ests, float(slope), float(intercept), -1.5 + gamma)


def lattice_error(n: int, L: float, config: WalkConfig | None = None, n_samples: int = 4000) -> McEstimate:
    r"""Coupled estimate of the walk-versus-Brownian error in ``p_n(L)``.

    .. math:: \frac1n E\big((\min(L, M_{2n}-m_{2n}) - \min(L, \sup B - \inf B))\,\delta_0(B_{2n})\big)

    with the continuum extrema drawn, interval by interval, from their exact
    marginal laws given the walk values.
    """
    config = config or WalkConfig()
    _need_L(L)
    var = config.increment_variance
    weight = density_at_zero(2 * n, var) / n
    block_size = max(16, min(config.batch, 4_000_000 // (2 * n + 1)))

    def block(gen, count):
        p = walk_bridges(gen, count, 2 * n, var)
        hi = bridge_max(gen, p[:, :-1], p[:, 1:], 1.0, var).max(axis=1)
        lo = bridge_min(gen, p[:, :-1], p[:, 1:], 1.0, var).min(axis=1)
        disc = np.minimum(L, _odd_max(p) - _even_min(p))
        return (disc - np.minimum(L, hi - lo)) * weight

    return estimate(block, n_samples, block_size, config.seed, f"lattice:{n}:{L}:{var}", config.workers)
