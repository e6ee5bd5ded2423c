r"""Brownian-motion facts used to validate and complete the random-walk analysis.

Includes Lévy's joint law of the infimum, supremum and endpoint, exact sampling
of Brownian-bridge extrema between grid points, and the capped-range
expectation that drives the large-``n`` summands.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .mc import McEstimate, estimate
from .special import omega_array

__all__ = [
    "trivariate_density",
    "bridge_max",
    "bridge_min",
    "confined_bridge_mc",
    "capped_range_expectation",
    "capped_range_mc",
]


def trivariate_density(a: float, b: float, t: float, K: int | None = None) -> float:
    r"""Density at 0 of :math:`W_t` on the event :math:`a \le \inf W,\ \sup W \le b`.

    .. math::

        \sum_{k\in\mathbb Z}\frac{1}{\sqrt{2\pi t}}
        \Big(e^{-2k^2(b-a)^2/t} - e^{-2(b-k(b-a))^2/t}\Big)

    for standard Brownian motion on ``[0, t]``. Infinite ``a`` or ``b`` are
    allowed and reduce to the single-barrier reflection formula.

    Parameters
    ----------
    a, b : float
        Barriers with ``a <= 0 <= b``.
    t : float
        Time horizon, ``t > 0``.
    K : int, optional
        Truncation ``|k| <= K``; chosen from the Gaussian tail when omitted.
    """
    if not (a <= 0 <= b):
        raise DomainError(f"need a <= 0 <= b, got a={a}, b={b}")
    if not t > 0:
        raise DomainError(f"need t > 0, got {t}")
    norm = 1.0 / math.sqrt(2 * math.pi * t)
    if math.isinf(a) and math.isinf(b):
        return norm
    if math.isinf(a):
        return norm * -math.expm1(-2 * b * b / t)
    if math.isinf(b):
        return norm * -math.expm1(-2 * a * a / t)
    w = b - a
    if w == 0:
        return 0.0
    if K is None:
        # every omitted term is below exp(-2 (K w - b)^2 / t) after the shift
        K = int(math.ceil((math.sqrt(40 * t) + abs(a) + abs(b)) / w)) + 1
    k = np.arange(-K, K + 1, dtype=float)
    s = np.exp(-2 * k * k * w * w / t) - np.exp(-2 * (b - k * w) ** 2 / t)
    return float(norm * math.fsum(s))


def bridge_max(gen: np.random.Generator, u, v, dt: float, var_rate: float = 1.0) -> np.ndarray:
    """Exact sample of the maximum of a Brownian bridge from ``u`` to ``v`` over ``dt``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    e = gen.exponential(size=np.broadcast(u, v).shape)
    return 0.5 * (u + v + np.sqrt((u - v) ** 2 + 2 * var_rate * dt * e))


def bridge_min(gen: np.random.Generator, u, v, dt: float, var_rate: float = 1.0) -> np.ndarray:
    """Exact sample of the minimum of a Brownian bridge from ``u`` to ``v`` over ``dt``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    e = gen.exponential(size=np.broadcast(u, v).shape)
    return 0.5 * (u + v - np.sqrt((u - v) ** 2 + 2 * var_rate * dt * e))


def _bridge_grid(gen: np.random.Generator, count: int, n_steps: int, t: float, var_rate: float = 1.0):
    dt = t / n_steps
    inc = gen.standard_normal((count, n_steps)) * math.sqrt(var_rate * dt)
    path = np.zeros((count, n_steps + 1))
    np.cumsum(inc, axis=1, out=path[:, 1:])
    frac = np.arange(n_steps + 1) / n_steps
    path -= frac * path[:, -1:]
    path[:, -1] = 0.0
    return path, dt


def confined_bridge_mc(a: float, b: float, t: float, n_steps: int = 256, n_samples: int = 200_000,
                       seed: int = 0, workers: int = 1, block_size: int = 4096) -> McEstimate:
    """Fine-step Monte Carlo of :func:`trivariate_density`.

    A Brownian bridge on ``n_steps`` grid points is sampled, and between grid
    points the exact single-barrier crossing probabilities
    ``exp(-2 (b-u)(b-v)/dt)`` and ``exp(-2 (u-a)(v-a)/dt)`` are used as a
    conditional survival weight, which removes the grid bias of the discrete
    path up to double crossings within a single step.
    """
    if not (a <= 0 <= b):
        raise DomainError("need a <= 0 <= b")
    norm = 1.0 / math.sqrt(2 * math.pi * t)

    def block(gen, count):
        path, dt = _bridge_grid(gen, count, n_steps, t)
        inside = np.all((path >= a) & (path <= b), axis=1)
        up = np.clip(b - path, 0, None)
        dn = np.clip(path - a, 0, None)
        with np.errstate(over="ignore", divide="ignore"):
            log_surv = (np.log1p(-np.exp(-2 * up[:, :-1] * up[:, 1:] / dt)).sum(axis=1)
                        + np.log1p(-np.exp(-2 * dn[:, :-1] * dn[:, 1:] / dt)).sum(axis=1))
        return np.where(inside, np.exp(log_surv), 0.0) * norm

    return estimate(block, n_samples, block_size, seed, f"confined:{a}:{b}:{t}", workers)


def capped_range_expectation(n, L: float):
    r"""Closed form of :math:`\frac1n E(\min(L, \sup B - \inf B)\,\delta_0(B_{2n}))`.

    ``B`` is Brownian motion with variance rate 1/2 on ``[0, 2n]``. The value is

    .. math:: \frac{1}{2n} - \sqrt{\frac{2}{\pi n^3}}\,L\,\Omega\Big(\frac{2L^2}{\pi n}\Big),

    evaluated for small theta arguments in the cancellation-free form
    :math:`L/\sqrt{2\pi n^3} - \Omega(\pi n/(2L^2))/n`.
    """
    n = np.asarray(n, dtype=float)
    if np.any(n <= 0) or not L > 0:
        raise DomainError("need n > 0 and L > 0")
    t = 2 * L * L / (math.pi * n)
    direct = t >= 0.2
    out = np.empty_like(t)
    nd, td = n[direct], t[direct]
    out[direct] = 1 / (2 * nd) - np.sqrt(2 / (math.pi * nd ** 3)) * L * omega_array(td)
    ns, ts = n[~direct], t[~direct]
    out[~direct] = L / np.sqrt(2 * math.pi * ns ** 3) - omega_array(1 / ts) / ns
    return out if out.ndim else float(out)


def capped_range_mc(n: int, L: float, n_samples: int = 50_000, seed: int = 0, workers: int = 1,
                    block_size: int = 2048) -> McEstimate:
    """Path Monte Carlo of :func:`capped_range_expectation`.

    The rate-1/2 bridge is sampled at integer times and the extrema between
    grid points are drawn exactly.
    """
    norm = 1.0 / (n * math.sqrt(2 * math.pi * n))

    def block(gen, count):
        path, dt = _bridge_grid(gen, count, 2 * n, 2.0 * n, var_rate=0.5)
        hi = bridge_max(gen, path[:, :-1], path[:, 1:], dt, 0.5).max(axis=1)
        lo = bridge_min(gen, path[:, :-1], path[:, 1:], dt, 0.5).min(axis=1)
        return np.minimum(L, hi - lo) * norm

    return estimate(block, n_samples, block_size, seed, f"capped_range:{n}:{L}", workers)
