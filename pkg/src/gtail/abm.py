"""Instantaneously annihilating Brownian motions started from a dense lattice on the half-line.

Particles start at ``-left_extent, ..., -spacing, 0`` and move as independent
Brownian motions with generator ``Laplacian`` (variance ``2t`` at time ``t``),
the normalization under which ``X_max(t) / sqrt(4t)`` shares the law of the
shifted top real Ginibre eigenvalue. Two neighbours annihilate when their paths
meet. Between grid times a neighbouring pair meets either because its order
is inverted at the end of the step or, if not, with the Brownian-bridge
probability ``exp(-g0 g1 / (2 dt))`` for gaps ``g0`` and ``g1``.

Time steps grow geometrically, ``dt = min(dt_max, rel_step * max(t, spacing^2))``,
because the density of survivors, and with it the collision rate, is highest
at early times.

Many replicas (lanes) are advanced together in one flat array; a lane label
keeps neighbours from different replicas apart.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mc import map_blocks, stream

__all__ = ["AbmConfig", "AbmResult", "AbmBatch", "annihilate", "simulate", "simulate_many", "rescaled_tail"]


@dataclass(frozen=True)
class AbmConfig:
    """Simulation parameters.

    ``dt`` is the largest allowed step and ``rel_step`` the step relative to
    the elapsed time. Configurations that violate ``spacing << sqrt(t_final)``
    or ``left_extent >> sqrt(4 t_final)`` are accepted with a warning.
    """

    left_extent: float = 12.0
    init_spacing: float = 0.02
    dt: float = 0.05
    t_final: float = 1.0
    seed: int = 0
    rel_step: float = 0.02
    lanes: int = 64

    def __post_init__(self):
        for name in ("left_extent", "init_spacing", "dt", "t_final", "rel_step"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.lanes < 1:
            raise DomainError("lanes must be >= 1")
        if self.init_spacing > 0.1 * math.sqrt(self.t_final):
            warnings.warn("init_spacing is not small against sqrt(t_final)", RuntimeWarning, stacklevel=3)
        if self.left_extent < 5 * math.sqrt(4 * self.t_final):
            warnings.warn("left_extent is not large against sqrt(4 t_final)", RuntimeWarning, stacklevel=3)

    @property
    def initial_count(self) -> int:
        return int(math.floor(self.left_extent / self.init_spacing + 1e-9)) + 1

    def initial_positions(self) -> np.ndarray:
        return -np.arange(self.initial_count)[::-1] * self.init_spacing


@dataclass(frozen=True)
class AbmResult:
    """Outcome of one replica; ``rightmost_rescaled`` is ``-inf`` if no particle survives."""

    rightmost_rescaled: float
    n_survivors: int
    annihilations: int
    empty: bool
    positions: np.ndarray | None = None


@dataclass(frozen=True)
class AbmBatch:
    config: AbmConfig
    rightmost_rescaled: np.ndarray
    n_survivors: np.ndarray
    annihilations: np.ndarray

    @property
    def empty_count(self) -> int:
        return int((self.n_survivors == 0).sum())

    def results(self):
        for r, s, a in zip(self.rightmost_rescaled, self.n_survivors, self.annihilations):
            yield AbmResult(float(r), int(s), int(a), bool(s == 0))

    def __len__(self):
        return self.rightmost_rescaled.size


def annihilate(y: np.ndarray, lane: np.ndarray, hit: np.ndarray):
    """Remove colliding neighbour pairs.

    ``hit[i]`` marks a collision between particles ``i`` and ``i + 1``. Runs
    of consecutive collisions are paired off left to right; pairs that end up
    inverted after the removal are collided in further passes. Returns the
    surviving positions and lanes, in increasing order within each lane.
    """
    while hit.any():
        idx = np.arange(hit.size)
        starts = hit & ~np.r_[False, hit[:-1]]
        run_start = np.maximum.accumulate(np.where(starts, idx, 0))
        pair = hit & ((idx - run_start) % 2 == 0)
        dead = np.zeros(y.size, dtype=bool)
        dead[:-1] |= pair
        dead[1:] |= pair
        y = y[~dead]
        lane = lane[~dead]
        hit = (lane[1:] == lane[:-1]) & (y[1:] <= y[:-1])
    return y, lane


def _run(gen: np.random.Generator, lanes: int, cfg: AbmConfig):
    x0 = cfg.initial_positions()
    x = np.tile(x0, lanes)
    lane = np.repeat(np.arange(lanes), x0.size)
    t = 0.0
    eps = 1e-12 * cfg.t_final
    while t < cfg.t_final - eps:
        dt = min(cfg.dt, cfg.rel_step * max(t, cfg.init_spacing ** 2), cfg.t_final - t)
        y = x + gen.standard_normal(x.size) * math.sqrt(2 * dt)
        same = lane[1:] == lane[:-1]
        g0 = x[1:] - x[:-1]
        g1 = y[1:] - y[:-1]
        u = gen.random(g0.size)
        with np.errstate(over="ignore"):
            met = u < np.exp(-np.maximum(g0 * g1, 0.0) / (2 * dt))
        x, lane = annihilate(y, lane, same & ((g1 <= 0) | met))
        t += dt
    return x, lane


def _summarize(x, lane, lanes, cfg):
    last = np.r_[lane[1:] != lane[:-1], True] if x.size else np.zeros(0, dtype=bool)
    top = np.full(lanes, -np.inf)
    top[lane[last]] = x[last]
    surv = np.bincount(lane, minlength=lanes)
    ann = (cfg.initial_count - surv) // 2
    return top / math.sqrt(4 * cfg.t_final), surv, ann


def simulate(config: AbmConfig, replica: int = 0, keep_positions: bool = False) -> AbmResult:
    """Run one replica, drawn from the stream ``(seed, replica)``."""
    gen = stream(config.seed, "abm:single", replica)
    x, lane = _run(gen, 1, config)
    top, surv, ann = _summarize(x, lane, 1, config)
    return AbmResult(float(top[0]), int(surv[0]), int(ann[0]), bool(surv[0] == 0),
                     x.copy() if keep_positions else None)


def simulate_many(config: AbmConfig, count: int, workers: int = 1) -> AbmBatch:
    """Run ``count`` replicas in blocks of ``config.lanes``; output is worker-independent."""

    def block(gen, n):
        x, lane = _run(gen, n, config)
        top, surv, ann = _summarize(x, lane, n, config)
        return np.column_stack([top, surv, ann])

    tag = f"abm:{config.left_extent}:{config.init_spacing}:{config.dt}:{config.t_final}:{config.rel_step}"
    arr = map_blocks(block, count, config.lanes, config.seed, tag, workers)
    return AbmBatch(config, arr[:, 0], arr[:, 1].astype(int), arr[:, 2].astype(int))


def rescaled_tail(results, L_grid):
    """Tail curve of the rescaled rightmost positions; see :func:`gtail.tails.tail_curve`."""
    from .tails import tail_curve

    if isinstance(results, AbmBatch):
        values = results.rightmost_rescaled
    else:
        values = np.array([r.rightmost_rescaled for r in results])
    return tail_curve(values, L_grid)
