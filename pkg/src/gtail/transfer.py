"""Deterministic exit probabilities of the odd/even absorbed walk.

The walk's sub-probability mass is kept on a uniform grid of cells, with 0
and ``L`` on cell edges, and propagated by convolution with the Gaussian
transition kernel averaged over source and target cells. After an odd step
the mass at ``x >= L`` is banked as exit mass; after an even step the mass at
``x <= 0`` is discarded. Live mass is therefore supported on ``[-W, L)``
after odd steps and on ``[0, L + W)`` after even steps, with ``W`` the kernel
half-width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal, special

from .errors import AccuracyError, ConvergenceError, DomainError

__all__ = ["GridDensity", "TransferResult", "transfer_exit", "transfer_exit_details", "cell_kernel"]

KERNEL_WIDTH = 8.0  # kernel half-width in standard deviations


@dataclass(frozen=True)
class GridDensity:
    """Cell masses on ``[lower, upper)`` after a step of the given parity."""

    lower: float
    upper: float
    spacing: float
    mass: np.ndarray
    parity: str

    @property
    def total(self) -> float:
        return float(self.mass.sum())


@dataclass(frozen=True)
class TransferResult:
    probability: float
    steps: int
    spacing: float
    residual_mass: float
    tail_extrapolation: float
    final: GridDensity


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def cell_kernel(spacing: float, sigma: float, width: float = KERNEL_WIDTH) -> np.ndarray:
    """Probability of moving ``d`` cells, for mass spread uniformly over its cell.

    Entries are indexed by ``d = -D .. D`` with ``D = ceil(width sigma / spacing)``;
    each is the triangular-weighted integral of the Gaussian density over
    ``[(d-1) h, (d+1) h]``, done by Gauss-Legendre on each half.
    """
    D = int(math.ceil(width * sigma / spacing))
    h = spacing
    u = 0.5 * h * (_GL_X + 1)  # nodes on [0, h]
    w = 0.5 * h * _GL_W * (h - u) / h
    x = np.arange(-D, D + 1)[:, None] * h
    dens = lambda y: np.exp(-0.5 * (y / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    return (dens(x + u) + dens(x - u)) @ w


def _first_step(edges, sigma):
    return np.diff(special.ndtr(edges / sigma))


def transfer_exit_details(L: float, spacing: float | None = None, variance: float = 0.5,
                          tol: float = 1e-12, max_steps: int = 2_000_000) -> TransferResult:
    """Exit probability P(tau_L < tau_0) with diagnostics; see :func:`transfer_exit`."""
    if not L > 0:
        raise DomainError("L must be positive")
    sigma = math.sqrt(variance)
    if spacing is None:
        spacing = min(L / 2000, sigma / 32)
    if not spacing > 0:
        raise DomainError("spacing must be positive")
    if spacing > sigma / 4:
        raise AccuracyError(f"spacing {spacing:.3g} too coarse for increment sd {sigma:.3g}")
    n_in = int(math.ceil(L / spacing))
    h = L / n_in
    kern = cell_kernel(h, sigma)
    if abs(1 - kern.sum()) > max(tol, 1e-13):
        raise AccuracyError(f"kernel mass defect {1 - kern.sum():.3g}")
    kern = kern / kern.sum()
    D = (kern.size - 1) // 2
    # cells [-D, n_in + D): index j covers [(j - D) h, (j - D + 1) h)
    n_cells = n_in + 2 * D
    edges = (np.arange(n_cells + 1) - D) * h
    zero, top = D, D + n_in

    mass = _first_step(edges, sigma)
    exit_mass = float(mass[top:].sum()) + float(special.ndtr(-edges[-1] / sigma))
    mass[top:] = 0.0
    step = 1
    prev = tail = 0.0
    while True:
        # even step: discard x <= 0 (mass below the window is discarded too)
        mass = np.clip(signal.fftconvolve(mass, kern)[D:D + n_cells], 0.0, None)
        mass[:zero] = 0.0
        # odd step: bank everything that lands at x >= L
        before = float(mass.sum())
        mass = np.clip(signal.fftconvolve(mass, kern)[D:D + n_cells], 0.0, None)
        mass[top:] = 0.0
        alive = float(mass.sum())
        exit_now = max(before - alive, 0.0) if before > 0 else 0.0
        exit_mass += exit_now
        step += 2
        if alive < tol:
            tail = 0.0
            break
        if prev > 0 and step > 100:
            q = exit_now / prev
            if 0 < q < 1:
                tail = exit_now * q / (1 - q)
                if tail < tol:
                    break
        if step > max_steps:
            raise ConvergenceError(f"transfer operator did not converge in {max_steps} steps")
        prev = exit_now
    final = GridDensity(float(edges[0]), float(edges[-1]), h, mass, "odd_step")
    return TransferResult(exit_mass + tail, step, h, alive, tail, final)


def transfer_exit(L: float, spacing: float | None = None, variance: float = 0.5, tol: float = 1e-12) -> float:
    """P(tau_L < tau_0) for the walk with ``N(0, variance)`` increments.

    Parameters
    ----------
    L : float
        Upper barrier, checked at odd times.
    spacing : float, optional
        Requested cell width; rounded down so that ``L`` is a whole number of
        cells. Defaults to ``min(L / 2000, sd / 32)``.
    tol : float
        Iteration stops when the geometric extrapolation of the remaining exit
        mass falls below ``tol``.
    """
    return transfer_exit_details(L, spacing, variance, tol).probability
