"""Derivative-free maximisation used to cross-check the closed-form gains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray | float
    value: float
    iterations: int
    converged: bool


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_iter: int = 500
) -> OptimResult:
    """Maximise a unimodal ``f`` on ``[a, b]`` until the bracket is narrower than ``tol``."""
    a, b = min(a, b), max(a, b)
    h = b - a
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = f(c), f(d)
    it = 0
    while h > tol and it < max_iter:
        it += 1
        if fc > fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # the bracket midpoint is not guaranteed to beat the best interior probe
    best = max((fx, x), (fc, c), (fd, d))
    return OptimResult(best[1], best[0], it, h <= tol)


def coordinate_search_max(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    step: float = 1.0,
    tol: float = 1e-10,
    max_sweeps: int = 200,
) -> OptimResult:
    """Cyclic coordinate ascent with a golden-section line search per coordinate.

    Each coordinate is searched on ``[x_i - step, x_i + step]``.  Stops once a
    full sweep moves no coordinate by more than ``10 * tol``.
    """
    x = np.array(x0, dtype=float)
    best = f(x)
    for sweep in range(1, max_sweeps + 1):
        moved = 0.0
        for i in range(x.size):
            xi = x[i]

            def line(t: float) -> float:
                y = x.copy()
                y[i] = t
                return f(y)

            res = golden_section_max(line, xi - step, xi + step, tol=tol)
            if res.value > best:
                x[i] = res.x
                best = res.value
                moved = max(moved, abs(res.x - xi))
        if moved <= 10 * tol:
            return OptimResult(x, best, sweep, True)
    return OptimResult(x, best, max_sweeps, False)
