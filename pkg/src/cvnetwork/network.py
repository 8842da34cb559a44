"""N-party entangled resource states and their entanglement diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian import (
    MOMENTUM,
    POSITION,
    GaussianState,
    SymplecticMap,
    beamsplitter_map,
    displace,
    measure_homodyne,
    squeeze,
    vacuum,
)

ALL_EQUAL = "all-equal"
ONE_SQUEEZED = "one-squeezed"
CUSTOM = "custom"
SCENARIOS = (ALL_EQUAL, ONE_SQUEEZED, CUSTOM)


@dataclass(frozen=True)
class NetworkConfig:
    """Squeezing of the ``n`` input vacua feeding the N-splitter.

    By default mode 0 is momentum-squeezed and the others position-squeezed.
    """

    n: int
    r: tuple[float, ...]
    scenario: str = CUSTOM
    axes: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a network needs at least two parties")
        r = tuple(float(v) for v in self.r)
        if len(r) != self.n:
            raise ValueError(f"need {self.n} squeezing values, got {len(r)}")
        if any(not math.isfinite(v) or v < 0 for v in r):
            raise ValueError("squeezing values must be finite and non-negative")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        axes = self.axes or (MOMENTUM,) + (POSITION,) * (self.n - 1)
        if len(axes) != self.n or any(a not in (MOMENTUM, POSITION) for a in axes):
            raise ValueError("axes must give 'p' or 'x' for every mode")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "axes", tuple(axes))

    @classmethod
    def all_equal(cls, n: int, r: float) -> NetworkConfig:
        return cls(n, (r,) * n, ALL_EQUAL)

    @classmethod
    def one_squeezed(cls, n: int, r1: float) -> NetworkConfig:
        return cls(n, (r1,) + (0.0,) * (n - 1), ONE_SQUEEZED)

    @classmethod
    def from_scenario(cls, n: int, scenario: str, r: float | Sequence[float]) -> NetworkConfig:
        if scenario == ALL_EQUAL:
            return cls.all_equal(n, r)
        if scenario == ONE_SQUEEZED:
            return cls.one_squeezed(n, r)
        return cls(n, tuple(r), CUSTOM)


def nsplitter_map(n: int) -> SymplecticMap:
    """The N-splitter: ``B_12(arccos 1/sqrt(N))`` first, ``B_{N-1,N}(pi/4)`` last."""
    if n < 2:
        raise ValueError("N-splitter needs N >= 2")
    out = SymplecticMap.identity(n)
    for m in range(n - 1):
        remaining = n - m
        theta = math.pi / 4 if remaining == 2 else math.acos(1 / math.sqrt(remaining))
        out = out.then(beamsplitter_map(n, m, m + 1, theta))
    return out


def tritter_map() -> SymplecticMap:
    return beamsplitter_map(3, 0, 1, math.acos(1 / math.sqrt(3))).then(
        beamsplitter_map(3, 1, 2, math.pi / 4)
    )


def build_ghz_state(config: NetworkConfig) -> GaussianState:
    state = vacuum(config.n)
    for m, (r, axis) in enumerate(zip(config.r, config.axes)):
        state = squeeze(state, m, r, axis)
    return nsplitter_map(config.n).apply(state)


def _pair_check(state: GaussianState, k: int, l: int) -> None:
    if k == l:
        raise ValueError("modes k and l must differ")
    state._check_mode(k)
    state._check_mode(l)


def position_difference_variance(state: GaussianState, k: int, l: int) -> float:
    """``var(x_k - x_l)``."""
    _pair_check(state, k, l)
    c = state.cov
    a, b = 2 * k, 2 * l
    return float(c[a, a] + c[b, b] - 2 * c[a, b])


def momentum_correlation_variance(state: GaussianState, k: int, l: int, gn: float) -> float:
    """``var(p_k + p_l + gn * sum_{j != k,l} p_j)`` from the covariance."""
    _pair_check(state, k, l)
    w = np.zeros(2 * state.n_modes)
    w[1::2] = gn
    w[2 * k + 1] = w[2 * l + 1] = 1.0
    return float(w @ state.cov @ w)


def least_squares_gain(state: GaussianState, k: int, l: int) -> float:
    """Assisting gain minimising :func:`momentum_correlation_variance`.

    For the symmetric resource states this coincides with the closed-form
    optimal gain of the teleportation protocol.
    """
    _pair_check(state, k, l)
    others = [j for j in range(state.n_modes) if j not in (k, l)]
    if not others:
        return 0.0
    a = np.zeros(2 * state.n_modes)
    a[[2 * k + 1, 2 * l + 1]] = 1.0
    b = np.zeros(2 * state.n_modes)
    b[[2 * j + 1 for j in others]] = 1.0
    return float(-(a @ state.cov @ b) / (b @ state.cov @ b))


def duan_value(state: GaussianState) -> float:
    """``var(x_1 - x_2) + var(p_1 + p_2)``; below 1 certifies entanglement.

    Only the unscaled form of the criterion is evaluated.  Central moments are
    used, so displacements do not change the value.
    """
    if state.n_modes != 2:
        raise ValueError("duan_value needs a two-mode state")
    c = state.cov
    return float(c[0, 0] + c[2, 2] - 2 * c[0, 2] + c[1, 1] + c[3, 3] + 2 * c[1, 3])


@dataclass(frozen=True)
class DistilledPair:
    state: GaussianState
    outcomes: tuple[float, ...]
    gain: float
    degenerate: bool


def distill_pair(
    state: GaussianState,
    k: int,
    l: int,
    gn: float | None = None,
    rng: np.random.Generator | None = None,
    outcomes: Sequence[float] | None = None,
) -> DistilledPair:
    """Project modes ``k, l`` onto a two-mode state by measuring all other momenta.

    The other stations are measured in increasing mode order.  Mode ``l``'s
    momentum is then displaced by ``gn * sum(p_j)``; ``gn`` defaults to
    :func:`least_squares_gain`.  The returned pair keeps the relative order of
    ``k`` and ``l``.
    """
    _pair_check(state, k, l)
    if state.n_modes < 3:
        raise ValueError("distillation needs at least three modes")
    others = [j for j in range(state.n_modes) if j not in (k, l)]
    if outcomes is not None and len(outcomes) != len(others):
        raise ValueError(f"need {len(others)} forced outcomes, got {len(outcomes)}")
    if gn is None:
        gn = least_squares_gain(state, k, l)
    labels = list(range(state.n_modes))
    record = []
    degenerate = False
    for i, j in enumerate(others):
        forced = None if outcomes is None else outcomes[i]
        meas = measure_homodyne(state, labels.index(j), "p", outcome=forced, rng=rng)
        state = meas.state
        labels.remove(j)
        record.append(meas.outcome)
        degenerate |= meas.degenerate
    state = displace(state, labels.index(l), 0.0, gn * sum(record))
    return DistilledPair(state, tuple(record), gn, degenerate)
