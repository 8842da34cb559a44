"""Teleportation network protocol, fidelities and gain optimisation.

Two independent routes compute the teleportation fidelity:

* :func:`run_protocol` pushes covariance matrices through beamsplitters,
  homodyne detections and the receiver's displacement;
* :func:`closed_form_fidelity` evaluates exact linear forms from
  :mod:`cvnetwork.heisenberg`.

The reported fidelity is that of the teleported state averaged over the
classical measurement record, i.e. the overlap with the input coherent state
of the ensemble the receiver ends up holding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import heisenberg as hz
from .gaussian import (
    GaussianState,
    beamsplitter,
    coherent,
    coherent_fidelity,
    displace,
    homodyne_feedforward,
    measure_homodyne,
    tensor,
)
from .network import (
    ALL_EQUAL,
    CUSTOM,
    ONE_SQUEEZED,
    NetworkConfig,
    build_ghz_state,
    least_squares_gain,
)
from .optimize import coordinate_search_max, golden_section_max

DB_PER_NEPER = 20.0 / math.log(10.0)
"""Squeezing in dB per unit of ``r``: ``10 log10(e^{2r}) = 8.6859 r``."""

ALWAYS_QUANTUM = "always-quantum"
DIPS_CLASSICAL = "dips-classical"


def db_to_r(db: float) -> float:
    return db / DB_PER_NEPER


def r_to_db(r: float) -> float:
    return r * DB_PER_NEPER


@dataclass(frozen=True)
class GainSchedule:
    """Receiver gains: ``g`` on the Bell results, ``gn`` on each assisting momentum.

    ``per_station`` overrides ``gn`` with one gain per assisting station,
    ordered by mode index.
    """

    g: float = 1.0
    gn: float = 0.0
    per_station: tuple[float, ...] | None = None

    def __post_init__(self):
        vals = [self.g, self.gn] + list(self.per_station or ())
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("gains must be finite")
        if self.per_station is not None:
            object.__setattr__(self, "per_station", tuple(float(v) for v in self.per_station))

    def station_gains(self, count: int) -> tuple[float, ...]:
        if self.per_station is None:
            return (self.gn,) * count
        if len(self.per_station) != count:
            raise ValueError(f"need {count} per-station gains, got {len(self.per_station)}")
        return self.per_station

    @classmethod
    def optimal(cls, config: NetworkConfig, k: int = 0, l: int = 1) -> GainSchedule:
        """Unit Bell gain with the optimal assisting gain for ``config``."""
        if config.n == 2:
            return cls(1.0, 0.0)
        if config.scenario == CUSTOM:
            return cls(1.0, least_squares_gain(build_ghz_state(config), k, l))
        return cls(1.0, optimal_gain(config.n, config.scenario, config.r[0]))


@dataclass(frozen=True)
class TeleportOutcome:
    """One run of the protocol.

    ``record`` holds ``(x_u, p_v, p_j...)``.  ``output`` is the teleported state
    averaged over records and ``fidelity`` its overlap with the input;
    ``conditional`` is the receiver's state for this particular record after
    the displacement, with ``shot_fidelity`` its overlap.
    """

    record: tuple[float, ...]
    gains: GainSchedule
    output: GaussianState
    fidelity: float
    conditional: GaussianState
    shot_fidelity: float
    alpha: tuple[float, float]
    degenerate: bool = False

    @property
    def x_u(self) -> float:
        return self.record[0]

    @property
    def p_v(self) -> float:
        return self.record[1]

    @property
    def assisting(self) -> tuple[float, ...]:
        return self.record[2:]


def optimal_gain(n: int, scenario: str, r: float) -> float | None:
    """Closed-form optimal assisting gain; ``None`` for ``N = 2`` (no assistants).

    all-equal: ``(e^{4r} - 1)/(e^{4r} + (N-2)/2)``;
    one-squeezed: ``(e^{2r} - 1)/(e^{2r} + (N-2)/2)``.
    """
    if n < 2:
        raise ValueError("N must be at least 2")
    if not math.isfinite(r) or r < 0:
        raise ValueError("r must be finite and non-negative")
    if n == 2:
        return None
    if scenario == ALL_EQUAL:
        e = math.exp(4 * r)
    elif scenario == ONE_SQUEEZED:
        e = math.exp(2 * r)
    else:
        raise ValueError(f"no closed-form gain for scenario {scenario!r}")
    return (e - 1) / (e + (n - 2) / 2)


def analytic_optimal_fidelity(n: int, scenario: str, r) -> np.ndarray | float:
    """Optimal-gain fidelity formulas, vectorised over ``r``.

    all-equal: ``(1 + e^{-2r})^{-1/2} (1 + N/(2 e^{2r} + (N-2) e^{-2r}))^{-1/2}``;
    one-squeezed: ``(2 + 2N/(N - 2 + 2 e^{2r}))^{-1/2}``.
    """
    r = np.asarray(r, dtype=float)
    if scenario == ALL_EQUAL:
        up, down = np.exp(2 * r), np.exp(-2 * r)
        out = (1 + down) ** -0.5 * (1 + n / (2 * up + (n - 2) * down)) ** -0.5
    elif scenario == ONE_SQUEEZED:
        out = (2 + 2 * n / (n - 2 + 2 * np.exp(2 * r))) ** -0.5
    else:
        raise ValueError(f"no closed-form fidelity for scenario {scenario!r}")
    return float(out) if out.ndim == 0 else out


def _assisting(n: int, k: int, l: int) -> list[int]:
    return [j for j in range(n) if j not in (k, l)]


def run_protocol(
    config: NetworkConfig,
    k: int,
    l: int,
    alpha: tuple[float, float],
    gains: GainSchedule | None = None,
    rng: np.random.Generator | None = None,
    outcomes: Sequence[float] | None = None,
) -> TeleportOutcome:
    """Teleport the coherent state ``alpha`` from station ``k`` to station ``l``.

    The input is appended as mode ``N`` and mixed with mode ``k`` at a 50/50
    beamsplitter, which leaves ``x_u = (x_in - x_k)/sqrt(2)`` in slot ``k`` and
    ``p_v = (p_in + p_k)/sqrt(2)`` in slot ``N``.  ``x_u``, ``p_v`` and the
    momenta of the other stations are measured, in that order, and the
    receiver displaces by ``(g sqrt(2) x_u, g sqrt(2) p_v + sum gn_j p_j)``.
    """
    n = config.n
    if k == l:
        raise ValueError("sender and receiver must differ")
    for m in (k, l):
        if not 0 <= m < n:
            raise IndexError(f"station {m} out of range for N={n}")
    if not all(math.isfinite(a) for a in alpha):
        raise ValueError("alpha must be finite")
    gains = gains or GainSchedule.optimal(config, k, l)
    assist = _assisting(n, k, l)
    station = gains.station_gains(len(assist))

    inp = n
    state = tensor(build_ghz_state(config), coherent(*alpha))
    state = beamsplitter(state, inp, k, math.pi / 4)

    measured = [(k, "x"), (inp, "p")] + [(j, "p") for j in assist]
    if outcomes is not None and len(outcomes) != len(measured):
        raise ValueError(f"need {len(measured)} forced outcomes, got {len(outcomes)}")
    gmat = np.zeros((2, len(measured)))
    gmat[0, 0] = gmat[1, 1] = gains.g * math.sqrt(2)
    gmat[1, 2:] = station
    output = homodyne_feedforward(state, l, measured, gmat)

    labels = list(range(n + 1))
    record = []
    degenerate = False
    for i, (mode, quad) in enumerate(measured):
        forced = None if outcomes is None else outcomes[i]
        meas = measure_homodyne(state, labels.index(mode), quad, outcome=forced, rng=rng)
        state = meas.state
        labels.remove(mode)
        record.append(meas.outcome)
        degenerate |= meas.degenerate
    shift = gmat @ np.array(record)
    conditional = displace(state, 0, shift[0], shift[1])

    alpha = (float(alpha[0]), float(alpha[1]))
    return TeleportOutcome(
        record=tuple(record),
        gains=gains,
        output=output,
        fidelity=coherent_fidelity(output, alpha),
        conditional=conditional,
        shot_fidelity=coherent_fidelity(conditional, alpha),
        alpha=alpha,
        degenerate=degenerate,
    )


def _config(n: int, scenario: str, r) -> NetworkConfig:
    return NetworkConfig.from_scenario(n, scenario, r)


@dataclass(frozen=True)
class FidelityModel:
    """Unit-gain fidelity as a function of the assisting gains.

    ``var(p_tel) = a + 2 c.G + G.H.G`` with every coefficient taken from the
    linear forms, so evaluating a gain vector costs one small quadratic form.
    """

    sigma_x: float
    a: float
    c: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        # instances are cached and shared
        self.c.setflags(write=False)
        self.h.setflags(write=False)

    def __call__(self, gains) -> float:
        gv = np.broadcast_to(np.asarray(gains, dtype=float), self.c.shape)
        sigma_p = self.a + 2 * self.c @ gv + gv @ self.h @ gv + 0.25
        return 1.0 / (2.0 * math.sqrt(self.sigma_x * sigma_p))

    def least_squares_gain(self) -> float:
        ones = np.ones_like(self.c)
        return float(-(self.c @ ones) / (ones @ self.h @ ones))


def fidelity_model(n: int, scenario: str, r, k: int = 0, l: int = 1) -> FidelityModel:
    return _fidelity_model(_config(n, scenario, r), k, l)


@lru_cache(maxsize=256)
def _fidelity_model(config: NetworkConfig, k: int, l: int) -> FidelityModel:
    n = config.n
    pf = hz.protocol_forms(n, k, l, config.axes)
    rv = config.r
    root2 = hz.Surd.sqrt(2)
    x_tel = pf.x_l + pf.x_u * root2
    base = pf.p_l + pf.p_v * root2
    c = np.array([hz.covariance_of(base, pj, rv) for pj in pf.assist], dtype=float)
    h = np.array([[hz.covariance_of(pi, pj, rv) for pj in pf.assist] for pi in pf.assist], dtype=float)
    return FidelityModel(
        float(hz.variance_of(x_tel, rv)) + 0.25,
        float(hz.variance_of(base, rv)),
        c.reshape(len(pf.assist)),
        h.reshape(len(pf.assist), len(pf.assist)),
    )


def closed_form_fidelity(
    n: int,
    scenario: str,
    r,
    gains: GainSchedule | None = None,
    alpha: tuple[float, float] = (0.0, 0.0),
    k: int = 0,
    l: int = 1,
) -> float:
    """Fidelity from the exact output forms.

    ``r`` is the common squeezing (all-equal), ``r_1`` (one-squeezed) or a
    per-mode sequence (custom).  With ``gains=None`` the unit Bell gain and the
    optimal assisting gain are used.  For ``g != 1`` the result depends on
    ``alpha``.
    """
    config = _config(n, scenario, r)
    if gains is None:
        if n == 2:
            gains = GainSchedule(1.0, 0.0)
        elif scenario == CUSTOM:
            gains = GainSchedule(1.0, fidelity_model(n, scenario, r, k, l).least_squares_gain())
        else:
            gains = GainSchedule(1.0, optimal_gain(n, scenario, config.r[0]))
    station = gains.station_gains(n - 2)
    x_tel, p_tel = hz.teleported_output_forms(n, k, l, gains.g, station, config.axes)
    return float(hz.fidelity_from_forms(x_tel, p_tel, alpha, config.r))


@dataclass(frozen=True)
class GainOptimization:
    gains: GainSchedule
    fidelity: float
    converged: bool


def optimize_gains_numeric(
    n: int,
    scenario: str,
    r,
    mode: str = "single",
    k: int = 0,
    l: int = 1,
    start: Sequence[float] | None = None,
) -> GainOptimization:
    """Maximise the unit-gain fidelity over the assisting gains without derivatives.

    ``mode="single"`` runs a golden-section search for one shared gain on
    ``[0, 1.5]``; ``mode="per-station"`` runs coordinate ascent over one gain
    per assisting station, started from ``start`` or else the single-gain
    optimum.
    """
    if n < 3:
        raise ValueError("gain optimisation needs N >= 3")
    model = fidelity_model(n, scenario, r, k, l)
    single = golden_section_max(lambda gv: model(gv), 0.0, 1.5, tol=1e-10)
    if mode == "single":
        gains = GainSchedule(1.0, float(single.x))
        converged = single.converged
    elif mode == "per-station":
        x0 = np.full(n - 2, float(single.x)) if start is None else np.asarray(start, dtype=float)
        if x0.shape != (n - 2,):
            raise ValueError(f"start needs {n - 2} gains")
        res = coordinate_search_max(model, x0, step=0.5)
        gains = GainSchedule(1.0, float(single.x), tuple(res.x))
        converged = single.converged and res.converged
    else:
        raise ValueError(f"unknown optimisation mode {mode!r}")
    return GainOptimization(gains, closed_form_fidelity(n, scenario, r, gains, k=k, l=l), converged)


@dataclass(frozen=True)
class CurveRow:
    n: int
    squeezing_db: float
    r: float
    gain: float | None
    fidelity: float


def fidelity_curve(ns: Sequence[int], scenario: str, db_grid: Sequence[float]) -> list[CurveRow]:
    """Optimal-gain fidelity for each ``N`` over a squeezing grid in dB, sorted by ``(N, dB)``."""
    if len(db_grid) == 0:
        raise ValueError("squeezing grid is empty")
    if any(db < 0 for db in db_grid):
        raise ValueError("squeezing in dB must be non-negative")
    if scenario not in (ALL_EQUAL, ONE_SQUEEZED):
        raise ValueError(f"curves need scenario {ALL_EQUAL!r} or {ONE_SQUEEZED!r}")
    rows = []
    for n in sorted(set(ns)):
        for db in sorted(db_grid):
            r = db_to_r(db)
            rows.append(CurveRow(n, float(db), r, optimal_gain(n, scenario, r), closed_form_fidelity(n, scenario, r)))
    return rows


@dataclass(frozen=True)
class ScanResult:
    n: int
    classification: str
    maxima: tuple[tuple[float, float], ...] = field(default=())
    minima: tuple[tuple[float, float], ...] = field(default=())
    min_fidelity: float = 0.5


def _bisect_root(f, a: float, b: float, tol: float = 1e-12) -> float:
    fa = f(a)
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def threshold_scan(
    ns: Sequence[int],
    r_max: float = 6.0,
    r_step: float = 1e-3,
    scenario: str = ALL_EQUAL,
    h: float = 1e-6,
) -> list[ScanResult]:
    """Classify whether the optimal fidelity ever drops to the classical 1/2.

    ``F_opt(r)`` is evaluated on ``r = r_step, 2 r_step, ..., r_max``.  Sign
    changes of its central-difference derivative (step ``h``) bracket
    stationary points, which are refined by bisection.  ``N`` is
    ``dips-classical`` if the fidelity falls below 1/2 anywhere.
    """
    if r_step <= 0 or r_max <= r_step:
        raise ValueError("need 0 < r_step < r_max")
    grid = r_step * np.arange(1, int(round(r_max / r_step)) + 1)
    out = []
    for n in ns:
        def fid(r, n=n):
            return analytic_optimal_fidelity(n, scenario, r)

        def slope(r, fid=fid):
            return (fid(r + h) - fid(r - h)) / (2 * h)

        values = fid(grid)
        d = slope(grid)
        maxima, minima = [], []
        for i in np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]:
            r0 = _bisect_root(slope, grid[i], grid[i + 1])
            point = (float(r0), float(fid(r0)))
            (maxima if d[i] > 0 else minima).append(point)
        low = min([float(values.min())] + [f for _, f in minima])
        cls = DIPS_CLASSICAL if low < 0.5 else ALWAYS_QUANTUM
        out.append(ScanResult(n, cls, tuple(maxima), tuple(minima), low))
    return out
