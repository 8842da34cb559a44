"""Phase-space representation of Gaussian states.

Conventions used throughout the package:

* quadratures are ordered ``(x_1, p_1, ..., x_n, p_n)``;
* ``hbar = 1/2``, so the vacuum has ``var(x) = var(p) = 1/4``;
* a *momentum-squeezed* mode with parameter ``r >= 0`` has its position scaled
  by ``e^{+r}`` and its momentum by ``e^{-r}``; *position-squeezed* is the
  reverse.

States and maps are immutable; every operation returns a new value.
Finite-efficiency detection, loss and non-Gaussian states are not modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

VACUUM_VARIANCE = 0.25
SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10
DEGENERACY_EPS = 1e-14

MOMENTUM = "p"
POSITION = "x"
_AXES = (MOMENTUM, POSITION)
_QUAD_OFFSET = {"x": 0, "p": 1}


def symplectic_form(n: int) -> np.ndarray:
    """Standard antisymmetric form for the interleaved ``(x, p)`` ordering."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def quadrature_index(mode: int, quadrature: str) -> int:
    if quadrature not in _QUAD_OFFSET:
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    return 2 * mode + _QUAD_OFFSET[quadrature]


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of ``n_modes`` bosonic modes."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2:
            raise ValueError("mean must have positive even length")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("mean and cov must be finite")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise ValueError("cov is not symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def _check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode {mode} out of range for {self.n_modes}-mode state")

    def reduced(self, modes: Sequence[int]) -> GaussianState:
        """Marginal state of the listed modes, in the order given."""
        for m in modes:
            self._check_mode(m)
        idx = [2 * m + q for m in modes for q in (0, 1)]
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)])

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.cov)

    def is_physical(self, tol: float = SYMPLECTIC_TOL) -> bool:
        """Uncertainty principle: all symplectic eigenvalues are at least 1/4."""
        return bool(np.all(self.symplectic_eigenvalues() >= VACUUM_VARIANCE - tol))

    def purity(self) -> float:
        """``1/sqrt(det(4 cov))``; equals 1 for pure states."""
        sign, logdet = np.linalg.slogdet(4.0 * self.cov)
        return float(math.exp(-0.5 * logdet)) if sign > 0 else 0.0


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a positive-definite covariance matrix.

    Computed as the positive eigenvalues of the Hermitian matrix
    ``i sqrt(cov) Omega sqrt(cov)``, which is better conditioned than the
    eigenvalues of ``Omega cov``.
    """
    cov = np.asarray(cov, dtype=float)
    w, v = np.linalg.eigh(cov)
    if w.min() <= 0:
        return np.zeros(cov.shape[0] // 2)
    root = (v * np.sqrt(w)) @ v.T
    herm = 1j * root @ symplectic_form(cov.shape[0] // 2) @ root
    ev = np.linalg.eigvalsh(herm)
    return np.sort(ev[ev.size // 2:])


@dataclass(frozen=True, eq=False)
class SymplecticMap:
    """Affine phase-space map ``v -> matrix @ v + shift``."""

    matrix: np.ndarray
    shift: np.ndarray = field(default=None)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise ValueError("matrix must be square with even dimension")
        shift = np.zeros(matrix.shape[0]) if self.shift is None else np.array(self.shift, dtype=float)
        if shift.shape != (matrix.shape[0],):
            raise ValueError("shift length does not match matrix")
        matrix.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "shift", shift)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n: int) -> SymplecticMap:
        return cls(np.eye(2 * n))

    def is_symplectic(self, tol: float = SYMPLECTIC_TOL) -> bool:
        omega = symplectic_form(self.n_modes)
        return bool(np.max(np.abs(self.matrix @ omega @ self.matrix.T - omega)) <= tol)

    def then(self, other: SymplecticMap) -> SymplecticMap:
        """Composition: apply ``self`` first, then ``other``."""
        if other.n_modes != self.n_modes:
            raise ValueError("mode count mismatch")
        return SymplecticMap(other.matrix @ self.matrix, other.matrix @ self.shift + other.shift)

    def apply(self, state: GaussianState) -> GaussianState:
        if state.n_modes != self.n_modes:
            raise ValueError(f"map acts on {self.n_modes} modes, state has {state.n_modes}")
        s = self.matrix
        cov = s @ state.cov @ s.T
        return GaussianState(s @ state.mean + self.shift, 0.5 * (cov + cov.T))


def vacuum(n: int) -> GaussianState:
    if n < 1:
        raise ValueError("number of modes must be positive")
    return GaussianState(np.zeros(2 * n), VACUUM_VARIANCE * np.eye(2 * n))


def coherent(x: float, p: float) -> GaussianState:
    """Single-mode coherent state with mean ``(x, p)``."""
    return GaussianState([x, p], VACUUM_VARIANCE * np.eye(2))


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state with the modes of ``b`` appended after those of ``a``."""
    na, nb = 2 * a.n_modes, 2 * b.n_modes
    cov = np.zeros((na + nb, na + nb))
    cov[:na, :na] = a.cov
    cov[na:, na:] = b.cov
    return GaussianState(np.concatenate([a.mean, b.mean]), cov)


def squeeze_map(n: int, mode: int, r: float, axis: str) -> SymplecticMap:
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n} modes")
    if axis not in _AXES:
        raise ValueError(f"axis must be 'p' (momentum-squeezed) or 'x' (position-squeezed), got {axis!r}")
    if not math.isfinite(r) or r < 0:
        raise ValueError(f"squeezing parameter must be finite and non-negative, got {r}")
    s = math.exp(r) if axis == MOMENTUM else math.exp(-r)
    m = np.eye(2 * n)
    m[2 * mode, 2 * mode] = s
    m[2 * mode + 1, 2 * mode + 1] = 1.0 / s
    return SymplecticMap(m)


def squeeze(state: GaussianState, mode: int, r: float, axis: str) -> GaussianState:
    """Squeeze one mode.

    ``axis="p"`` squeezes the momentum (``var(p) = e^{-2r}/4`` from vacuum),
    ``axis="x"`` squeezes the position.
    """
    return squeeze_map(state.n_modes, mode, r, axis).apply(state)


def _cos_sin(theta: float) -> tuple[float, float]:
    # exact 50/50 split: cos(pi/4) and sin(pi/4) differ by one ulp in floating point,
    # which leaks e^{2r}-sized errors into strongly squeezed covariances
    if theta == math.pi / 4:
        h = math.sqrt(0.5)
        return h, h
    return math.cos(theta), math.sin(theta)


def beamsplitter_map(n: int, i: int, j: int, theta: float) -> SymplecticMap:
    """Phase-free beamsplitter on modes ``i`` and ``j``.

    ``a_i -> a_i cos(theta) + a_j sin(theta)``,
    ``a_j -> a_i sin(theta) - a_j cos(theta)``, identically for ``x`` and ``p``.
    """
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    for m in (i, j):
        if not 0 <= m < n:
            raise IndexError(f"mode {m} out of range for {n} modes")
    c, s = _cos_sin(theta)
    m = np.eye(2 * n)
    for q in (0, 1):
        a, b = 2 * i + q, 2 * j + q
        m[a, a], m[a, b] = c, s
        m[b, a], m[b, b] = s, -c
    return SymplecticMap(m)


def beamsplitter(state: GaussianState, i: int, j: int, theta: float) -> GaussianState:
    return beamsplitter_map(state.n_modes, i, j, theta).apply(state)


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    state._check_mode(mode)
    mean = state.mean.copy()
    mean[2 * mode] += dx
    mean[2 * mode + 1] += dp
    return GaussianState(mean, state.cov)


class Measurement(NamedTuple):
    """Result of a homodyne detection."""

    outcome: float
    state: GaussianState
    degenerate: bool


def measure_homodyne(
    state: GaussianState,
    mode: int,
    quadrature: str,
    outcome: float | None = None,
    rng: np.random.Generator | None = None,
) -> Measurement:
    """Ideal homodyne detection of one quadrature followed by conditioning.

    The outcome is drawn from the Gaussian marginal of the measured quadrature
    unless given.  The remaining modes are conditioned with the Schur-complement
    update and re-indexed densely; the measured mode is removed.  The
    conditional covariance does not depend on the outcome.

    A measured variance below ``DEGENERACY_EPS`` makes the update use the
    pseudo-inverse (no update) and sets ``degenerate``.
    """
    state._check_mode(mode)
    if state.n_modes < 2:
        raise ValueError("cannot condition a single-mode state on itself")
    q = quadrature_index(mode, quadrature)
    var = float(state.cov[q, q])
    mu = float(state.mean[q])
    degenerate = var < DEGENERACY_EPS
    if outcome is None:
        if rng is None:
            raise ValueError("either an outcome or an rng must be supplied")
        outcome = mu if degenerate else float(rng.normal(mu, math.sqrt(var)))
    keep = [k for k in range(2 * state.n_modes) if k // 2 != mode]
    cross = state.cov[keep, q]
    inv = 0.0 if degenerate else 1.0 / var
    mean = state.mean[keep] + cross * (inv * (outcome - mu))
    cov = state.cov[np.ix_(keep, keep)] - inv * np.outer(cross, cross)
    return Measurement(float(outcome), GaussianState(mean, 0.5 * (cov + cov.T)), degenerate)


def homodyne_feedforward(
    state: GaussianState,
    target: int,
    measured: Sequence[tuple[int, str]],
    gains: np.ndarray,
) -> GaussianState:
    """Output of measure-and-displace, averaged over all measurement records.

    Each listed quadrature is measured and the target mode is displaced by
    ``gains @ outcomes`` (``gains`` has shape ``(2, len(measured))``, rows for
    ``x`` and ``p``).  Because the correction is linear the ensemble output is
    the Gaussian law of ``target + gains @ measured`` under the joint state.
    """
    state._check_mode(target)
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (2, len(measured)):
        raise ValueError(f"gains must have shape (2, {len(measured)})")
    cols = [quadrature_index(m, q) for m, q in measured]
    if any(c // 2 == target for c in cols):
        raise ValueError("target mode cannot be measured")
    a = np.zeros((2, 2 * state.n_modes))
    a[0, 2 * target] = 1.0
    a[1, 2 * target + 1] = 1.0
    a[:, cols] += gains
    cov = a @ state.cov @ a.T
    return GaussianState(a @ state.mean, 0.5 * (cov + cov.T))


def coherent_fidelity(state: GaussianState, alpha: tuple[float, float]) -> float:
    """Overlap ``<alpha|rho|alpha>`` with the coherent state at ``alpha = (x, p)``.

    Equal to ``pi * Q(alpha)``, where the Q function is the Gaussian with the
    state's mean and covariance ``cov + I/4``.
    """
    if state.n_modes != 1:
        raise ValueError("coherent_fidelity needs a single-mode state")
    sigma = state.cov + VACUUM_VARIANCE * np.eye(2)
    d = np.asarray(alpha, dtype=float) - state.mean
    det = float(np.linalg.det(sigma))
    expo = float(d @ np.linalg.solve(sigma, d))
    return 1.0 / (2.0 * math.sqrt(det)) * math.exp(-0.5 * expo)
