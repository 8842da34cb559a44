"""Closed-form oracle: output quadratures as linear forms over initial vacua.

Every quadrature produced by squeezers and beamsplitters acting on vacuum
modes is a linear combination of the initial vacuum quadratures
``x_m^(0), p_m^(0)``, each weighted by ``e^{s r_m}`` with ``s`` in
``{-1, 0, +1}``.  Since the initial vacua are independent with variance 1/4,
variances and covariances follow from the coefficients alone, for any
assignment of squeezing parameters.

This module works directly on coefficients and never builds a covariance
matrix, so it serves as an independent check of :mod:`cvnetwork.gaussian`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence, Union

import numpy as np

from .exact import Number, Surd, is_zero

IN = "in"
"""Mode label of the coherent input to be teleported."""

Key = tuple[Union[int, str], str, int]


@dataclass(frozen=True)
class Angle:
    """Beamsplitter angle with exact cosine and sine."""

    cos: Number
    sin: Number

    @classmethod
    def quarter(cls) -> Angle:
        h = Surd.sqrt(Fraction(1, 2))
        return cls(h, h)

    @classmethod
    def arccos_inv_sqrt(cls, m: int) -> Angle:
        """The angle ``arccos(1/sqrt(m))``."""
        return cls(Surd.sqrt(Fraction(1, m)), Surd.sqrt(Fraction(m - 1, m)))

    @classmethod
    def from_radians(cls, theta: float) -> Angle:
        return cls(math.cos(theta), math.sin(theta))


class LinearForm:
    """``offset + sum c * e^{s r_m} * q_m^(0)`` over initial quadratures.

    Terms are keyed by ``(mode, quadrature, exponent)``; zero coefficients are
    dropped, so each key appears at most once.
    """

    __slots__ = ("_terms", "offset")

    def __init__(self, terms: Mapping[Key, Number] | None = None, offset: float = 0.0):
        self._terms = {k: c for k, c in (terms or {}).items() if not is_zero(c)}
        self.offset = offset

    @property
    def terms(self) -> dict[Key, Number]:
        return dict(self._terms)

    def coefficient(self, mode, quadrature: str, exponent: int) -> Number:
        return self._terms.get((mode, quadrature, exponent), 0)

    def modes(self) -> set:
        return {k[0] for k in self._terms}

    def __add__(self, other: LinearForm) -> LinearForm:
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        return LinearForm(out, self.offset + other.offset)

    def __neg__(self) -> LinearForm:
        return LinearForm({k: -c for k, c in self._terms.items()}, -self.offset)

    def __sub__(self, other: LinearForm) -> LinearForm:
        return self + (-other)

    def __mul__(self, scalar: Number) -> LinearForm:
        return LinearForm({k: c * scalar for k, c in self._terms.items()}, self.offset * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {c!r}" for k, c in self._terms.items())
        return f"LinearForm({{{body}}}, offset={self.offset})"


def initial_forms(n: int, axes: Sequence[str | None]) -> tuple[LinearForm, ...]:
    """Forms of ``n`` squeezed vacua before any mixing.

    ``axes[m]`` is ``"p"`` (momentum-squeezed: ``x`` carries ``e^{+r}``),
    ``"x"`` (position-squeezed) or ``None`` (unsqueezed, exponent 0).
    Returned in ``(x_1, p_1, ..., x_n, p_n)`` order.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if len(axes) != n:
        raise ValueError("need one axis per mode")
    one = Surd.rational(1)
    forms = []
    for m, axis in enumerate(axes):
        sx = {"p": 1, "x": -1, None: 0}[axis]
        forms.append(LinearForm({(m, "x", sx): one}))
        forms.append(LinearForm({(m, "p", -sx): one}))
    return tuple(forms)


def input_forms() -> tuple[LinearForm, LinearForm]:
    """Forms of the coherent input mode (unsqueezed, mean supplied later)."""
    one = Surd.rational(1)
    return LinearForm({(IN, "x", 0): one}), LinearForm({(IN, "p", 0): one})


def apply_beamsplitter_forms(
    forms: Sequence[LinearForm], i: int, j: int, theta: float | Angle
) -> tuple[LinearForm, ...]:
    """Beamsplitter ``a_i -> a_i cos + a_j sin``, ``a_j -> a_i sin - a_j cos``."""
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    ang = theta if isinstance(theta, Angle) else Angle.from_radians(theta)
    out = list(forms)
    for q in (0, 1):
        a, b = forms[2 * i + q], forms[2 * j + q]
        out[2 * i + q] = a * ang.cos + b * ang.sin
        out[2 * j + q] = a * ang.sin - b * ang.cos
    return tuple(out)


def nsplitter_forms(forms: Sequence[LinearForm], n: int) -> tuple[LinearForm, ...]:
    """Cascade ``B_12(arccos 1/sqrt(N))``, then ``B_23(arccos 1/sqrt(N-1))``, ... ``B_{N-1,N}(pi/4)``."""
    out = tuple(forms)
    for m in range(n - 1):
        remaining = n - m
        ang = Angle.quarter() if remaining == 2 else Angle.arccos_inv_sqrt(remaining)
        out = apply_beamsplitter_forms(out, m, m + 1, ang)
    return out


def default_axes(n: int) -> tuple[str, ...]:
    """Mode 1 momentum-squeezed, all others position-squeezed."""
    return ("p",) + ("x",) * (n - 1)


@lru_cache(maxsize=128)
def ghz_forms(n: int, axes: tuple[str | None, ...] | None = None) -> tuple[LinearForm, ...]:
    """Forms of the N-splitter applied to squeezed vacua."""
    return nsplitter_forms(initial_forms(n, axes or default_axes(n)), n)


def _weights(key: Key, r_values) -> np.ndarray | float:
    mode, _, s = key
    if s == 0:
        return 1.0
    try:
        r = r_values[mode]
    except (KeyError, IndexError, TypeError):
        raise ValueError(f"no squeezing value supplied for mode {mode}") from None
    return np.exp(2 * s * np.asarray(r, dtype=float))


def covariance_of(a: LinearForm, b: LinearForm, r_values) -> np.ndarray | float:
    """Symmetrized covariance of two forms; initial vacua are independent.

    ``r_values`` maps each mode index to its squeezing (sequence or mapping);
    entries may be arrays, which broadcast.
    """
    total = 0.0
    for key, ca in a._terms.items():
        cb = b._terms.get(key)
        if cb is None:
            continue
        total = total + float(ca * cb) * _weights(key, r_values) * 0.25
    return total


def variance_of(form: LinearForm, r_values) -> np.ndarray | float:
    """``sum c^2 e^{2 s r_m} / 4`` over the terms of ``form``."""
    return covariance_of(form, form, r_values)


def mean_of(form: LinearForm, alpha: tuple[float, float] = (0.0, 0.0)) -> float:
    """Expectation value; only the coherent input has a nonzero mean."""
    total = form.offset
    for (mode, quad, _), c in form._terms.items():
        if mode == IN:
            total += float(c) * (alpha[0] if quad == "x" else alpha[1])
    return total


@dataclass(frozen=True)
class ProtocolForms:
    """Building blocks of the teleportation output for one sender/receiver pair.

    ``x_l, p_l`` are the receiver's quadratures, ``x_u, p_v`` the sender's
    Bell-detection quadratures and ``assist`` the momenta of the other
    stations, ordered by mode index.
    """

    x_l: LinearForm
    p_l: LinearForm
    x_u: LinearForm
    p_v: LinearForm
    assist: tuple[LinearForm, ...]


@lru_cache(maxsize=256)
def protocol_forms(n: int, k: int, l: int, axes: tuple[str | None, ...] | None = None) -> ProtocolForms:
    """Couple the input with sender ``k`` at a 50/50 beamsplitter.

    With the input placed first, ``x_u = (x_in - x_k)/sqrt(2)`` sits in the
    sender's slot and ``p_v = (p_in + p_k)/sqrt(2)`` in the input's slot.
    """
    if k == l:
        raise ValueError("sender and receiver must differ")
    if n < 2:
        raise ValueError("need at least two stations")
    for m in (k, l):
        if not 0 <= m < n:
            raise IndexError(f"station {m} out of range for N={n}")
    net = ghz_forms(n, axes)
    pair = input_forms() + (net[2 * k], net[2 * k + 1])
    pair = apply_beamsplitter_forms(pair, 0, 1, Angle.quarter())
    assist = tuple(net[2 * j + 1] for j in range(n) if j not in (k, l))
    return ProtocolForms(net[2 * l], net[2 * l + 1], pair[2], pair[1], assist)


def teleported_output_forms(
    n: int,
    k: int,
    l: int,
    g: Number = 1,
    gn: Number | Sequence[Number] = 1,
    axes: Sequence[str | None] | None = None,
) -> tuple[LinearForm, LinearForm]:
    """Receiver quadratures after the full protocol.

    ``x_tel = x_l + g sqrt(2) x_u`` and
    ``p_tel = p_l + g sqrt(2) p_v + sum_j gn_j p_j``.  ``gn`` is one gain for
    all assisting stations or a sequence with one gain per station.
    """
    pf = protocol_forms(n, k, l, None if axes is None else tuple(axes))
    if isinstance(gn, (int, float, Fraction, Surd)):
        gains = [gn] * len(pf.assist)
    else:
        gains = list(gn)
        if len(gains) != len(pf.assist):
            raise ValueError(f"need {len(pf.assist)} per-station gains, got {len(gains)}")
    root2 = Surd.sqrt(2)
    # keep sqrt(2) * (1/sqrt(2)) exact before the gain multiplies in
    x_tel = pf.x_l + (pf.x_u * root2) * g
    p_tel = pf.p_l + (pf.p_v * root2) * g
    for gj, pj in zip(gains, pf.assist):
        p_tel = p_tel + pj * gj
    return x_tel, p_tel


def fidelity_from_forms(
    x_tel: LinearForm,
    p_tel: LinearForm,
    alpha: tuple[float, float],
    r_values,
) -> np.ndarray | float:
    """Coherent-state fidelity of the teleported mode.

    The Q-function variances are ``sigma = var + 1/4``, where ``var`` already
    contains the ``g^2/4`` contributed by the input.  With mean ``g * alpha``
    this is ``exp(-(1-g)^2 (x^2/2 sigma_x + p^2/2 sigma_p)) / (2 sqrt(sigma_x sigma_p))``.
    x/p cross terms are absent because position and momentum forms never mix.
    """
    sx = variance_of(x_tel, r_values) + 0.25
    sp = variance_of(p_tel, r_values) + 0.25
    dx = alpha[0] - mean_of(x_tel, alpha)
    dp = alpha[1] - mean_of(p_tel, alpha)
    return np.exp(-(dx * dx / (2 * sx) + dp * dp / (2 * sp))) / (2 * np.sqrt(sx * sp))
