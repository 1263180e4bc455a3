"""Probability and information utilities for the binary Gaussian mixture.

The observation model is ``X = beta * Y + N(0, 1)`` with ``Y`` uniform on
``{-1, +1}``.  All information quantities are in nats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import integrate
from scipy.special import ndtr

LN2 = float(np.log(2.0))
SQRT2PI = float(np.sqrt(2.0 * np.pi))
# probabilities below this are treated as exact zeros before taking logs
TINY = 1e-300


def to_bits(nats):
    return np.asarray(nats) / LN2 if np.ndim(nats) else float(nats) / LN2


def to_nats(bits):
    return np.asarray(bits) * LN2 if np.ndim(bits) else float(bits) * LN2


@dataclass(frozen=True)
class MixtureModel:
    """Symmetric two-component Gaussian mixture with unit noise variance."""

    beta: float

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be a finite non-negative number, got {self.beta}")
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class DiscreteJoint:
    """Gridded joint law of (X, Y).

    ``p_y_given_x[:, 0]`` is P(Y=-1 | x) and ``p_y_given_x[:, 1]`` is P(Y=+1 | x).
    """

    x_grid: np.ndarray
    p_x: np.ndarray
    p_y_given_x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_grid, dtype=float)
        px = np.asarray(self.p_x, dtype=float)
        pyx = np.asarray(self.p_y_given_x, dtype=float)
        if x.ndim != 1 or px.shape != x.shape or pyx.shape != (x.size, 2):
            raise ValueError("inconsistent shapes for x_grid, p_x, p_y_given_x")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x_grid must be strictly increasing")
        if np.any(px < 0) or abs(px.sum() - 1.0) > 1e-12:
            raise ValueError("p_x must be a probability vector")
        if np.any(pyx < 0) or np.max(np.abs(pyx.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("rows of p_y_given_x must sum to one")
        for name, arr in (("x_grid", x), ("p_x", px), ("p_y_given_x", pyx)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.x_grid.size

    @property
    def p_xy(self) -> np.ndarray:
        """Joint probability matrix, shape ``(n_x, 2)``."""
        return self.p_x[:, None] * self.p_y_given_x

    @property
    def p_y(self) -> np.ndarray:
        return self.p_xy.sum(axis=0)


@dataclass
class TradeoffPoint:
    """One (complexity, relevance) pair in nats, tagged with its producer."""

    rate: float
    relevance: float
    scheme: str
    params: dict[str, Any] = field(default_factory=dict)
    converged: bool = True

    @property
    def rate_bits(self) -> float:
        return self.rate / LN2

    @property
    def relevance_bits(self) -> float:
        return self.relevance / LN2


def gaussian_q(t):
    """Standard normal tail probability ``P(Z > t)``."""
    out = ndtr(-np.asarray(t, dtype=float))
    return float(out) if out.ndim == 0 else out


def binary_entropy(q):
    """Binary entropy in nats, with ``H(0) = H(1) = 0``."""
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q > 1)) or np.any(np.isnan(q)):
        raise ValueError("binary_entropy requires 0 <= q <= 1")
    out = -(_xlogx(q) + _xlogx(1.0 - q))
    return float(out) if out.ndim == 0 else out


def entropy(p, axis=-1):
    """Shannon entropy (nats) of probability vectors along ``axis``."""
    return -np.sum(_xlogx(np.asarray(p, dtype=float)), axis=axis)


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    safe = np.where(p > TINY, p, 1.0)
    return np.where(p > TINY, p * np.log(safe), 0.0)


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT2PI


def conditional_density(model: MixtureModel, x, y):
    """Density of X at ``x`` given label ``y`` in {-1, +1}."""
    if np.any(np.abs(np.asarray(y)) != 1):
        raise ValueError("y must be -1 or +1")
    out = normal_pdf(np.asarray(x, dtype=float) - model.beta * np.asarray(y, dtype=float))
    return float(out) if out.ndim == 0 else out


def mixture_density(model: MixtureModel, x):
    out = 0.5 * (normal_pdf(np.asarray(x) - model.beta) + normal_pdf(np.asarray(x) + model.beta))
    return float(out) if np.ndim(out) == 0 else out


def mixture_cdf(model: MixtureModel, x):
    """``P(X <= x)`` for the mixture."""
    x = np.asarray(x, dtype=float)
    out = 1.0 - 0.5 * (ndtr(-(x - model.beta)) + ndtr(-(x + model.beta)))
    return float(out) if out.ndim == 0 else out


def discretize(model: MixtureModel, n_points: int = 200, span: float = 5.0) -> DiscreteJoint:
    """Uniform grid on ``[-beta - span, beta + span]`` carrying the mixture mass."""
    if n_points < 8:
        raise ValueError(f"n_points must be >= 8, got {n_points}")
    if span <= 0:
        raise ValueError("span must be positive")
    b = model.beta
    x = np.linspace(-b - span, b + span, int(n_points))
    # uniform cells: weights are proportional to the density itself
    dens_plus = normal_pdf(x - b)
    dens_minus = normal_pdf(x + b)
    mix = dens_plus + dens_minus
    p_x = mix / mix.sum()
    p_y_given_x = np.stack([dens_minus, dens_plus], axis=1) / mix[:, None]
    return DiscreteJoint(x, p_x, p_y_given_x)


def _check_stochastic(p_x, rows, tol=1e-9):
    p_x = np.asarray(p_x, dtype=float)
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] != p_x.size:
        raise ValueError("channel must have one row per input symbol")
    if np.any(p_x < -tol) or abs(p_x.sum() - 1.0) > tol:
        raise ValueError("input weights are not a probability vector")
    if np.any(rows < -tol) or np.max(np.abs(rows.sum(axis=1) - 1.0)) > tol:
        raise ValueError("channel rows are not probability vectors")
    return np.clip(p_x, 0.0, None), np.clip(rows, 0.0, None)


def mi_discrete(p_x, channel_rows) -> float:
    """Mutual information between input and output of a discrete channel."""
    p_x, rows = _check_stochastic(p_x, channel_rows)
    p_t = p_x @ rows
    ratio = np.where(rows > TINY, rows, 1.0) / np.where(p_t > TINY, p_t, 1.0)[None, :]
    terms = np.where(rows > TINY, rows * np.log(ratio), 0.0)
    return max(float(p_x @ terms.sum(axis=1)), 0.0)


def mi_joint(joint: DiscreteJoint) -> float:
    """I(X;Y) of a gridded joint."""
    return mi_discrete(joint.p_x, joint.p_y_given_x)


def mi_xy(model: MixtureModel) -> float:
    """Continuous I(X;Y) = h(X) - h(X|Y) by adaptive quadrature."""
    b = model.beta
    if b == 0:
        return 0.0

    # I(X;Y) = ln 2 - E[H(P(Y|X))] avoids subtracting two large entropies
    def integrand(x):
        post = 1.0 / (1.0 + np.exp(-2.0 * b * x))
        return mixture_density(model, x) * binary_entropy(post)

    lo, hi = -b - 12.0, b + 12.0
    val, _ = integrate.quad(integrand, lo, hi, points=[-b, 0.0, b], limit=200,
                            epsabs=1e-12, epsrel=1e-12)
    return LN2 - val


def gauss_hermite_expect(f: Callable, mean: float = 0.0, order: int = 80) -> float:
    """``E[f(Z)]`` for ``Z ~ N(mean, 1)`` by Gauss-Hermite quadrature."""
    if not 10 <= order <= 200:
        raise ValueError("order must lie in [10, 200]")
    nodes, weights = _hermite_rule(order)
    return float(np.sum(weights * f(mean + nodes)))


_HERMITE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _hermite_rule(order: int):
    if order not in _HERMITE_CACHE:
        nodes, weights = np.polynomial.hermite_e.hermegauss(order)
        _HERMITE_CACHE[order] = (nodes, weights / SQRT2PI)
    return _HERMITE_CACHE[order]
