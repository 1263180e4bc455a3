"""Closed-form achievable schemes for the binary-Gaussian bottleneck.

Three constructions are provided, each mapping a complexity budget ``R``
(nats) to an achievable relevance ``I(Y;T)``:

* two-level random quantization: ``T = sign(X) XOR Bern(q)``;
* multi-level deterministic quantization with ``ceil(e^R)`` bins whose
  output probabilities are shaped by a single shift ``delta``;
* soft quantization ``T = alpha * tanh(beta X) + N(0, 1)``, with ``alpha``
  chosen from one of two variational upper bounds on ``I(X;T)``.

:func:`unified` takes the best of them at each budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate, optimize, signal
from scipy.special import ndtr

from .core import (LN2, TINY, MixtureModel, TradeoffPoint, binary_entropy, entropy,
                   gaussian_q, mixture_cdf)

# slack for budgets sitting exactly on ln 2
_RATE_EPS = 1e-12
# noise support kept on each side of alpha*tanh(.) when integrating over t
_T_MARGIN = 8.0
# cell width used to discretize the law of alpha*tanh(beta X)
_SOFT_STEP = 0.001
_SOFT_MAX_CELLS = 200_000   # coarser cells beyond alpha = 100 keep memory bounded


@dataclass(frozen=True)
class Quantizer:
    """Deterministic scalar quantizer: ``L - 1`` thresholds and ``L`` labels."""

    thresholds: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        th = np.asarray(self.thresholds, dtype=float)
        if np.any(np.diff(th) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if len(self.levels) != len(self.thresholds) + 1:
            raise ValueError("need exactly one more level than thresholds")

    @classmethod
    def from_thresholds(cls, thresholds) -> "Quantizer":
        th = tuple(float(v) for v in thresholds)
        if not th:
            return cls((), (0.0,))
        levels = [th[0] - 2.0]
        levels += [(a + b) / 2.0 for a, b in zip(th[:-1], th[1:])]
        levels.append(th[-1] + 2.0)
        return cls(th, tuple(levels))

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def edges(self) -> np.ndarray:
        return np.concatenate([[-np.inf], self.thresholds, [np.inf]])

    def bin_probabilities(self, model: MixtureModel) -> np.ndarray:
        """``P(T = t_j | Y = y)`` as an array of shape ``(2, L)``, rows y=-1, y=+1."""
        e = self.edges()
        b = model.beta
        p_minus = gaussian_q(e[:-1] + b) - gaussian_q(e[1:] + b)
        p_plus = gaussian_q(e[:-1] - b) - gaussian_q(e[1:] - b)
        return np.clip(np.stack([p_minus, p_plus]), 0.0, 1.0)

    def masses(self, model: MixtureModel) -> np.ndarray:
        return self.bin_probabilities(model).mean(axis=0)

    def __call__(self, x):
        idx = np.searchsorted(np.asarray(self.thresholds), np.asarray(x, dtype=float), side="right")
        return np.asarray(self.levels)[idx]

    def bin_index(self, x):
        return np.searchsorted(np.asarray(self.thresholds), np.asarray(x, dtype=float), side="right")


@dataclass(frozen=True)
class SoftScheme:
    alpha: float
    bound_id: str

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")
        if self.bound_id not in ("lb1", "lb2"):
            raise ValueError("bound_id must be 'lb1' or 'lb2'")


# --------------------------------------------------------------------------
# two-level random quantization
# --------------------------------------------------------------------------

def miss_detection_p(model: MixtureModel) -> float:
    """Probability that ``X >= 0`` although ``Y = -1``."""
    return gaussian_q(model.beta)


def _check_two_level_rate(R):
    if R < 0 or R > LN2 + _RATE_EPS:
        raise ValueError(f"two-level scheme needs 0 <= R <= ln 2, got R={R}")


def solve_q(R: float) -> float:
    """Flip probability ``q`` in [0, 1/2] with ``ln 2 - H(q) = R``."""
    _check_two_level_rate(R)
    if R <= 0:
        return 0.5
    if R >= LN2:
        return 0.0
    target = LN2 - R
    return optimize.brentq(lambda q: binary_entropy(q) - target, 0.0, 0.5, xtol=1e-15, rtol=1e-15,
                           maxiter=500)


def i1(R: float, model: MixtureModel) -> TradeoffPoint:
    p = miss_detection_p(model)
    q = solve_q(R)
    crossover = p * (1 - q) + q * (1 - p)
    relevance = LN2 - binary_entropy(crossover)
    return TradeoffPoint(float(R), max(relevance, 0.0), "two_level", {"q": q, "p": p})


# --------------------------------------------------------------------------
# multi-level deterministic quantization
# --------------------------------------------------------------------------

def det_levels(R: float) -> int:
    """Number of bins, ``ceil(e^R)``."""
    if R < 0:
        raise ValueError("R must be non-negative")
    v = math.exp(R)
    nearest = round(v)
    if abs(v - nearest) <= 1e-9 * nearest:
        return int(nearest)
    return int(math.ceil(v))


def _shifted_masses(L: int, delta: float) -> np.ndarray:
    if L == 1:
        return np.ones(1)
    return np.concatenate([[1.0 / L - delta], np.full(L - 1, 1.0 / L + delta / (L - 1))])


def solve_delta(R: float) -> float:
    """Shift ``delta`` in [0, 1/L) giving the shaped bin masses entropy ``R``."""
    L = det_levels(R)
    if L == 1:
        return 0.0
    if abs(math.log(L) - R) <= 1e-12:
        return 0.0
    f = lambda d: float(entropy(_shifted_masses(L, d))) - R
    # entropy falls from ln L (d=0) to ln(L-1) (d=1/L)
    return optimize.brentq(f, 0.0, 1.0 / L, xtol=1e-15, rtol=1e-15, maxiter=500)


def target_masses(R: float) -> np.ndarray:
    return _shifted_masses(det_levels(R), solve_delta(R))


def build_quantizer(R: float, model: MixtureModel) -> Quantizer:
    """Thresholds putting the shaped masses under the mixture law of X."""
    masses = target_masses(R)
    cum = np.cumsum(masses)[:-1]
    b = model.beta
    lo, hi = -b - 40.0, b + 40.0
    thresholds = []
    for c in cum:
        thresholds.append(optimize.brentq(lambda x: mixture_cdf(model, x) - c, lo, hi,
                                          xtol=1e-13, rtol=1e-15, maxiter=500))
    return Quantizer.from_thresholds(thresholds)


def quantizer_information(quantizer: Quantizer, model: MixtureModel) -> tuple[float, float]:
    """``(H(T), I(Y;T))`` for a deterministic quantizer of X."""
    cond = quantizer.bin_probabilities(model)
    p_t = cond.mean(axis=0)
    h_t = float(entropy(p_t))
    relevance = h_t - 0.5 * float(entropy(cond[0])) - 0.5 * float(entropy(cond[1]))
    return h_t, max(relevance, 0.0)


def i2(R: float, model: MixtureModel) -> TradeoffPoint:
    quant = build_quantizer(R, model)
    rate, relevance = quantizer_information(quant, model)
    return TradeoffPoint(rate, relevance, "det_quant",
                         {"levels": quant.n_levels, "delta": solve_delta(R),
                          "thresholds": list(quant.thresholds)})


# --------------------------------------------------------------------------
# soft (tanh) quantization
# --------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _tanh_moments(beta: float) -> tuple[float, float]:
    if beta == 0:
        return 0.0, 0.0
    # the mixture is symmetric, so both moments equal their value under N(beta, 1)
    dens = lambda x: math.exp(-0.5 * (x - beta) ** 2) / math.sqrt(2 * math.pi)
    lo, hi = beta - 40.0, beta + 40.0
    f, _ = integrate.quad(lambda x: math.tanh(beta * x) ** 2 * dens(x), lo, hi,
                          points=[0.0, beta], epsabs=1e-13, epsrel=1e-13, limit=400)
    # |tanh| has a kink at 0; it must be a breakpoint
    g, _ = integrate.quad(lambda x: abs(math.tanh(beta * x)) * dens(x), lo, hi,
                          points=[0.0, beta], epsabs=1e-13, epsrel=1e-13, limit=400)
    return f, g


def f_beta(model: MixtureModel) -> float:
    """``E[tanh(beta X)^2]``."""
    return _tanh_moments(model.beta)[0]


def g_beta(model: MixtureModel) -> float:
    """``E[|tanh(beta X)|]``."""
    return _tanh_moments(model.beta)[1]


def lb1_discriminant(R: float, model: MixtureModel) -> float:
    f, g = _tanh_moments(model.beta)
    return (1 + f) ** 2 + 4 * g * g * (R * R - 2 * R)


def alpha_lb1(R: float, model: MixtureModel) -> float:
    """Gain solving ``(a^2/2)(1+f) - sqrt(1 + a^4 g^2) + 1 = R`` (larger root)."""
    if R < 0:
        raise ValueError("R must be non-negative")
    f, g = _tanh_moments(model.beta)
    disc = max(lb1_discriminant(R, model), 0.0)
    denom = ((1 + f) ** 2 - 4 * g * g) / 2
    a2 = ((R - 1) * (1 + f) + math.sqrt(disc)) / denom
    return math.sqrt(max(a2, 0.0))


def lb1_bound(alpha: float, model: MixtureModel) -> float:
    """First variational upper bound on ``I(X;T)`` at gain ``alpha``."""
    f, g = _tanh_moments(model.beta)
    return alpha ** 2 / 2 * (1 + f) - math.sqrt(1 + alpha ** 4 * g * g) + 1


def lb2_bound(alpha: float, model: MixtureModel) -> float:
    f, g = _tanh_moments(model.beta)
    return alpha ** 2 * (0.5 + f / 2 - g) + LN2


def alpha_lb2(R: float, model: MixtureModel) -> float:
    """Gain solving ``a^2 (1/2 + f/2 - g) + ln 2 = R``; needs ``R >= ln 2``."""
    if R < LN2 - _RATE_EPS:
        raise ValueError(f"second bound needs R >= ln 2, got R={R}")
    f, g = _tanh_moments(model.beta)
    return math.sqrt(max(R - LN2, 0.0) / (0.5 + f / 2 - g))


def _soft_step(alpha: float) -> float:
    return max(_SOFT_STEP, 2 * alpha / _SOFT_MAX_CELLS)


def _soft_output_densities(alpha: float, model: MixtureModel, step: Optional[float] = None):
    """Grid densities of ``T = alpha tanh(beta X) + N(0,1)`` given each label.

    The law of ``S = alpha tanh(beta X)`` is discretized into cells of exact
    mass (from its closed-form CDF), each spread uniformly over its cell, then
    convolved with the unit Gaussian.  Returns ``(t, p_minus, p_plus, dt)``.
    """
    b = model.beta
    step = _soft_step(alpha) if step is None else step
    # support of S, widened to one full cell when alpha is below the step
    half_width = max(alpha, step / 2)
    n_cells = max(int(math.ceil(2 * half_width / step)), 1)
    h = 2 * half_width / n_cells
    edges = np.linspace(-half_width, half_width, n_cells + 1)
    with np.errstate(divide="ignore", over="ignore"):  # tiny beta: ndtr saturates
        z = np.arctanh(np.clip(edges / alpha, -1.0, 1.0)) / b
    masses = []
    for y in (-1.0, 1.0):
        cdf = ndtr(z - b * y)
        masses.append(np.diff(cdf))
    half = int(math.ceil(_T_MARGIN / h))
    d = np.arange(-half, half + 1) * h
    kernel = (ndtr(d + h / 2) - ndtr(d - h / 2)) / h
    dens = [np.clip(signal.fftconvolve(m, kernel), 0.0, None) for m in masses]
    centers0 = -half_width + h / 2
    t = centers0 + (np.arange(dens[0].size) - half) * h
    return t, dens[0], dens[1], h


def _xlogx(p):
    return np.where(p > TINY, p * np.log(np.where(p > TINY, p, 1.0)), 0.0)


def _soft_entropies(alpha: float, model: MixtureModel, step: float) -> np.ndarray:
    _, pm, pp, h = _soft_output_densities(alpha, model, step)
    pt = 0.5 * (pm + pp)
    return np.array([-np.sum(_xlogx(pt)) * h, -0.5 * np.sum(_xlogx(pm) + _xlogx(pp)) * h])


@lru_cache(maxsize=1024)
def _soft_info(alpha: float, beta: float) -> tuple[float, float]:
    """``(h(T), h(T|Y))``; cell smoothing errs by O(step^2), removed by Richardson extrapolation."""
    model = MixtureModel(beta)
    step = _soft_step(alpha)
    coarse = _soft_entropies(alpha, model, 2 * step)
    fine = _soft_entropies(alpha, model, step)
    h_t, h_ty = (4 * fine - coarse) / 3
    return float(h_t), float(h_ty)


def soft_relevance(alpha: float, model: MixtureModel) -> float:
    """``I(Y;T)`` for ``T = alpha tanh(beta X) + N(0, 1)``."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0 or model.beta == 0:
        return 0.0
    h_t, h_ty = _soft_info(float(alpha), model.beta)
    return float(min(max(h_t - h_ty, 0.0), LN2))


def soft_rate_exact(alpha: float, model: MixtureModel) -> float:
    """Exact ``I(X;T) = h(T) - ln(2 pi e)/2`` for the soft scheme."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0 or model.beta == 0:
        return 0.0
    h_t, _ = _soft_info(float(alpha), model.beta)
    return float(max(h_t - 0.5 * math.log(2 * math.pi * math.e), 0.0))


def soft_point(R: float, model: MixtureModel, bound_id: str) -> TradeoffPoint:
    alpha = alpha_lb1(R, model) if bound_id == "lb1" else alpha_lb2(R, model)
    return TradeoffPoint(float(R), soft_relevance(alpha, model), f"soft_{bound_id}",
                         {"alpha": alpha})


def i3(R: float, model: MixtureModel) -> TradeoffPoint:
    return soft_point(R, model, "lb1")


def i4(R: float, model: MixtureModel) -> TradeoffPoint:
    return soft_point(R, model, "lb2")


def best_soft(R: float, model: MixtureModel) -> TradeoffPoint:
    """Better of the two soft bounds at budget ``R``."""
    best = i3(R, model)
    if R >= LN2 - _RATE_EPS:
        other = i4(R, model)
        if other.relevance > best.relevance:
            best = other
    return best


def scheme_points(R: float, model: MixtureModel) -> list[TradeoffPoint]:
    """Every scheme applicable at ``R``, in a fixed order."""
    pts = []
    if R <= LN2 + _RATE_EPS:
        pts.append(i1(min(R, LN2), model))
    pts.append(i2(R, model))
    pts.append(i3(R, model))
    if R >= LN2 - _RATE_EPS:
        pts.append(i4(max(R, LN2), model))
    return pts


def unified(R: float, model: MixtureModel) -> TradeoffPoint:
    """Best relevance over all schemes at budget ``R``; rate is recorded as ``R``."""
    if R < 0:
        raise ValueError("R must be non-negative")
    pts = scheme_points(R, model)
    winner = max(pts, key=lambda p: p.relevance)  # first maximum wins ties
    params = dict(winner.params)
    params["winner"] = winner.scheme
    params["candidates"] = {p.scheme: p.relevance for p in pts}
    return TradeoffPoint(float(R), winner.relevance, "unified", params)
