"""Misclassification error of each bottleneck scheme under its sign estimator.

Closed forms are provided for the three scalar schemes, together with a
Monte-Carlo simulator of the same pipelines and a small logistic-regression
readout used for vector features.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import expit

from .core import MixtureModel, TradeoffPoint, gaussian_q, normal_pdf
from .schemes import (Quantizer, build_quantizer, miss_detection_p, quantizer_information,
                      soft_rate_exact, solve_q)

MC_DEFAULT_N = 20_000


@dataclass
class ErrorPoint:
    rate: float
    error: float
    scheme: str
    stderr: Optional[float] = None


def err_two_level(R: float, model: MixtureModel) -> ErrorPoint:
    p = miss_detection_p(model)
    q = solve_q(R)
    return ErrorPoint(float(R), (1 - p) * q + p * (1 - q), "two_level")


def sign_boundary(quant: Quantizer) -> Optional[int]:
    """Index ``s`` (0-based into thresholds) with ``t_s < 0 <= t_{s+1}``, or None."""
    levels = np.asarray(quant.levels)
    for s in range(len(levels) - 1):
        if levels[s] < 0 <= levels[s + 1]:
            return s
    return None


def quantizer_error(quant: Quantizer, beta: float) -> float:
    s = sign_boundary(quant)
    if s is None:
        return 0.5
    qs = quant.thresholds[s]
    return 0.5 * (gaussian_q(beta - qs) + gaussian_q(beta + qs))


def err_det_quant(R: float, model: MixtureModel) -> ErrorPoint:
    quant = build_quantizer(R, model)
    rate, _ = quantizer_information(quant, model)
    return ErrorPoint(rate, quantizer_error(quant, model.beta), "det_quant")


def _x_rule(alpha: float, beta: float):
    """Composite Gauss-Legendre nodes/weights covering N(+-beta, 1) to 9 sigma.

    Panels shrink with ``alpha * beta`` so that the sharp transition of
    ``alpha tanh(beta x)`` near zero is resolved.
    """
    width = min(0.25, 0.25 / (alpha * beta))
    lo, hi = -beta - 9.0, beta + 9.0
    n_panels = int(math.ceil((hi - lo) / width))
    edges = np.linspace(lo, hi, n_panels + 1)
    gx, gw = np.polynomial.legendre.leggauss(8)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * gx).ravel(), (half[:, None] * gw).ravel()


def soft_error(alpha: float, beta: float) -> float:
    """Sign-estimator error of ``T = alpha tanh(beta X) + N(0,1)``.

    The double integral over ``t >= 0`` and ``x`` is split into its two
    exponential halves; x is integrated on a fixed composite rule and t by
    adaptive quadrature on ``[0, alpha + 8]``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0 or beta == 0:
        return 0.5
    x, w = _x_rule(alpha, beta)
    w_minus = w * normal_pdf(x + beta)
    w_plus = w * normal_pdf(x - beta)
    tau = alpha * np.tanh(beta * x)

    def inner(t):
        return 0.5 * float(w_minus @ normal_pdf(t - tau) + w_plus @ normal_pdf(t + tau))

    val, _ = integrate.quad(inner, 0.0, alpha + 8.0, epsabs=1e-10, epsrel=1e-10, limit=400,
                            points=[alpha])
    return min(max(val, 0.0), 0.5)


def err_soft(alpha: float, model: MixtureModel) -> ErrorPoint:
    rate = soft_rate_exact(alpha, model)
    return ErrorPoint(rate, soft_error(alpha, model.beta), "soft")


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

_MC_TAGS = ("two_level", "det_quant", "soft", "soft_lb1", "soft_lb2")


def _mc_chunk(tag: str, params: dict, beta: float, n: int, seed_seq) -> int:
    rng = np.random.default_rng(seed_seq)
    y = rng.choice(np.array([-1.0, 1.0]), size=n)
    x = beta * y + rng.standard_normal(n)
    if tag == "two_level":
        flip = rng.random(n) < params["q"]
        yhat = np.where(x >= 0, 1.0, -1.0)
        yhat = np.where(flip, -yhat, yhat)
    elif tag == "det_quant":
        quant = Quantizer.from_thresholds(params["thresholds"])
        yhat = np.where(quant(x) >= 0, 1.0, -1.0)
    else:
        t = params["alpha"] * np.tanh(beta * x) + rng.standard_normal(n)
        yhat = np.where(t >= 0, 1.0, -1.0)
    return int(np.count_nonzero(yhat != y))


def _scheme_record(scheme) -> tuple[str, dict, float]:
    if isinstance(scheme, TradeoffPoint):
        tag, params, rate = scheme.scheme, dict(scheme.params), scheme.rate
        if tag == "unified":
            tag = params.get("winner", tag)
    else:
        tag, params = scheme["scheme"], dict(scheme)
        rate = float(params.get("rate", float("nan")))
    return tag, params, rate


def mc_error(scheme, model: MixtureModel, n: int = MC_DEFAULT_N, seed: int = 0,
             workers: int = 1) -> ErrorPoint:
    """Empirical error of a scheme's channel and estimator.

    ``scheme`` is a :class:`TradeoffPoint` produced by the scheme functions or
    a mapping with a ``"scheme"`` tag and the parameters it needs
    (``q``, ``thresholds`` or ``alpha``).
    """
    if n < 1000:
        raise ValueError("n must be at least 1000")
    tag, params, rate = _scheme_record(scheme)
    if tag not in _MC_TAGS:
        raise ValueError(f"unknown scheme tag {tag!r}")
    workers = max(int(workers), 1)
    sizes = [n // workers + (1 if i < n % workers else 0) for i in range(workers)]
    streams = np.random.SeedSequence(seed).spawn(workers)
    args = [(tag, params, model.beta, k, s) for k, s in zip(sizes, streams)]
    if workers == 1:
        errors = [_mc_chunk(*args[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(_mc_chunk, *zip(*args)))
    e = sum(errors) / n
    return ErrorPoint(rate, e, tag, math.sqrt(e * (1 - e) / n))


# --------------------------------------------------------------------------
# logistic readout
# --------------------------------------------------------------------------

def _as_design(features, labels=None):
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("features must be a non-empty 2-D array")
    if labels is None:
        return X, None
    y = np.asarray(labels, dtype=float).ravel()
    if y.size != X.shape[0]:
        raise ValueError(f"{X.shape[0]} feature rows but {y.size} labels")
    if np.any(np.abs(y) != 1):
        raise ValueError("labels must be -1 or +1")
    return X, y


def train_logistic(features, labels, steps: int = 2000, step_size: float = 0.1,
                   seed: int = 0) -> tuple[np.ndarray, float]:
    """Full-batch gradient descent on the mean logistic loss from zero.

    The procedure is deterministic; ``seed`` is accepted for interface
    uniformity and does not affect the result.
    """
    X, y = _as_design(features, labels)
    if step_size <= 0:
        raise ValueError("step_size must be positive")
    w = np.zeros(X.shape[1])
    b = 0.0
    n = X.shape[0]
    for _ in range(int(steps)):
        margin = y * (X @ w + b)
        coef = -y * expit(-margin) / n
        w -= step_size * (X.T @ coef)
        b -= step_size * coef.sum()
    return w, float(b)


def predict_logistic(params, features) -> np.ndarray:
    w, b = params
    X, _ = _as_design(features)
    w = np.asarray(w, dtype=float).ravel()
    if w.size != X.shape[1]:
        raise ValueError(f"weights have {w.size} entries but features have {X.shape[1]} columns")
    return np.where(expit(X @ w + b) >= 0.5, 1.0, -1.0)


def eval_logistic(params, features, labels) -> float:
    X, y = _as_design(features, labels)
    return float(np.mean(predict_logistic(params, X) != y))
