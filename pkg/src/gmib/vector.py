"""Vector observations ``x = beta * Y + noise`` with per-coordinate schemes.

Each coordinate gets its own scalar scheme at budget ``R_i``.  Given Y the
coordinates of ``t`` are independent, so ``P(t|y)`` is a product and the
relevance can be enumerated exactly when every coordinate is discrete.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import LN2, TINY, MixtureModel, TradeoffPoint, entropy
from .schemes import Quantizer, _soft_output_densities, soft_rate_exact, unified

ENUM_CAP = 1_000_000
MC_CHUNK = 10_000
MAX_JACKKNIFE_BINS = 1_000_000


@dataclass(frozen=True)
class VectorModel:
    betas: tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(v) for v in np.atleast_1d(self.betas))
        if len(b) < 1:
            raise ValueError("need at least one coordinate")
        if any(not np.isfinite(v) or v < 0 for v in b):
            raise ValueError("betas must be finite and non-negative")
        object.__setattr__(self, "betas", b)

    @property
    def d0(self) -> int:
        return len(self.betas)

    def coordinate(self, i: int) -> MixtureModel:
        return MixtureModel(self.betas[i])

    def sample(self, n: int, rng: np.random.Generator):
        y = rng.choice(np.array([-1.0, 1.0]), size=n)
        x = y[:, None] * np.asarray(self.betas)[None, :] + rng.standard_normal((n, self.d0))
        return x, y


@dataclass(frozen=True)
class RateAllocation:
    rates: tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(v) for v in np.atleast_1d(self.rates))
        if any(not np.isfinite(v) or v < 0 for v in r):
            raise ValueError("rates must be finite and non-negative")
        object.__setattr__(self, "rates", r)

    @property
    def total(self) -> float:
        return math.fsum(self.rates)

    @classmethod
    def with_total(cls, rates, total: float) -> "RateAllocation":
        alloc = cls(rates)
        if abs(alloc.total - total) > 1e-12:
            raise ValueError(f"allocation sums to {alloc.total}, expected {total}")
        return alloc


def equal_allocation(R: float, d0: int) -> RateAllocation:
    if R < 0 or d0 < 1:
        raise ValueError("need R >= 0 and d0 >= 1")
    return RateAllocation((R / d0,) * d0)


# --------------------------------------------------------------------------
# per-coordinate channels
# --------------------------------------------------------------------------

class _Coordinate:
    """Winning scalar scheme for one coordinate, with sampling and likelihoods."""

    def __init__(self, R: float, beta: float):
        self.beta = beta
        self.model = MixtureModel(beta)
        self.point = unified(R, self.model)
        self.kind = self.point.params["winner"]
        p = self.point.params
        if self.kind == "two_level":
            # P(T=+1 | y) for y = -1, +1
            q, miss = p["q"], p["p"]
            p_plus = np.array([miss * (1 - q) + (1 - miss) * q, (1 - miss) * (1 - q) + miss * q])
            self.table = np.stack([1 - p_plus, p_plus], axis=1)  # (y, t) with t in (-1, +1)
            self.values = np.array([-1.0, 1.0])
        elif self.kind == "det_quant":
            self.quant = Quantizer.from_thresholds(p["thresholds"])
            self.table = self.quant.bin_probabilities(self.model)
            self.values = np.asarray(self.quant.levels)
        else:
            self.alpha = p["alpha"]
            self.table = None
            if self.alpha > 0 and beta > 0:
                self.t_grid, pm, pp, _ = _soft_output_densities(self.alpha, self.model)
                self.log_dens = np.log(np.maximum(np.stack([pm, pp]), TINY))

    @property
    def discrete(self) -> bool:
        return self.table is not None

    def leakage(self) -> float:
        """Exact ``I(x_i; t_i)``."""
        if self.kind == "two_level":
            return self.point.rate
        if self.kind == "det_quant":
            return float(entropy(self.table.mean(axis=0)))
        return soft_rate_exact(self.alpha, self.model)

    def channel(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "two_level":
            t = np.where(x >= 0, 1.0, -1.0)
            return np.where(rng.random(x.size) < self.point.params["q"], -t, t)
        if self.kind == "det_quant":
            return self.quant(x)
        return self.alpha * np.tanh(self.beta * x) + rng.standard_normal(x.size)

    def log_lik(self, t: np.ndarray) -> np.ndarray:
        """``ln P(t | y)`` for both labels, shape ``(n, 2)``."""
        if self.discrete:
            idx = np.searchsorted(self.values, t)
            return np.log(np.maximum(self.table[:, idx].T, TINY))
        if self.alpha == 0 or self.beta == 0:
            return np.full((t.size, 2), -0.5 * np.log(2 * np.pi)) - 0.5 * t[:, None] ** 2
        # the grid reaches 8 noise sd past +-alpha; beyond it values are clamped
        return np.column_stack([np.interp(t, self.t_grid, self.log_dens[k]) for k in (0, 1)])


def _coordinates(model: VectorModel, alloc: RateAllocation) -> list[_Coordinate]:
    if len(alloc.rates) != model.d0:
        raise ValueError(f"allocation has {len(alloc.rates)} entries for {model.d0} coordinates")
    return [_Coordinate(r, b) for r, b in zip(alloc.rates, model.betas)]


def _enumerate_relevance(coords: list[_Coordinate]) -> float:
    cond = np.ones((2, 1))
    for c in coords:
        cond = (cond[:, :, None] * c.table[:, None, :]).reshape(2, -1)
    p_t = cond.mean(axis=0)
    return max(float(entropy(p_t) - 0.5 * entropy(cond[0]) - 0.5 * entropy(cond[1])), 0.0)


def _mc_chunk(model: VectorModel, alloc: RateAllocation, n: int, seed_seq) -> np.ndarray:
    coords = _coordinates(model, alloc)
    rng = np.random.default_rng(seed_seq)
    x, y = model.sample(n, rng)
    ll = np.zeros((n, 2))
    for i, c in enumerate(coords):
        ll += c.log_lik(c.channel(x[:, i], rng))
    lab = (y > 0).astype(int)
    log_mix = logsumexp(ll, axis=1) - LN2
    return ll[np.arange(n), lab] - log_mix


def mc_relevance(model: VectorModel, alloc: RateAllocation, samples: int, seed: int,
                 workers: int = 1) -> tuple[float, float]:
    """Monte-Carlo ``I(Y;t)`` from exact per-coordinate likelihoods; ``(estimate, stderr)``.

    Samples are split into fixed-size chunks with seeds derived from the chunk
    index, so the result does not depend on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    if workers > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_mc_chunk, [model] * len(sizes), [alloc] * len(sizes), sizes, seeds))
    else:
        parts = [_mc_chunk(model, alloc, k, s) for k, s in zip(sizes, seeds)]
    terms = np.concatenate(parts)
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(terms.size))


def vector_unified(model: VectorModel, alloc: RateAllocation, mc_samples: int = 100_000,
                   seed: int = 0, workers: int = 1, force_mc: bool = False) -> TradeoffPoint:
    """Per-coordinate unified schemes; relevance by exact enumeration when possible."""
    coords = _coordinates(model, alloc)
    cells = math.prod(len(c.values) if c.discrete else math.inf for c in coords)
    params = {"winners": [c.kind for c in coords], "allocation": list(alloc.rates),
              "leakage": [c.leakage() for c in coords]}
    if cells <= ENUM_CAP and not force_mc:
        rel = _enumerate_relevance(coords)
        params.update(method="enumeration", cells=int(cells))
    else:
        rel, err = mc_relevance(model, alloc, mc_samples, seed, workers)
        params.update(method="monte_carlo", stderr=err, samples=mc_samples,
                      cap_exceeded=bool(math.isfinite(cells) and cells > ENUM_CAP))
    return TradeoffPoint(alloc.total, max(min(rel, LN2), 0.0), "vector_unified", params)


def sample_representation(model: VectorModel, alloc: RateAllocation, n: int, seed: int):
    """Draw ``(x, t, y)`` triples through the per-coordinate schemes."""
    coords = _coordinates(model, alloc)
    rng = np.random.default_rng(seed)
    x, y = model.sample(n, rng)
    t = np.column_stack([c.channel(x[:, i], rng) for i, c in enumerate(coords)])
    return x, t, y


def chain_rule_check(model: VectorModel, alloc: RateAllocation, samples: int = 100_000,
                     seed: int = 0, bins_per_dim: int = 10) -> tuple[float, float, bool]:
    """Compare an estimate of ``I(x;t)`` with the sum of per-coordinate leakages."""
    coords = _coordinates(model, alloc)
    x, t, _ = sample_representation(model, alloc, samples, seed)
    lhs, err = jackknife_mi(x, t, bins_per_dim)
    rhs = math.fsum(c.leakage() for c in coords)
    return lhs, rhs, bool(lhs <= rhs + 3 * err)


# --------------------------------------------------------------------------
# jackknife histogram estimator
# --------------------------------------------------------------------------

def _quantile_codes(data: np.ndarray, bins: int) -> tuple[np.ndarray, int]:
    """Equal-frequency bin index per row, flattened over dimensions."""
    codes = np.zeros(data.shape[0], dtype=np.int64)
    total = 1
    qs = np.linspace(0, 1, bins + 1)[1:-1]
    for col in data.T:
        edges = np.unique(np.quantile(col, qs))
        idx = np.searchsorted(edges, col, side="right")
        codes = codes * (edges.size + 1) + idx
        total *= edges.size + 1
    return codes, total


def _sum_clogc(counts):
    c = counts[counts > 0].astype(float)
    return float(np.sum(c * np.log(c)))


def _clogc(c):
    c = np.asarray(c, dtype=float)
    return np.where(c > 0, c * np.log(np.maximum(c, 1.0)), 0.0)


def jackknife_mi(samples_a, samples_b, bins_per_dim: int = 10) -> tuple[float, float]:
    """Bias-corrected plug-in MI of equal-frequency histograms, with stderr."""
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    a = a[:, None] if a.ndim == 1 else a
    b = b[:, None] if b.ndim == 1 else b
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"sample counts differ: {n} vs {b.shape[0]}")
    if n < 3:
        raise ValueError("need at least 3 samples")
    if bins_per_dim < 2:
        raise ValueError("bins_per_dim must be at least 2")
    if bins_per_dim ** (a.shape[1] + b.shape[1]) > MAX_JACKKNIFE_BINS:
        raise ValueError("total bin count exceeds 1e6")
    ca, _ = _quantile_codes(a, bins_per_dim)
    cb, nb = _quantile_codes(b, bins_per_dim)
    cab = ca * nb + cb
    _, ia, na = np.unique(ca, return_inverse=True, return_counts=True)
    _, ib, nbc = np.unique(cb, return_inverse=True, return_counts=True)
    _, iab, nab = np.unique(cab, return_inverse=True, return_counts=True)
    sa, sb, sab = _sum_clogc(na), _sum_clogc(nbc), _sum_clogc(nab)

    def mi(m, s_a, s_b, s_ab):
        # plug-in H = ln m - S/m for each table
        return (s_ab - s_a - s_b) / m + math.log(m)

    full = mi(n, sa, sb, sab)
    # leaving sample k out lowers one count in each table
    da = _clogc(na[ia] - 1) - _clogc(na[ia])
    db = _clogc(nbc[ib] - 1) - _clogc(nbc[ib])
    dab = _clogc(nab[iab] - 1) - _clogc(nab[iab])
    loo = mi(n - 1, sa + da, sb + db, sab + dab)
    mean_loo = float(loo.mean())
    est = n * full - (n - 1) * mean_loo
    stderr = math.sqrt((n - 1) / n * float(np.sum((loo - mean_loo) ** 2)))
    return est, stderr
