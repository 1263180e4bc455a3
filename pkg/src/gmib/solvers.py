"""Numerical bottleneck solvers on a gridded joint of (X, Y).

Blahut-Arimoto gives the reference frontier.  Agglomerative, sequential and
deterministic IB are hard-clustering baselines, and the single-layer
information-dropout model is searched by brute force over its two weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, logsumexp

from .core import (TINY, DiscreteJoint, MixtureModel, TradeoffPoint, discretize, entropy,
                   mi_discrete)

BA_TOL = 1e-9
BA_MAX_ITER = 5000
SEQ_PASS_CAP = 200
TIE_RTOL = 1e-9


@dataclass
class Channel:
    """Stochastic map ``P(t|x)``; one row per grid point."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError("channel rows must form a matrix")
        if np.any(rows < 0) or np.max(np.abs(rows.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("channel rows must be probability vectors")
        self.rows = rows

    @property
    def t_alphabet(self) -> int:
        return self.rows.shape[1]

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(np.isin(self.rows, (0.0, 1.0))) and np.all(self.rows.sum(axis=1) == 1))


@dataclass
class Partition:
    """Hard clustering of the grid; ``assignment[i]`` is in ``1..m``."""

    assignment: np.ndarray
    m: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int)
        if a.size and (a.min() < 1 or a.max() > self.m):
            raise ValueError("cluster labels must lie in 1..m")
        self.assignment = a

    def clusters(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == k) for k in range(1, self.m + 1)]

    def channel(self) -> Channel:
        rows = np.zeros((self.assignment.size, self.m))
        rows[np.arange(self.assignment.size), self.assignment - 1] = 1.0
        return Channel(rows)


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------

def _safe_log(p):
    p = np.asarray(p, dtype=float)
    return np.where(p > TINY, np.log(np.where(p > TINY, p, 1.0)), -np.inf)


def _neg_entropy_rows(pyx):
    """``sum_y p(y|x) ln p(y|x)`` per row."""
    return -entropy(pyx, axis=1)


def _output_stats(joint: DiscreteJoint, rows: np.ndarray):
    """``P_T`` and ``P_{Y|T}`` induced by a channel (dead symbols get a uniform posterior)."""
    p_t = joint.p_x @ rows
    p_ty = rows.T @ joint.p_xy
    live = p_t > TINY
    p_y_t = np.full_like(p_ty, 0.5)
    p_y_t[live] = p_ty[live] / p_t[live, None]
    return p_t, p_y_t


def _kl_matrix(joint: DiscreteJoint, p_y_t: np.ndarray) -> np.ndarray:
    """``KL(P_{Y|X=x} || P_{Y|T=t})`` for every pair, shape ``(n_x, n_t)``."""
    pyx = joint.p_y_given_x
    with np.errstate(invalid="ignore"):
        cross = pyx @ np.where(p_y_t > TINY, np.log(np.maximum(p_y_t, TINY)), -745.0).T
    return np.maximum(_neg_entropy_rows(pyx)[:, None] - cross, 0.0)


def channel_point(joint: DiscreteJoint, rows: np.ndarray) -> tuple[float, float]:
    """``(I(X;T), I(Y;T))`` of a channel on the grid."""
    rate = mi_discrete(joint.p_x, rows)
    p_t, p_y_t = _output_stats(joint, rows)
    relevance = mi_discrete(p_t, p_y_t) if p_t.sum() > 0 else 0.0
    return rate, relevance


def _lagrangian(joint, rows, lam):
    rate, rel = channel_point(joint, rows)
    return rate - lam * rel, rate, rel


# --------------------------------------------------------------------------
# Blahut-Arimoto
# --------------------------------------------------------------------------

def ba_solve(joint: DiscreteJoint, lam: float, t_size: int = 32, seed: int = 0,
             tol: float = BA_TOL, max_iter: int = BA_MAX_ITER,
             track: bool = False) -> tuple[Channel, TradeoffPoint]:
    """Iterative IB updates at trade-off parameter ``lam``.

    With ``track`` the Lagrangian after every full update cycle is stored in
    ``point.params["lagrangian"]``.  Hitting ``max_iter`` sets
    ``point.converged = False`` and returns the last iterate.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if t_size < 2:
        raise ValueError("t_size must be at least 2")
    rng = np.random.default_rng(seed)
    rows = rng.dirichlet(np.ones(t_size), size=joint.size)
    px, pxy, pyx = joint.p_x, joint.p_xy, joint.p_y_given_x
    neg_h = _neg_entropy_rows(pyx)
    log_py = np.log(joint.p_y)
    with np.errstate(divide="ignore"):
        log_rows = np.log(rows)

    def lagrangian(rows, log_rows):
        p_t = px @ rows
        p_ty = rows.T @ pxy
        live = p_t > TINY
        log_pt = np.full(p_t.shape, -np.inf)
        log_pt[live] = np.log(p_t[live])
        terms = np.where(rows > TINY, rows * (log_rows - np.where(live, log_pt, 0.0)), 0.0)
        rate = max(float(px @ terms.sum(axis=1)), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel_terms = np.where(p_ty > TINY, p_ty * (np.log(np.maximum(p_ty, TINY))
                                                      - np.where(live, log_pt, 0.0)[:, None] - log_py), 0.0)
        rel = max(float(rel_terms.sum()), 0.0)
        return p_t, p_ty, log_pt, live, rate - lam * rel

    p_t, p_ty, log_pt, live, prev = lagrangian(rows, log_rows)
    history = [prev]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        log_pyt = np.full(p_ty.shape, math.log(0.5))
        log_pyt[live] = np.maximum(np.log(np.maximum(p_ty[live], TINY)) - log_pt[live, None], -745.0)
        kl = np.maximum(neg_h[:, None] - pyx @ log_pyt.T, 0.0)
        logits = log_pt[None, :] - lam * kl
        logits -= logits.max(axis=1, keepdims=True)
        rows = np.exp(logits)
        norm = rows.sum(axis=1, keepdims=True)
        rows /= norm
        log_rows = logits - np.log(norm)
        p_t, p_ty, log_pt, live, cur = lagrangian(rows, log_rows)
        if track:
            history.append(cur)
        if abs(prev - cur) < tol:
            converged = True
            break
        prev = cur
    rate, rel = channel_point(joint, rows)
    params = {"lambda": lam, "seed": seed, "iterations": it, "t_size": t_size}
    if track:
        params["lagrangian"] = history
    return Channel(rows), TradeoffPoint(rate, rel, "ba", params, converged)


def frontier_filter(points: Sequence[TradeoffPoint], slack: float = 1e-6) -> list[TradeoffPoint]:
    """Sort by rate and drop points whose relevance falls below an earlier one."""
    out = []
    best = -np.inf
    for p in sorted(points, key=lambda p: (p.rate, -p.relevance)):
        if p.relevance >= best - slack:
            out.append(p)
            best = max(best, p.relevance)
    return out


def ba_curve(joint: DiscreteJoint, lambdas: Sequence[float], restarts: int = 5, seed: int = 0,
             t_size: int = 32, tol: float = BA_TOL, max_iter: int = BA_MAX_ITER,
             filter_dominated: bool = True) -> list[TradeoffPoint]:
    """Sweep ``ba_solve`` over ``lambdas``, keeping the best restart per value."""
    lambdas = list(lambdas)
    if not lambdas:
        raise ValueError("lambdas must be non-empty")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    seeds = np.random.SeedSequence(seed).generate_state(len(lambdas) * restarts).reshape(
        len(lambdas), restarts)
    if len(lambdas) == 1 and restarts == 1:
        seeds = np.array([[seed]])
    pts = []
    for lam, row in zip(lambdas, seeds):
        best: Optional[TradeoffPoint] = None
        for s in row:
            _, pt = ba_solve(joint, lam, t_size, int(s), tol, max_iter)
            if best is None or pt.relevance > best.relevance:
                best = pt
        pts.append(best)
    if filter_dominated:
        return frontier_filter(pts)
    return sorted(pts, key=lambda p: p.rate)


def default_lambdas(n: int = 40, lo: float = 1.05, hi: float = 200.0) -> np.ndarray:
    return np.geomspace(lo, hi, n)


# --------------------------------------------------------------------------
# hard clustering baselines
# --------------------------------------------------------------------------

def js_merge_cost(p_i: float, p_j: float, cond_i, cond_j) -> float:
    """Information lost by merging two clusters: ``(p_i + p_j) * JS``."""
    ci = np.asarray(cond_i, dtype=float)
    cj = np.asarray(cond_j, dtype=float)
    tot = p_i + p_j
    if tot <= 0:
        return 0.0
    pi, pj = p_i / tot, p_j / tot
    js = float(entropy(pi * ci + pj * cj) - pi * entropy(ci) - pj * entropy(cj))
    return tot * max(js, 0.0)


def _pair_costs(mass: np.ndarray, cond: np.ndarray, h: np.ndarray, i, j) -> np.ndarray:
    tot = mass[i] + mass[j]
    mix = (mass[i, None] * cond[i] + mass[j, None] * cond[j]) / tot[..., None]
    return np.maximum(tot * entropy(mix) - mass[i] * h[i] - mass[j] * h[j], 0.0)


def _partition_point(joint: DiscreteJoint, labels: np.ndarray, m: int) -> TradeoffPoint:
    rows = np.zeros((joint.size, m))
    rows[np.arange(joint.size), labels - 1] = 1.0
    p_t, p_y_t = _output_stats(joint, rows)
    return TradeoffPoint(float(entropy(p_t)), mi_discrete(p_t, p_y_t), "", {"m": m})


def _check_m(joint: DiscreteJoint, m: int):
    if not 1 <= m <= joint.size:
        raise ValueError(f"m must lie in [1, {joint.size}], got {m}")


def agg_ib_path(joint: DiscreteJoint, m_min: int = 1) -> dict[int, tuple[Partition, TradeoffPoint]]:
    """Greedy bottom-up merging, recording the partition at every size down to ``m_min``."""
    _check_m(joint, m_min)
    n = joint.size
    members = [[i] for i in range(n)]
    mass = joint.p_x.copy()
    cond = joint.p_y_given_x.copy()
    h = entropy(cond, axis=1)
    cost = np.full((n, n), np.inf)
    iu, ju = np.triu_indices(n, 1)
    cost[iu, ju] = _pair_costs(mass, cond, h, iu, ju)
    alive = np.ones(n, dtype=bool)

    def record():
        labels = np.empty(n, dtype=int)
        for k, idx in enumerate(i for i in range(n) if alive[i]):
            labels[members[idx]] = k + 1
        m = int(alive.sum())
        pt = _partition_point(joint, labels, m)
        pt.scheme = "agg_ib"
        return Partition(labels, m), pt

    out = {n: record()}
    for size in range(n - 1, m_min - 1, -1):
        # costs equal up to rounding count as ties; row-major order picks the lowest (i, j)
        low = cost.min()
        flat = int(np.argmax(cost <= low + TIE_RTOL * max(low, TINY)))
        i, j = divmod(flat, n)
        members[i].extend(members[j])
        members[j] = []
        mass[i] += mass[j]
        cond[i] = joint.p_y_given_x[members[i]].T @ joint.p_x[members[i]] / mass[i]
        h[i] = entropy(cond[i])
        alive[j] = False
        cost[j, :] = np.inf
        cost[:, j] = np.inf
        others = np.flatnonzero(alive)
        others = others[others != i]
        lo = np.minimum(others, i)
        hi = np.maximum(others, i)
        cost[lo, hi] = _pair_costs(mass, cond, h, lo, hi)
        out[size] = record()
    return out


def agg_ib(joint: DiscreteJoint, m: int) -> tuple[Partition, TradeoffPoint]:
    """Agglomerative IB down to ``m`` clusters."""
    _check_m(joint, m)
    return agg_ib_path(joint, m)[m]


def _seq_ib_run(joint: DiscreteJoint, m: int, rng: np.random.Generator,
                pass_cap: int) -> tuple[np.ndarray, int, float]:
    n = joint.size
    labels = rng.integers(0, m, size=n)
    labels[rng.permutation(n)[:m]] = np.arange(m)  # no empty cluster at the start
    pxy = joint.p_xy
    px = joint.p_x
    mass = np.bincount(labels, weights=px, minlength=m)
    joint_t = np.stack([np.bincount(labels, weights=pxy[:, k], minlength=m) for k in (0, 1)], 1)
    h_x = entropy(joint.p_y_given_x, axis=1)
    init_rel = _partition_point(joint, labels + 1, m).relevance
    passes = 0
    for passes in range(1, pass_cap + 1):
        moved = 0
        for x in rng.permutation(n):
            k = labels[x]
            if mass[k] - px[x] <= TINY * 10 and np.count_nonzero(labels == k) == 1:
                continue
            mass[k] -= px[x]
            joint_t[k] -= pxy[x]
            cond_t = joint_t / np.maximum(mass, TINY)[:, None]
            tot = mass + px[x]
            mix = (joint_t + pxy[x]) / tot[:, None]
            costs = tot * entropy(mix) - mass * entropy(cond_t) - px[x] * h_x[x]
            best = int(np.argmin(costs))
            labels[x] = best
            mass[best] += px[x]
            joint_t[best] += pxy[x]
            moved += best != k
        if moved == 0:
            break
    return labels + 1, passes, init_rel


def seq_ib(joint: DiscreteJoint, m: int, seed: int = 0, restarts: int = 10,
           pass_cap: int = SEQ_PASS_CAP) -> tuple[Partition, TradeoffPoint]:
    """Sequential IB: draw-and-reinsert passes from random partitions."""
    _check_m(joint, m)
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    rng = np.random.default_rng(seed)
    best = None
    for r in range(restarts):
        labels, passes, init_rel = _seq_ib_run(joint, m, rng, pass_cap)
        pt = _partition_point(joint, labels, m)
        pt.scheme = "seq_ib"
        pt.params.update({"restart": r, "passes": passes, "initial_relevance": init_rel})
        pt.converged = passes < pass_cap
        if best is None or pt.relevance > best[1].relevance:
            best = (Partition(labels, m), pt)
    return best


def det_ib(joint: DiscreteJoint, lam: float, t_size: int = 32, seed: int = 0,
           max_iter: int = BA_MAX_ITER) -> tuple[Channel, TradeoffPoint]:
    """Deterministic IB: hard argmax assignments alternated with P_T, P_{Y|T} updates."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if t_size < 2:
        raise ValueError("t_size must be at least 2")
    rng = np.random.default_rng(seed)
    n = joint.size
    assign = rng.integers(0, t_size, size=n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        rows = np.zeros((n, t_size))
        rows[np.arange(n), assign] = 1.0
        p_t, p_y_t = _output_stats(joint, rows)
        score = _safe_log(p_t)[None, :] - lam * _kl_matrix(joint, p_y_t)
        new = np.argmax(score, axis=1)  # first maximum: smallest t on ties
        if np.array_equal(new, assign):
            converged = True
            break
        assign = new
    rows = np.zeros((n, t_size))
    rows[np.arange(n), assign] = 1.0
    p_t, p_y_t = _output_stats(joint, rows)
    pt = TradeoffPoint(float(entropy(p_t)), mi_discrete(p_t, p_y_t), "det_ib",
                       {"lambda": lam, "seed": seed, "iterations": it,
                        "clusters": int(np.count_nonzero(p_t > 0))}, converged)
    return Channel(rows), pt


# --------------------------------------------------------------------------
# single-layer information dropout
# --------------------------------------------------------------------------

@dataclass
class DropoutConfig:
    """Grid resolution used to evaluate the dropout channel."""

    n_points: int = 100
    span: float = 5.0
    mesh_per_sigma: int = 8     # u-mesh points per noise standard deviation
    mesh_sigmas: float = 8.0    # half-width of each component's mesh, in standard deviations
    bias: float = 1.0
    min_scale: float = 1e-12


def _dropout_channel(x, w1, w2, bias, min_scale):
    # log T = log f1(x) + f2(x) * Z
    mean = np.log(expit(w1 * x) + bias)
    scale = np.maximum(expit(w2 * x), min_scale)
    return mean, scale


def _log_normal_matrix(u, mean, scale):
    d = (u[..., None] - mean) / scale
    return -0.5 * d * d - np.log(scale) - 0.5 * math.log(2 * math.pi)


def dropout_point_quadrature(joint: DiscreteJoint, w1: float, w2: float,
                             cfg: DropoutConfig = DropoutConfig()) -> tuple[float, float]:
    """``(I(X;T), I(Y;T))`` with X on the grid, computed through ``U = log T``.

    Given a grid point, U is Gaussian, so ``h(U|X)`` is closed form.  The
    mixture entropies ``h(U)`` and ``h(U|Y)`` are integrated by the trapezoid
    rule on the union of per-component meshes, which keeps narrow components
    resolved however small their scale.
    """
    mean, scale = _dropout_channel(joint.x_grid, w1, w2, cfg.bias, cfg.min_scale)
    k = int(round(2 * cfg.mesh_sigmas * cfg.mesh_per_sigma))
    offsets = np.linspace(-cfg.mesh_sigmas, cfg.mesh_sigmas, k + 1)
    u = np.unique((mean[:, None] + scale[:, None] * offsets).ravel())
    d = (u[:, None] - mean) / scale
    dens = np.exp(-0.5 * d * d) / (scale * math.sqrt(2 * math.pi))
    p_xy = joint.p_xy
    p_y = p_xy.sum(axis=0)
    mix = dens @ np.column_stack([joint.p_x, p_xy / p_y])      # p(u), p(u|y=-1), p(u|y=+1)
    f = -mix * np.log(np.maximum(mix, TINY))
    h = (0.5 * (f[1:] + f[:-1]) * np.diff(u)[:, None]).sum(axis=0)
    h_u_x = float(joint.p_x @ np.log(scale)) + 0.5 * math.log(2 * math.pi * math.e)
    return max(float(h[0] - h_u_x), 0.0), max(float(h[0] - p_y @ h[1:]), 0.0)


def dropout_point_mc(joint: DiscreteJoint, w1: float, w2: float, samples: int,
                     rng: np.random.Generator,
                     cfg: DropoutConfig = DropoutConfig()) -> tuple[float, float]:
    """Monte-Carlo estimate of the same quantities, sampling X from the grid."""
    mean, scale = _dropout_channel(joint.x_grid, w1, w2, cfg.bias, cfg.min_scale)
    idx = rng.choice(joint.size, size=samples, p=joint.p_x)
    y = (rng.random(samples) < joint.p_y_given_x[idx, 1]).astype(int)
    u = mean[idx] + scale[idx] * rng.standard_normal(samples)
    p_xy = joint.p_xy
    log_w = np.log(np.maximum(np.column_stack([joint.p_x, p_xy / p_xy.sum(axis=0)]), TINY))
    rate_terms, rel_terms = [], []
    for chunk in np.array_split(np.arange(samples), max(samples // 5000, 1)):
        lnj = _log_normal_matrix(u[chunk], mean, scale)
        log_pu = logsumexp(lnj + log_w[:, 0], axis=1)
        log_pu_y = np.where(y[chunk] == 1, logsumexp(lnj + log_w[:, 2], axis=1),
                            logsumexp(lnj + log_w[:, 1], axis=1))
        rate_terms.append(lnj[np.arange(chunk.size), idx[chunk]] - log_pu)
        rel_terms.append(log_pu_y - log_pu)
    return (max(float(np.concatenate(rate_terms).mean()), 0.0),
            max(float(np.concatenate(rel_terms).mean()), 0.0))


def default_dropout_grid() -> np.ndarray:
    return np.round(np.arange(-100, 101) * 0.1, 10)


def info_dropout_curve(model: MixtureModel, w1_grid: Optional[Sequence[float]] = None,
                       w2_grid: Optional[Sequence[float]] = None, lam: float = 10.0,
                       samples: int = 10_000, seed: int = 0, method: str = "quadrature",
                       cfg: Optional[DropoutConfig] = None) -> list[TradeoffPoint]:
    """Brute-force search of the single-layer dropout model over ``(w1, w2)``.

    Returns the non-dominated points sorted by rate.  The point minimising
    ``rate - lam * relevance`` carries ``params["lagrangian_min"] = True``.
    ``method="mc"`` uses ``samples`` Monte-Carlo draws per grid cell.
    """
    w1_grid = default_dropout_grid() if w1_grid is None else np.asarray(list(w1_grid), float)
    w2_grid = default_dropout_grid() if w2_grid is None else np.asarray(list(w2_grid), float)
    if w1_grid.size == 0 or w2_grid.size == 0:
        raise ValueError("weight grids must be non-empty")
    if samples < 10_000:
        raise ValueError("samples must be at least 1e4")
    if method not in ("quadrature", "mc"):
        raise ValueError(f"unknown method {method!r}")
    cfg = cfg or DropoutConfig()
    joint = discretize(model, cfg.n_points, cfg.span)
    rng = np.random.default_rng(seed)
    cache: dict[tuple[float, float], tuple[float, float]] = {}
    pts = []
    for w1 in w1_grid:
        for w2 in w2_grid:
            key = (float(w1), float(w2))
            # x -> -x maps the model onto itself, so (w1, w2) and (-w1, -w2) coincide
            mirror = (-key[0] + 0.0, -key[1] + 0.0)
            if method == "quadrature" and mirror in cache:
                val = cache[mirror]
            elif method == "quadrature":
                val = dropout_point_quadrature(joint, key[0], key[1], cfg)
            else:
                val = dropout_point_mc(joint, key[0], key[1], samples, rng, cfg)
            cache[key] = val
            rate, rel = val
            pts.append(TradeoffPoint(rate, min(rel, rate), "info_dropout", {"w1": key[0], "w2": key[1]}))
    best = min(pts, key=lambda p: p.rate - lam * p.relevance)
    best.params["lagrangian_min"] = True
    front = frontier_filter(pts, slack=0.0)
    if best not in front:
        front = sorted(front + [best], key=lambda p: p.rate)
    return front
