import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmib.core import LN2, MixtureModel, discretize, entropy, mi_joint, mi_xy
from gmib.solvers import (Partition, agg_ib, agg_ib_path, ba_curve, ba_solve, det_ib,
                          dropout_point_mc, dropout_point_quadrature, info_dropout_curve,
                          js_merge_cost, seq_ib)

J1 = discretize(MixtureModel(1.0))
J_SMALL = discretize(MixtureModel(1.0), 40, 4.0)


def bits(v):
    return v / LN2


# ---------------------------------------------------------------- BA

@pytest.mark.parametrize("lam,seed", [(1.5, 0), (4.0, 1), (20.0, 2), (120.0, 3)])
def test_ba_lagrangian_monotone(lam, seed):
    _, pt = ba_solve(J1, lam, seed=seed, max_iter=1500, track=True)
    hist = np.array(pt.params["lagrangian"])
    assert np.all(np.diff(hist) <= 1e-9)


@given(st.floats(0.3, 80.0), st.integers(0, 1000), st.sampled_from([0.6, 1.0, math.sqrt(2)]))
@settings(max_examples=15)
def test_ba_output_valid(lam, seed, beta):
    joint = discretize(MixtureModel(beta), 60, 4.0)
    ch, pt = ba_solve(joint, lam, t_size=8, seed=seed, max_iter=800)
    assert np.max(np.abs(ch.rows.sum(axis=1) - 1)) < 1e-9
    assert 0 <= pt.relevance <= min(pt.rate, mi_xy(MixtureModel(beta)), LN2) + 1e-6


def test_ba_tiny_lambda_compresses_everything():
    _, pt = ba_solve(J1, 1e-6, seed=0)
    assert pt.rate < 1e-6 and pt.relevance < 1e-6


def test_ba_non_convergence_flag():
    _, pt = ba_solve(J1, 150.0, seed=0, max_iter=5)
    assert not pt.converged and pt.params["iterations"] == 5


def test_ba_curve_singleton_equals_solve():
    (pt,) = ba_curve(J1, [3.0], restarts=1, seed=9)
    _, ref = ba_solve(J1, 3.0, seed=9)
    assert pt.rate == ref.rate and pt.relevance == ref.relevance


def test_ba_curve_small_rate_points():
    for beta, target in ((0.6, (0.1149, 0.0301)), (1.0, (0.2115, 0.1113))):
        pts = ba_curve(discretize(MixtureModel(beta)), np.geomspace(1.05, 4.0, 12), restarts=1)
        r = np.array([0.0] + [p.rate_bits for p in pts])
        v = np.array([0.0] + [p.relevance_bits for p in pts])
        assert abs(np.interp(target[0], r, v) - target[1]) < 0.02


def test_ba_curve_sorted_and_monotone():
    pts = ba_curve(J_SMALL, np.geomspace(1.05, 60, 10), restarts=2, t_size=8)
    rates = [p.rate for p in pts]
    rels = [p.relevance for p in pts]
    assert rates == sorted(rates)
    assert np.all(np.diff(rels) >= -1e-6)


# ---------------------------------------------------------------- merge cost

def test_js_merge_cost_examples():
    assert js_merge_cost(0.3, 0.2, [0.4, 0.6], [0.4, 0.6]) == pytest.approx(0.0, abs=1e-15)
    assert js_merge_cost(0.5, 0.5, [1, 0], [0, 1]) == pytest.approx(LN2, abs=1e-15)
    a = js_merge_cost(0.2, 0.4, [0.9, 0.1], [0.3, 0.7])
    assert js_merge_cost(0.1, 0.2, [0.9, 0.1], [0.3, 0.7]) == pytest.approx(a / 2, rel=1e-13)


@given(st.floats(0.01, 1), st.floats(0.01, 1), st.floats(0, 1), st.floats(0, 1))
def test_js_merge_cost_is_information_loss(pi, pj, a, b):
    # merging two cells loses exactly the mutual information between cell label and Y
    joint = np.array([[pi * (1 - a), pi * a], [pj * (1 - b), pj * b]])
    tot = joint.sum(axis=0)
    hy_t = pi * entropy([1 - a, a]) + pj * entropy([1 - b, b])
    loss = (pi + pj) * float(entropy(tot / (pi + pj))) - float(hy_t)
    assert js_merge_cost(pi, pj, [1 - a, a], [1 - b, b]) == pytest.approx(max(loss, 0), abs=1e-12)


# ---------------------------------------------------------------- Agg-IB

def test_agg_identity_and_trivial():
    part, pt = agg_ib(J_SMALL, J_SMALL.size)
    assert np.array_equal(part.assignment, np.arange(1, J_SMALL.size + 1))
    assert pt.relevance == pytest.approx(mi_joint(J_SMALL), abs=1e-12)
    assert agg_ib(J_SMALL, 1)[1].relevance == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        agg_ib(J_SMALL, 0)
    with pytest.raises(ValueError):
        agg_ib(J_SMALL, J_SMALL.size + 1)


def test_agg_relevance_monotone_in_m():
    path = agg_ib_path(J_SMALL, 1)
    rel = [path[m][1].relevance for m in range(1, J_SMALL.size + 1)]
    assert np.all(np.diff(rel) >= -1e-12)
    for m, (part, pt) in path.items():
        assert pt.rate == pytest.approx(float(entropy(part.channel().rows.T @ J_SMALL.p_x)), abs=1e-12)


def test_agg_beta1_m2():
    _, pt = agg_ib(J1, 2)
    assert abs(bits(pt.relevance) - 0.3685) < 0.02


# ---------------------------------------------------------------- Seq-IB

def test_seq_examples():
    assert seq_ib(J_SMALL, 1, seed=0, restarts=2)[1].relevance == pytest.approx(0.0, abs=1e-12)
    _, pt = seq_ib(J1, 2, seed=0, restarts=10)
    assert abs(bits(pt.relevance) - 0.3519) < 0.03


@given(st.integers(2, 6), st.integers(0, 10_000))
@settings(max_examples=20)
def test_seq_never_worse_than_start(m, seed):
    part, pt = seq_ib(J_SMALL, m, seed=seed, restarts=1)
    assert pt.relevance >= pt.params["initial_relevance"] - 1e-12
    assert isinstance(part, Partition) and part.assignment.max() <= m


# ---------------------------------------------------------------- Det-IB

def test_det_ib_properties():
    for lam, seed in ((0.5, 0), (3.0, 1), (30.0, 2)):
        ch, pt = det_ib(J1, lam, seed=seed)
        assert ch.is_deterministic
        p_t = ch.rows.T @ J1.p_x
        assert abs(pt.rate - float(entropy(p_t))) < 1e-9


def test_det_ib_tiny_lambda():
    ch, pt = det_ib(J1, 1e-9, seed=0)
    assert pt.relevance == pytest.approx(0.0, abs=1e-12)
    assert np.count_nonzero(ch.rows.sum(axis=0)) == 1


def test_det_ib_beta_sqrt2():
    joint = discretize(MixtureModel(math.sqrt(2)))
    best = min((det_ib(joint, lam, seed=0)[1] for lam in (2.0, 3.0, 5.0)),
               key=lambda p: abs(p.rate_bits - 1.0) + abs(p.relevance_bits - 0.6026))
    assert abs(best.rate_bits - 1.0) < 0.03 and abs(best.relevance_bits - 0.6026) < 0.03


# ---------------------------------------------------------------- information dropout

@pytest.mark.parametrize("w1,w2", [(3.0, -2.0), (-5.0, 4.0), (10.0, -10.0), (0.0, 10.0), (1.0, 0.5)])
def test_dropout_quadrature_matches_mc(w1, w2):
    joint = discretize(MixtureModel(1.0), 100, 5.0)
    rate_q, rel_q = dropout_point_quadrature(joint, w1, w2)
    rate_mc, rel_mc = dropout_point_mc(joint, w1, w2, 200_000, np.random.default_rng(0))
    assert rel_q <= rate_q + 1e-6 and rel_q <= mi_joint(joint) + 1e-6
    # 200k draws give standard errors near 2e-3 (rate) and 1e-3 (relevance)
    assert abs(rate_q - rate_mc) < 8e-3 and abs(rel_q - rel_mc) < 4e-3


def test_dropout_constant_channel():
    # w1 = w2 = 0: mean and scale do not depend on x, so T carries nothing
    rate, rel = dropout_point_quadrature(discretize(MixtureModel(1.0), 100, 5.0), 0.0, 0.0)
    assert rate < 1e-10 and rel < 1e-10


def test_dropout_curve_frontier():
    grid = np.arange(-4.0, 4.5, 2.0)
    model = MixtureModel(1.0)
    pts = info_dropout_curve(model, grid, grid)
    assert sum(p.params.get("lagrangian_min", False) for p in pts) == 1
    for p in pts:
        assert 0 <= p.relevance <= min(p.rate, mi_xy(model)) + 1e-6
    mc = info_dropout_curve(model, [2.0], [-1.0], method="mc", samples=20_000, seed=1)
    (q,) = info_dropout_curve(model, [2.0], [-1.0])
    assert abs(mc[0].relevance - q.relevance) < 0.01


def test_dropout_rejects_bad_arguments():
    with pytest.raises(ValueError):
        info_dropout_curve(MixtureModel(1.0), [], [0.0])
    with pytest.raises(ValueError):
        info_dropout_curve(MixtureModel(1.0), [0.0], [0.0], samples=10)
