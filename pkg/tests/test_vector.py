import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gmib.core import LN2, MixtureModel
from gmib.schemes import unified
from gmib.vector import (RateAllocation, VectorModel, chain_rule_check, equal_allocation,
                         jackknife_mi, mc_relevance, vector_unified)
from gmib.vector import _quantile_codes

REF_BETAS = VectorModel((0.9, 1.0, 1.1))


def test_equal_allocation_examples():
    assert equal_allocation(3.0, 3).rates == (1.0, 1.0, 1.0)
    assert equal_allocation(0.0, 5).rates == (0.0,) * 5
    a = equal_allocation(2.0, 4)
    assert a.rates == (0.5,) * 4 and a.total == 2.0


@given(st.floats(0.0, 50.0), st.integers(1, 12))
def test_equal_allocation_sums(R, d0):
    assert abs(equal_allocation(R, d0).total - R) <= 1e-12


def test_allocation_validation():
    with pytest.raises(ValueError):
        RateAllocation((1.0, -0.1))
    with pytest.raises(ValueError):
        RateAllocation.with_total((1.0, 1.0), 3.0)
    with pytest.raises(ValueError):
        VectorModel((1.0, -2.0))
    with pytest.raises(ValueError):
        vector_unified(REF_BETAS, equal_allocation(1.0, 2))


@pytest.mark.parametrize("R,beta", [(0.3, 1.0), (1.0, 1.0), (2.2, 0.6), (1.0, math.sqrt(2))])
def test_single_coordinate_reduces_to_scalar(R, beta):
    pt = vector_unified(VectorModel((beta,)), RateAllocation((R,)), mc_samples=200_000)
    ref = unified(R, MixtureModel(beta))
    if pt.params["method"] == "enumeration":
        assert pt.relevance == pytest.approx(ref.relevance, abs=1e-12)
    else:
        assert abs(pt.relevance - ref.relevance) <= 3 * pt.params["stderr"] + 1e-3


def test_reference_rows():
    for bits_total, expected in ((3.0, 0.7151), (8.5263, 0.8364)):
        pt = vector_unified(REF_BETAS, equal_allocation(bits_total * LN2, 3))
        assert pt.params["method"] == "enumeration"
        assert abs(pt.relevance / LN2 - expected) < 0.02


@pytest.mark.parametrize("rates,betas", [((1.0, 1.0, 1.0), (0.9, 1.0, 1.1)),
                                         ((0.5, 2.0), (0.6, 1.0)),
                                         ((1.6, 0.3, 0.7), (0.7, 1.2, 0.5))])
def test_mc_matches_enumeration(rates, betas):
    model, alloc = VectorModel(betas), RateAllocation(rates)
    exact = vector_unified(model, alloc)
    assert exact.params["method"] == "enumeration"
    mc = vector_unified(model, alloc, mc_samples=100_000, seed=2, force_mc=True)
    assert abs(mc.relevance - exact.relevance) <= 3 * mc.params["stderr"]


def test_enumeration_cap_fallback():
    model = VectorModel((0.3, 0.3, 0.3))
    alloc = equal_allocation(15.0, 3)
    pt = vector_unified(model, alloc, mc_samples=20_000)
    assert pt.params["method"] == "monte_carlo"
    if all(w in ("two_level", "det_quant") for w in pt.params["winners"]):
        assert pt.params["cap_exceeded"]


def test_mc_independent_of_workers():
    alloc = equal_allocation(3.0, 3)
    a = mc_relevance(REF_BETAS, alloc, 25_000, seed=5, workers=1)
    b = mc_relevance(REF_BETAS, alloc, 25_000, seed=5, workers=2)
    assert a == b


def test_relevance_bounds_and_monotone_budget():
    totals = np.linspace(0.0, 6.0, 13)
    rel = [vector_unified(REF_BETAS, equal_allocation(R, 3), mc_samples=50_000).relevance
           for R in totals]
    for R, v in zip(totals, rel):
        assert 0 <= v <= min(R, LN2) + 1e-9
    assert np.all(np.diff(rel) >= -0.01)


# ---------------------------------------------------------------- chain rule

def test_chain_rule_examples():
    lhs, rhs, holds = chain_rule_check(REF_BETAS, equal_allocation(3.0, 3), samples=100_000)
    assert holds
    lhs, rhs, holds = chain_rule_check(VectorModel((1.0,)), RateAllocation((0.3,)), samples=50_000,
                                       bins_per_dim=10)
    assert holds and abs(lhs - rhs) < 0.03
    lhs, rhs, holds = chain_rule_check(VectorModel((1.0, 1.0)), RateAllocation((0.0, 0.0)),
                                       samples=20_000)
    assert holds and rhs == 0.0 and abs(lhs) < 0.01


def test_chain_rule_random_configurations():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        d0 = int(rng.integers(1, 4))
        model = VectorModel(tuple(rng.uniform(0.0, 2.0, d0)))
        alloc = RateAllocation(tuple(rng.uniform(0.0, 2.0, d0)))
        lhs, rhs, holds = chain_rule_check(model, alloc, samples=4000, seed=int(rng.integers(1 << 30)),
                                           bins_per_dim=5)
        assert holds, (model, alloc, lhs, rhs)


# ---------------------------------------------------------------- jackknife

def _plugin_mi(a, b, bins):
    ca, _ = _quantile_codes(a[:, None], bins)
    cb, nb = _quantile_codes(b[:, None], bins)
    joint = np.zeros((ca.max() + 1, nb))
    np.add.at(joint, (ca, cb), 1)
    p = joint / joint.sum()
    pa, pb = p.sum(1, keepdims=True), p.sum(0, keepdims=True)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / (pa @ pb)[nz])))


def test_jackknife_matches_brute_force():
    rng = np.random.default_rng(8)
    a = rng.standard_normal(60)
    b = a + rng.standard_normal(60)
    bins = 4
    ca, _ = _quantile_codes(a[:, None], bins)
    cb, _ = _quantile_codes(b[:, None], bins)
    # leave-one-out with the bin edges of the full sample, as the estimator does
    full = _plugin_mi(a, b, bins)
    loo = []
    for k in range(60):
        keep = np.arange(60) != k
        joint = np.zeros((bins, bins))
        np.add.at(joint, (ca[keep], cb[keep]), 1)
        p = joint / joint.sum()
        pa, pb = p.sum(1, keepdims=True), p.sum(0, keepdims=True)
        nz = p > 0
        loo.append(float(np.sum(p[nz] * np.log(p[nz] / (pa @ pb)[nz]))))
    loo = np.array(loo)
    est_ref = 60 * full - 59 * loo.mean()
    se_ref = math.sqrt(59 / 60 * np.sum((loo - loo.mean()) ** 2))
    est, se = jackknife_mi(a, b, bins)
    assert est == pytest.approx(est_ref, abs=1e-12)
    assert se == pytest.approx(se_ref, abs=1e-12)


def test_jackknife_examples():
    rng = np.random.default_rng(0)
    est, se = jackknife_mi(rng.standard_normal(10_000), rng.standard_normal(10_000), 8)
    assert abs(est) <= 3 * se
    a = rng.standard_normal(10_000)
    est, _ = jackknife_mi(a, a, 8)
    assert est == pytest.approx(math.log(8), abs=1e-3)
    rho = 0.5
    z = rng.standard_normal((10_000, 2))
    x, y = z[:, 0], rho * z[:, 0] + math.sqrt(1 - rho * rho) * z[:, 1]
    est, se = jackknife_mi(x, y)
    assert abs(est - (-0.5 * math.log(1 - rho * rho))) <= 3 * se + 0.02


def test_jackknife_validation():
    with pytest.raises(ValueError):
        jackknife_mi(np.zeros(10), np.zeros(9))
    with pytest.raises(ValueError):
        jackknife_mi(np.zeros((10, 4)), np.zeros((10, 4)), 10)
