"""End-to-end experiments built from the library pieces.

These are the sweeps driven by the command line: scheme curves, error
curves, solver baselines and the projected-image comparison against
information dropout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit

from .classify import err_det_quant, err_soft, err_two_level, eval_logistic, train_logistic
from .core import LN2, MixtureModel, TradeoffPoint
from .data import LabeledDataset, class_whiten, estimated_betas, random_projection, split
from .schemes import alpha_lb1, alpha_lb2, i1, i2, i3, i4, unified
from .vector import VectorModel, _coordinates, equal_allocation, jackknife_mi

SCHEMES = ("two_level", "det_quant", "soft_lb1", "soft_lb2", "unified")


def scheme_point(name: str, R: float, model: MixtureModel) -> Optional[TradeoffPoint]:
    """Relevance point of one scheme, or None where it is undefined."""
    if name == "two_level":
        return i1(R, model) if R <= LN2 + 1e-12 else None
    if name == "det_quant":
        return i2(R, model)
    if name == "soft_lb1":
        return i3(R, model)
    if name == "soft_lb2":
        return i4(R, model) if R >= LN2 - 1e-12 else None
    if name == "unified":
        return unified(R, model)
    raise ValueError(f"unknown scheme {name!r}")


def error_point(name: str, R: float, model: MixtureModel):
    """Classification error of one scheme at budget ``R`` (None where undefined)."""
    if name == "two_level":
        return err_two_level(R, model) if R <= LN2 + 1e-12 else None
    if name == "det_quant":
        return err_det_quant(R, model)
    if name == "soft_lb1":
        e = err_soft(alpha_lb1(R, model), model)
    elif name == "soft_lb2":
        if R < LN2 - 1e-12:
            return None
        e = err_soft(alpha_lb2(R, model), model)
    elif name == "unified":
        pt = unified(R, model)
        e = error_point(pt.params["winner"], R, model)
        if e is not None:
            e.scheme = "unified"
        return e
    else:
        raise ValueError(f"unknown scheme {name!r}")
    e.scheme = name
    return e


# --------------------------------------------------------------------------
# projected image data
# --------------------------------------------------------------------------

@dataclass
class ImageRow:
    method: str
    budget: float          # nats; nan for dropout rows
    leakage: float         # estimated sum_i I(x_i; t_i), nats
    error: float
    stderr: float
    params: dict = field(default_factory=dict)


def prepare_features(data: LabeledDataset, d0: int = 3, seed: int = 0, class_cap: int = 2000,
                     train_fraction: float = 0.5):
    """Project, whiten, orient and split; returns ``(train, test, betas)``.

    Coordinates are sign-flipped so every estimated ``beta_i`` is non-negative.
    """
    feats = class_whiten(random_projection(data, d0, seed)).class_cap(class_cap)
    b = estimated_betas(feats)
    sign = np.where(b < 0, -1.0, 1.0)
    feats = LabeledDataset(feats.vectors * sign, feats.labels)
    train, test = split(feats, train_fraction, seed)
    return train, test, np.abs(b)


def estimated_leakage(x: np.ndarray, t: np.ndarray, bins: int = 10) -> float:
    """Sum of per-coordinate jackknife estimates of ``I(x_i; t_i)``."""
    return float(sum(jackknife_mi(x[:, i], t[:, i], bins)[0] for i in range(x.shape[1])))


def _readout(t_train, y_train, t_test, y_test):
    params = train_logistic(t_train, y_train)
    e = eval_logistic(params, t_test, y_test)
    return e, float(np.sqrt(e * (1 - e) / y_test.size))


def unified_image_rows(train: LabeledDataset, test: LabeledDataset, betas, budgets: Sequence[float],
                       seed: int = 0) -> list[ImageRow]:
    rows = []
    model = VectorModel(tuple(betas))
    for k, R in enumerate(budgets):
        coords = _coordinates(model, equal_allocation(R, model.d0))
        rng = np.random.default_rng([seed, k])
        t_tr = np.column_stack([c.channel(train.vectors[:, i], rng) for i, c in enumerate(coords)])
        t_te = np.column_stack([c.channel(test.vectors[:, i], rng) for i, c in enumerate(coords)])
        e, se = _readout(t_tr, train.labels, t_te, test.labels)
        rows.append(ImageRow("unified", float(R), estimated_leakage(test.vectors, t_te), e, se,
                             {"winners": [c.kind for c in coords]}))
    return rows


def dropout_image_rows(train: LabeledDataset, test: LabeledDataset, w1_grid, w2_grid,
                       seed: int = 0, bias: float = 1.0) -> list[ImageRow]:
    """Per-coordinate single-layer dropout ``log T = log(sigma(w1 x) + b) + sigma(w2 x) Z``."""
    rng = np.random.default_rng(seed)
    z_tr = rng.standard_normal(train.vectors.shape)
    z_te = rng.standard_normal(test.vectors.shape)
    rows = []
    for w1 in w1_grid:
        for w2 in w2_grid:
            def enc(x, z):
                return np.log(expit(w1 * x) + bias) + expit(w2 * x) * z
            u_tr, u_te = enc(train.vectors, z_tr), enc(test.vectors, z_te)
            e, se = _readout(u_tr, train.labels, u_te, test.labels)
            rows.append(ImageRow("info_dropout", float("nan"), estimated_leakage(test.vectors, u_te),
                                 e, se, {"w1": float(w1), "w2": float(w2)}))
    return rows


def best_dropout_at(rows: Sequence[ImageRow], leakage: float) -> Optional[ImageRow]:
    """Lowest-error dropout row whose estimated leakage does not exceed ``leakage``."""
    ok = [r for r in rows if r.method == "info_dropout" and r.leakage <= leakage]
    return min(ok, key=lambda r: r.error) if ok else None


def image_experiment(data: LabeledDataset, budgets_bits: Sequence[float] = (0.5, 1, 1.5, 2, 3, 4, 6),
                     d0: int = 3, seed: int = 0, class_cap: int = 2000, train_fraction: float = 0.5,
                     w_grid: Optional[Sequence[float]] = None) -> list[ImageRow]:
    train, test, betas = prepare_features(data, d0, seed, class_cap, train_fraction)
    budgets = [b * LN2 for b in budgets_bits]
    rows = unified_image_rows(train, test, betas, budgets, seed)
    grid = np.arange(-10.0, 10.5, 1.0) if w_grid is None else np.asarray(w_grid, float)
    rows += dropout_image_rows(train, test, grid, grid, seed)
    for r in rows:
        r.params["betas"] = [float(b) for b in betas]
    return rows
