"""Information bottleneck tools for a binary label observed in Gaussian noise."""
__version__ = "0.1.0"

from .core import (LN2, DiscreteJoint, MixtureModel, TradeoffPoint, binary_entropy,
                   conditional_density, discretize, gauss_hermite_expect, gaussian_q, mi_discrete,
                   mi_xy, to_bits, to_nats)
from .schemes import (Quantizer, SoftScheme, alpha_lb1, alpha_lb2, build_quantizer, det_levels,
                      f_beta, g_beta, i1, i2, i3, i4, miss_detection_p, soft_rate_exact,
                      soft_relevance, solve_delta, solve_q, unified)
from .classify import (ErrorPoint, err_det_quant, err_soft, err_two_level, eval_logistic, mc_error,
                       train_logistic)
from .solvers import (Channel, Partition, agg_ib, ba_curve, ba_solve, det_ib, info_dropout_curve,
                      js_merge_cost, seq_ib)
from .vector import (RateAllocation, VectorModel, chain_rule_check, equal_allocation, jackknife_mi,
                     vector_unified)
from .data import (LabeledDataset, class_whiten, load_dataset, random_projection, split)

__all__ = [
    "LN2", "DiscreteJoint", "MixtureModel", "TradeoffPoint", "binary_entropy",
    "conditional_density", "discretize", "gauss_hermite_expect", "gaussian_q", "mi_discrete",
    "mi_xy", "to_bits", "to_nats", "Quantizer", "SoftScheme", "alpha_lb1", "alpha_lb2",
    "build_quantizer", "det_levels", "f_beta", "g_beta", "i1", "i2", "i3", "i4", "miss_detection_p",
    "soft_rate_exact", "soft_relevance", "solve_delta", "solve_q", "unified", "ErrorPoint",
    "err_det_quant", "err_soft", "err_two_level", "eval_logistic", "mc_error", "train_logistic",
    "Channel", "Partition", "agg_ib", "ba_curve", "ba_solve", "det_ib", "info_dropout_curve",
    "js_merge_cost", "seq_ib", "RateAllocation", "VectorModel", "chain_rule_check",
    "equal_allocation", "jackknife_mi", "vector_unified", "LabeledDataset", "class_whiten",
    "load_dataset", "random_projection", "split",
]
