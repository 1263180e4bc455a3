"""
Iterative information bottleneck on a discretized mixture
=========================================================

Blahut-Arimoto and the clustering variants work on a finite grid of x values.
Here they are run on the beta = 1 mixture and compared with the analytic
bound at the same complexity.
"""

import numpy as np

from gmib import MixtureModel, agg_ib, ba_curve, det_ib, discretize, seq_ib, unified

model = MixtureModel(1.0)
joint = discretize(model)   # 200 points, five standard deviations past +-beta

# A lambda sweep traces the soft-assignment frontier.
for pt in ba_curve(joint, np.geomspace(1.5, 60, 8), restarts=1):
    bound = unified(pt.rate, model).relevance_bits
    print(f"BA     rate {pt.rate_bits:.3f}  relevance {pt.relevance_bits:.4f}  analytic {bound:.4f}")

# Hard clusterings with two cells all land near the sign quantizer.
print("Agg-IB ", agg_ib(joint, 2)[1].relevance_bits)
print("Seq-IB ", seq_ib(joint, 2, seed=0)[1].relevance_bits)
ch, pt = det_ib(joint, 3.0, seed=0)
print("Det-IB ", pt.relevance_bits, "with", pt.params["clusters"], "clusters")
