"""
Relevance of the analytic schemes for a scalar observation
==========================================================

A label Y = +-1 is seen through X = beta*Y + N(0, 1).  Each scheme squeezes X
into a representation T whose complexity I(X;T) stays under a budget R, and we
ask how much of Y survives.
"""

import numpy as np

from gmib import MixtureModel, mi_xy, unified
from gmib.core import LN2

# beta = 1 gives a modest signal-to-noise ratio.  The ceiling for any
# representation is I(X;Y) itself.
model = MixtureModel(1.0)
print(f"I(X;Y) = {mi_xy(model) / LN2:.4f} bits")

# Sweep the budget.  ``unified`` evaluates every scheme and keeps the best one,
# so the winner column shows which channel is best at each budget.
print(f"{'R bits':>7} {'best':>10} {'I(Y;T) bits':>12}")
for r_bits in np.arange(0.25, 3.01, 0.25):
    pt = unified(r_bits * LN2, model)
    print(f"{r_bits:7.2f} {pt.params['winner']:>10} {pt.relevance_bits:12.4f}")

# Below one bit the two-level channel (sign of X with random flips) is hard to
# beat.  Past one bit the extra levels buy little, because Y itself holds only
# a single bit.
