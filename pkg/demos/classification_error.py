"""
Classification error under an information budget
================================================

The same channels can be read as privacy filters: T leaks at most R nats
about X, and a downstream classifier guesses Y from T.  Closed forms give the
error of each scheme; a Monte-Carlo run checks them.
"""

import math

from gmib import MixtureModel, err_det_quant, err_soft, err_two_level, i4, mc_error
from gmib.core import LN2
from gmib.schemes import alpha_lb2

model = MixtureModel(math.sqrt(2))

# At R = ln 2 the two-level channel is simply sign(X), so its error is Q(beta).
print("two-level  at 1 bit :", round(err_two_level(LN2, model).error, 6))
print("det-quant  at 1.5 bit:", round(err_det_quant(1.5 * LN2, model).error, 6))

# The soft channel scales tanh(beta*X) by a gain fixed by the budget.
R = 1.3869 * LN2
closed = err_soft(alpha_lb2(R, model), model).error
sim = mc_error(i4(R, model), model, n=50_000, seed=1)
print(f"soft       at 1.3869 bits: closed {closed:.5f}, simulated {sim.error:.5f} +- {sim.stderr:.5f}")
