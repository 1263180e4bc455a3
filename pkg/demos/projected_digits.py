"""
Digits through a random projection
==================================

Images of two digit classes are projected to three dimensions and whitened
per class, which makes them look like the vector mixture model.  The analytic
scheme is then compared with a single-layer information-dropout encoder at
matched estimated leakage.
"""

import numpy as np
from sklearn.datasets import load_digits

from gmib import LabeledDataset
from gmib.core import LN2
from gmib.experiments import best_dropout_at, image_experiment

digits = load_digits()
keep = np.isin(digits.target, [7, 9])
data = LabeledDataset(digits.data[keep] / 16.0, np.where(digits.target[keep] == 7, -1.0, 1.0))

rows = image_experiment(data, budgets_bits=(0.5, 1, 2, 3, 4), d0=3, seed=0,
                        w_grid=np.arange(-6.0, 6.5, 2.0))
for r in rows:
    if r.method != "unified":
        continue
    rival = best_dropout_at(rows, r.leakage)
    rival_txt = f"{rival.error:.3f}" if rival else "  -  "
    print(f"budget {r.budget / LN2:.1f} bits  leakage {r.leakage / LN2:.2f}  "
          f"error {r.error:.3f}  best dropout {rival_txt}")
