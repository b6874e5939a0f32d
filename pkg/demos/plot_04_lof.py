"""
Local outlier factor
====================

LOF is close to 1 inside an evenly spaced sample and grows for an isolated
point. Large inputs can be scored on a seeded subsample.
"""

import numpy as np

from msdkmeans import Dataset, LofParams, lof_detect, lof_scores

grid = Dataset.from_values(np.append(np.arange(20.0), 100.0))
scores = lof_scores(grid, LofParams(k_neighbors=5))
print("interior:", np.round(scores[5:15], 3))
print("isolated point:", round(float(scores[-1]), 2))

rng = np.random.default_rng(3)
big = Dataset.from_values(np.append(rng.normal(0, 1, 20000), [9.0, -8.5]))
r = lof_detect(big, LofParams(sample_size=2000, seed=3))
print(f"scored {int(r.evaluated.sum())} of {big.n}; flagged {r.n_outliers}")
