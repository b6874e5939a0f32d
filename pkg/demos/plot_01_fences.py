"""
Statistical fences on a single feature
======================================

Mean/standard-deviation, z-score and quartile fences side by side on a
skewed sample with a handful of planted extremes.
"""

import numpy as np

from msdkmeans import Dataset, MsdParams, compute_stats, miqr_detect, msd_detect, zscore_detect

rng = np.random.default_rng(7)
values = np.concatenate([rng.gamma(9.0, 5.0, 2000), [180.0, 210.0, 250.0, 1.0]])
data = Dataset.from_values(values)

s = compute_stats(values)
print(f"mu={s.mu:.2f} sigma={s.sigma:.2f}")

# a one-sigma fence flags a lot; that is the intended first-stage behaviour
for m in (1.0, 2.0, 3.0):
    r = msd_detect(data, MsdParams(m))
    print(f"MSD m={m:g}: {r.n_outliers} flagged ({100 * r.outlier_fraction:.2f}%)")

r = zscore_detect(data)
print(f"z-score |z|>3: {r.n_outliers} flagged")

r = miqr_detect(data)
(lo, hi), = r.details["fences"]
print(f"IQR fences [{lo:.1f}, {hi:.1f}]: {r.n_outliers} flagged")
