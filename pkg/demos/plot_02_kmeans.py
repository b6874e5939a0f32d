"""
Clustering and per-cluster distance thresholds
==============================================

Fit two clusters, inspect centroids and thresholds, then confirm the
thread-pool fit reproduces the serial one bit for bit.
"""

import numpy as np

from msdkmeans import Dataset, KMeansParams, fit, fit_parallel, kmeans_detect
from msdkmeans.kmeans import with_parallel

rng = np.random.default_rng(11)
values = np.concatenate([rng.normal(40, 3, 5000), rng.normal(52, 4, 5000)])
data = Dataset.from_values(values)

params = KMeansParams(k=2, seed=2016)
model = fit(data, params)
print("iterations:", model.iterations_run)
print("centroids:", np.round(model.centroids.ravel(), 2))
print("thresholds:", np.round(model.thresholds, 2))

# inertia never goes up between iterations
h = np.asarray(model.inertia_history)
print("inertia non-increasing:", bool(np.all(np.diff(h) <= 1e-9 * h[:-1])))

par = fit_parallel(data, with_parallel(params, 4))
print("parallel identical:", par.centroids.tobytes() == model.centroids.tobytes()
      and par.assignments.tobytes() == model.assignments.tobytes())

r = kmeans_detect(data, params)
print(f"local outliers: {r.n_outliers} ({100 * r.outlier_fraction:.2f}%)")
