"""
Comparing detectors against known labels
========================================

Run every detector on the same labeled synthetic set and print the ranked
indicator table.
"""

from msdkmeans import (LofParams, evaluate, kmeans_detect, lof_detect, miqr_detect,
                       msd_detect, msd_kmeans_detect, render_table, zscore_detect)
from msdkmeans.ingest import generate, shipped_spec

data = generate(shipped_spec("default"))

runs = {
    "MSD": msd_detect(data),
    "Z-score": zscore_detect(data),
    "MIQR": miqr_detect(data),
    "K-means": kmeans_detect(data),
    "LOF": lof_detect(data, LofParams(sample_size=3000)),
    "MSD-Kmeans": msd_kmeans_detect(data),
}
entries = [(name, evaluate(r, data.labels)) for name, r in runs.items()]
print(render_table(entries))
