"""
The two-stage detector
======================

Stage one removes values far from the global mean; stage two clusters what
is left and flags points too far from their own centroid.
"""

import numpy as np

from msdkmeans import msd_kmeans_detect, stage_breakdown, summarize
from msdkmeans.ingest import generate, shipped_spec

spec = shipped_spec("default")
data = generate(spec)
print(f"{data.n} points, {int(data.labels.sum())} planted outliers")

r = msd_kmeans_detect(data)
print(summarize(r))
for (cls, stage), count in sorted(stage_breakdown(r).items()):
    print(f"  {cls.name.lower()} @ {stage.name.lower()}: {count}")

print("stage-1 removed:", r.details["stage1_removed"])
print("stage-2 centroids:", np.round(r.details["centroids"], 2).tolist())
print("stage-2 thresholds:", np.round(r.details["thresholds"], 2).tolist())
