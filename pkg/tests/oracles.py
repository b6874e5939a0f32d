"""Slow, direct reference implementations used as test oracles.

Nothing here imports the package under test.
"""

import itertools
import math


def mean_std(xs):
    n = len(xs)
    mu = math.fsum(xs) / n
    return mu, math.sqrt(math.fsum((x - mu) ** 2 for x in xs) / n)


def msd_outliers(xs, m=1.0):
    mu, sigma = mean_std(xs)
    return {i for i, x in enumerate(xs) if x < mu - m * sigma or x > mu + m * sigma}


def percentile(xs, p):
    v = sorted(xs)
    h = (len(v) - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (h - lo) * (v[hi] - v[lo])


def dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def lof(points, k, eps=1e-12):
    n = len(points)
    d = [[dist(points[i], points[j]) for j in range(n)] for i in range(n)]
    kdist, nbrs = [], []
    for i in range(n):
        others = sorted(d[i][j] for j in range(n) if j != i)
        kd = others[k - 1]
        kdist.append(kd)
        nbrs.append([j for j in range(n) if j != i and d[i][j] <= kd])
    lrd = []
    for i in range(n):
        reach = [max(kdist[o], d[i][o], eps) for o in nbrs[i]]
        lrd.append(len(reach) / math.fsum(reach))
    return [math.fsum(lrd[o] for o in nbrs[i]) / len(nbrs[i]) / lrd[i] for i in range(n)]


def best_partition_1d(xs, k):
    """Exhaustive minimum within-cluster sum of squares over all k-labelings."""
    best = None
    for labels in itertools.product(range(k), repeat=len(xs)):
        if len(set(labels)) != k:
            continue
        sse = 0.0
        for c in range(k):
            members = [x for x, l in zip(xs, labels) if l == c]
            mu = sum(members) / len(members)
            sse += sum((x - mu) ** 2 for x in members)
        if best is None or sse < best[0] - 1e-12:
            best = (sse, labels)
    return best
