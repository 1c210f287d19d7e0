"""WHERE: recursive top-down bi-clustering via the FastMap heuristic.

Pick two distant pivot rows in O(2N) comparisons, project everything onto
the pivot axis, split at the median projection, recurse on halves bigger
than alpha. Leaves are summarized as centroid + best-in-cluster + score.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from xplan.data_model import DISCRETE, NUMERIC, dependent_score
from xplan.num_core import DistanceConfig, distance


@dataclass
class PivotPair:
    x: list   # pivot rows, not copies
    y: list
    c: float  # distance(x, y)


@dataclass
class ClusterConfig:
    alpha: int | None = None  # None -> ceil(sqrt(N)), floor 2

    def resolve_alpha(self, n):
        a = self.alpha if self.alpha is not None else math.ceil(math.sqrt(n))
        return max(2, a)


@dataclass
class ClusterSummary:
    index: int
    members: list      # row indices into the training dataset
    centroid: list     # synthetic row: mean numerics, mode discretes
    best: list         # member row with the best dependent value
    score: float


def fastmap_pivots(rows, cfg, rng):
    """Random row W -> X farthest from W -> Y farthest from X."""
    if len(rows) < 2:
        raise ValueError("need at least 2 rows to pick pivots")
    w = rows[rng.randrange(len(rows))]
    x = max(rows, key=lambda r: distance(w, r, cfg))
    y = max(rows, key=lambda r: distance(x, r, cfg))
    return PivotPair(x, y, distance(x, y, cfg))


def project(z, pivots, cfg):
    """Position of z on the X->Y axis by the cosine rule."""
    if pivots.c <= 0:
        raise ValueError("degenerate pivots (zero separation)")
    a = distance(z, pivots.x, cfg)
    b = distance(z, pivots.y, cfg)
    c = pivots.c
    return (a * a + c * c - b * b) / (2 * c)


def centroid_of(rows, features):
    """Feature-wise mean/mode row; mode ties break by sorted symbol order."""
    cent = []
    for i, f in enumerate(features):
        vals = [r[i] for r in rows if r[i] is not None]
        if not vals:
            cent.append(None)
        elif f.kind == NUMERIC and not isinstance(vals[0], bool):
            cent.append(sum(vals) / len(vals))
        else:
            counts = Counter(vals)
            top = max(counts.values())
            cent.append(min(v for v, c in counts.items() if c == top))
    return cent


def _summarize(index, member_ids, ds, rng):
    rows = [ds.rows[i] for i in member_ids]
    dep = [r[ds.dep_index] for r in rows]
    score = dependent_score(dep, ds.objective)
    best_val = min(dep)
    candidates = [i for i, v in zip(member_ids, dep) if v == best_val]
    best = ds.rows[candidates[rng.randrange(len(candidates))]] if len(candidates) > 1 else ds.rows[candidates[0]]
    return ClusterSummary(index, list(member_ids), centroid_of(rows, ds.features), best, score)


def cluster(train, cfg, rng):
    """Recursively bisect the training rows; returns leaf summaries."""
    dcfg = DistanceConfig.from_dataset(train)
    alpha = cfg.resolve_alpha(len(train.rows))
    leaves = []

    def recurse(ids):
        if len(ids) <= alpha or len(ids) < 2:
            leaves.append(ids)
            return
        rows = [train.rows[i] for i in ids]
        pivots = fastmap_pivots(rows, dcfg, rng)
        if pivots.c <= 0:
            leaves.append(ids)  # zero-diameter cloud, nothing to split
            return
        projected = sorted(
            range(len(ids)), key=lambda k: (project(rows[k], pivots, dcfg), k)
        )
        mid = (len(ids) + 1) // 2
        recurse([ids[k] for k in projected[:mid]])
        recurse([ids[k] for k in projected[mid:]])

    recurse(list(range(len(train.rows))))
    return [_summarize(i, ids, train, rng) for i, ids in enumerate(leaves)]


def nearest_cluster(z, clusters, dcfg):
    """Cluster with the closest centroid; ties go to the lowest index."""
    if not clusters:
        raise ValueError("no clusters")
    return min(clusters, key=lambda c: (distance(z, c.centroid, dcfg), c.index))
