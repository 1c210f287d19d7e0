"""Shared numeric primitives: column variability and row distance.

Variability is population standard deviation for numeric columns and
base-2 entropy for discrete ones. Distance is a weighted Euclidean over
the independent features, with numerics normalized to [0,1] by the
training bounds, discrete mismatch counting 1, and missing values
resolved pessimistically (a fully-missing pair contributes 1).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from xplan.data_model import DISCRETE, INDEPENDENT, NUMERIC, normalize_bounds


class Variability(NamedTuple):
    value: float
    kind: str  # "numeric" -> std dev, "discrete" -> entropy


def entropy(counts):
    """Base-2 entropy of a frequency table (iterable of counts)."""
    total = sum(counts)
    e = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            e -= p * math.log2(p)
    return e


def variability(column, kind):
    if not column:
        raise ValueError("variability of an empty column")
    if kind == NUMERIC:
        vals = [v for v in column if v is not None]
        if not vals:
            return Variability(0.0, kind)
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        return Variability(math.sqrt(var), kind)
    if kind == DISCRETE:
        return Variability(entropy(Counter(column).values()), kind)
    raise ValueError(f"bad kind {kind!r}")


@dataclass
class DistanceConfig:
    """Feature metadata needed to compare two rows of one schema."""

    names: list
    indices: list        # column positions of the independent features
    kinds: list
    weights: list
    bounds: dict         # per numeric feature: (min, max) from training
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dataset(cls, ds):
        names, indices, kinds, weights = [], [], [], []
        for i, f in enumerate(ds.features):
            if f.role != INDEPENDENT:
                continue
            names.append(f.name)
            indices.append(i)
            kinds.append(f.kind)
            weights.append(f.weight)
        return cls(names, indices, kinds, weights, dict(ds.bounds))

    def norm(self, name, value):
        lo, hi = self.bounds.get(name, (0.0, 0.0))
        return normalize_bounds(value, lo, hi)


def _feature_delta(a, b, kind, cfg, name):
    if a is None and b is None:
        return 1.0
    if kind == NUMERIC:
        if a is None or b is None:
            v = cfg.norm(name, b if a is None else a)
            return max(v, 1.0 - v)  # worst-case substitution for the gap
        return abs(cfg.norm(name, a) - cfg.norm(name, b))
    if a is None or b is None:
        return 1.0  # a differing symbol always exists in the worst case
    return 0.0 if a == b else 1.0


def distance(x, y, cfg):
    """Weighted Euclidean distance between two rows (independents only)."""
    if len(x) != len(y):
        raise ValueError("rows from different schemas")
    total = 0.0
    for name, i, kind, w in zip(cfg.names, cfg.indices, cfg.kinds, cfg.weights):
        d = _feature_delta(x[i], y[i], kind, cfg, name)
        total += w * d * d
    return math.sqrt(total)


def _encode(rows, cfg):
    """Per-feature numpy columns: normalized floats (NaN=missing) for
    numerics, symbol codes (-1=missing) for discretes."""
    cols = []
    for name, i, kind in zip(cfg.names, cfg.indices, cfg.kinds):
        if kind == NUMERIC:
            col = np.array(
                [math.nan if r[i] is None else cfg.norm(name, r[i]) for r in rows],
                dtype=float,
            )
        else:
            codes = cfg._cache.setdefault(("codes", name), {})
            out = np.empty(len(rows), dtype=np.int64)
            for j, r in enumerate(rows):
                v = r[i]
                if v is None:
                    out[j] = -1
                else:
                    out[j] = codes.setdefault(v, len(codes))
            col = out
        cols.append(col)
    return cols


def distance_matrix(rows_a, rows_b, cfg):
    """All pairwise distances as a (len(a), len(b)) array.

    Vectorized twin of distance(); the two are cross-checked in tests.
    """
    acols = _encode(rows_a, cfg)
    bcols = _encode(rows_b, cfg)
    total = np.zeros((len(rows_a), len(rows_b)))
    for kind, w, ca, cb in zip(cfg.kinds, cfg.weights, acols, bcols):
        if kind == NUMERIC:
            a = ca[:, None]
            b = cb[None, :]
            d = np.abs(a - b)
            only_a = np.isnan(b) & ~np.isnan(a)
            only_b = np.isnan(a) & ~np.isnan(b)
            d = np.where(only_a, np.maximum(a, 1.0 - a), d)
            d = np.where(only_b, np.maximum(b, 1.0 - b), d)
            d = np.where(np.isnan(a) & np.isnan(b), 1.0, d)
        else:
            a = ca[:, None]
            b = cb[None, :]
            d = (a != b).astype(float)
            d = np.where((a < 0) | (b < 0), 1.0, d)
        total += w * d * d
    return np.sqrt(total)
