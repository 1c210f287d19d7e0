"""Tabular datasets: typed features, rows, bounds, loading and splitting.

Two table shapes are supported: defect-metric tables with a boolean class
derived from a raw defect count, and configuration tables with a numeric
runtime class. Either way the dependent value is minimized.

Cells are floats (numeric), strings (discrete), bools (boolean class) or
None (missing, written as ``?`` in CSV).
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field

NUMERIC = "numeric"
DISCRETE = "discrete"
INDEPENDENT = "independent"
DEPENDENT = "dependent"
META = "meta"  # identifier columns (name, version): never used in distances

MINIMIZE_RATE = "minimize-class-rate"    # boolean class, minimize fraction true
MINIMIZE_VALUE = "minimize-class-value"  # numeric class, minimize its value

MISSING = "?"


class DataError(ValueError):
    """Malformed dataset, schema, or split request."""


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str = NUMERIC
    role: str = INDEPENDENT
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in (NUMERIC, DISCRETE):
            raise DataError(f"bad kind {self.kind!r} for feature {self.name!r}")
        if self.role not in (INDEPENDENT, DEPENDENT, META):
            raise DataError(f"bad role {self.role!r} for feature {self.name!r}")
        if self.weight < 0:
            raise DataError(f"negative weight for feature {self.name!r}")


@dataclass
class SplitSpec:
    mode: str = "random-half"  # or "by-version"
    train_versions: list = field(default_factory=list)
    test_versions: list = field(default_factory=list)
    seed: int = 1


class Dataset:
    """Immutable-by-convention table; bounds are learned from its own rows."""

    def __init__(self, features, rows, objective):
        self.features = list(features)
        self.rows = [list(r) for r in rows]
        self.objective = objective
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DataError("duplicate feature names")
        deps = [i for i, f in enumerate(self.features) if f.role == DEPENDENT]
        if len(deps) != 1:
            raise DataError(f"need exactly one dependent feature, got {len(deps)}")
        self.dep_index = deps[0]
        if objective not in (MINIMIZE_RATE, MINIMIZE_VALUE):
            raise DataError(f"bad objective {objective!r}")
        self._index = {f.name: i for i, f in enumerate(self.features)}
        arity = len(self.features)
        for r in self.rows:
            if len(r) != arity:
                raise DataError(f"row arity {len(r)} != {arity}")
            if r[self.dep_index] is None:
                raise DataError("dependent cell may not be missing")
        self.bounds = self._compute_bounds()

    def _compute_bounds(self):
        bounds = {}
        for i, f in enumerate(self.features):
            if f.kind != NUMERIC or f.role != INDEPENDENT:
                continue
            vals = [r[i] for r in self.rows if r[i] is not None]
            if vals:
                bounds[f.name] = (min(vals), max(vals))
        return bounds

    def index(self, name):
        return self._index[name]

    def column(self, name):
        i = self._index[name]
        return [r[i] for r in self.rows]

    @property
    def independent(self):
        return [f for f in self.features if f.role == INDEPENDENT]

    @property
    def dependent(self):
        return self.features[self.dep_index]

    def dep_values(self):
        return [r[self.dep_index] for r in self.rows]

    def replace_rows(self, rows):
        return Dataset(self.features, rows, self.objective)

    def __len__(self):
        return len(self.rows)


def dependent_score(dep_values, objective):
    """Quality of a group of rows: fraction defective, or median runtime."""
    if not dep_values:
        raise DataError("empty group has no score")
    if objective == MINIMIZE_RATE:
        return sum(1 for v in dep_values if v) / len(dep_values)
    vals = sorted(dep_values)
    n = len(vals)
    mid = n // 2
    return vals[mid] if n % 2 else (vals[mid - 1] + vals[mid]) / 2


def load_schema(path):
    """Read the sidecar config: feature list plus the class mode.

    Format: ``{"class_mode": "boolean-from-count" | "numeric",
    "features": [{"name":..., "kind":..., "role":..., "weight":...}, ...]}``
    """
    with open(path) as fh:
        raw = json.load(fh)
    feats = [
        FeatureSpec(
            name=f["name"],
            kind=f.get("kind", NUMERIC),
            role=f.get("role", INDEPENDENT),
            weight=float(f.get("weight", 1.0)),
        )
        for f in raw["features"]
    ]
    return feats, raw.get("class_mode", "boolean-from-count")


def _parse_cell(text, feat):
    text = text.strip()
    if text == MISSING:
        return None
    if feat.kind == NUMERIC:
        try:
            return float(text)
        except ValueError:
            raise DataError(f"non-numeric cell {text!r} in numeric column {feat.name!r}")
    return text


def load_csv(path, schema, class_mode="boolean-from-count"):
    """Load a CSV whose header matches the schema names, in order."""
    features = list(schema)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        if [h.strip() for h in header] != [f.name for f in features]:
            raise DataError(f"{path}: header does not match schema names")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(features):
                raise DataError(f"{path}:{lineno}: expected {len(features)} cells, got {len(rec)}")
            rows.append([_parse_cell(c, f) for c, f in zip(rec, features)])

    dep = next(f for f in features if f.role == DEPENDENT)
    di = features.index(dep)
    if class_mode == "boolean-from-count":
        for r in rows:
            if r[di] is None:
                raise DataError("dependent cell may not be missing")
            r[di] = float(r[di]) > 0
        objective = MINIMIZE_RATE
    elif class_mode == "numeric":
        objective = MINIMIZE_VALUE
    else:
        raise DataError(f"bad class mode {class_mode!r}")
    return Dataset(features, rows, objective)


def _format_cell(cell):
    if cell is None:
        return MISSING
    if isinstance(cell, bool):
        return "1" if cell else "0"
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def save_csv(ds, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f.name for f in ds.features])
        for r in ds.rows:
            writer.writerow([_format_cell(c) for c in r])


def split(ds, spec):
    """Partition into disjoint train/test datasets; bounds are recomputed."""
    if spec.mode == "random-half":
        order = list(range(len(ds.rows)))
        random.Random(spec.seed).shuffle(order)
        cut = (len(order) + 1) // 2
        train_rows = [ds.rows[i] for i in order[:cut]]
        test_rows = [ds.rows[i] for i in order[cut:]]
    elif spec.mode == "by-version":
        overlap = set(spec.train_versions) & set(spec.test_versions)
        if overlap:
            raise DataError(f"versions in both train and test: {sorted(overlap)}")
        try:
            vi = ds.index("version")
        except KeyError:
            raise DataError("by-version split needs a 'version' column")
        train_rows = [r for r in ds.rows if r[vi] in set(spec.train_versions)]
        test_rows = [r for r in ds.rows if r[vi] in set(spec.test_versions)]
    else:
        raise DataError(f"bad split mode {spec.mode!r}")
    return ds.replace_rows(train_rows), ds.replace_rows(test_rows)


def normalize(ds, feature, value):
    """Map a numeric value into [0,1] by the dataset's bounds, clamped.

    Degenerate bounds (constant column) normalize to 0 so the column
    contributes nothing to any distance.
    """
    lo, hi = ds.bounds[feature]
    return normalize_bounds(value, lo, hi)


def normalize_bounds(value, lo, hi):
    if hi <= lo:
        return 0.0
    x = (value - lo) / (hi - lo)
    return min(1.0, max(0.0, x))
