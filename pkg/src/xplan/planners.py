"""The four planning methods, plan application, and constraint culling.

Every planner takes training-time artifacts plus one test row and returns
a Plan: a set of per-feature deltas (numeric shift, discrete set-to, or a
range sample resolved to one seeded draw). An empty plan means "no change
recommended".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from xplan.data_model import DISCRETE, INDEPENDENT, NUMERIC, DataError
from xplan.decision_tree import branch_path, locate_leaf, siblings_at_level
from xplan.discretize import Bin
from xplan.num_core import DistanceConfig, distance
from xplan.where_cluster import centroid_of, nearest_cluster

SHIFT = "shift"    # numeric: add delta, clamp to training bounds
SET = "set"        # discrete: replace the symbol
SAMPLE = "sample"  # numeric: value drawn from (lo, hi] at plan time

METHODS = ("cd", "cdfs", "bic", "xtree")


@dataclass
class Delta:
    feature: str
    kind: str
    value: object = None      # shift amount, symbol, or the drawn sample
    lo: float | None = None   # sample range, for provenance
    hi: float | None = None

    def to_json(self):
        out = {"feature": self.feature, "kind": self.kind, "value": self.value}
        if self.kind == SAMPLE:
            out["lo"] = self.lo
            out["hi"] = self.hi
        return out


@dataclass
class Plan:
    deltas: list
    method: str = ""
    provenance: dict = field(default_factory=dict)

    @property
    def empty(self):
        return not self.deltas

    def features(self):
        return [d.feature for d in self.deltas]

    def to_json(self):
        return {
            "method": self.method,
            "deltas": [d.to_json() for d in self.deltas],
            "provenance": self.provenance,
        }


@dataclass
class PlannerConfig:
    alpha: int | None = None  # cluster/tree split size; None -> ceil(sqrt(N))
    beta: float = 0.33        # fraction of most-informative features kept
    gamma: float = 0.5        # sibling qualifies when score < gamma * current
    seed: int = 1


def _centroid_deltas(src, dst, ds):
    """Per-feature deltas moving a row from src toward dst."""
    deltas = []
    for f in ds.features:
        if f.role != INDEPENDENT:
            continue
        i = ds.index(f.name)
        a, b = src[i], dst[i]
        if a is None or b is None:
            continue
        if f.kind == NUMERIC:
            if a != b:
                deltas.append(Delta(f.name, SHIFT, b - a))
        elif a != b:
            deltas.append(Delta(f.name, SET, b))
    return deltas


def plan_cd(clusters, z, dcfg, ds):
    """Method1: delta between the nearest centroid and the closest better one."""
    if len(clusters) < 2 or len({c.score for c in clusters}) < 2:
        return Plan([], "cd")
    here = nearest_cluster(z, clusters, dcfg)
    better = [c for c in clusters if c.score < here.score]
    if not better:
        return Plan([], "cd", {"source": here.index})
    target = min(better, key=lambda c: (distance(here.centroid, c.centroid, dcfg), c.index))
    deltas = _centroid_deltas(here.centroid, target.centroid, ds)
    return Plan(deltas, "cd", {"source": here.index, "target": target.index})


def plan_cdfs(clusters, ranking, z, dcfg, ds):
    """Method2: Method1 restricted to the most informative features."""
    base = plan_cd(clusters, z, dcfg, ds)
    keep = set(ranking.selected)
    return Plan([d for d in base.deltas if d.feature in keep], "cdfs", base.provenance)


def plan_bic(clusters, ranking, z, dcfg, ds):
    """Method3: ride the nearest inter-centroid gradient up to its best
    end, then copy that cluster's best-in-cluster example."""
    gradients = []
    for c in clusters:
        others = [o for o in clusters if o is not c]
        if not others:
            continue
        nn = min(others, key=lambda o: (distance(c.centroid, o.centroid, dcfg), o.index))
        if c.score == nn.score:
            continue
        bottom, top = (c, nn) if c.score > nn.score else (nn, c)
        gradients.append((bottom, top))
    if not gradients:
        return Plan([], "bic")
    bottom, top = min(
        gradients,
        key=lambda g: (
            min(distance(z, g[0].centroid, dcfg), distance(z, g[1].centroid, dcfg)),
            g[0].index,
        ),
    )
    keep = set(ranking.selected)
    deltas = [d for d in _centroid_deltas(z, top.best, ds) if d.feature in keep]
    return Plan(deltas, "bic", {"bottom": bottom.index, "top": top.index})


def plan_xtree(tree, z, cfg, rng, ds):
    """Method4: climb from the row's leaf until a much-better sibling leaf
    exists, then emit the branch-condition set difference as the plan."""
    current = locate_leaf(tree, z, ds)
    lvl = 0
    desired = None
    while True:
        siblings = siblings_at_level(tree, current, lvl)
        if siblings is None:
            return Plan([], "xtree", {"exhausted": True})
        better = [s for s in siblings if s.score < cfg.gamma * current.score]
        if better:
            dcfg = DistanceConfig.from_dataset(ds)
            cur_cent = centroid_of([ds.rows[i] for i in current.members], ds.features)
            cents = {
                id(s): centroid_of([ds.rows[i] for i in s.members], ds.features)
                for s in better
            }
            desired = min(
                better, key=lambda s: distance(cur_cent, cents[id(s)], dcfg)
            )  # min() keeps the leftmost leaf on ties
            break
        lvl += 1

    cur_path = branch_path(current)
    want_path = branch_path(desired)
    cur_set = {(f, _cond_key(c)) for f, c in cur_path}
    picked = {}
    for fname, cond in want_path:
        if (fname, _cond_key(cond)) in cur_set:
            continue
        picked[fname] = cond  # deepest condition per feature wins
    deltas = [_cond_delta(fname, cond, z, ds, rng) for fname, cond in picked.items()]
    return Plan(
        [d for d in deltas if d is not None],
        "xtree",
        {"lvl": lvl, "current_score": current.score, "desired_score": desired.score},
    )


def _cond_key(cond):
    return (cond.lo, cond.hi) if isinstance(cond, Bin) else cond


def _cond_delta(fname, cond, z, ds, rng):
    if not isinstance(cond, Bin):
        return Delta(fname, SET, cond)
    lo, hi = cond.lo, cond.hi
    blo, bhi = ds.bounds.get(fname, (0.0, 0.0))
    if lo == -math.inf:
        lo = min(blo, hi)
    if hi == math.inf:
        hi = max(bhi, lo)
    value = lo if hi <= lo else rng.uniform(lo, hi)
    return Delta(fname, SAMPLE, value, lo=lo, hi=hi)


def apply_plan(z, plan, ds):
    """New row with the deltas applied; numeric shifts clamp to the
    training bounds, the dependent cell is never touched."""
    row = list(z)
    for d in plan.deltas:
        i = ds.index(d.feature)
        if ds.features[i].role != INDEPENDENT:
            raise DataError(f"plan touches non-independent feature {d.feature!r}")
        if d.kind == SHIFT:
            if row[i] is None:
                continue
            lo, hi = ds.bounds.get(d.feature, (-math.inf, math.inf))
            row[i] = min(hi, max(lo, row[i] + d.value))
        elif d.kind == SET:
            row[i] = d.value
        elif d.kind == SAMPLE:
            row[i] = d.value
        else:
            raise DataError(f"bad delta kind {d.kind!r}")
    return row


# --- feature-model constraints ---------------------------------------------

_TRUTHY = {"1", "on", "true", "yes", "y"}


def _is_on(cell):
    if cell is None:
        return False
    if isinstance(cell, bool):
        return cell
    return str(cell).strip().lower() in _TRUTHY


@dataclass
class FeatureModel:
    """Boolean validity rules over discrete configuration options."""

    requires: list = field(default_factory=list)     # (a, b): a on -> b on
    excludes: list = field(default_factory=list)     # (a, b): not both on
    exactly_one: list = field(default_factory=list)  # groups
    at_least_one: list = field(default_factory=list)

    def referenced(self):
        names = set()
        for a, b in self.requires + self.excludes:
            names.update((a, b))
        for group in self.exactly_one + self.at_least_one:
            names.update(group)
        return names


def load_feature_model(path, ds=None):
    """Line-oriented rules: ``requires A B``, ``excludes A B``,
    ``xor A B C``, ``or A B C``. Blank lines and ``#`` comments ignored."""
    fm = FeatureModel()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            op, args = parts[0].lower(), parts[1:]
            if op == "requires" and len(args) == 2:
                fm.requires.append(tuple(args))
            elif op == "excludes" and len(args) == 2:
                fm.excludes.append(tuple(args))
            elif op == "xor" and len(args) >= 2:
                fm.exactly_one.append(args)
            elif op == "or" and len(args) >= 2:
                fm.at_least_one.append(args)
            else:
                raise DataError(f"{path}:{lineno}: bad rule {line.strip()!r}")
    if ds is not None:
        known = {f.name for f in ds.features}
        unknown = fm.referenced() - known
        if unknown:
            raise DataError(f"{path}: rules reference unknown features {sorted(unknown)}")
    return fm


def check_constraints(row, fm, ds):
    """All violated rules, by name; an empty list means the row is valid."""
    if fm is None:
        return []
    cell = lambda name: row[ds.index(name)]
    violations = []
    for a, b in fm.requires:
        if _is_on(cell(a)) and not _is_on(cell(b)):
            violations.append(f"requires {a} {b}")
    for a, b in fm.excludes:
        if _is_on(cell(a)) and _is_on(cell(b)):
            violations.append(f"excludes {a} {b}")
    for group in fm.exactly_one:
        if sum(_is_on(cell(g)) for g in group) != 1:
            violations.append("xor " + " ".join(group))
    for group in fm.at_least_one:
        if not any(_is_on(cell(g)) for g in group):
            violations.append("or " + " ".join(group))
    return violations
