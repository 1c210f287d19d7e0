"""Experiment harness: train, gate, plan, re-predict, report ratios.

One experiment trains a forest and a planner on the train split, checks
the forest against the test split (aborting when it is not good enough to
judge plans), plans every test row, and reports R = after/before where
"before" is the predicted defect count (or predicted runtime sum) on the
untouched test rows and "after" the same statistic on the changed rows.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass

import numpy as np

from xplan.discretize import rank_features
from xplan.decision_tree import build_tree
from xplan.num_core import DistanceConfig, distance_matrix
from xplan.planners import (
    Plan,
    apply_plan,
    check_constraints,
    plan_bic,
    plan_cd,
    plan_cdfs,
    plan_xtree,
)
from xplan.predictor import CLASSIFY, ForestParams, gate, score_classifier, score_regressor, train_forest
from xplan.scott_knott import MethodSamples
from xplan.where_cluster import ClusterConfig, cluster

ALL_METHODS = ("identity", "cd", "cdfs", "bic", "xtree")


class GateError(RuntimeError):
    """Predictor too weak to judge plans; carries the offending score."""

    def __init__(self, score):
        self.score = score
        super().__init__(f"predictor gate failed: {score}")


@dataclass
class ExperimentResult:
    method: str
    seed: int
    ratio: float               # nan when before == 0
    before: float
    after: float
    plans_emitted: int
    empty_plans: int
    changed_features: list     # features changed at least once this repeat
    trust_before: float        # mean nearest-training distance, original test
    trust_after: float         # same, over the changed rows
    ratio_defined: bool = True

    def to_json(self):
        return {
            "method": self.method,
            "seed": self.seed,
            "ratio": None if math.isnan(self.ratio) else self.ratio,
            "before": self.before,
            "after": self.after,
            "plans_emitted": self.plans_emitted,
            "empty_plans": self.empty_plans,
            "changed_features": self.changed_features,
            "trust_before": self.trust_before,
            "trust_after": self.trust_after,
            "ratio_defined": self.ratio_defined,
        }

    @classmethod
    def from_json(cls, raw):
        raw = dict(raw)
        if raw.get("ratio") is None:
            raw["ratio"] = math.nan
        return cls(**raw)


@dataclass
class TrustReport:
    before_mean: float
    after_mean: float
    per_row: list  # (before, after) nearest-training distances


@dataclass
class ChangeFrequencyReport:
    method: str
    per_feature: dict   # feature -> percent of repeats it was changed in
    mean_fraction: float


def _aggregate(model, rows):
    preds = model.predict(rows)
    if model.mode == CLASSIFY:
        return float(sum(1 for p in preds if p))
    return float(sum(preds))


def _build_planner(method, train, cfg, rng):
    """Train-side planner artifacts, then a per-row plan function."""
    dcfg = DistanceConfig.from_dataset(train)
    if method == "identity":
        return lambda z, row_rng: Plan([], "identity")
    if method == "xtree":
        tree = build_tree(train, cfg.alpha)
        return lambda z, row_rng: plan_xtree(tree, z, cfg, row_rng, train)
    clusters = cluster(train, ClusterConfig(cfg.alpha), rng)
    if method == "cd":
        return lambda z, row_rng: plan_cd(clusters, z, dcfg, train)
    ids = [None] * len(train.rows)
    for c in clusters:
        for i in c.members:
            ids[i] = c.index
    ranking = rank_features(train, ids, cfg.beta)
    if method == "cdfs":
        return lambda z, row_rng: plan_cdfs(clusters, ranking, z, dcfg, train)
    if method == "bic":
        return lambda z, row_rng: plan_bic(clusters, ranking, z, dcfg, train)
    raise ValueError(f"unknown method {method!r}")


def trust_report(train, test_rows, changed_rows, dcfg=None):
    """Mean nearest-training-row distance before and after the changes."""
    dcfg = dcfg or DistanceConfig.from_dataset(train)
    before = distance_matrix(test_rows, train.rows, dcfg).min(axis=1)
    after = distance_matrix(changed_rows, train.rows, dcfg).min(axis=1)
    return TrustReport(
        float(np.mean(before)),
        float(np.mean(after)),
        list(zip(before.tolist(), after.tolist())),
    )


def run_experiment(train, test, method, cfg, seed, fm=None, forest_params=None):
    params = forest_params or ForestParams()
    params = ForestParams(
        n_trees=params.n_trees,
        max_depth=params.max_depth,
        min_leaf=params.min_leaf,
        features_per_split=params.features_per_split,
        seed=seed,
    )
    model = train_forest(train, params)
    score = (
        score_classifier(model, test)
        if model.mode == CLASSIFY
        else score_regressor(model, test)
    )
    if not gate(score):
        raise GateError(score)

    before = _aggregate(model, test.rows)
    planner = _build_planner(method, train, cfg, random.Random(f"{seed}:artifacts"))
    changed = []
    emitted = empty = 0
    touched = set()
    for i, z in enumerate(test.rows):
        row_rng = random.Random(f"{seed}:{i}")
        plan = planner(z, row_rng)
        if not plan.empty:
            candidate = apply_plan(z, plan, train)
            if fm is not None and check_constraints(candidate, fm, train):
                plan, candidate = Plan([], plan.method), list(z)  # culled
            else:
                emitted += 1
                touched.update(
                    d.feature for d in plan.deltas if candidate[train.index(d.feature)] != z[train.index(d.feature)]
                )
        else:
            candidate = list(z)
        if plan.empty:
            empty += 1
        changed.append(candidate)

    after = _aggregate(model, changed)
    ratio = after / before if before > 0 else math.nan
    trust = trust_report(train, test.rows, changed)
    return ExperimentResult(
        method=method,
        seed=seed,
        ratio=ratio,
        before=before,
        after=after,
        plans_emitted=emitted,
        empty_plans=empty,
        changed_features=sorted(touched),
        trust_before=trust.before_mean,
        trust_after=trust.after_mean,
        ratio_defined=before > 0,
    )


def run_repeats(train, test, methods, cfg, n=40, base_seed=1, fm=None, forest_params=None):
    """n seeded repeats per method; every method sees the same seeds."""
    if n < 1:
        raise ValueError("need at least one repeat")
    results = {m: [] for m in methods}
    for i in range(n):
        seed = base_seed + i
        for m in methods:
            results[m].append(
                run_experiment(train, test, m, cfg, seed, fm=fm, forest_params=forest_params)
            )
    return results


def change_frequency(results, features):
    """Per-feature percent of repeats with a change, plus the mean changed
    fraction per repeat."""
    if not results:
        raise ValueError("no results")
    per_feature = {
        f: 100 * sum(1 for r in results if f in r.changed_features) / len(results)
        for f in features
    }
    mean_fraction = sum(len(r.changed_features) / len(features) for r in results) / len(results)
    return ChangeFrequencyReport(results[0].method, per_feature, mean_fraction)


def method_samples(results):
    """Scott-Knott input from per-method result lists; undefined ratios
    are dropped."""
    return [
        MethodSamples(m, [r.ratio for r in rs if r.ratio_defined])
        for m, rs in results.items()
    ]


def write_jsonl(results, path):
    with open(path, "w") as fh:
        for rs in results.values():
            for r in rs:
                fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")


def read_jsonl(path):
    results = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            r = ExperimentResult.from_json(json.loads(line))
            results.setdefault(r.method, []).append(r)
    return results


def write_csv_summary(results, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "seed", "ratio", "before", "after", "plans_emitted",
             "empty_plans", "trust_before", "trust_after"]
        )
        for rs in results.values():
            for r in rs:
                writer.writerow(
                    [r.method, r.seed, "" if math.isnan(r.ratio) else r.ratio,
                     r.before, r.after, r.plans_emitted, r.empty_plans,
                     r.trust_before, r.trust_after]
                )
