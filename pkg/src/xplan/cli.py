"""Command-line pipeline: plan single rows, evaluate planners, render
reports from saved results.

Exit codes: 0 ok, 1 usage or data error, 2 predictor gate failure.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import click

from xplan.data_model import DataError, SplitSpec, load_csv, load_schema, split
from xplan.evaluation import (
    ALL_METHODS,
    GateError,
    change_frequency,
    method_samples,
    read_jsonl,
    run_repeats,
    write_csv_summary,
    write_jsonl,
)
from xplan.planners import PlannerConfig, load_feature_model
from xplan.predictor import (
    CLASSIFY,
    ForestParams,
    gate,
    score_classifier,
    score_regressor,
    smote,
    train_forest,
    tune_de,
)
from xplan.evaluation import _build_planner  # shared planner dispatch
from xplan.scott_knott import render_report, scott_knott_rank

EXIT_DATA = 1
EXIT_GATE = 2


def _load_config_file(ctx, param, value):
    """--config supplies defaults; explicit flags still win."""
    if value is None:
        return None
    with open(value) as fh:
        defaults = json.load(fh)
    ctx.default_map = {**defaults, **(ctx.default_map or {})}
    return value


_shared = [
    click.option("--config", type=click.Path(exists=True), callback=_load_config_file,
                 is_eager=True, expose_value=False,
                 help="JSON file with the same keys as the flags; flags take precedence."),
    click.option("--data", required=True, type=click.Path(exists=True), help="CSV data file."),
    click.option("--schema", required=True, type=click.Path(exists=True), help="Schema sidecar JSON."),
    click.option("--constraints", type=click.Path(exists=True), default=None,
                 help="Feature-model rule file used to cull invalid plans."),
    click.option("--alpha", type=int, default=None,
                 help="Minimum split size for clustering and trees [default: ceil(sqrt(N))]."),
    click.option("--beta", type=float, default=0.33, show_default=True,
                 help="Fraction of most-informative features kept by cdfs/bic."),
    click.option("--gamma", type=float, default=0.5, show_default=True,
                 help="xtree sibling threshold: score < gamma * current score."),
    click.option("--seed", type=int, default=1, show_default=True),
    click.option("--split-mode", type=click.Choice(["random-half", "by-version"]),
                 default="random-half", show_default=True),
    click.option("--train-versions", default="", help="Comma-separated versions (by-version mode)."),
    click.option("--test-versions", default="", help="Comma-separated versions (by-version mode)."),
    click.option("--trees", type=int, default=100, show_default=True, help="Forest size."),
    click.option("--tune/--no-tune", default=False, show_default=True,
                 help="Tune forest hyperparameters with differential evolution."),
    click.option("--smote/--no-smote", "use_smote", default=False, show_default=True,
                 help="SMOTE-balance the training data (classification only)."),
]


def shared_options(fn):
    for opt in reversed(_shared):
        fn = opt(fn)
    return fn


def _prepare(data, schema, constraints, seed, split_mode, train_versions,
             test_versions, trees, tune, use_smote):
    feats, class_mode = load_schema(schema)
    ds = load_csv(data, feats, class_mode)
    spec = SplitSpec(
        mode=split_mode,
        train_versions=[v for v in train_versions.split(",") if v],
        test_versions=[v for v in test_versions.split(",") if v],
        seed=seed,
    )
    train, test = split(ds, spec)
    fm = load_feature_model(constraints, ds) if constraints else None
    if use_smote:
        train = smote(train, rng=random.Random(seed))
    if tune:
        params = tune_de(train, seed=seed)
        params = ForestParams(params.n_trees, params.max_depth, params.min_leaf,
                              params.features_per_split, seed)
    else:
        params = ForestParams(n_trees=trees, seed=seed)
    return train, test, fm, params


def _gate_or_die(train, test, params):
    model = train_forest(train, params)
    score = score_classifier(model, test) if model.mode == CLASSIFY else score_regressor(model, test)
    if not gate(score):
        if hasattr(score, "pd"):
            click.echo(f"predictor gate failed: pd={score.pd:.1f} pf={score.pf:.1f} "
                       "(need pd > 60 and pf < 40)", err=True)
        else:
            click.echo(f"predictor gate failed: s={score.s:.3f} (need s > 0.9)", err=True)
        sys.exit(EXIT_GATE)
    return model


@click.group()
def main():
    """Learn and evaluate feature-change plans for tabular project data."""


@main.command("plan")
@shared_options
@click.option("--method", default="xtree", show_default=True,
              type=click.Choice(list(ALL_METHODS[1:]) + ["all"]),
              help="Planning method, or 'all' for every method.")
@click.option("--rows", default="all", show_default=True,
              help="Comma-separated test row indices, or 'all'.")
def cmd_plan(method, rows, data, schema, constraints, alpha, beta, gamma, seed,
             split_mode, train_versions, test_versions, trees, tune, use_smote):
    """Print JSON plans for the selected test rows."""
    try:
        train, test, fm, params = _prepare(data, schema, constraints, seed, split_mode,
                                           train_versions, test_versions, trees, tune, use_smote)
    except (DataError, OSError) as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_DATA)
    _gate_or_die(train, test, params)
    cfg = PlannerConfig(alpha=alpha, beta=beta, gamma=gamma, seed=seed)
    methods = list(ALL_METHODS[1:]) if method == "all" else [method]
    if rows == "all":
        selected = range(len(test.rows))
    else:
        selected = [int(r) for r in rows.split(",") if r]
    for m in methods:
        planner = _build_planner(m, train, cfg, random.Random(f"{seed}:artifacts"))
        for i in selected:
            plan = planner(test.rows[i], random.Random(f"{seed}:{i}"))
            click.echo(json.dumps({"row": i, **plan.to_json()}, sort_keys=True))


@main.command("eval")
@shared_options
@click.option("--methods", default="cd,cdfs,bic,xtree", show_default=True,
              help="Comma-separated methods (identity, cd, cdfs, bic, xtree).")
@click.option("--repeats", type=int, default=40, show_default=True)
@click.option("--out", type=click.Path(), default="results", show_default=True,
              help="Output directory for JSONL and CSV results.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]),
              default="text", show_default=True)
def cmd_eval(methods, repeats, out, fmt, data, schema, constraints, alpha, beta, gamma,
             seed, split_mode, train_versions, test_versions, trees, tune, use_smote):
    """Run repeated experiments and print the ranked report."""
    method_list = [m for m in methods.split(",") if m]
    bad = [m for m in method_list if m not in ALL_METHODS]
    if bad or not method_list or repeats < 1:
        click.echo(f"bad methods or repeats: {bad or methods!r}", err=True)
        sys.exit(EXIT_DATA)
    try:
        train, test, fm, params = _prepare(data, schema, constraints, seed, split_mode,
                                           train_versions, test_versions, trees, tune, use_smote)
    except (DataError, OSError) as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_DATA)
    cfg = PlannerConfig(alpha=alpha, beta=beta, gamma=gamma, seed=seed)
    try:
        results = run_repeats(train, test, method_list, cfg, n=repeats,
                              base_seed=seed, fm=fm, forest_params=params)
    except GateError as exc:
        score = exc.score
        if hasattr(score, "pd"):
            click.echo(f"predictor gate failed: pd={score.pd:.1f} pf={score.pf:.1f}", err=True)
        else:
            click.echo(f"predictor gate failed: s={score.s:.3f}", err=True)
        sys.exit(EXIT_GATE)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_jsonl(results, outdir / "results.jsonl")
    write_csv_summary(results, outdir / "results.csv")
    ranked = scott_knott_rank(method_samples(results), random.Random(seed))
    if fmt == "json":
        click.echo(json.dumps(ranked.to_json(), sort_keys=True))
    elif fmt == "csv":
        click.echo("rank,method,median,iqr")
        for e in ranked.entries:
            click.echo(f"{e.rank},{e.method},{e.median},{e.iqr}")
    else:
        click.echo(render_report(ranked))


@main.command("report")
@click.argument("results_path", type=click.Path())
@click.option("--seed", type=int, default=1, show_default=True)
def cmd_report(results_path, seed):
    """Rank table, change frequencies and trust summary from saved results."""
    try:
        results = read_jsonl(results_path)
    except (OSError, json.JSONDecodeError, TypeError, KeyError) as exc:
        click.echo(f"cannot read results: {exc}", err=True)
        sys.exit(EXIT_DATA)
    if not results:
        click.echo("no results", err=True)
        sys.exit(EXIT_DATA)
    ranked = scott_knott_rank(method_samples(results), random.Random(seed))
    click.echo(render_report(ranked))
    features = sorted({f for rs in results.values() for r in rs for f in r.changed_features})
    click.echo("\nChange frequency (percent of repeats):")
    header = "method".ljust(10) + "".join(f"{f:>12}" for f in features) + f"{'mean-frac':>12}"
    click.echo(header)
    for m, rs in results.items():
        if features:
            freq = change_frequency(rs, features)
            cells = "".join(f"{freq.per_feature[f]:>11.0f}%" for f in features)
            click.echo(f"{m:<10}{cells}{freq.mean_fraction:>12.2f}")
        else:
            click.echo(f"{m:<10}{'(no features changed)':>24}")
    click.echo("\nTrust (mean nearest-training distance):")
    for m, rs in results.items():
        before = sum(r.trust_before for r in rs) / len(rs)
        after = sum(r.trust_after for r in rs) / len(rs)
        click.echo(f"{m:<10} before={before:.3f} after={after:.3f}")


if __name__ == "__main__":
    main()
