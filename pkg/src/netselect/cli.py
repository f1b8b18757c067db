"""Command-line interface.

Subcommands map onto the library pipeline: ``generate`` simulates one grid
cell's dataset CSV, ``train`` fits an ensemble from a dataset CSV and writes
its report, ``evaluate`` runs the scenario grid, ``uq`` fits the confidence
regression, and ``select`` classifies an edge-list network.  Models are
refit per run from data and seeds, so every output is reproducible from the
command line that produced it.
"""

from __future__ import annotations

import json
import sys

import click

from .ensemble import fit_super_learner
from .harness import ScenarioConfig, build_training_data, run_grid, select_for_network
from .learners import Dataset
from .summaries import read_dataset_csv, write_dataset_csv
from .uq import UQConfig, compute_oob_labels, estimate_confidence, fit_uq, uq_report
from .graphs import read_edge_list
from .summaries import summarize


def _load_config(ctx) -> ScenarioConfig:
    opts = ctx.obj
    base = ScenarioConfig.desk() if opts["scale"] == "desk" else ScenarioConfig.full()
    settings = base.to_dict()
    if opts["config"] is not None:
        with open(opts["config"]) as fh:
            settings.update(json.load(fh))
    if opts["seed"] is not None:
        settings["seed"] = opts["seed"]
    return ScenarioConfig.from_dict(settings)


def _out_path(ctx, default: str) -> str:
    return ctx.obj["out"] if ctx.obj["out"] is not None else default


def _write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {path}")


@click.group()
@click.option("--config", type=click.Path(exists=True), default=None,
              help="JSON file overriding scenario settings.")
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--out", type=str, default=None, help="Output path (or base path).")
@click.option("--scale", type=click.Choice(["desk", "full"]), default="desk",
              show_default=True, help="Baseline sample counts.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker processes for independent grid cells.")
@click.pass_context
def main(ctx, config, seed, out, scale, threads):
    """Model selection between mechanistic network models."""
    ctx.obj = {
        "config": config,
        "seed": seed,
        "out": out,
        "scale": scale,
        "threads": threads,
    }


@main.command()
@click.option("--edges", type=int, required=True, help="Edge count of the cell.")
@click.option("--p2", type=float, required=True, help="p2 value of the cell.")
@click.pass_context
def generate(ctx, edges, p2):
    """Simulate one cell's training data and write the dataset CSV."""
    cfg = _load_config(ctx)
    data = build_training_data(cfg, edges, p2)
    path = _out_path(ctx, "dataset.csv")
    write_dataset_csv(path, data.features, data.labels)
    click.echo(f"wrote {path} ({data.n_samples} samples)")


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True,
              help="Dataset CSV produced by `generate`.")
@click.option("--mode", type=click.Choice(["discrete", "full"]), default="full",
              show_default=True)
@click.pass_context
def train(ctx, data_path, mode):
    """Fit the ensemble on a dataset CSV and write its model report JSON."""
    cfg = _load_config(ctx)
    features, labels = read_dataset_csv(data_path)
    model = fit_super_learner(
        Dataset(features, labels), n_folds=cfg.sl_folds, seed=cfg.seed, mode=mode
    )
    _write_json(_out_path(ctx, "model.json"), model.to_report())


@main.command()
@click.pass_context
def evaluate(ctx):
    """Run the scenario grid and write the results table as CSV and JSON."""
    cfg = _load_config(ctx)
    table = run_grid(cfg, n_jobs=ctx.obj["threads"])
    base = _out_path(ctx, "results")
    table.write_csv(base + ".csv")
    table.write_json(base + ".json")
    click.echo(f"wrote {base}.csv and {base}.json")
    failed = [c for c in table.cells if c.error is not None]
    for c in failed:
        click.echo(f"cell ({c.edge_count}, {c.p2}) failed: {c.error}", err=True)
    if failed:
        sys.exit(1)


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True,
              help="Dataset CSV produced by `generate`.")
@click.option("--splits", type=int, default=10, show_default=True,
              help="Held-out subsets for correctness labeling.")
@click.option("--network", type=click.Path(exists=True), default=None,
              help="Edge-list file to report a confidence for.")
@click.pass_context
def uq(ctx, data_path, splits, network):
    """Fit the selection-confidence regression and write its report JSON."""
    cfg = _load_config(ctx)
    features, labels = read_dataset_csv(data_path)
    data = Dataset(features, labels)
    uq_cfg = UQConfig(n_splits=splits, n_folds=cfg.sl_folds, seed=cfg.seed)
    correctness = compute_oob_labels(data, uq_cfg)
    model = fit_uq(data, correctness, uq_cfg)
    confidence = None
    if network is not None:
        confidence = estimate_confidence(model, summarize(read_edge_list(network)))
    _write_json(_out_path(ctx, "uq.json"), uq_report(correctness, confidence))


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True,
              help="Dataset CSV produced by `generate`.")
@click.option("--network", type=click.Path(exists=True), required=True,
              help="Edge-list file of the network to classify.")
@click.option("--mode", type=click.Choice(["discrete", "full"]), default="full",
              show_default=True)
@click.option("--with-uq", is_flag=True, default=False,
              help="Also fit the confidence regression.")
@click.pass_context
def select(ctx, data_path, network, mode, with_uq):
    """Classify an edge-list network with an ensemble fit on a dataset CSV."""
    cfg = _load_config(ctx)
    features, labels = read_dataset_csv(data_path)
    data = Dataset(features, labels)
    model = fit_super_learner(
        data, n_folds=cfg.sl_folds, seed=cfg.seed, mode=mode
    )
    uq_model = None
    if with_uq:
        uq_cfg = UQConfig(n_folds=cfg.sl_folds, seed=cfg.seed)
        uq_model = fit_uq(data, compute_oob_labels(data, uq_cfg), uq_cfg)
    result = select_for_network(
        network, model, uq_model, expected_nodes=cfg.n_nodes
    )
    _write_json(_out_path(ctx, "selection.json"), result.to_dict())


if __name__ == "__main__":
    main()
