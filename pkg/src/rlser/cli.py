"""Command-line entry points.

    rlser corpus split  --manifest M --test-fraction 0.2 --seed N [--by-speaker]
    rlser corpus synth  --spec S.yaml --out DIR [--seed N]
    rlser exp run       --config SCENARIO.yaml --out DIR
    rlser exp report    --dir DIR
    rlser serve         [--host H --port P --checkpoint PATH --static DIR]
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import yaml

from rlser.corpus import load_manifest, save_manifest, split_corpus
from rlser.corpus.manifest import Corpus
from rlser.corpus.synthetic import DomainShift, SyntheticSpec, generate_synthetic_corpus


@click.group()
def main():
    """Reward-driven domain adaptation for speech emotion recognition."""


@main.group()
def corpus():
    """Corpus ingestion, splitting, and synthesis."""


@corpus.command("split")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--test-fraction", default=0.2, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--by-speaker", is_flag=True, help="Whole speakers go to one side of the split.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for train/test manifests (defaults next to the input).")
def corpus_split(manifest_path, test_fraction, seed, by_speaker, out_dir):
    """Write stratified train/test manifests."""
    source = load_manifest(manifest_path)
    train, test = split_corpus(source, test_fraction, seed, by_speaker=by_speaker)
    out = Path(out_dir) if out_dir else Path(manifest_path).resolve().parent
    out.mkdir(parents=True, exist_ok=True)
    save_manifest(Corpus(source.corpus_id, tuple(train), source.sample_rate_hz), out / "train.jsonl")
    save_manifest(Corpus(source.corpus_id, tuple(test), source.sample_rate_hz), out / "test.jsonl")
    click.echo(f"{len(train)} train / {len(test)} test -> {out}/train.jsonl, {out}/test.jsonl")


@corpus.command("synth")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="YAML file with SyntheticSpec fields (corpus_id, clips_per_class, shift, ...).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
def corpus_synth(spec_path, out_dir, seed):
    """Generate a synthetic emotion corpus (WAV files + manifest)."""
    with open(spec_path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    shift = raw.pop("shift", None)
    if shift is not None:
        raw["shift"] = DomainShift(**shift)
    spec = SyntheticSpec(**raw)
    generated = generate_synthetic_corpus(spec, seed, out_dir)
    click.echo(f"{len(generated)} clips -> {out_dir}/manifest.jsonl")


@main.group()
def exp():
    """Scenario runs and reports."""


@exp.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default="runs", show_default=True, type=click.Path())
def exp_run(config_path, out_dir):
    """Run every method of a scenario config and emit the report."""
    from rlser.experiments import emit_report, load_scenario, run_scenario_method

    cfg = load_scenario(config_path)
    reports = []
    for method in cfg.methods:
        click.echo(f"running {cfg.name} [{method.value}] over seeds {list(cfg.seeds)} ...")
        report = run_scenario_method(cfg, method, out_dir)
        for run in report.runs:
            target = run.subsets.get("target")
            click.echo(
                f"  seed {run.seed}: target UAR {target.uar:.2f}% "
                f"(frozen base {run.frozen_base['target'].uar:.2f}%), {run.wall_clock_s:.0f}s"
            )
        reports.append(report)
    records, table = emit_report(reports, out_dir)
    click.echo(table.read_text())
    click.echo(f"records: {records}")


@exp.command("report")
@click.option("--dir", "dir_path", required=True, type=click.Path(exists=True))
def exp_report(dir_path):
    """Summarize previously written results files."""
    from rlser.experiments import load_reports

    records = load_reports(dir_path)
    if not records:
        click.echo("no results-*.jsonl files found")
        return
    for rec in records:
        mean = rec.get("uar_target_mean")
        std = rec.get("uar_target_std")
        spread = f" +/- {std}" if std is not None else ""
        click.echo(f"{rec['scenario']:<24} {rec['method']:<6} target UAR {mean}{spread}")


@main.command("serve")
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--checkpoint", "checkpoint_path", default=None, type=click.Path())
@click.option("--static", "static_dir", default=None, type=click.Path(),
              help="Console build directory served at /.")
def serve(host, port, checkpoint_path, static_dir):
    """Run the live inference/feedback service."""
    import uvicorn

    from rlser.service import ServiceConfig, create_app

    overrides = {}
    if host:
        overrides["host"] = host
    if port:
        overrides["port"] = port
    if checkpoint_path:
        overrides["checkpoint_path"] = checkpoint_path
    if static_dir:
        overrides["static_dir"] = static_dir
    config = ServiceConfig.from_env(**overrides)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
