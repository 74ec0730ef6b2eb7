"""Command line front end: data generation, training, sweeps and plot data."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import data as patterns
from . import harness
from .fast import DatasetFitness
from .frae import load_model


def _load_cfg(args) -> harness.ExperimentConfig:
    if args.config:
        return harness.load_config(args.config)
    return harness.ExperimentConfig()


def cmd_gen_data(args) -> int:
    config = _load_cfg(args)
    train, test = harness.make_dataset(config)
    os.makedirs(args.out, exist_ok=True)
    patterns.save_patterns(train, os.path.join(args.out, "train.stim"))
    patterns.save_patterns(test, os.path.join(args.out, "test.stim"))
    print(f"wrote {len(train)} train / {len(test)} test sequences to {args.out}")
    return 0


def cmd_train_reference(args) -> int:
    config = _load_cfg(args)
    train, _ = harness.make_dataset(config)
    model = harness.train_reference(config, args.seed, train)
    from .frae import save_model
    save_model(model, args.out)
    fit = DatasetFitness(config.model, train, config.fitness)
    print(f"reference seed {args.seed}: train fitness {fit(model.params):.4f} "
          f"-> {args.out}")
    return 0


def cmd_run_cell(args) -> int:
    config = _load_cfg(args)
    train, test = harness.make_dataset(config)
    fit_train = DatasetFitness(config.model, train, config.fitness)
    fit_eval = (fit_train if config.record_on == "train"
                else DatasetFitness(config.model, test, config.fitness))
    reference = harness.reference_for_seed(config, args.seed, train, args.outdir)
    if args.arm == harness.ARM_BASELINE:
        rec = harness.run_baseline_arm(config, args.rate, args.seed, reference,
                                       fit_train, fit_eval, args.outdir)
    else:
        rec = harness.run_pa_arm(config, args.rate, args.seed, reference,
                                 fit_train, fit_eval, args.g_kind, args.outdir)
    print(f"{rec.arm} rate={rec.rate} seed={rec.seed}: "
          f"pre={rec.fitness_pre_prune:.4f} post={rec.fitness_post_prune:.4f} "
          f"finetuned={rec.fitness_post_finetune:.4f}")
    return 0


def cmd_sweep(args) -> int:
    config = _load_cfg(args)

    def progress(rec):
        print(f"[{rec.status}] {rec.arm:8s} scope={rec.scope} rate={rec.rate:.2f} "
              f"g={rec.g_kind or '-':6s} seed={rec.seed} "
              f"post_prune={rec.fitness_post_prune:.4f}", flush=True)

    _, all_ok = harness.sweep(config, outdir=args.outdir,
                              progress=progress if args.verbose else None)
    print(f"results written to {os.path.join(args.outdir, 'results.csv')}")
    return 0 if all_ok else 2


def cmd_plot_data(args) -> int:
    records = harness.read_results(args.results)
    names, table = harness.emit_plot_data(records, args.figure, args.out)
    print(f"wrote {len(table)} rows x series {names} to {args.out}")
    return 0


def cmd_inspect_checkpoint(args) -> int:
    model = load_model(args.checkpoint)
    w = model.params
    c = model.config
    part = model.partition
    zeros = int(np.sum(w == 0.0))
    print(f"config: input_dim={c.input_dim} latent_dim={c.latent_dim} "
          f"encoder_hidden={c.encoder_hidden} decoder_hidden={c.decoder_hidden} "
          f"codebook_size={c.codebook_size}")
    print(f"parameters: {len(w)} total "
          f"({len(part.encoder_weight_indices)} encoder weights, "
          f"{len(part.decoder_weight_indices)} decoder weights, "
          f"{len(part.bias_indices)} biases, "
          f"{len(part.codebook_indices)} codebook entries)")
    print(f"zero entries: {zeros}  |w| mean: {np.mean(np.abs(w)):.5f}  "
          f"max: {np.max(np.abs(w)):.5f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pawprune",
        description="Pruning-aware derivative-free training experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate synthetic stimulation patterns")
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-reference", help="train the reference model")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_train_reference)

    p = sub.add_parser("run-cell", help="run a single experiment cell")
    p.add_argument("--config")
    p.add_argument("--arm", choices=[harness.ARM_PA, harness.ARM_BASELINE],
                   required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--g-kind", default="linear")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_run_cell)

    p = sub.add_parser("sweep", help="run the full two-arm pruning-rate sweep")
    p.add_argument("--config")
    p.add_argument("--outdir", required=True)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot-data", help="emit per-figure aggregate CSV")
    p.add_argument("--results", required=True, help="results.csv from a sweep")
    p.add_argument("--figure", choices=list(harness.FIGURES), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("inspect-checkpoint", help="summarize a model checkpoint")
    p.add_argument("checkpoint")
    p.set_defaults(func=cmd_inspect_checkpoint)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
