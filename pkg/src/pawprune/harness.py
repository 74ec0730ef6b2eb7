"""Two-arm pruning experiment runner.

For every (rate, scope, perturbation kind, seed) cell the sweep compares:

  pa arm        pruning-aware training for ``pa_iterations``, prune at the
                scheduled rate, fine-tune for ``finetune_iterations`` with the
                pruned coordinates frozen at zero;
  baseline arm  prune the reference model directly, fine-tune for
                ``baseline_iterations``.

Both arms spend the same total number of optimizer iterations. Fitness is
recorded before pruning, after pruning and after fine-tuning (on the training
split by default; see ExperimentConfig.record_on); results land in one CSV row
per cell plus per-figure aggregates.
"""

from __future__ import annotations

import configparser
import csv
import datetime
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import data as patterns
from . import params as ps
from .errors import ConfigurationError, ContractError
from .fast import DatasetFitness
from .frae import FraeConfig, FraeModel, build_partition, init_model, load_model, save_model
from .objective import ENVELOPE_CORRELATION, NEG_MSE, FitnessSpec
from .paloss import G_KINDS, PerturbationSchedule, pa_fitness
from .spsa import GainSchedule, optimize

DEFAULT_RATE_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))

ARM_PA = "pa"
ARM_BASELINE = "baseline"


@dataclass(frozen=True)
class ExperimentConfig:
    scope: str = ps.WHOLE_MODEL
    rate_grid: tuple = DEFAULT_RATE_GRID
    g_kinds: tuple = ("linear",)
    lam: float = 1.0
    pa_iterations: int = 1000
    finetune_iterations: int = 7000
    baseline_iterations: int = 8000
    fitness: FitnessSpec = field(default_factory=FitnessSpec)
    seeds: tuple = (0, 1, 2, 3, 4)
    gain: GainSchedule = field(default_factory=GainSchedule)
    model: FraeConfig = field(default_factory=FraeConfig)
    # reference model bootstrap (stands in for a pretrained checkpoint)
    reference_iterations: int = 40000
    reference_gain: GainSchedule = field(default_factory=GainSchedule)
    reference_bootstrap_fraction: float = 0.25
    # synthetic dataset
    train_sequences: int = 6
    test_sequences: int = 16
    frames_per_sequence: int = 40
    data_seed: int = 1234
    # recorded fitness fields come from this split; training always uses train
    record_on: str = "train"
    save_checkpoints: bool = True

    def __post_init__(self):
        if self.pa_iterations + self.finetune_iterations != self.baseline_iterations:
            raise ConfigurationError(
                "pa_iterations + finetune_iterations must equal baseline_iterations "
                f"({self.pa_iterations} + {self.finetune_iterations} != "
                f"{self.baseline_iterations})")
        if self.scope not in ps.SCOPES:
            raise ConfigurationError(f"unknown scope {self.scope!r}")
        for g in self.g_kinds:
            if g not in G_KINDS:
                raise ConfigurationError(f"unknown perturbation function {g!r}")
        for r in self.rate_grid:
            if not 0.0 <= r <= 1.0:
                raise ConfigurationError(f"pruning rate {r} outside [0, 1]")
        if self.record_on not in ("train", "test"):
            raise ConfigurationError(f"record_on must be train or test, got "
                                     f"{self.record_on!r}")


@dataclass(frozen=True)
class ResultRecord:
    arm: str
    scope: str
    rate: float
    g_kind: str
    seed: int
    fitness_pre_prune: float
    fitness_post_prune: float
    fitness_post_finetune: float
    pa_iterations: int
    finetune_iterations: int
    status: str = "ok"
    error: str = ""

    @property
    def total_iterations(self) -> int:
        return self.pa_iterations + self.finetune_iterations


RESULT_COLUMNS = ["arm", "scope", "rate", "g_kind", "seed", "fitness_pre_prune",
                  "fitness_post_prune", "fitness_post_finetune",
                  "pa_iterations", "finetune_iterations", "status", "error"]


def derive_seed(*parts) -> int:
    """Deterministic child seed from integer components."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def make_dataset(config: ExperimentConfig):
    return patterns.generate_train_test(
        config.train_sequences, config.test_sequences,
        config.frames_per_sequence, config.data_seed)


def train_reference(config: ExperimentConfig, seed: int, train_set) -> FraeModel:
    """Plain SPSA training run producing the per-seed reference model.

    Bootstraps with a negative-MSE stage before switching to the configured
    fitness, which avoids the flat clipped region of the correlation score at
    random initialization.
    """
    model = init_model(config.model, seed=seed)
    n_boot = int(round(config.reference_iterations * config.reference_bootstrap_fraction))
    n_main = config.reference_iterations - n_boot
    w = model.params
    if n_boot:
        f_boot = DatasetFitness(config.model, train_set,
                                FitnessSpec(kind=NEG_MSE))
        w, _ = optimize(w, f_boot, config.reference_gain, n_boot,
                        rng_seed=derive_seed(seed, 1))
    if n_main:
        f_main = DatasetFitness(config.model, train_set, config.fitness)
        w, _ = optimize(w, f_main, config.reference_gain, n_main,
                        rng_seed=derive_seed(seed, 2))
    return model.with_params(w)


def _cell_dir(outdir, arm, scope, rate, g_kind, seed):
    name = f"{arm}_{scope}_r{int(round(rate * 100)):02d}_{g_kind or 'none'}_s{seed}"
    path = os.path.join(outdir, "cells", name)
    os.makedirs(path, exist_ok=True)
    return path


def run_pa_arm(config: ExperimentConfig, rate: float, seed: int,
               reference: FraeModel, fit_train: DatasetFitness,
               fit_eval: DatasetFitness, g_kind: str,
               outdir=None) -> ResultRecord:
    """Pruning-aware arm: scheduled-perturbation training, prune, fine-tune."""
    part = reference.partition
    sched = PerturbationSchedule(g_kind=g_kind, n_max=max(config.pa_iterations, 1),
                                 rate=rate, scope=config.scope, lam=config.lam)

    def fitness_for_iteration(k):
        return lambda w: pa_fitness(fit_train, w, part, sched, k)

    w_pa, _ = optimize(reference.params, fit_train, config.gain,
                       config.pa_iterations,
                       rng_seed=derive_seed(seed, 3, int(round(rate * 100)),
                                            G_KINDS.index(g_kind)),
                       fitness_for_iteration=fitness_for_iteration)
    pre = fit_eval(w_pa)
    mask = ps.select_pruned_indices(w_pa, part, rate, config.scope)
    w_pruned = ps.apply_mask(w_pa, mask)
    post = fit_eval(w_pruned)
    w_ft, _ = optimize(w_pruned, fit_train, config.gain,
                       config.finetune_iterations,
                       rng_seed=derive_seed(seed, 4, int(round(rate * 100)),
                                            G_KINDS.index(g_kind)),
                       freeze=mask)
    final = fit_eval(w_ft)
    if outdir is not None and config.save_checkpoints:
        cell = _cell_dir(outdir, ARM_PA, config.scope, rate, g_kind, seed)
        save_model(reference.with_params(w_pruned), os.path.join(cell, "pruned.frae"))
        save_model(reference.with_params(w_ft), os.path.join(cell, "finetuned.frae"))
        ps.save_mask(mask, os.path.join(cell, "mask.pawm"))
    return ResultRecord(arm=ARM_PA, scope=config.scope, rate=rate, g_kind=g_kind,
                        seed=seed, fitness_pre_prune=pre, fitness_post_prune=post,
                        fitness_post_finetune=final,
                        pa_iterations=config.pa_iterations,
                        finetune_iterations=config.finetune_iterations)


def run_baseline_arm(config: ExperimentConfig, rate: float, seed: int,
                     reference: FraeModel, fit_train: DatasetFitness,
                     fit_eval: DatasetFitness, outdir=None) -> ResultRecord:
    """Magnitude-informed baseline: prune the reference, then fine-tune."""
    part = reference.partition
    pre = fit_eval(reference.params)
    mask = ps.select_pruned_indices(reference.params, part, rate, config.scope)
    w_pruned = ps.apply_mask(reference.params, mask)
    post = fit_eval(w_pruned)
    w_ft, _ = optimize(w_pruned, fit_train, config.gain,
                       config.baseline_iterations,
                       rng_seed=derive_seed(seed, 5, int(round(rate * 100))),
                       freeze=mask)
    final = fit_eval(w_ft)
    if outdir is not None and config.save_checkpoints:
        cell = _cell_dir(outdir, ARM_BASELINE, config.scope, rate, "", seed)
        save_model(reference.with_params(w_pruned), os.path.join(cell, "pruned.frae"))
        save_model(reference.with_params(w_ft), os.path.join(cell, "finetuned.frae"))
        ps.save_mask(mask, os.path.join(cell, "mask.pawm"))
    return ResultRecord(arm=ARM_BASELINE, scope=config.scope, rate=rate, g_kind="",
                        seed=seed, fitness_pre_prune=pre, fitness_post_prune=post,
                        fitness_post_finetune=final, pa_iterations=0,
                        finetune_iterations=config.baseline_iterations)


def reference_for_seed(config: ExperimentConfig, seed: int, train_set,
                       outdir=None) -> FraeModel:
    """Train (or reload from the output directory) the seed's reference model."""
    if outdir is not None:
        path = os.path.join(outdir, f"reference_s{seed}.frae")
        if os.path.exists(path):
            return load_model(path)
    model = train_reference(config, seed, train_set)
    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
        save_model(model, os.path.join(outdir, f"reference_s{seed}.frae"))
    return model


def sweep(config: ExperimentConfig, outdir=None, train_set=None, test_set=None,
          progress=None):
    """Run both arms over the full grid; returns (records, all_ok)."""
    if train_set is None or test_set is None:
        train_set, test_set = make_dataset(config)
    fit_train = DatasetFitness(config.model, train_set, config.fitness)
    fit_eval = (fit_train if config.record_on == "train"
                else DatasetFitness(config.model, test_set, config.fitness))
    records = []
    all_ok = True
    for seed in config.seeds:
        reference = reference_for_seed(config, seed, train_set, outdir)
        for rate in config.rate_grid:
            cells = [(ARM_BASELINE, "")] + [(ARM_PA, g) for g in config.g_kinds]
            for arm, g_kind in cells:
                try:
                    if arm == ARM_BASELINE:
                        rec = run_baseline_arm(config, rate, seed, reference,
                                               fit_train, fit_eval, outdir)
                    else:
                        rec = run_pa_arm(config, rate, seed, reference,
                                         fit_train, fit_eval, g_kind, outdir)
                except Exception as exc:  # keep sweeping, record the failure
                    all_ok = False
                    rec = ResultRecord(arm=arm, scope=config.scope, rate=rate,
                                       g_kind=g_kind, seed=seed,
                                       fitness_pre_prune=np.nan,
                                       fitness_post_prune=np.nan,
                                       fitness_post_finetune=np.nan,
                                       pa_iterations=0, finetune_iterations=0,
                                       status="error", error=str(exc))
                records.append(rec)
                if progress is not None:
                    progress(rec)
    records.sort(key=lambda r: (r.scope, r.rate, r.arm, r.g_kind, r.seed))
    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
        write_results(records, os.path.join(outdir, "results.csv"))
        write_aggregates(records, outdir)
    return records, all_ok


def write_results(records, path, timestamp=True) -> None:
    with open(path, "w", newline="") as fh:
        if timestamp:
            fh.write(f"# pawprune results {datetime.datetime.now().isoformat()}\n")
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in records:
            writer.writerow([r.arm, r.scope, repr(r.rate), r.g_kind, r.seed,
                             repr(r.fitness_pre_prune), repr(r.fitness_post_prune),
                             repr(r.fitness_post_finetune), r.pa_iterations,
                             r.finetune_iterations, r.status, r.error])


def read_results(path):
    records = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for row in csv.DictReader(lines):
        records.append(ResultRecord(
            arm=row["arm"], scope=row["scope"], rate=float(row["rate"]),
            g_kind=row["g_kind"], seed=int(row["seed"]),
            fitness_pre_prune=float(row["fitness_pre_prune"]),
            fitness_post_prune=float(row["fitness_post_prune"]),
            fitness_post_finetune=float(row["fitness_post_finetune"]),
            pa_iterations=int(row["pa_iterations"]),
            finetune_iterations=int(row["finetune_iterations"]),
            status=row["status"], error=row["error"]))
    return records


# ---------------------------------------------------------------------------
# figure-shaped aggregates

FIGURES = ("post_prune_whole", "post_prune_decoder", "perturbation_comparison",
           "pre_prune", "post_finetune_whole", "post_finetune_decoder")

_FIELD_FOR_FIGURE = {
    "post_prune_whole": "fitness_post_prune",
    "post_prune_decoder": "fitness_post_prune",
    "perturbation_comparison": "fitness_post_prune",
    "pre_prune": "fitness_pre_prune",
    "post_finetune_whole": "fitness_post_finetune",
    "post_finetune_decoder": "fitness_post_finetune",
}


def _series_for_figure(figure: str):
    """Each series is (column name, arm, scope, g_kind)."""
    if figure == "post_prune_whole":
        return [("baseline", ARM_BASELINE, ps.WHOLE_MODEL, ""),
                ("pa_linear", ARM_PA, ps.WHOLE_MODEL, "linear")]
    if figure == "post_prune_decoder":
        return [("baseline", ARM_BASELINE, ps.DECODER_ONLY, ""),
                ("pa_linear", ARM_PA, ps.DECODER_ONLY, "linear")]
    if figure == "perturbation_comparison":
        return [("baseline", ARM_BASELINE, ps.WHOLE_MODEL, "")] + [
            (f"pa_{g}", ARM_PA, ps.WHOLE_MODEL, g)
            for g in ("linear", "square", "cube")]
    if figure == "pre_prune":
        return [("reference", ARM_BASELINE, ps.WHOLE_MODEL, ""),
                ("pa_linear", ARM_PA, ps.WHOLE_MODEL, "linear")]
    if figure == "post_finetune_whole":
        return [("baseline", ARM_BASELINE, ps.WHOLE_MODEL, ""),
                ("pa_linear", ARM_PA, ps.WHOLE_MODEL, "linear")]
    if figure == "post_finetune_decoder":
        return [("baseline", ARM_BASELINE, ps.DECODER_ONLY, ""),
                ("pa_linear", ARM_PA, ps.DECODER_ONLY, "linear")]
    raise ContractError(f"unknown figure {figure!r}; choose from {FIGURES}")


def emit_plot_data(records, figure: str, path=None):
    """Median-over-seeds score vs. pruning rate, one column per series.

    Raises ContractError naming every absent (arm, scope, rate, g_kind) cell.
    """
    series = _series_for_figure(figure)
    value = _FIELD_FOR_FIGURE[figure]
    ok = [r for r in records if r.status == "ok"]
    rates = sorted({r.rate for r in ok})
    missing = []
    table = []
    for rate in rates:
        row = [rate]
        for name, arm, scope, g_kind in series:
            vals = [getattr(r, value) for r in ok
                    if r.arm == arm and r.scope == scope and r.rate == rate
                    and r.g_kind == g_kind]
            if not vals:
                missing.append((arm, scope, rate, g_kind))
                row.append(np.nan)
            else:
                row.append(float(np.median(vals)))
        table.append(row)
    if missing or not rates:
        if not rates:
            missing = [(arm, scope, "<all rates>", g)
                       for _, arm, scope, g in series]
        raise ContractError(f"missing cells for figure {figure}: {missing}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rate"] + [name for name, *_ in series])
            writer.writerows(table)
    return [name for name, *_ in series], table


def write_aggregates(records, outdir) -> None:
    """Emit every figure aggregate that the result table can support."""
    for figure in FIGURES:
        try:
            emit_plot_data(records, figure,
                           os.path.join(outdir, f"aggregate_{figure}.csv"))
        except ContractError:
            continue


# ---------------------------------------------------------------------------
# config file parsing (flat key=value with sections)


def _parse_floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _parse_ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def load_config(path) -> ExperimentConfig:
    """Build an ExperimentConfig from an INI-style file; every field optional."""
    parser = configparser.ConfigParser()
    parser.optionxform = str  # gain keys a and A are distinct
    with open(path) as fh:
        parser.read_file(fh)
    base = ExperimentConfig()
    kw = {}
    if parser.has_section("experiment"):
        sec = parser["experiment"]
        kw["scope"] = sec.get("scope", base.scope)
        if "rate_grid" in sec:
            kw["rate_grid"] = _parse_floats(sec["rate_grid"])
        if "g_kinds" in sec:
            kw["g_kinds"] = tuple(sec["g_kinds"].replace(",", " ").split())
        kw["lam"] = sec.getfloat("lambda", base.lam)
        kw["pa_iterations"] = sec.getint("pa_iterations", base.pa_iterations)
        kw["finetune_iterations"] = sec.getint("finetune_iterations",
                                               base.finetune_iterations)
        kw["baseline_iterations"] = sec.getint("baseline_iterations",
                                               base.baseline_iterations)
        if "seeds" in sec:
            kw["seeds"] = _parse_ints(sec["seeds"])
        kw["record_on"] = sec.get("record_on", base.record_on)
        kw["save_checkpoints"] = sec.getboolean("save_checkpoints",
                                                base.save_checkpoints)
    if parser.has_section("gain"):
        sec = parser["gain"]
        kw["gain"] = GainSchedule(
            a=sec.getfloat("a", base.gain.a), A=sec.getfloat("A", base.gain.A),
            gamma=sec.getfloat("gamma", base.gain.gamma),
            c=sec.getfloat("c", base.gain.c),
            beta=sec.getfloat("beta", base.gain.beta))
    if parser.has_section("reference"):
        sec = parser["reference"]
        kw["reference_iterations"] = sec.getint("iterations",
                                                base.reference_iterations)
        kw["reference_bootstrap_fraction"] = sec.getfloat(
            "bootstrap_fraction", base.reference_bootstrap_fraction)
        ref = base.reference_gain
        kw["reference_gain"] = GainSchedule(
            a=sec.getfloat("a", ref.a), A=sec.getfloat("A", ref.A),
            gamma=sec.getfloat("gamma", ref.gamma), c=sec.getfloat("c", ref.c),
            beta=sec.getfloat("beta", ref.beta))
    if parser.has_section("fitness"):
        sec = parser["fitness"]
        kw["fitness"] = FitnessSpec(
            kind=sec.get("kind", base.fitness.kind),
            window_frames=sec.getint("window_frames", base.fitness.window_frames),
            score_floor=sec.getfloat("score_floor", base.fitness.score_floor))
    if parser.has_section("data"):
        sec = parser["data"]
        kw["train_sequences"] = sec.getint("train_sequences", base.train_sequences)
        kw["test_sequences"] = sec.getint("test_sequences", base.test_sequences)
        kw["frames_per_sequence"] = sec.getint("frames_per_sequence",
                                               base.frames_per_sequence)
        kw["data_seed"] = sec.getint("seed", base.data_seed)
    if parser.has_section("model"):
        sec = parser["model"]
        m = base.model
        kw["model"] = FraeConfig(
            input_dim=sec.getint("input_dim", m.input_dim),
            latent_dim=sec.getint("latent_dim", m.latent_dim),
            encoder_hidden=sec.getint("encoder_hidden", m.encoder_hidden),
            decoder_hidden=sec.getint("decoder_hidden", m.decoder_hidden),
            codebook_size=sec.getint("codebook_size", m.codebook_size))
    return replace(base, **kw)
