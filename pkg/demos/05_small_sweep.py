"""A miniature two-arm pruning sweep, end to end.

Runs the full harness (reference training, pruning-aware arm, baseline
arm, CSV results, figure aggregates) at a deliberately tiny scale so it
finishes in a couple of minutes. The full-scale run behind the package
defaults uses `pawprune sweep` and takes tens of minutes.
"""

import os
import tempfile

from pawprune import harness
from pawprune.frae import FraeConfig
from pawprune.objective import FitnessSpec

config = harness.ExperimentConfig(
    rate_grid=(0.3, 0.5, 0.7),
    seeds=(0, 1),
    pa_iterations=200,
    finetune_iterations=600,
    baseline_iterations=800,
    reference_iterations=3000,
    fitness=FitnessSpec(),
    model=FraeConfig(latent_dim=3, encoder_hidden=8, decoder_hidden=8,
                     codebook_size=16),
    train_sequences=3,
    test_sequences=4,
    frames_per_sequence=40,
)

outdir = tempfile.mkdtemp(prefix="pawprune_demo_")
print(f"writing results to {outdir}")


def progress(rec):
    print(f"  [{rec.status}] {rec.arm:8s} rate={rec.rate:.1f} seed={rec.seed} "
          f"pre={rec.fitness_pre_prune:.4f} post={rec.fitness_post_prune:.4f} "
          f"finetuned={rec.fitness_post_finetune:.4f}")


records, all_ok = harness.sweep(config, outdir=outdir, progress=progress)
print(f"\nsweep ok: {all_ok}, {len(records)} cells")

names, table = harness.emit_plot_data(records, "post_prune_whole")
print("\nmedian post-prune fitness by rate:")
print(f"{'rate':>6s}" + "".join(f"{n:>12s}" for n in names))
for row in table:
    print(f"{row[0]:6.1f}" + "".join(f"{v:12.4f}" for v in row[1:]))

print("\nfiles written:")
for name in sorted(os.listdir(outdir)):
    print(" ", name)
