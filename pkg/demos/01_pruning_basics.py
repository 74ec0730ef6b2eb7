"""Walk through magnitude-informed pruning on a small weight vector.

Shows how the eligible set depends on scope, how the pruned index set is
chosen, and that the additive pruning direction reproduces masking exactly.
"""

import numpy as np

from pawprune import params as ps

# a toy partition: 6 encoder weights, 6 decoder weights, 3 biases
part = ps.build_partition([(ps.ENCODER_WEIGHT, 6), (ps.DECODER_WEIGHT, 6),
                           (ps.BIAS, 3)])
rng = np.random.default_rng(0)
w = np.round(rng.normal(0.0, 0.5, size=part.size), 3)

print("weights:", w)
print("eligible (whole model):", part.eligible_indices(ps.WHOLE_MODEL))
print("eligible (decoder only):", part.eligible_indices(ps.DECODER_ONLY))
print()

for rate in (0.25, 0.5, 0.75):
    mask = ps.select_pruned_indices(w, part, rate, ps.WHOLE_MODEL)
    print(f"rate {rate}: prune {len(mask.pruned_indices)} of "
          f"{len(part.eligible_indices(ps.WHOLE_MODEL))} "
          f"-> indices {mask.pruned_indices.tolist()}")

print()
mask = ps.select_pruned_indices(w, part, 0.5, ps.WHOLE_MODEL)
direction = ps.pruning_direction(w, mask)
pruned = ps.apply_mask(w, mask)
print("pruning direction:", direction)
print("w + direction    :", w + direction)
print("apply_mask(w)    :", pruned)
print("bit-exact match  :", np.array_equal(w + direction, pruned))

# biases are never eligible, whatever the rate
full = ps.select_pruned_indices(w, part, 1.0, ps.WHOLE_MODEL)
survivors = ps.apply_mask(w, full)
print("\nafter pruning at rate 1.0 the biases survive:",
      survivors[part.bias_indices])
