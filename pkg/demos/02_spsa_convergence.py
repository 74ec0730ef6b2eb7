"""SPSA on a quadratic bowl: watch the iterate walk to the optimum.

The optimizer only ever sees two fitness values per iteration, yet the
Rademacher perturbation gives an unbiased ascent direction. The gain
schedule controls both the step size a_k and the probe size c_k.
"""

import numpy as np

from pawprune.spsa import GainSchedule, optimize

target = np.array([0.3, -0.7, 0.1, 0.9, -0.2])


def fitness(w):
    return -float(np.sum((w - target) ** 2))


sched = GainSchedule(a=0.5, A=100.0, gamma=0.602, c=0.05, beta=0.101)
print("gain schedule:", sched)
for k in (0, 100, 1000):
    a_k, c_k = sched.gain_at(k)
    print(f"  k={k:5d}  a_k={a_k:.5f}  c_k={c_k:.5f}")
print()

w0 = np.zeros(5)
w, trace = optimize(w0, fitness, sched, iterations=2000, rng_seed=42,
                    trace_stride=250)
print("trace (iteration, fitness):")
for k, fit, _, _ in trace:
    print(f"  {k:5d}  {fit:9.5f}")

print(f"\nfinal distance to optimum: {np.linalg.norm(w - target):.4f}")
print("final iterate:", np.round(w, 3))
print("target       :", target)
