"""Simultaneous perturbation stochastic approximation for fitness maximization.

The update is w <- w + a_k * (y+ - y-) / (2 c_k) * delta with y+- the fitness
at w +- c_k * delta and delta a Rademacher sign vector. An optional freeze mask
pins pruned coordinates: they are excluded from the perturbation and re-zeroed
after every update, so fine-tuning can never resurrect a pruned weight.

Randomness is counter-based: each iteration draws from a Philox stream keyed
by (seed, iteration), which makes runs fully reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import OptimizerError
from .params import PruningMask

@dataclass(frozen=True)
class GainSchedule:
    """Decaying gains; defaults suit the stimulation-pattern codec task."""

    a: float = 1.0
    A: float = 10273.0
    gamma: float = 0.602
    c: float = 0.020765
    beta: float = 0.101

    def gain_at(self, k: int):
        """(a_k, c_k) = (a/(A+k+1)^gamma, c/(k+1)^beta)."""
        if k < 0:
            raise ValueError(f"iteration {k} is negative")
        a_k = self.a / (self.A + k + 1) ** self.gamma
        c_k = self.c / (k + 1) ** self.beta
        return a_k, c_k


def gain_at(schedule: GainSchedule, k: int):
    return schedule.gain_at(k)


def iteration_rng(seed: int, k: int) -> np.random.Generator:
    """Counter-based stream for iteration k of a run keyed by seed."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(k)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_rademacher(n: int, rng: np.random.Generator) -> np.ndarray:
    """Vector of iid fair +-1 signs."""
    return rng.integers(0, 2, n).astype(np.float64) * 2.0 - 1.0


def spsa_step(w: np.ndarray, f, schedule: GainSchedule, k: int,
              rng: np.random.Generator,
              freeze: PruningMask | None = None) -> np.ndarray:
    """One SPSA iteration; returns the updated parameter vector."""
    w = np.asarray(w, dtype=np.float64)
    a_k, c_k = schedule.gain_at(k)
    delta = sample_rademacher(len(w), rng)
    if freeze is not None:
        delta[freeze.pruned_indices] = 0.0
    y_plus = f(w + c_k * delta)
    y_minus = f(w - c_k * delta)
    if not (np.isfinite(y_plus) and np.isfinite(y_minus)):
        raise OptimizerError(
            f"non-finite fitness (y+={y_plus}, y-={y_minus})", iteration=k)
    w_next = w + a_k * (y_plus - y_minus) / (2.0 * c_k) * delta
    if freeze is not None:
        w_next[freeze.pruned_indices] = 0.0
    return w_next


def optimize(w0: np.ndarray, f, schedule: GainSchedule, iterations: int,
             rng_seed: int, freeze: PruningMask | None = None,
             trace_stride: int = 0, fitness_for_iteration=None):
    """Run SPSA for a fixed number of iterations.

    fitness_for_iteration, when given, maps the iteration index to the fitness
    callable for that iteration (used for scheduled objectives); otherwise f is
    used throughout. Returns (w_final, trace) where trace lists
    (k, fitness, a_k, c_k) rows at the given stride (0 disables tracing).
    """
    w = np.asarray(w0, dtype=np.float64).copy()
    if freeze is not None:
        w[freeze.pruned_indices] = 0.0
    trace = []
    for k in range(iterations):
        f_k = f if fitness_for_iteration is None else fitness_for_iteration(k)
        if trace_stride and k % trace_stride == 0:
            a_k, c_k = schedule.gain_at(k)
            trace.append((k, float(f_k(w)), a_k, c_k))
        w = spsa_step(w, f_k, schedule, k, iteration_rng(rng_seed, k), freeze)
    if trace_stride and iterations:
        a_k, c_k = schedule.gain_at(iterations - 1)
        f_k = f if fitness_for_iteration is None else fitness_for_iteration(iterations - 1)
        trace.append((iterations, float(f_k(w)), a_k, c_k))
    return w, trace


def save_trace(trace, path) -> None:
    """Persist an optimization trace as CSV with columns k, fitness, a_k, c_k."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "fitness", "a_k", "c_k"])
        writer.writerows(trace)
