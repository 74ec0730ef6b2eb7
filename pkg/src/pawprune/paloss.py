"""Pruning-aware fitness: base fitness penalized by its change under pruning.

The perturbation ramps from nothing to full masking over the training run via
an attack function g on [0, 1]; the mask itself is recomputed from the current
weights on every call, so the penalized direction tracks the evolving weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import params as ps
from .errors import ConfigurationError, ContractError

G_KINDS = ("linear", "square", "cube", "sqrt")


def attack(g_kind: str, x: float) -> float:
    if g_kind == "linear":
        return x
    if g_kind == "square":
        return x * x
    if g_kind == "cube":
        return x * x * x
    if g_kind == "sqrt":
        return float(np.sqrt(x))
    raise ConfigurationError(f"unknown perturbation function {g_kind!r}")


@dataclass(frozen=True)
class PerturbationSchedule:
    g_kind: str
    n_max: int
    rate: float
    scope: str
    lam: float = 1.0

    def __post_init__(self):
        if self.g_kind not in G_KINDS:
            raise ConfigurationError(f"unknown perturbation function {self.g_kind!r}")
        if self.n_max <= 0:
            raise ConfigurationError(f"n_max must be positive, got {self.n_max}")
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigurationError(f"rate {self.rate} outside [0, 1]")
        if self.scope not in ps.SCOPES:
            raise ConfigurationError(f"unknown scope {self.scope!r}")
        if self.lam < 0.0:
            raise ConfigurationError(f"lambda must be non-negative, got {self.lam}")


def perturbation_scale(sched: PerturbationSchedule, n: int) -> float:
    """g(n / n_max); zero at the start of training, one at the end."""
    if not 0 <= n <= sched.n_max:
        raise ContractError(f"iteration {n} outside [0, {sched.n_max}]")
    return attack(sched.g_kind, n / sched.n_max)


def perturbed_weights(w: np.ndarray, part: ps.WeightPartition,
                      sched: PerturbationSchedule, n: int) -> np.ndarray:
    """Weights pushed a fraction g(n/n_max) of the way toward their pruned form.

    The magnitude mask is selected on the current w, so at n = n_max the result
    is exactly apply_mask(w, mask) and at n = 0 it is w itself.
    """
    scale = perturbation_scale(sched, n)
    mask = ps.select_pruned_indices(w, part, sched.rate, sched.scope)
    return w + scale * ps.pruning_direction(w, mask)


def pa_fitness(base_f, w: np.ndarray, part: ps.WeightPartition,
               sched: PerturbationSchedule, n: int) -> float:
    """base_f(w) - lambda * |base_f(w) - base_f(perturbed)|.

    Exactly two base-fitness evaluations per call. The penalty is subtracted
    because fitness is maximized; it vanishes when the scheduled pruning does
    not change the base fitness.
    """
    f_w = float(base_f(w))
    f_p = float(base_f(perturbed_weights(w, part, sched, n)))
    if not (np.isfinite(f_w) and np.isfinite(f_p)):
        raise ContractError(f"non-finite base fitness (f={f_w}, f_perturbed={f_p})")
    return f_w - sched.lam * abs(f_w - f_p)
