"""Pruning-aware derivative-free training for a tiny recurrent codec.

The package trains a feedback recurrent autoencoder with vector quantization
on sparse stimulation-pattern frames using SPSA, makes the training loss
pruning-aware via a scheduled weight perturbation, and compares the result
against magnitude-informed pruning across a pruning-rate sweep.
"""

from .data import PatternSequence, generate_synthetic, load_patterns, save_patterns
from .errors import ConfigurationError, ContractError, FormatError, OptimizerError
from .fast import DatasetFitness
from .frae import (CoderState, FraeConfig, FraeModel, code_sequence, decode_step,
                   encode_step, init_model, initial_state, load_model, quantize,
                   save_model)
from .harness import ExperimentConfig, ResultRecord, emit_plot_data, sweep
from .objective import (FitnessSpec, dataset_fitness, envelope_correlation_fitness,
                        neg_mse_fitness)
from .paloss import PerturbationSchedule, pa_fitness, perturbation_scale, perturbed_weights
from .params import (PruningMask, WeightPartition, apply_mask, build_partition,
                     pruning_direction, select_pruned_indices)
from .spsa import GainSchedule, optimize, sample_rademacher, spsa_step

__version__ = "0.1.0"
