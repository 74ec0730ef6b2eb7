"""Surrogate fitness functions for the codec: negative MSE and a short-time
envelope-correlation score averaged over a dataset. Both are pure functions of
the model parameters and the dataset; higher is better."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractError
from .frae import FraeModel, code_sequence

NEG_MSE = "neg_mse"
ENVELOPE_CORRELATION = "envelope_correlation"


@dataclass(frozen=True)
class FitnessSpec:
    kind: str = ENVELOPE_CORRELATION
    window_frames: int = 30
    score_floor: float = 0.0

    def __post_init__(self):
        if self.kind not in (NEG_MSE, ENVELOPE_CORRELATION):
            raise ConfigurationError(f"unknown fitness kind {self.kind!r}")
        if self.window_frames <= 0:
            raise ConfigurationError("window_frames must be positive")


def neg_mse_fitness(frames: np.ndarray, frames_hat: np.ndarray) -> float:
    """Negative mean squared error over all frame entries."""
    frames = np.asarray(frames, dtype=np.float64)
    frames_hat = np.asarray(frames_hat, dtype=np.float64)
    if frames.shape != frames_hat.shape:
        raise ContractError(
            f"shape mismatch {frames.shape} vs {frames_hat.shape}")
    return float(-np.mean((frames - frames_hat) ** 2))


def envelope_correlation_fitness(frames: np.ndarray, frames_hat: np.ndarray,
                                 spec: FitnessSpec = FitnessSpec()) -> float:
    """Mean short-time correlation between original and decoded channel envelopes.

    Per channel and per sliding window, the mean-removed unit-normalized
    correlation is computed; windows whose reference envelope has zero variance
    are skipped, and a zero-variance reconstruction scores 0 there. The average
    over channels and windows is clipped to [score_floor, 1].
    """
    frames = np.asarray(frames, dtype=np.float64)
    frames_hat = np.asarray(frames_hat, dtype=np.float64)
    if frames.shape != frames_hat.shape:
        raise ContractError(
            f"shape mismatch {frames.shape} vs {frames_hat.shape}")
    w = spec.window_frames
    if len(frames) < w:
        raise ContractError(
            f"sequence length {len(frames)} shorter than window {w}")
    total = 0.0
    count = 0
    for start in range(len(frames) - w + 1):
        x = frames[start:start + w]
        y = frames_hat[start:start + w]
        xc = x - x.mean(axis=0)
        yc = y - y.mean(axis=0)
        xn = np.sqrt(np.sum(xc * xc, axis=0))
        yn = np.sqrt(np.sum(yc * yc, axis=0))
        for ch in range(frames.shape[1]):
            if xn[ch] == 0.0:
                continue  # silent reference window: correlation undefined
            if yn[ch] == 0.0:
                count += 1
                continue
            total += float(np.dot(xc[:, ch], yc[:, ch]) / (xn[ch] * yn[ch]))
            count += 1
    score = total / count if count else 0.0
    return float(np.clip(score, spec.score_floor, 1.0))


def score_sequence(frames: np.ndarray, frames_hat: np.ndarray,
                   spec: FitnessSpec) -> float:
    if spec.kind == NEG_MSE:
        return neg_mse_fitness(frames, frames_hat)
    return envelope_correlation_fitness(frames, frames_hat, spec)


def dataset_fitness(model: FraeModel, dataset, spec: FitnessSpec) -> float:
    """Code every sequence, score it against the original, return the mean."""
    if not dataset:
        raise ContractError("dataset is empty")
    scores = []
    for seq in dataset:
        _, frames_hat = code_sequence(model, seq.frames)
        scores.append(score_sequence(seq.frames, frames_hat, spec))
    return float(np.mean(scores))
