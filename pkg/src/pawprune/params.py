"""Flat parameter space: partitions, magnitude-based masks and pruning arithmetic.

Parameter vectors are plain 1-D float64 numpy arrays. A partition splits the
index range into encoder weights, decoder weights, biases and codebook entries;
only weights are ever eligible for pruning.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, FormatError

WHOLE_MODEL = "whole_model"
DECODER_ONLY = "decoder_only"
SCOPES = (WHOLE_MODEL, DECODER_ONLY)

# block categories accepted by build_partition
ENCODER_WEIGHT = "encoder_weight"
DECODER_WEIGHT = "decoder_weight"
BIAS = "bias"
CODEBOOK = "codebook"
_CATEGORIES = (ENCODER_WEIGHT, DECODER_WEIGHT, BIAS, CODEBOOK)

_HEADER = struct.Struct("<4sIQ")  # magic, version, count
_VERSION = 1


@dataclass(frozen=True)
class WeightPartition:
    """Disjoint index sets covering a parameter vector of length ``size``."""

    encoder_weight_indices: np.ndarray
    decoder_weight_indices: np.ndarray
    bias_indices: np.ndarray
    codebook_indices: np.ndarray
    size: int

    def eligible_indices(self, scope: str) -> np.ndarray:
        """Indices that may be pruned under the given scope."""
        if scope == WHOLE_MODEL:
            return np.sort(np.concatenate(
                [self.encoder_weight_indices, self.decoder_weight_indices]))
        if scope == DECODER_ONLY:
            return self.decoder_weight_indices
        raise ContractError(f"unknown scope {scope!r}")


@dataclass(frozen=True)
class PruningMask:
    """Immutable set of pruned indices plus the rate/scope that produced it."""

    pruned_indices: np.ndarray
    rate: float
    scope: str

    def __post_init__(self):
        idx = np.asarray(self.pruned_indices, dtype=np.int64)
        object.__setattr__(self, "pruned_indices", np.sort(idx))

    def __len__(self):
        return len(self.pruned_indices)


def build_partition(blocks) -> WeightPartition:
    """Assign contiguous index ranges to a sequence of (category, size) blocks.

    Blocks are laid out in declaration order; within a block, indices are
    consecutive (row-major for matrices flattened by the model). Raises
    ConfigurationError for unknown categories, non-positive block sizes or a
    layout without decoder weights.
    """
    sets = {cat: [] for cat in _CATEGORIES}
    offset = 0
    for cat, size in blocks:
        if cat not in _CATEGORIES:
            raise ConfigurationError(f"unknown block category {cat!r}")
        if size <= 0:
            raise ConfigurationError(f"block {cat!r} has non-positive size {size}")
        sets[cat].append(np.arange(offset, offset + size, dtype=np.int64))
        offset += size
    for cat in (ENCODER_WEIGHT, DECODER_WEIGHT):
        if not sets[cat]:
            raise ConfigurationError(f"layout has no {cat} block")

    def cat_indices(cat):
        if not sets[cat]:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(sets[cat])

    return WeightPartition(
        encoder_weight_indices=cat_indices(ENCODER_WEIGHT),
        decoder_weight_indices=cat_indices(DECODER_WEIGHT),
        bias_indices=cat_indices(BIAS),
        codebook_indices=cat_indices(CODEBOOK),
        size=offset,
    )


def pruned_count(rate: float, n_eligible: int) -> int:
    """Number of weights to prune: round(rate * n_eligible), half rounded up."""
    return int(np.floor(rate * n_eligible + 0.5))


def select_pruned_indices(w: np.ndarray, part: WeightPartition, rate: float,
                          scope: str) -> PruningMask:
    """Mask of the smallest-magnitude eligible weights at the given rate.

    Ties in magnitude are broken toward the lowest index so repeated calls on
    identical inputs return identical masks.
    """
    if not 0.0 <= rate <= 1.0:
        raise ContractError(f"rate {rate} outside [0, 1]")
    w = np.asarray(w, dtype=np.float64)
    if len(w) != part.size:
        raise ContractError(f"vector length {len(w)} != partition size {part.size}")
    if not np.all(np.isfinite(w)):
        raise ContractError("parameter vector contains non-finite entries")
    eligible = part.eligible_indices(scope)
    k = pruned_count(rate, len(eligible))
    # stable sort on magnitude keeps the lowest index first among ties
    order = np.argsort(np.abs(w[eligible]), kind="stable")
    return PruningMask(pruned_indices=eligible[order[:k]], rate=rate, scope=scope)


def apply_mask(w: np.ndarray, mask: PruningMask) -> np.ndarray:
    """Copy of ``w`` with exactly zero at every pruned index."""
    w = np.asarray(w, dtype=np.float64)
    idx = mask.pruned_indices
    if len(idx) and (idx[0] < 0 or idx[-1] >= len(w)):
        raise ContractError("mask index out of range for parameter vector")
    out = w.copy()
    out[idx] = 0.0
    return out


def pruning_direction(w: np.ndarray, mask: PruningMask) -> np.ndarray:
    """Additive direction that realizes the mask: -w at pruned indices, else 0."""
    w = np.asarray(w, dtype=np.float64)
    idx = mask.pruned_indices
    if len(idx) and (idx[0] < 0 or idx[-1] >= len(w)):
        raise ContractError("mask index out of range for parameter vector")
    direction = np.zeros_like(w)
    direction[idx] = -w[idx]
    return direction


# ---------------------------------------------------------------------------
# binary serialization


def save_params(w: np.ndarray, path) -> None:
    """Write a parameter vector as a PAWV file (16-byte header + float64 LE)."""
    w = np.asarray(w, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"PAWV", _VERSION, len(w)))
        fh.write(w.astype("<f8").tobytes())


def load_params(path) -> np.ndarray:
    """Read a PAWV parameter vector file."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _parse_params(data)


def _parse_params(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise FormatError("truncated PAWV header", offset=len(data))
    magic, version, n = _HEADER.unpack_from(data)
    if magic != b"PAWV":
        raise FormatError(f"bad magic {magic!r}, expected PAWV", offset=0)
    if version != _VERSION:
        raise FormatError(f"unsupported PAWV version {version}", offset=4)
    expected = _HEADER.size + 8 * n
    if len(data) != expected:
        raise FormatError(f"PAWV payload has {len(data)} bytes, expected {expected}",
                          offset=min(len(data), expected))
    return np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64)


def save_mask(mask: PruningMask, path) -> None:
    """Write mask indices as a PAWM file (16-byte header + sorted uint32 LE)."""
    idx = mask.pruned_indices
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"PAWM", _VERSION, len(idx)))
        fh.write(idx.astype("<u4").tobytes())


def load_mask(path, rate: float, scope: str) -> PruningMask:
    """Read a PAWM index file; rate/scope metadata is supplied by the caller."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError("truncated PAWM header", offset=len(data))
    magic, version, n = _HEADER.unpack_from(data)
    if magic != b"PAWM":
        raise FormatError(f"bad magic {magic!r}, expected PAWM", offset=0)
    if version != _VERSION:
        raise FormatError(f"unsupported PAWM version {version}", offset=4)
    expected = _HEADER.size + 4 * n
    if len(data) != expected:
        raise FormatError(f"PAWM payload has {len(data)} bytes, expected {expected}",
                          offset=min(len(data), expected))
    idx = np.frombuffer(data, dtype="<u4", offset=_HEADER.size).astype(np.int64)
    return PruningMask(pruned_indices=idx, rate=rate, scope=scope)
