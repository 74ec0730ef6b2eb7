"""N-of-M stimulation-pattern sequences: synthetic generation and file I/O.

Frames are length-22 channel-magnitude vectors with at most 8 active channels,
emitted at 900 frames per second. The synthetic generator drives a few slowly
drifting formant-like channel centers with lowpassed random excitation plus a
broadband noise floor, then keeps the strongest channels of every frame.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, FormatError

NUM_CHANNELS = 22      # M: subbands per frame
MAX_ACTIVE = 8         # N: maximum selected subbands per frame
FRAME_RATE = 900.0     # frames per second

_STIM_HEADER = struct.Struct("<4sIIIdQ")
_STIM_VERSION = 1


@dataclass(frozen=True)
class PatternSequence:
    frames: np.ndarray  # (T, NUM_CHANNELS), entries in [0, 1]
    frame_rate: float = FRAME_RATE

    def __post_init__(self):
        object.__setattr__(self, "frames",
                           np.ascontiguousarray(self.frames, dtype=np.float64))

    def __len__(self):
        return len(self.frames)


def validate_sequence(seq: PatternSequence, max_active: int = MAX_ACTIVE) -> None:
    """Raise ContractError if the sequence breaks the N-of-M invariants."""
    frames = seq.frames
    if frames.ndim != 2 or frames.shape[1] != NUM_CHANNELS:
        raise ContractError(f"frames shape {frames.shape} is not (T, {NUM_CHANNELS})")
    if frames.size:
        if frames.min() < 0.0 or frames.max() > 1.0:
            raise ContractError("frame amplitudes outside [0, 1]")
        if int(np.max(np.count_nonzero(frames, axis=1))) > max_active:
            raise ContractError(f"frame with more than {max_active} active channels")
    if seq.frame_rate <= 0:
        raise ContractError(f"frame rate {seq.frame_rate} not positive")


def _generate_one(rng: np.random.Generator, num_frames: int) -> np.ndarray:
    n_formants = 3
    centers = rng.uniform(2.0, NUM_CHANNELS - 3.0, n_formants)
    drift = rng.uniform(-0.05, 0.05, n_formants)
    widths = rng.uniform(1.0, 2.5, n_formants)
    env = np.zeros(n_formants)
    noise_env = 0.0
    alpha = 0.1  # first-order lowpass coefficient for the excitation
    channels = np.arange(NUM_CHANNELS, dtype=np.float64)
    frames = np.zeros((num_frames, NUM_CHANNELS))
    for t in range(num_frames):
        drift += rng.normal(0.0, 0.01, n_formants)
        drift = np.clip(drift, -0.1, 0.1)
        centers = np.clip(centers + drift, 0.0, NUM_CHANNELS - 1.0)
        env = (1.0 - alpha) * env + alpha * rng.uniform(0.0, 1.0, n_formants)
        noise_env = (1.0 - alpha) * noise_env + alpha * rng.uniform(0.0, 0.4)
        act = np.zeros(NUM_CHANNELS)
        for i in range(n_formants):
            act += env[i] * np.exp(-0.5 * ((channels - centers[i]) / widths[i]) ** 2)
        act += noise_env * rng.uniform(0.0, 1.0, NUM_CHANNELS)
        # keep only the strongest channels (N-of-M selection)
        keep = np.argsort(act)[-MAX_ACTIVE:]
        frame = np.zeros(NUM_CHANNELS)
        frame[keep] = np.clip(act[keep], 0.0, 1.0)
        frames[t] = frame
    return frames


def generate_synthetic(num_sequences: int, frames_per_sequence: int,
                       seed: int) -> list[PatternSequence]:
    """Deterministic synthetic dataset honoring the N-of-M frame invariants."""
    if num_sequences <= 0 or frames_per_sequence <= 0:
        raise ContractError("sequence and frame counts must be positive")
    dataset = []
    for i in range(num_sequences):
        rng = np.random.Generator(np.random.Philox(
            key=np.array([np.uint64(seed), np.uint64(i)], dtype=np.uint64)))
        dataset.append(PatternSequence(frames=_generate_one(rng, frames_per_sequence)))
    return dataset


def generate_train_test(num_train: int, num_test: int, frames_per_sequence: int,
                        seed: int):
    """Disjoint train/test sets from non-overlapping generator streams."""
    train = generate_synthetic(num_train, frames_per_sequence, seed)
    # offset test streams past every train stream index
    test = []
    for i in range(num_test):
        rng = np.random.Generator(np.random.Philox(
            key=np.array([np.uint64(seed), np.uint64(num_train + i)],
                         dtype=np.uint64)))
        test.append(PatternSequence(frames=_generate_one(rng, frames_per_sequence)))
    return train, test


# ---------------------------------------------------------------------------
# file I/O


def save_patterns(dataset: list[PatternSequence], path) -> None:
    """Write a dataset as a STIM file (dense little-endian float32 frames)."""
    frame_rate = dataset[0].frame_rate if dataset else FRAME_RATE
    with open(path, "wb") as fh:
        fh.write(_STIM_HEADER.pack(b"STIM", _STIM_VERSION, NUM_CHANNELS,
                                   MAX_ACTIVE, frame_rate, len(dataset)))
        for seq in dataset:
            fh.write(struct.pack("<Q", len(seq)))
            fh.write(seq.frames.astype("<f4").tobytes())


def load_patterns(path) -> list[PatternSequence]:
    """Read a STIM file; malformed content is rejected, never repaired."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _STIM_HEADER.size:
        raise FormatError("truncated STIM header", offset=len(data))
    magic, version, m, n, frame_rate, count = _STIM_HEADER.unpack_from(data)
    if magic != b"STIM":
        raise FormatError(f"bad magic {magic!r}, expected STIM", offset=0)
    if version != _STIM_VERSION:
        raise FormatError(f"unsupported STIM version {version}", offset=4)
    if m != NUM_CHANNELS:
        raise FormatError(f"file has {m}-channel frames, expected {NUM_CHANNELS}",
                          offset=8)
    if n > MAX_ACTIVE:
        raise FormatError(f"file allows {n} active channels, expected <= {MAX_ACTIVE}",
                          offset=12)
    dataset = []
    off = _STIM_HEADER.size
    for _ in range(count):
        if off + 8 > len(data):
            raise FormatError("truncated sequence header", offset=off)
        (t,) = struct.unpack_from("<Q", data, off)
        off += 8
        nbytes = t * m * 4
        if off + nbytes > len(data):
            raise FormatError("truncated frame payload", offset=off)
        frames = np.frombuffer(data, dtype="<f4", count=t * m,
                               offset=off).astype(np.float64).reshape(t, m)
        off += nbytes
        seq = PatternSequence(frames=frames, frame_rate=frame_rate)
        try:
            validate_sequence(seq, max_active=n)
        except ContractError as exc:
            raise FormatError(f"invalid sequence: {exc}", offset=off - nbytes)
        dataset.append(seq)
    if off != len(data):
        raise FormatError("trailing bytes after last sequence", offset=off)
    return dataset


def load_patterns_csv(path, frame_rate: float = FRAME_RATE) -> PatternSequence:
    """Import one sequence from CSV: one row per frame, 22 columns."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != NUM_CHANNELS:
                raise FormatError(
                    f"line {lineno}: {len(row)} columns, expected {NUM_CHANNELS}")
            rows.append([float(v) for v in row])
    seq = PatternSequence(frames=np.asarray(rows, dtype=np.float64).reshape(
        len(rows), NUM_CHANNELS), frame_rate=frame_rate)
    validate_sequence(seq)
    return seq
