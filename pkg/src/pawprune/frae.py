"""Feedback recurrent autoencoder with a 64-entry vector quantizer.

One stimulation frame is coded per step: the encoder sees the current frame
plus the previously decoded frame (the feedback path), the latent is hard
nearest-neighbor quantized, and the decoder reconstructs the frame from the
code alone. Nothing looks ahead, so the codec has zero algorithmic delay.

Gates use 0.5*(1+tanh(x)) and candidates plain tanh, keeping hidden states
bounded under derivative-free training.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from . import params as ps
from .errors import ConfigurationError, ContractError, FormatError

_CKPT_HEADER = struct.Struct("<4sI5I")
_CKPT_VERSION = 1


@dataclass(frozen=True)
class FraeConfig:
    input_dim: int = 22
    latent_dim: int = 4
    encoder_hidden: int = 13
    decoder_hidden: int = 14
    codebook_size: int = 64

    def __post_init__(self):
        for name in ("input_dim", "latent_dim", "encoder_hidden",
                     "decoder_hidden", "codebook_size"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        k = self.codebook_size
        if k & (k - 1):
            raise ConfigurationError(f"codebook_size {k} is not a power of two")

    @property
    def bits(self) -> int:
        return int(self.codebook_size).bit_length() - 1


def layout_blocks(config: FraeConfig):
    """(category, size) blocks in declaration order, row-major within blocks."""
    m, L = config.input_dim, config.latent_dim
    he, hd = config.encoder_hidden, config.decoder_hidden
    return [
        (ps.ENCODER_WEIGHT, 3 * he * 2 * m),   # encoder gate input weights
        (ps.ENCODER_WEIGHT, 3 * he * he),      # encoder gate recurrent weights
        (ps.BIAS, 3 * he),                     # encoder gate biases
        (ps.ENCODER_WEIGHT, L * he),           # latent projection
        (ps.BIAS, L),                          # latent bias
        (ps.DECODER_WEIGHT, 3 * hd * L),       # decoder gate input weights
        (ps.DECODER_WEIGHT, 3 * hd * hd),      # decoder gate recurrent weights
        (ps.BIAS, 3 * hd),                     # decoder gate biases
        (ps.DECODER_WEIGHT, m * hd),           # output projection
        (ps.BIAS, m),                          # output bias
        (ps.CODEBOOK, config.codebook_size * L),
    ]


def build_partition(config: FraeConfig) -> ps.WeightPartition:
    return ps.build_partition(layout_blocks(config))


def parameter_count(config: FraeConfig) -> int:
    return sum(size for _, size in layout_blocks(config))


def weight_count(config: FraeConfig) -> int:
    return sum(size for cat, size in layout_blocks(config)
               if cat in (ps.ENCODER_WEIGHT, ps.DECODER_WEIGHT))


@dataclass(frozen=True)
class FraeModel:
    params: np.ndarray
    config: FraeConfig
    partition: ps.WeightPartition

    def __post_init__(self):
        n = parameter_count(self.config)
        if len(self.params) != n:
            raise ContractError(
                f"parameter vector has {len(self.params)} entries, config needs {n}")

    def with_params(self, w: np.ndarray) -> "FraeModel":
        return replace(self, params=np.asarray(w, dtype=np.float64))

    @property
    def codebook(self) -> np.ndarray:
        return _views(self.params, self.config)[10]


@dataclass(frozen=True)
class CoderState:
    encoder_hidden: np.ndarray
    decoder_hidden: np.ndarray
    feedback: np.ndarray  # previously decoded frame


def initial_state(config: FraeConfig) -> CoderState:
    return CoderState(
        encoder_hidden=np.zeros(config.encoder_hidden),
        decoder_hidden=np.zeros(config.decoder_hidden),
        feedback=np.zeros(config.input_dim),
    )


def _views(w: np.ndarray, config: FraeConfig):
    """Reshaped views of the flat vector, one per layout block."""
    m, L = config.input_dim, config.latent_dim
    he, hd = config.encoder_hidden, config.decoder_hidden
    shapes = [(3 * he, 2 * m), (3 * he, he), (3 * he,), (L, he), (L,),
              (3 * hd, L), (3 * hd, hd), (3 * hd,), (m, hd), (m,),
              (config.codebook_size, L)]
    views = []
    off = 0
    for shape in shapes:
        size = int(np.prod(shape))
        views.append(w[off:off + size].reshape(shape))
        off += size
    return views


def init_model(config: FraeConfig = FraeConfig(), seed: int = 0) -> FraeModel:
    """Uniform fan-in-scaled init; bit-identical for identical seeds."""
    rng = np.random.default_rng(seed)
    m, L = config.input_dim, config.latent_dim
    he, hd = config.encoder_hidden, config.decoder_hidden
    fan_in = [2 * m, he, 2 * m, he, he,
              L, hd, L, hd, hd,
              L]
    w = np.empty(parameter_count(config))
    off = 0
    for (cat, size), fi in zip(layout_blocks(config), fan_in):
        scale = 1.0 / np.sqrt(fi)
        w[off:off + size] = rng.uniform(-scale, scale, size)
        off += size
    return FraeModel(params=w, config=config, partition=build_partition(config))


def _gate(x):
    return 0.5 * (1.0 + np.tanh(x))


def _cell_step(Wg, Ug, bg, x, h):
    n = len(h)
    z = _gate(Wg[:n] @ x + Ug[:n] @ h + bg[:n])
    r = _gate(Wg[n:2 * n] @ x + Ug[n:2 * n] @ h + bg[n:2 * n])
    cand = np.tanh(Wg[2 * n:] @ x + Ug[2 * n:] @ (r * h) + bg[2 * n:])
    return (1.0 - z) * h + z * cand


def encode_step(model: FraeModel, state: CoderState, frame: np.ndarray):
    """One encoder step; returns (latent, next state)."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape != (model.config.input_dim,):
        raise ContractError(
            f"frame shape {frame.shape} != ({model.config.input_dim},)")
    We, Ue, be, Wl, bl = _views(model.params, model.config)[:5]
    x = np.concatenate([frame, state.feedback])
    h = _cell_step(We, Ue, be, x, state.encoder_hidden)
    latent = Wl @ h + bl
    return latent, replace(state, encoder_hidden=h)


def quantize(model: FraeModel, latent: np.ndarray):
    """Nearest codebook entry by squared distance; lowest index wins ties."""
    latent = np.asarray(latent, dtype=np.float64)
    if latent.shape != (model.config.latent_dim,):
        raise ContractError(
            f"latent shape {latent.shape} != ({model.config.latent_dim},)")
    cb = model.codebook
    d = np.sum((cb - latent) ** 2, axis=1)
    index = int(np.argmin(d))
    return index, cb[index].copy()


def decode_step(model: FraeModel, state: CoderState, code: np.ndarray):
    """One decoder step; returns (reconstructed frame, next state)."""
    code = np.asarray(code, dtype=np.float64)
    if code.shape != (model.config.latent_dim,):
        raise ContractError(
            f"code shape {code.shape} != ({model.config.latent_dim},)")
    Wd, Ud, bd, Wo, bo = _views(model.params, model.config)[5:10]
    h = _cell_step(Wd, Ud, bd, code, state.decoder_hidden)
    frame_hat = Wo @ h + bo
    return frame_hat, replace(state, decoder_hidden=h, feedback=frame_hat)


def code_sequence(model: FraeModel, frames: np.ndarray):
    """Code a whole sequence from reset state; returns (indices, frames_hat)."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.size == 0:
        return np.empty(0, dtype=np.int64), np.empty((0, model.config.input_dim))
    state = initial_state(model.config)
    indices = np.empty(len(frames), dtype=np.int64)
    frames_hat = np.empty((len(frames), model.config.input_dim))
    for t, frame in enumerate(frames):
        latent, state = encode_step(model, state, frame)
        indices[t], code = quantize(model, latent)
        frames_hat[t], state = decode_step(model, state, code)
    return indices, frames_hat


# ---------------------------------------------------------------------------
# checkpoints


def save_model(model: FraeModel, path) -> None:
    c = model.config
    with open(path, "wb") as fh:
        fh.write(_CKPT_HEADER.pack(b"FRAE", _CKPT_VERSION, c.input_dim,
                                   c.latent_dim, c.encoder_hidden,
                                   c.decoder_hidden, c.codebook_size))
        fh.write(ps._HEADER.pack(b"PAWV", 1, len(model.params)))
        fh.write(model.params.astype("<f8").tobytes())


def load_model(path) -> FraeModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _CKPT_HEADER.size:
        raise FormatError("truncated FRAE header", offset=len(data))
    magic, version, m, L, he, hd, k = _CKPT_HEADER.unpack_from(data)
    if magic != b"FRAE":
        raise FormatError(f"bad magic {magic!r}, expected FRAE", offset=0)
    if version != _CKPT_VERSION:
        raise FormatError(f"unsupported FRAE version {version}", offset=4)
    config = FraeConfig(input_dim=m, latent_dim=L, encoder_hidden=he,
                        decoder_hidden=hd, codebook_size=k)
    w = ps._parse_params(data[_CKPT_HEADER.size:])
    return FraeModel(params=w, config=config, partition=build_partition(config))
