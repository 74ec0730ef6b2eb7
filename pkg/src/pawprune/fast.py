"""Numba-compiled evaluation path used by the experiment harness.

The sweep spends nearly all of its time evaluating dataset fitness inside the
optimizer loop, so the codec rollout and the two scoring rules are compiled.
Semantics match frae.code_sequence plus objective.score_sequence; the test
suite checks the two paths against each other on random models.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ContractError
from .frae import FraeConfig, FraeModel
from .objective import ENVELOPE_CORRELATION, NEG_MSE, FitnessSpec

_KIND_NEG_MSE = 0
_KIND_ENVELOPE = 1


@njit(cache=True, fastmath=True)
def _rollout(params, frames, out, m, L, he, hd, K):
    o_we = 0
    o_ue = o_we + 3 * he * 2 * m
    o_be = o_ue + 3 * he * he
    o_wl = o_be + 3 * he
    o_bl = o_wl + L * he
    o_wd = o_bl + L
    o_ud = o_wd + 3 * hd * L
    o_bd = o_ud + 3 * hd * hd
    o_wo = o_bd + 3 * hd
    o_bo = o_wo + m * hd
    o_cb = o_bo + m

    We = params[o_we:o_ue].reshape(3 * he, 2 * m)
    Ue = params[o_ue:o_be].reshape(3 * he, he)
    be = params[o_be:o_wl]
    Wl = params[o_wl:o_bl].reshape(L, he)
    bl = params[o_bl:o_wd]
    Wd = params[o_wd:o_ud].reshape(3 * hd, L)
    Ud = params[o_ud:o_bd].reshape(3 * hd, hd)
    bd = params[o_bd:o_wo]
    Wo = params[o_wo:o_bo].reshape(m, hd)
    bo = params[o_bo:o_cb]
    cb = params[o_cb:o_cb + K * L].reshape(K, L)

    T = frames.shape[0]
    henc = np.zeros(he)
    hdec = np.zeros(hd)
    fb = np.zeros(m)
    x = np.empty(2 * m)
    pre = np.empty(3 * he)
    pred = np.empty(3 * hd)
    rh = np.empty(he)
    rhd = np.empty(hd)
    lat = np.empty(L)

    for t in range(T):
        # encoder cell on [frame; feedback]
        for j in range(m):
            x[j] = frames[t, j]
            x[m + j] = fb[j]
        for i in range(3 * he):
            s = be[i]
            for j in range(2 * m):
                s += We[i, j] * x[j]
            pre[i] = s
        for i in range(2 * he):
            s = 0.0
            for j in range(he):
                s += Ue[i, j] * henc[j]
            pre[i] += s
        for i in range(he):
            rh[i] = 0.5 * (1.0 + np.tanh(pre[he + i])) * henc[i]
        for i in range(he):
            s = 0.0
            for j in range(he):
                s += Ue[2 * he + i, j] * rh[j]
            pre[2 * he + i] += s
        for i in range(he):
            z = 0.5 * (1.0 + np.tanh(pre[i]))
            henc[i] = (1.0 - z) * henc[i] + z * np.tanh(pre[2 * he + i])
        # latent projection and nearest-neighbor quantization
        for i in range(L):
            s = bl[i]
            for j in range(he):
                s += Wl[i, j] * henc[j]
            lat[i] = s
        best = 0
        best_d = np.inf
        for k in range(K):
            d = 0.0
            for i in range(L):
                dv = lat[i] - cb[k, i]
                d += dv * dv
            if d < best_d:
                best_d = d
                best = k
        # decoder cell on the selected code
        for i in range(3 * hd):
            s = bd[i]
            for j in range(L):
                s += Wd[i, j] * cb[best, j]
            pred[i] = s
        for i in range(2 * hd):
            s = 0.0
            for j in range(hd):
                s += Ud[i, j] * hdec[j]
            pred[i] += s
        for i in range(hd):
            rhd[i] = 0.5 * (1.0 + np.tanh(pred[hd + i])) * hdec[i]
        for i in range(hd):
            s = 0.0
            for j in range(hd):
                s += Ud[2 * hd + i, j] * rhd[j]
            pred[2 * hd + i] += s
        for i in range(hd):
            z = 0.5 * (1.0 + np.tanh(pred[i]))
            hdec[i] = (1.0 - z) * hdec[i] + z * np.tanh(pred[2 * hd + i])
        for i in range(m):
            s = bo[i]
            for j in range(hd):
                s += Wo[i, j] * hdec[j]
            out[t, i] = s
            fb[i] = s


@njit(cache=True, fastmath=True)
def _neg_mse(frames, out):
    T, m = frames.shape
    s = 0.0
    for t in range(T):
        for ch in range(m):
            d = frames[t, ch] - out[t, ch]
            s += d * d
    return -s / (T * m)


@njit(cache=True, fastmath=True)
def _envelope_score(frames, out, window, floor):
    T, m = frames.shape
    total = 0.0
    count = 0
    for start in range(T - window + 1):
        for ch in range(m):
            xm = 0.0
            ym = 0.0
            for t in range(start, start + window):
                xm += frames[t, ch]
                ym += out[t, ch]
            xm /= window
            ym /= window
            sxx = 0.0
            syy = 0.0
            sxy = 0.0
            for t in range(start, start + window):
                dx = frames[t, ch] - xm
                dy = out[t, ch] - ym
                sxx += dx * dx
                syy += dy * dy
                sxy += dx * dy
            if sxx == 0.0:
                continue
            if syy == 0.0:
                count += 1
                continue
            total += sxy / np.sqrt(sxx * syy)
            count += 1
    score = total / count if count else 0.0
    if score < floor:
        score = floor
    if score > 1.0:
        score = 1.0
    return score


@njit(cache=True, fastmath=True)
def _dataset_fitness(params, frames_all, seq_bounds, m, L, he, hd, K,
                     kind, window, floor):
    n_seq = seq_bounds.shape[0] - 1
    total = 0.0
    for s in range(n_seq):
        frames = frames_all[seq_bounds[s]:seq_bounds[s + 1]]
        out = np.empty_like(frames)
        _rollout(params, frames, out, m, L, he, hd, K)
        if kind == _KIND_NEG_MSE:
            total += _neg_mse(frames, out)
        else:
            total += _envelope_score(frames, out, window, floor)
    return total / n_seq


def pack_dataset(dataset):
    """Concatenate sequence frames with boundary offsets for the kernels."""
    if not dataset:
        raise ContractError("dataset is empty")
    lengths = [len(seq.frames) for seq in dataset]
    bounds = np.zeros(len(dataset) + 1, dtype=np.int64)
    bounds[1:] = np.cumsum(lengths)
    frames_all = np.ascontiguousarray(
        np.concatenate([seq.frames for seq in dataset]), dtype=np.float64)
    return frames_all, bounds


class DatasetFitness:
    """Callable fitness over flat parameter vectors, bound to one dataset.

    Bit-exactly reproducible: the same parameters always score the same.
    """

    def __init__(self, config: FraeConfig, dataset, spec: FitnessSpec):
        self.config = config
        self.spec = spec
        self.frames_all, self.seq_bounds = pack_dataset(dataset)
        if spec.kind == ENVELOPE_CORRELATION:
            short = int(np.min(np.diff(self.seq_bounds)))
            if short < spec.window_frames:
                raise ContractError(
                    f"sequence length {short} shorter than window {spec.window_frames}")
        self._kind = _KIND_NEG_MSE if spec.kind == NEG_MSE else _KIND_ENVELOPE

    def __call__(self, w: np.ndarray) -> float:
        c = self.config
        return float(_dataset_fitness(
            np.ascontiguousarray(w, dtype=np.float64), self.frames_all,
            self.seq_bounds, c.input_dim, c.latent_dim, c.encoder_hidden,
            c.decoder_hidden, c.codebook_size, self._kind,
            self.spec.window_frames, self.spec.score_floor))

    def for_model(self, model: FraeModel) -> float:
        return self(model.params)


def decode_fast(model: FraeModel, frames: np.ndarray) -> np.ndarray:
    """Compiled end-to-end rollout of one sequence (reconstruction only)."""
    c = model.config
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    out = np.empty_like(frames)
    _rollout(np.ascontiguousarray(model.params, dtype=np.float64), frames, out,
             c.input_dim, c.latent_dim, c.encoder_hidden, c.decoder_hidden,
             c.codebook_size)
    return out
