"""Frozen synthetic encoders for text and speech.

Both encoders are pure functions of (input, width, seed): they build a
12-layer hidden-state stack the way a small pretrained transformer would
expose one, and the only trainable coupling to the rest of the system is a
softmax-normalized layer-mixing weight vector (see weighted_layer_pool).

Text: per-token seeded embeddings with a designated valence coordinate
(dimension 0), contextualized by fixed seeded mixing maps; the pooled vector
is position 0. Speech: per-frame prosody descriptors (log energy, pitch,
zero-crossing rate, spectral centroid) through a fixed seeded linear map,
perturbed per layer; the pooled vector is the masked mean over frames.
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass, field

import numpy as np

from .audio import SAMPLE_RATE, Waveform

NUM_LAYERS = 12
FRAME_LENGTH = 400   # 25 ms at 16 kHz
FRAME_HOP = 160      # 10 ms

# Shared valence lexicon. Corpus sentences draw their polarity words from
# these sets, and the text encoder marks them on the valence coordinate.
POSITIVE_WORDS = frozenset("""
good great fine well happy glad calm cheerful lovely sweet warm bright easy
proud rested peaceful fun relaxed smooth kind gentle hopeful better nice
grateful excited light free strong alive
""".split())

NEGATIVE_WORDS = frozenset("""
bad awful wrong tired sad angry annoyed appalled heavy stuck lonely anxious
worried gray hollow drained bitter tense sour lost failing broken useless
pointless numb cold dark empty exhausted miserable ashamed
""".split())

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace split with punctuation stripped."""
    return [w for w in text.lower().translate(_PUNCT_TABLE).split() if w]


def token_id(word: str) -> int:
    digest = hashlib.blake2s(word.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") & 0x7FFFFFFF


def token_ids(text: str) -> list[int]:
    return [token_id(w) for w in tokenize(text)]


# ---------------------------------------------------------------- features

def frame_features(waveform: Waveform) -> np.ndarray:
    """Per-frame prosody descriptors, shape (T, 4).

    Columns: log energy, pitch in Hz (0 when unvoiced, else inside
    [50, 500]), zero-crossing rate, spectral-centroid proxy. Frames are
    25 ms windows on a 10 ms hop; T = floor((N - 400) / 160) + 1.
    """
    x = np.asarray(waveform.samples, dtype=np.float64)
    if len(x) < FRAME_LENGTH:
        raise ValueError("waveform shorter than one analysis window")
    frames = np.lib.stride_tricks.sliding_window_view(x, FRAME_LENGTH)[::FRAME_HOP]
    n_frames = frames.shape[0]

    energy = (frames * frames).mean(axis=1)
    log_energy = np.log(energy + 1e-9)

    signs = frames >= 0.0
    zcr = np.abs(np.diff(signs, axis=1)).mean(axis=1)

    spec = np.abs(np.fft.rfft(frames, axis=1))
    freqs = np.fft.rfftfreq(FRAME_LENGTH, d=1.0 / SAMPLE_RATE)
    centroid = (spec * freqs).sum(axis=1) / (spec.sum(axis=1) + 1e-12)

    # autocorrelation pitch in [50, 500] Hz with parabolic peak refinement;
    # Hann weighting plus window-autocorrelation unbiasing keeps peak
    # height and position honest out to lags near half the window
    lag_min, lag_max = SAMPLE_RATE // 500, SAMPLE_RATE // 50  # 32 .. 320
    nfft = 1024
    win = np.hanning(FRAME_LENGTH)
    power = np.abs(np.fft.rfft(frames * win, n=nfft, axis=1)) ** 2
    acorr = np.fft.irfft(power, n=nfft, axis=1)[:, : lag_max + 2]
    wac = np.fft.irfft(np.abs(np.fft.rfft(win, n=nfft)) ** 2, n=nfft)[: lag_max + 2]
    norm = acorr[:, :1].copy()
    norm[norm < 1e-12] = 1e-12
    # clamp the unbiasing divisor: near half the window the Hann overlap
    # vanishes and full correction would amplify noise above real peaks
    acorr = acorr / norm / np.maximum(wac / wac[0], 0.05)

    # a periodic frame peaks at every multiple of its period; among local
    # maxima nearly as strong as the strongest one, take the shortest lag
    window = acorr[:, lag_min : lag_max + 1]
    is_peak = np.zeros(window.shape, dtype=bool)
    is_peak[:, 1:-1] = (window[:, 1:-1] >= window[:, :-2]) & (window[:, 1:-1] >= window[:, 2:])
    qualified = is_peak & (window >= 0.9 * window.max(axis=1, keepdims=True))
    has_peak = qualified.any(axis=1)
    best = np.where(has_peak, qualified.argmax(axis=1), window.argmax(axis=1))
    peak_val = window[np.arange(n_frames), best]
    lag = best + lag_min

    # parabolic interpolation around the chosen lag for sub-sample precision
    l0 = np.clip(lag, lag_min, lag_max)
    ym = acorr[np.arange(n_frames), l0 - 1]
    y0 = acorr[np.arange(n_frames), l0]
    yp = acorr[np.arange(n_frames), l0 + 1]
    denom = ym - 2.0 * y0 + yp
    safe = np.where(np.abs(denom) > 1e-12, denom, 1.0)
    shift = np.where(np.abs(denom) > 1e-12, 0.5 * (ym - yp) / safe, 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    refined = l0 + shift

    pitch = SAMPLE_RATE / refined
    voiced = (peak_val > 0.6) & (log_energy > -9.0) & (pitch >= 50.0) & (pitch <= 500.0)
    pitch = np.where(voiced, pitch, 0.0)

    return np.stack([log_energy, pitch, zcr, centroid], axis=1)


def frame_count(num_samples: int) -> int:
    return (num_samples - FRAME_LENGTH) // FRAME_HOP + 1


# ------------------------------------------------------------------ pooling

def weighted_layer_pool(stack: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Mix an (L, T, d) layer stack with softmax-normalized weights -> (T, d)."""
    stack = np.asarray(stack, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if stack.ndim != 3:
        raise ValueError("layer stack must have shape (L, T, d)")
    if weights.shape != (stack.shape[0],):
        raise ValueError(f"need {stack.shape[0]} mixing weights, got {weights.shape}")
    shifted = weights - weights.max()
    alpha = np.exp(shifted)
    alpha = alpha / alpha.sum()
    return np.einsum("l,ltd->td", alpha, stack)


@dataclass
class EncoderOutput:
    sequence: np.ndarray          # (T, d)
    pooled: np.ndarray            # (d,)
    mask: np.ndarray              # (T,) bool, True = valid position
    layer_stack: np.ndarray = field(repr=False, default=None)  # (L, T, d)


# --------------------------------------------------------------- text side

class TextEncoder:
    """Deterministic token-embedding stack with a valence-marked coordinate."""

    def __init__(self, d: int, seed: int):
        if d < 4:
            raise ValueError("embedding width must be at least 4")
        self.d = d
        self.seed = seed
        self._emb_cache: dict[int, np.ndarray] = {}
        rng = np.random.default_rng(np.random.SeedSequence((seed, 1001)))
        # fixed mixing maps: column 0 reserved so valence stays in place
        self.mix = rng.normal(0.0, 0.25 / np.sqrt(d), size=(NUM_LAYERS, d, d))
        self.mix[:, :, 0] = 0.0
        self.valence_gain = rng.uniform(0.15, 0.45, size=NUM_LAYERS)
        self._polarity = {token_id(w): 1.0 for w in POSITIVE_WORDS}
        self._polarity.update({token_id(w): -1.0 for w in NEGATIVE_WORDS})

    def _embedding(self, tid: int) -> np.ndarray:
        vec = self._emb_cache.get(tid)
        if vec is None:
            r = np.random.default_rng(np.random.SeedSequence((self.seed, 2002, tid)))
            vec = r.normal(0.0, 0.4, size=self.d)
            pol = self._polarity.get(tid)
            vec[0] = r.normal(0.0, 0.08) if pol is None else pol * 1.2 + r.normal(0.0, 0.05)
            self._emb_cache[tid] = vec
        return vec

    def layer_stack(self, ids: list[int]) -> np.ndarray:
        if not ids:
            raise ValueError("empty token sequence")
        x = np.stack([self._embedding(t) for t in ids])
        layers = np.empty((NUM_LAYERS, len(ids), self.d))
        for layer in range(NUM_LAYERS):
            ctx = x.mean(axis=0)
            x = x + ctx @ self.mix[layer]
            x[:, 0] += self.valence_gain[layer] * ctx[0]
            layers[layer] = x
        return layers

    def encode(self, ids: list[int], wlp_weights: np.ndarray | None = None) -> EncoderOutput:
        stack = self.layer_stack(ids)
        if wlp_weights is None:
            wlp_weights = np.zeros(NUM_LAYERS)
        seq = weighted_layer_pool(stack, wlp_weights)
        return EncoderOutput(sequence=seq, pooled=seq[0].copy(),
                             mask=np.ones(len(ids), dtype=bool), layer_stack=stack)

    def encode_text(self, text: str, wlp_weights: np.ndarray | None = None) -> EncoderOutput:
        return self.encode(token_ids(text), wlp_weights)


# -------------------------------------------------------------- speech side

# fixed standardization so the projection input is O(1) regardless of clip
_FEAT_CENTER = np.array([-9.0, 70.0, 0.25, 1800.0])
_FEAT_SCALE = np.array([5.0, 80.0, 0.22, 1500.0])


class AudioEncoder:
    """Frame-feature projection replicated into perturbed pseudo-layers."""

    def __init__(self, d: int, seed: int):
        if d < 4:
            raise ValueError("embedding width must be at least 4")
        self.d = d
        self.seed = seed
        rng = np.random.default_rng(np.random.SeedSequence((seed, 3003)))
        self.proj = rng.normal(0.0, 0.55, size=(4, d))
        self.bias = rng.normal(0.0, 0.12, size=d)
        self.layer_gain = 1.0 + rng.normal(0.0, 0.18, size=(NUM_LAYERS, d))
        self.layer_shift = rng.normal(0.0, 0.06, size=(NUM_LAYERS, d))

    def base_projection(self, features: np.ndarray) -> np.ndarray:
        feats = (np.asarray(features, dtype=np.float64) - _FEAT_CENTER) / _FEAT_SCALE
        return feats @ self.proj + self.bias

    def layer_stack(self, features: np.ndarray) -> np.ndarray:
        base = self.base_projection(features)
        return self.layer_gain[:, None, :] * base[None, :, :] + self.layer_shift[:, None, :]

    def encode(self, waveform: Waveform, wlp_weights: np.ndarray | None = None) -> EncoderOutput:
        stack = self.layer_stack(frame_features(waveform))
        if wlp_weights is None:
            wlp_weights = np.zeros(NUM_LAYERS)
        seq = weighted_layer_pool(stack, wlp_weights)
        mask = np.ones(seq.shape[0], dtype=bool)
        pooled = (seq * mask[:, None]).sum(axis=0) / mask.sum()
        return EncoderOutput(sequence=seq, pooled=pooled, mask=mask, layer_stack=stack)
