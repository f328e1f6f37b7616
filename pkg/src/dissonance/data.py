"""Corpus encoding cache and batch assembly.

Encoders are frozen, so every sample is encoded once up front: the text
side keeps its full layer stack (the pooling weights are trained), and
the audio side keeps only the base frame projection because its pseudo
layers are an affine family (gain_i * base + shift_i) that the model
recombines without materializing twelve copies.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import read_wav
from .encoders import NUM_LAYERS, AudioEncoder, TextEncoder, frame_features, token_ids

LABEL_FIELD = "label"


class MissingAudioError(FileNotFoundError):
    """Raised before any training when manifest rows point at absent files."""

    def __init__(self, sample_ids):
        self.sample_ids = list(sample_ids)
        listing = ", ".join(self.sample_ids[:20])
        if len(self.sample_ids) > 20:
            listing += f", ... ({len(self.sample_ids) - 20} more)"
        super().__init__(
            f"{len(self.sample_ids)} manifest rows have missing audio: {listing}")


@dataclass
class EncodedBatch:
    """Padded arrays for one forward pass; masks mark real positions."""

    text_stack: np.ndarray    # (B, L, T_text, d)
    text_mask: np.ndarray     # (B, T_text)
    audio_base: np.ndarray    # (B, T_audio, d)
    audio_gain: np.ndarray    # (L, d), shared across the batch
    audio_shift: np.ndarray   # (L, d)
    audio_mask: np.ndarray    # (B, T_audio)
    labels: np.ndarray        # (B,)
    sample_ids: list[str]


class EncodedCorpus:
    """All manifest rows encoded into memory, indexable by split or voice."""

    def __init__(self, rows, audio_root, d: int = 64, encoder_seed: int = 101):
        self.rows = list(rows)
        if not self.rows:
            raise ValueError("empty manifest")
        self.d = d
        self.encoder_seed = encoder_seed
        self.text_encoder = TextEncoder(d, encoder_seed)
        self.audio_encoder = AudioEncoder(d, encoder_seed + 1)

        root = Path(audio_root)
        missing = [r["sample_id"] for r in self.rows
                   if not (root / r["audio_path"]).is_file()]
        if missing:
            raise MissingAudioError(missing)

        self.text_stacks: list[np.ndarray] = []
        self.audio_bases: list[np.ndarray] = []
        for row in self.rows:
            self.text_stacks.append(
                self.text_encoder.layer_stack(token_ids(row["text"])))
            wave = read_wav(root / row["audio_path"])
            self.audio_bases.append(
                self.audio_encoder.base_projection(frame_features(wave)))

        self.labels = np.array([int(r[LABEL_FIELD]) for r in self.rows])
        self.splits = np.array([r["split"] for r in self.rows])
        self.voices = np.array([r["voice"] for r in self.rows])
        self.sample_ids = [r["sample_id"] for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def indices(self, split: str | None = None, voice: str | None = None,
                exclude_voice: str | None = None) -> np.ndarray:
        keep = np.ones(len(self.rows), dtype=bool)
        if split is not None:
            keep &= self.splits == split
        if voice is not None:
            keep &= self.voices == voice
        if exclude_voice is not None:
            keep &= self.voices != exclude_voice
        return np.flatnonzero(keep)

    def batch(self, idxs) -> EncodedBatch:
        idxs = np.asarray(idxs, dtype=int)
        if idxs.size == 0:
            raise ValueError("cannot build an empty batch")
        b = idxs.size
        t_text = max(self.text_stacks[i].shape[1] for i in idxs)
        t_audio = max(self.audio_bases[i].shape[0] for i in idxs)
        text_stack = np.zeros((b, NUM_LAYERS, t_text, self.d))
        text_mask = np.zeros((b, t_text))
        audio_base = np.zeros((b, t_audio, self.d))
        audio_mask = np.zeros((b, t_audio))
        for j, i in enumerate(idxs):
            ts = self.text_stacks[i]
            text_stack[j, :, : ts.shape[1]] = ts
            text_mask[j, : ts.shape[1]] = 1.0
            ab = self.audio_bases[i]
            audio_base[j, : ab.shape[0]] = ab
            audio_mask[j, : ab.shape[0]] = 1.0
        return EncodedBatch(
            text_stack=text_stack,
            text_mask=text_mask,
            audio_base=audio_base,
            audio_gain=self.audio_encoder.layer_gain,
            audio_shift=self.audio_encoder.layer_shift,
            audio_mask=audio_mask,
            labels=self.labels[idxs],
            sample_ids=[self.sample_ids[i] for i in idxs],
        )

    def iter_batches(self, idxs, batch_size: int, rng: np.random.Generator | None = None):
        """Yield batches over idxs; shuffled when an rng is given."""
        idxs = np.asarray(idxs, dtype=int)
        if rng is not None:
            idxs = rng.permutation(idxs)
        for start in range(0, idxs.size, batch_size):
            yield self.batch(idxs[start:start + batch_size])


def encode_single(text: str, waveform, d: int, encoder_seed: int = 101) -> EncodedBatch:
    """One-off batch for inference on a raw (text, waveform) pair."""
    text_encoder = TextEncoder(d, encoder_seed)
    audio_encoder = AudioEncoder(d, encoder_seed + 1)
    stack = text_encoder.layer_stack(token_ids(text))
    base = audio_encoder.base_projection(frame_features(waveform))
    return EncodedBatch(
        text_stack=stack[None, :, :, :],
        text_mask=np.ones((1, stack.shape[1])),
        audio_base=base[None, :, :],
        audio_gain=audio_encoder.layer_gain,
        audio_shift=audio_encoder.layer_shift,
        audio_mask=np.ones((1, base.shape[0])),
        labels=np.array([-1]),
        sample_ids=["live"],
    )
