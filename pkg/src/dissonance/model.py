"""Dual-encoder dissonance classifier and its ablation variants.

The full architecture: softmax-weighted layer pooling over each frozen
encoder stack, a single-query multi-head cross-attention per direction
(each modality's pooled vector attends over the other modality's full
sequence), an interaction block producing gated-difference / product /
cosine / logit-disagreement features, and a two-layer MLP classifier.
Auxiliary per-modality heads, a binary agreement head, and a cosine
margin on projected unimodal embeddings regularize training.

Variants strip pieces of this pipeline:
  full            attention -> interaction features -> MLP
  no_interaction  attention -> concatenated attended vectors -> MLP
  no_attention    interaction features on raw pooled vectors -> MLP
  pooled_baseline [h_t - h_a; h_t * h_a] -> MLP, cross-entropy only
  text_only       pooled text -> MLP
  audio_only      pooled audio -> MLP
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

VARIANTS = ("text_only", "audio_only", "pooled_baseline",
            "no_attention", "no_interaction", "full")

FORMAT_VERSION = 1


@dataclass(frozen=True)
class LossWeights:
    ce: float = 1.0
    margin: float = 0.3
    aux_text: float = 0.2
    aux_audio: float = 0.2
    agreement: float = 0.1
    label_smoothing: float = 0.1
    margin_floor: float = 0.0

    def __post_init__(self):
        for name in ("ce", "margin", "aux_text", "aux_audio", "agreement"):
            if getattr(self, name) < 0:
                raise ValueError(f"loss weight {name} must be non-negative")


@dataclass(frozen=True)
class ModelConfig:
    d: int = 64
    heads: int = 4
    hidden: int = 512
    dropout: float = 0.4
    proj_dim: int = 128
    num_layers: int = 12
    num_classes: int = 3
    variant: str = "full"
    encoder_seed: int = 101
    weights: LossWeights = field(default_factory=LossWeights)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.d % self.heads:
            raise ValueError(f"width {self.d} not divisible by {self.heads} heads")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def interaction_width(self) -> int:
        return 2 * self.d + 4

    @property
    def classifier_input_width(self) -> int:
        if self.variant in ("full", "no_attention"):
            return self.interaction_width
        if self.variant in ("no_interaction", "pooled_baseline"):
            return 2 * self.d
        return self.d

    @property
    def uses_text(self) -> bool:
        return self.variant != "audio_only"

    @property
    def uses_audio(self) -> bool:
        return self.variant != "text_only"

    @property
    def uses_attention(self) -> bool:
        return self.variant in ("full", "no_interaction")

    @property
    def uses_interaction(self) -> bool:
        return self.variant in ("full", "no_attention")

    @property
    def uses_aux_heads(self) -> bool:
        return self.variant in ("full", "no_attention", "no_interaction")


@dataclass
class InteractionFeatures:
    gated_diff: Tensor       # (B, d)
    product: Tensor          # (B, d)
    cosine: Tensor           # (B, 1)
    logit_gap: Tensor        # (B, C) stop-gradient unimodal disagreement
    features: Tensor         # (B, 2d + 4)
    mismatch: Tensor         # (B, 1) in [0, 1]


@dataclass
class ModelOutputs:
    class_logits: Tensor
    text_aux_logits: Tensor | None = None
    audio_aux_logits: Tensor | None = None
    agreement_logit: Tensor | None = None
    mismatch: Tensor | None = None
    z_text: Tensor | None = None
    z_audio: Tensor | None = None
    attended_text: Tensor | None = None
    attended_audio: Tensor | None = None


# ------------------------------------------------------------- components

def asymmetric_cross_attention(query_pooled: Tensor, keys_values: Tensor,
                               mask: np.ndarray, params: dict, heads: int) -> Tensor:
    """Single-query multi-head attention over the opposing sequence.

    query_pooled (B, d) attends over keys_values (B, T, d); mask (B, T)
    marks valid positions. Returns the W_O-projected context (B, d).
    """
    b, t, d = keys_values.shape
    if d % heads:
        raise ValueError(f"width {d} not divisible by {heads} heads")
    mask = np.asarray(mask, dtype=np.float64).reshape(b, t)
    if not mask.any(axis=1).all():
        raise ValueError("attention needs at least one valid key position per row")
    dh = d // heads

    def split_heads(x, length):
        x = ad.reshape(x, (b, length, heads, dh))
        return ad.swapaxes(x, 1, 2)                     # (B, H, T, dh)

    flat = ad.reshape(keys_values, (b * t, d))
    q = split_heads(ad.matmul(query_pooled, params["w_q"]), 1)
    k = split_heads(ad.reshape(ad.matmul(flat, params["w_k"]), (b, t, d)), t)
    v = split_heads(ad.reshape(ad.matmul(flat, params["w_v"]), (b, t, d)), t)

    scores = ad.matmul(q, ad.swapaxes(k, 2, 3)) * (1.0 / np.sqrt(dh))   # (B, H, 1, T)
    bias = ((1.0 - mask) * -1e9)[:, None, None, :]
    attn = ad.softmax(scores + bias, axis=-1)
    context = ad.matmul(attn, v)                         # (B, H, 1, dh)
    context = ad.reshape(ad.swapaxes(context, 1, 2), (b, d))
    return ad.matmul(context, params["w_o"])


def pooled_fusion_baseline(h_t: Tensor, h_a: Tensor) -> Tensor:
    """Concatenated elementwise difference and product, width 2d."""
    if h_t.shape != h_a.shape:
        raise ValueError(f"pooled widths disagree: {h_t.shape} vs {h_a.shape}")
    return ad.concat([h_t - h_a, h_t * h_a], axis=1)


def interaction_forward(h_t: Tensor, h_a: Tensor, text_logits: Tensor,
                        audio_logits: Tensor, gate_w: Tensor, gate_b: Tensor) -> InteractionFeatures:
    """Gated difference, product, cosine and stop-gradient logit gap."""
    if h_t.shape != h_a.shape:
        raise ValueError(f"interaction widths disagree: {h_t.shape} vs {h_a.shape}")
    b = h_t.shape[0]
    gate = ad.sigmoid(ad.matmul(ad.concat([h_t, h_a], axis=1), gate_w) + gate_b)
    gated_diff = gate * (h_t - h_a)
    product = h_t * h_a
    cos = ad.reshape(ad.cosine_similarity(h_t, h_a, axis=1), (b, 1))
    logit_gap = ad.stop_gradient(text_logits) - ad.stop_gradient(audio_logits)
    feats = ad.concat([gated_diff, product, cos, logit_gap], axis=1)
    mismatch = (1.0 - cos) * 0.5
    return InteractionFeatures(gated_diff=gated_diff, product=product, cosine=cos,
                               logit_gap=logit_gap, features=feats, mismatch=mismatch)


def mismatch_from_cosine(cos: Tensor) -> Tensor:
    return (1.0 - cos) * 0.5


def margin_loss(z_t: Tensor, z_a: Tensor, labels: np.ndarray,
                margin_floor: float = 0.0) -> Tensor:
    """Cosine margin on unit projections: congruent rows are pulled to
    cosine 1, dissonant rows are hinged below margin_floor."""
    labels = np.asarray(labels)
    for name, z in (("text", z_t), ("audio", z_a)):
        norms = np.sqrt((z.data * z.data).sum(axis=1))
        if np.abs(norms - 1.0).max() > 1e-6:
            raise ValueError(f"{name} projection is not unit-norm")
    cos = ad.tsum(z_t * z_a, axis=1)                     # (B,)
    congruent = (labels == 2).astype(np.float64)
    pulled = 1.0 - cos
    pushed = ad.relu(cos - margin_floor)
    per_row = pulled * congruent + pushed * (1.0 - congruent)
    return ad.tmean(per_row)


def composite_loss(outputs: ModelOutputs, labels: np.ndarray,
                   weights: LossWeights) -> tuple[Tensor, dict]:
    """Weighted sum of the training objectives, plus a scalar breakdown."""
    labels = np.asarray(labels)
    breakdown = {}
    ce = ad.cross_entropy(outputs.class_logits, labels,
                          smoothing=weights.label_smoothing)
    breakdown["ce"] = ce.item()
    total = weights.ce * ce

    if outputs.z_text is not None and outputs.z_audio is not None:
        m = margin_loss(outputs.z_text, outputs.z_audio, labels, weights.margin_floor)
        breakdown["margin"] = m.item()
        total = total + weights.margin * m
    if outputs.text_aux_logits is not None:
        aux_t = ad.cross_entropy(outputs.text_aux_logits, labels,
                                 smoothing=weights.label_smoothing)
        breakdown["aux_text"] = aux_t.item()
        total = total + weights.aux_text * aux_t
    if outputs.audio_aux_logits is not None:
        aux_a = ad.cross_entropy(outputs.audio_aux_logits, labels,
                                 smoothing=weights.label_smoothing)
        breakdown["aux_audio"] = aux_a.item()
        total = total + weights.aux_audio * aux_a
    if outputs.agreement_logit is not None:
        target = (labels == 2).astype(np.float64)
        agr = ad.bce_with_logits(ad.reshape(outputs.agreement_logit, (len(labels),)), target)
        breakdown["agreement"] = agr.item()
        total = total + weights.agreement * agr

    breakdown["total"] = total.item()
    return total, breakdown


# ------------------------------------------------------------------ model

class DissonanceModel:
    """All trainable state for one variant; encoders stay outside."""

    def __init__(self, config: ModelConfig, seed: int):
        self.config = config
        self.seed = seed
        self.params: dict[str, Tensor] = {}
        rng = np.random.default_rng(np.random.SeedSequence((seed, 77)))
        c = config

        def param(name, shape, scale=None):
            if scale is None:
                scale = 1.0 / np.sqrt(shape[0]) if len(shape) > 1 else 0.0
            data = rng.normal(0.0, scale, size=shape) if scale else np.zeros(shape)
            self.params[name] = Tensor(data, requires_grad=True)

        if c.uses_text:
            param("wlp_text", (c.num_layers,))
        if c.uses_audio:
            param("wlp_audio", (c.num_layers,))
        if c.uses_attention:
            for side in ("text", "audio"):
                for m in ("w_q", "w_k", "w_v", "w_o"):
                    param(f"attn_{side}.{m}", (c.d, c.d))
        if c.uses_interaction:
            param("gate.w", (2 * c.d, c.d))
            param("gate.b", (c.d,))
        if c.uses_aux_heads:
            param("aux_text.w", (c.d, c.num_classes))
            param("aux_text.b", (c.num_classes,))
            param("aux_audio.w", (c.d, c.num_classes))
            param("aux_audio.b", (c.num_classes,))
            param("agree.w", (c.classifier_input_width, 1))
            param("agree.b", (1,))
            param("proj_text.w", (c.d, c.proj_dim))
            param("proj_audio.w", (c.d, c.proj_dim))
        param("mlp.w1", (c.classifier_input_width, c.hidden))
        param("mlp.b1", (c.hidden,))
        param("mlp.w2", (c.hidden, c.num_classes))
        param("mlp.b2", (c.num_classes,))

    # ---- sub-passes

    def _attn_params(self, side: str) -> dict:
        return {m: self.params[f"attn_{side}.{m}"] for m in ("w_q", "w_k", "w_v", "w_o")}

    def _text_side(self, batch) -> tuple[Tensor, Tensor]:
        """WLP over the text layer stack -> (sequence (B,T,d), pooled (B,d))."""
        stack = np.asarray(batch.text_stack, dtype=np.float64)    # (B, L, T, d)
        b, l, t, d = stack.shape
        alpha = ad.softmax(self.params["wlp_text"], axis=0)
        seq = ad.reshape(ad.matmul(ad.reshape(alpha, (1, l)),
                                   Tensor(stack.reshape(b, l, t * d))), (b, t, d))
        pooled = seq[:, 0, :]
        return seq, pooled

    def _audio_side(self, batch) -> tuple[Tensor, Tensor, np.ndarray]:
        """WLP over an affine layer family: layer i is gain_i * base + shift_i,
        so the softmax mix collapses to one scaled copy of the base sequence."""
        base = np.asarray(batch.audio_base, dtype=np.float64)     # (B, T, d)
        mask = np.asarray(batch.audio_mask, dtype=np.float64)     # (B, T)
        alpha = ad.softmax(self.params["wlp_audio"], axis=0)
        gain = ad.matmul(alpha, Tensor(np.asarray(batch.audio_gain)))    # (d,)
        shift = ad.matmul(alpha, Tensor(np.asarray(batch.audio_shift)))  # (d,)
        seq = Tensor(base) * gain + shift                          # (B, T, d)
        seq = seq * mask[:, :, None]
        counts = mask.sum(axis=1, keepdims=True)
        if (counts == 0).any():
            raise ValueError("audio rows need at least one valid frame")
        pooled = ad.tsum(seq, axis=1) * (1.0 / counts)
        return seq, pooled, mask

    def _classify(self, feats: Tensor, training: bool, rng) -> Tensor:
        c = self.config
        hidden = ad.gelu(ad.matmul(feats, self.params["mlp.w1"]) + self.params["mlp.b1"])
        if training and c.dropout > 0.0:
            if rng is None:
                raise ValueError("training forward needs a dropout rng")
            hidden = ad.dropout(hidden, c.dropout, rng, training=True)
        return ad.matmul(hidden, self.params["mlp.w2"]) + self.params["mlp.b2"]

    def forward(self, batch, training: bool = False, rng=None) -> ModelOutputs:
        c = self.config
        if c.variant == "text_only":
            _, h_t = self._text_side(batch)
            return ModelOutputs(class_logits=self._classify(h_t, training, rng))
        if c.variant == "audio_only":
            _, h_a, _ = self._audio_side(batch)
            return ModelOutputs(class_logits=self._classify(h_a, training, rng))

        seq_t, h_t = self._text_side(batch)
        seq_a, h_a, audio_mask = self._audio_side(batch)

        if c.variant == "pooled_baseline":
            feats = pooled_fusion_baseline(h_t, h_a)
            return ModelOutputs(class_logits=self._classify(feats, training, rng))

        text_mask = np.asarray(batch.text_mask, dtype=np.float64)
        aux_t = ad.matmul(h_t, self.params["aux_text.w"]) + self.params["aux_text.b"]
        aux_a = ad.matmul(h_a, self.params["aux_audio.w"]) + self.params["aux_audio.b"]
        z_t = ad.l2_normalize(ad.matmul(h_t, self.params["proj_text.w"]), axis=1)
        z_a = ad.l2_normalize(ad.matmul(h_a, self.params["proj_audio.w"]), axis=1)

        if c.uses_attention:
            att_t = asymmetric_cross_attention(h_t, seq_a, audio_mask,
                                               self._attn_params("text"), c.heads)
            att_a = asymmetric_cross_attention(h_a, seq_t, text_mask,
                                               self._attn_params("audio"), c.heads)
        else:
            att_t, att_a = h_t, h_a

        if c.uses_interaction:
            inter = interaction_forward(att_t, att_a, aux_t, aux_a,
                                        self.params["gate.w"], self.params["gate.b"])
            feats, mismatch = inter.features, inter.mismatch
        else:
            feats = ad.concat([att_t, att_a], axis=1)
            cos = ad.reshape(ad.cosine_similarity(att_t, att_a, axis=1),
                             (att_t.shape[0], 1))
            mismatch = mismatch_from_cosine(cos)

        agree = ad.matmul(feats, self.params["agree.w"]) + self.params["agree.b"]
        return ModelOutputs(
            class_logits=self._classify(feats, training, rng),
            text_aux_logits=aux_t,
            audio_aux_logits=aux_a,
            agreement_logit=agree,
            mismatch=mismatch,
            z_text=z_t,
            z_audio=z_a,
            attended_text=att_t,
            attended_audio=att_a,
        )

    # ---- persistence

    def save(self, path) -> None:
        meta = {
            "format_version": FORMAT_VERSION,
            "seed": self.seed,
            "config": {**asdict(self.config), "weights": asdict(self.config.weights)},
        }
        arrays = {f"param:{k}": v.data for k, v in self.params.items()}
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            np.savez(fh, __meta__=np.array(json.dumps(meta)), **arrays)

    @classmethod
    def load(cls, path) -> "DissonanceModel":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"checkpoint not found: {path}")
        with np.load(path, allow_pickle=False) as blob:
            meta = json.loads(str(blob["__meta__"]))
            if meta.get("format_version") != FORMAT_VERSION:
                raise ValueError(f"unsupported checkpoint format: {meta.get('format_version')}")
            cfg_dict = dict(meta["config"])
            cfg_dict["weights"] = LossWeights(**cfg_dict["weights"])
            model = cls(ModelConfig(**cfg_dict), seed=meta["seed"])
            for name, tensor in model.params.items():
                key = f"param:{name}"
                if key not in blob:
                    raise ValueError(f"checkpoint missing parameter {name}")
                stored = blob[key]
                if stored.shape != tensor.data.shape:
                    raise ValueError(f"checkpoint parameter {name} has shape "
                                     f"{stored.shape}, expected {tensor.data.shape}")
                tensor.data = stored.astype(np.float64)
        return model
