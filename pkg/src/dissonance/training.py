"""Training loop, evaluation, the ablation grid, and voice-held-out folds.

Determinism contract: every random choice (parameter init, batch order,
dropout masks, fold stratification) descends from the run seed through
named SeedSequence chains, so a (variant, seed, corpus) triple always
produces the same checkpoint bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .data import EncodedCorpus
from .metrics import accuracy, confusion_matrix, macro_f1, per_class_f1
from .model import VARIANTS, DissonanceModel, ModelConfig, composite_loss

VARIANT_ORDER = ("text_only", "audio_only", "pooled_baseline",
                 "no_attention", "no_interaction", "full")

DISPLAY_NAMES = {
    "text_only": "Text only",
    "audio_only": "Audio only",
    "pooled_baseline": "Pooled fusion",
    "no_attention": "No cross-attention",
    "no_interaction": "No interaction block",
    "full": "Full model",
}

CLASS_COLUMNS = ("Masking", "Coping", "Congruent")

DEFAULT_SEEDS = (42, 123, 456)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 5e-4
    batch_size: int = 16
    patience: int = 7
    grad_clip: float = 1.0
    max_epochs: int = 60
    weight_decay: float = 0.01

    def __post_init__(self):
        if self.max_epochs < 1 or self.patience < 1 or self.batch_size < 1:
            raise ValueError("epochs, patience and batch size must be positive")


@dataclass
class EvalReport:
    variant: str
    seed: int
    fold: str
    n: int
    accuracy: float
    per_class_f1: list[float]
    macro_f1: float
    confusion: list[list[int]]

    def to_record(self) -> dict:
        return {"record": "eval", **asdict(self)}


@dataclass
class TrainResult:
    model: DissonanceModel
    history: list[dict]
    best_epoch: int
    best_val_macro_f1: float
    epochs_run: int


def _predict(model: DissonanceModel, corpus: EncodedCorpus, idxs,
             batch_size: int = 64) -> np.ndarray:
    preds = []
    for batch in corpus.iter_batches(idxs, batch_size):
        logits = model.forward(batch, training=False).class_logits.data
        preds.append(logits.argmax(axis=1))
    return np.concatenate(preds)


def evaluate(model: DissonanceModel, corpus: EncodedCorpus, idxs,
             fold: str = "test") -> EvalReport:
    idxs = np.asarray(idxs, dtype=int)
    if idxs.size == 0:
        raise ValueError(f"evaluation set '{fold}' is empty")
    preds = _predict(model, corpus, idxs)
    truth = corpus.labels[idxs]
    return EvalReport(
        variant=model.config.variant,
        seed=model.seed,
        fold=fold,
        n=int(idxs.size),
        accuracy=accuracy(truth, preds),
        per_class_f1=[float(v) for v in per_class_f1(truth, preds)],
        macro_f1=macro_f1(truth, preds),
        confusion=confusion_matrix(truth, preds).tolist(),
    )


def train(corpus: EncodedCorpus, model_config: ModelConfig, seed: int,
          train_cfg: TrainConfig | None = None,
          train_idx=None, val_idx=None, log=None) -> TrainResult:
    """Fit one variant with early stopping on validation macro-F1."""
    cfg = train_cfg or TrainConfig()
    train_idx = corpus.indices(split="train") if train_idx is None else np.asarray(train_idx)
    val_idx = corpus.indices(split="val") if val_idx is None else np.asarray(val_idx)
    if train_idx.size == 0 or val_idx.size == 0:
        raise ValueError("training needs non-empty train and val index sets")

    model = DissonanceModel(model_config, seed=seed)
    optimizer = ad.AdamW(model.params.values(), lr=cfg.lr,
                         weight_decay=cfg.weight_decay)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence((seed, 12)))
    dropout_rng = np.random.default_rng(np.random.SeedSequence((seed, 11)))

    weights = model_config.weights
    history: list[dict] = []
    best_macro = -np.inf
    best_epoch = -1
    best_params: dict[str, np.ndarray] = {}
    stale = 0

    for epoch in range(cfg.max_epochs):
        sums: dict[str, float] = {}
        seen = 0
        for batch in corpus.iter_batches(train_idx, cfg.batch_size, shuffle_rng):
            optimizer.zero_grad()
            outputs = model.forward(batch, training=True, rng=dropout_rng)
            total, parts = composite_loss(outputs, batch.labels, weights)
            total.backward()
            ad.clip_grad_norm(model.params.values(), cfg.grad_clip)
            optimizer.step()
            b = len(batch.sample_ids)
            seen += b
            for key, value in parts.items():
                sums[key] = sums.get(key, 0.0) + value * b
        losses = {key: value / seen for key, value in sums.items()}

        val_report = evaluate(model, corpus, val_idx, fold="val")
        entry = {"epoch": epoch, "loss": losses,
                 "val_macro_f1": val_report.macro_f1}
        history.append(entry)
        if log:
            log(f"epoch {epoch:02d} loss {losses['total']:.4f} "
                f"val macro-F1 {val_report.macro_f1:.4f}")

        if val_report.macro_f1 > best_macro:
            best_macro = val_report.macro_f1
            best_epoch = epoch
            best_params = {k: p.data.copy() for k, p in model.params.items()}
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    for name, data in best_params.items():
        model.params[name].data = data
    return TrainResult(model=model, history=history, best_epoch=best_epoch,
                       best_val_macro_f1=float(best_macro),
                       epochs_run=len(history))


def checkpoint_digest(model: DissonanceModel) -> str:
    """Stable content hash over parameter names, values and config."""
    h = hashlib.blake2s()
    cfg = {**asdict(model.config), "weights": asdict(model.config.weights)}
    h.update(json.dumps(cfg, sort_keys=True).encode())
    for name in sorted(model.params):
        h.update(name.encode())
        h.update(np.ascontiguousarray(model.params[name].data).tobytes())
    return h.hexdigest()


# ------------------------------------------------------------- ablation

def _variant_config(variant: str, base: ModelConfig) -> ModelConfig:
    from dataclasses import replace
    return replace(base, variant=variant)


def run_ablation(corpus: EncodedCorpus, base_config: ModelConfig | None = None,
                 seeds=DEFAULT_SEEDS, train_cfg: TrainConfig | None = None,
                 log=None) -> dict:
    """Train every variant x seed cell, score on the test split, and
    assemble the summary table, continuing past per-cell failures."""
    base = base_config or ModelConfig(d=64, heads=4)
    test_idx = None
    records: list[dict] = []
    summaries: list[dict] = []
    means: dict[str, float] = {}

    for variant in VARIANT_ORDER:
        cell_runs: list[dict] = []
        for seed in seeds:
            try:
                result = train(corpus, _variant_config(variant, base), seed,
                               train_cfg, log=None)
                if test_idx is None:
                    test_idx = corpus.indices(split="test")
                report = evaluate(result.model, corpus, test_idx, fold="test")
                run = {"record": "run", "variant": variant, "seed": seed,
                       "macro_f1": report.macro_f1,
                       "per_class_f1": report.per_class_f1,
                       "confusion": report.confusion,
                       "accuracy": report.accuracy,
                       "best_epoch": result.best_epoch,
                       "epochs_run": result.epochs_run,
                       "best_val_macro_f1": result.best_val_macro_f1}
                if log:
                    log(f"{variant} seed {seed}: test macro-F1 "
                        f"{report.macro_f1:.3f} ({result.epochs_run} epochs)")
            except Exception as exc:   # noqa: BLE001 - cell isolation is the contract
                run = {"record": "run", "variant": variant, "seed": seed,
                       "error": f"{type(exc).__name__}: {exc}"}
                if log:
                    log(f"{variant} seed {seed}: FAILED {exc}")
            records.append(run)
            cell_runs.append(run)

        scored = [r for r in cell_runs if "error" not in r]
        summary = {"record": "variant_summary", "variant": variant,
                   "display": DISPLAY_NAMES[variant],
                   "seeds_scored": [r["seed"] for r in scored],
                   "errors": [r for r in cell_runs if "error" in r]}
        if scored:
            macros = np.array([r["macro_f1"] for r in scored])
            best = max(scored, key=lambda r: r["macro_f1"])
            summary.update({
                "mean_macro_f1": float(macros.mean()),
                "std_macro_f1": float(macros.std()),
                "best_seed": best["seed"],
                "per_class_f1_best_seed": best["per_class_f1"],
            })
            means[variant] = float(macros.mean())
        summaries.append(summary)
        records.append(summary)

    deltas = {}
    if {"no_attention", "pooled_baseline"} <= means.keys():
        deltas["no_attention_minus_pooled_baseline"] = (
            means["no_attention"] - means["pooled_baseline"])
    if {"full", "no_attention"} <= means.keys():
        deltas["full_minus_no_attention"] = means["full"] - means["no_attention"]
    if {"full", "no_interaction"} <= means.keys():
        deltas["full_minus_no_interaction"] = means["full"] - means["no_interaction"]
    delta_record = {"record": "deltas", **deltas}
    records.append(delta_record)

    table = render_ablation_table(summaries, deltas)
    return {"records": records, "summaries": summaries, "deltas": deltas,
            "table": table}


def render_ablation_table(summaries: list[dict], deltas: dict) -> str:
    header = f"{'Model':<22} {'Masking':>8} {'Coping':>8} {'Congruent':>10} {'Macro-F1':>16}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        if "mean_macro_f1" not in s:
            lines.append(f"{s['display']:<22} {'(all seeds failed)':>44}")
            continue
        pc = s["per_class_f1_best_seed"]
        macro = f"{s['mean_macro_f1']:.3f} ± {s['std_macro_f1']:.3f}"
        lines.append(f"{s['display']:<22} {pc[0]:>8.3f} {pc[1]:>8.3f} "
                     f"{pc[2]:>10.3f} {macro:>16}")
    if deltas:
        lines.append("")
        label = {
            "no_attention_minus_pooled_baseline": "no cross-attention - pooled fusion",
            "full_minus_no_attention": "full - no cross-attention",
            "full_minus_no_interaction": "full - no interaction block",
        }
        for key, value in deltas.items():
            lines.append(f"delta {label[key]}: {value:+.3f}")
    return "\n".join(lines)


def write_ablation_report(result: dict, out_path) -> tuple[Path, Path]:
    """Line-delimited records at out_path, rendered table alongside."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as fh:
        for record in result["records"]:
            fh.write(json.dumps(record) + "\n")
    table_path = out_path.with_suffix(".txt")
    if table_path == out_path:
        table_path = out_path.parent / (out_path.name + ".txt")
    table_path.write_text(result["table"] + "\n")
    return out_path, table_path


# ----------------------------------------------------------------- lovo

def _stratified_split(labels: np.ndarray, idxs: np.ndarray, val_share: float,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    train_parts, val_parts = [], []
    for label in np.unique(labels[idxs]):
        members = idxs[labels[idxs] == label]
        members = rng.permutation(members)
        n_val = max(1, int(round(len(members) * val_share)))
        val_parts.append(members[:n_val])
        train_parts.append(members[n_val:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(val_parts))


def run_lovo(corpus: EncodedCorpus, base_config: ModelConfig | None = None,
             seed: int = 42, train_cfg: TrainConfig | None = None,
             val_share: float = 0.15, log=None) -> dict:
    """Hold out each voice in turn: train and validate on the other two
    voices (label-stratified), score on every sample of the held-out voice."""
    voices = sorted(set(corpus.voices))
    if len(voices) < 3:
        raise ValueError(f"voice-held-out folds need at least 3 voices, got {voices}")
    base = base_config or ModelConfig(d=64, heads=4)

    folds: list[EvalReport] = []
    records: list[dict] = []
    for fold_i, voice in enumerate(voices):
        pool = corpus.indices(exclude_voice=voice)
        rng = np.random.default_rng(np.random.SeedSequence((seed, 31, fold_i)))
        train_idx, val_idx = _stratified_split(corpus.labels, pool, val_share, rng)
        result = train(corpus, base, seed, train_cfg,
                       train_idx=train_idx, val_idx=val_idx, log=None)
        held = corpus.indices(voice=voice)
        report = evaluate(result.model, corpus, held, fold=voice)
        folds.append(report)
        records.append(report.to_record())
        if log:
            log(f"held-out {voice}: macro-F1 {report.macro_f1:.3f} "
                f"on {report.n} samples")

    mean = sum(r.macro_f1 for r in folds) / len(folds)
    records.append({"record": "lovo_mean", "mean_macro_f1": mean})
    lines = ["Held-out voice macro-F1"]
    for r in folds:
        lines.append(f"  {r.fold + ':':<11} {r.macro_f1:.3f}")
    lines.append(f"  mean macro-F1 = {mean:.3f}")
    return {"folds": folds, "mean_macro_f1": mean, "records": records,
            "table": "\n".join(lines)}
