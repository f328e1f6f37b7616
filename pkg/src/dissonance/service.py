"""Journal inference service: accepts (text, audio) entries, scores them
with a trained checkpoint, persists them append-only, and serves the
stored analyses over HTTP + JSON.

Store layout under store_dir:
    records.jsonl   one JSON record per entry, append-only
    audio/NNNNN.wav stored uploads, written before their record
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, UploadFile
from fastapi.responses import FileResponse, JSONResponse

from .audio import MalformedWav, Waveform, read_wav_bytes, wav_bytes
from .corpus import LABEL_NAMES
from .data import encode_single
from .model import DissonanceModel

MIN_DURATION_S = 0.5
MAX_DURATION_S = 120.0
DEFAULT_THRESHOLD = 0.05

DEFAULT_PROMPTS = {
    "masking": ("Your words sound brighter than your voice does. "
                "What feeling might the writing be smoothing over?"),
    "coping": ("Your voice carries more ease than your words admit. "
               "What is helping you hold steady right now?"),
}

ENTRY_FIELDS = ("entry_id", "created_at", "text", "predicted_class",
                "class_probs", "mismatch_S", "prompt_key")
LIST_FIELDS = ("entry_id", "created_at", "predicted_class", "mismatch_S")

DISSONANT_PROMPT_KEYS = {0: "masking", 1: "coping"}


class AnalyzerUnavailable(RuntimeError):
    """Checkpoint missing or unusable; analysis endpoints must 503."""


@dataclass
class ServiceConfig:
    checkpoint_path: Path
    store_dir: Path
    threshold: float = DEFAULT_THRESHOLD
    prompts: dict = field(default_factory=lambda: dict(DEFAULT_PROMPTS))
    listen: str = "127.0.0.1:8077"

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        env = os.environ
        values = {
            "checkpoint_path": env.get("DISSONANCE_CHECKPOINT", "model.npz"),
            "store_dir": env.get("DISSONANCE_STORE", "journal_store"),
            "threshold": float(env.get("DISSONANCE_THRESHOLD", DEFAULT_THRESHOLD)),
            "listen": env.get("DISSONANCE_LISTEN", "127.0.0.1:8077"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        values["checkpoint_path"] = Path(values["checkpoint_path"])
        values["store_dir"] = Path(values["store_dir"])
        return cls(**values)


def prompt_key_for(predicted_label: int, mismatch: float, threshold: float) -> str:
    """masking/coping for dissonant predictions past the strict threshold,
    otherwise none. Congruent predictions never prompt."""
    if mismatch > threshold and predicted_label in DISSONANT_PROMPT_KEYS:
        return DISSONANT_PROMPT_KEYS[predicted_label]
    return "none"


class Analyzer:
    """Loads one checkpoint and scores (text, waveform) pairs with it."""

    def __init__(self, checkpoint_path, threshold: float = DEFAULT_THRESHOLD):
        checkpoint_path = Path(checkpoint_path)
        if not checkpoint_path.is_file():
            raise AnalyzerUnavailable(f"checkpoint not found: {checkpoint_path}")
        try:
            self.model = DissonanceModel.load(checkpoint_path)
        except (ValueError, OSError) as exc:
            raise AnalyzerUnavailable(f"checkpoint unusable: {exc}") from exc
        if self.model.config.variant not in ("full", "no_attention", "no_interaction"):
            raise AnalyzerUnavailable(
                f"checkpoint variant {self.model.config.variant!r} produces no "
                "mismatch score; serve a variant with the interaction pathway")
        self.threshold = float(threshold)

    def analyze(self, text: str, waveform: Waveform) -> dict:
        text = text.strip()
        if not text:
            raise ValueError("text must be non-empty")
        duration = waveform.duration
        if not MIN_DURATION_S <= duration <= MAX_DURATION_S:
            raise ValueError(
                f"audio duration {duration:.2f} s outside "
                f"[{MIN_DURATION_S}, {MAX_DURATION_S}] s")
        cfg = self.model.config
        batch = encode_single(text, waveform, d=cfg.d, encoder_seed=cfg.encoder_seed)
        outputs = self.model.forward(batch, training=False)
        logits = outputs.class_logits.data[0]
        shifted = np.exp(logits - logits.max())
        probs = shifted / shifted.sum()
        predicted = int(probs.argmax())
        mismatch = float(outputs.mismatch.data[0, 0])
        return {
            "predicted_class": LABEL_NAMES[predicted],
            "class_probs": [float(p) for p in probs],
            "mismatch_S": mismatch,
            "prompt_key": prompt_key_for(predicted, mismatch, self.threshold),
        }


class EntryStore:
    """Append-only journal persistence: audio file first, record last."""

    def __init__(self, store_dir):
        self.root = Path(store_dir)
        self.audio_dir = self.root / "audio"
        self.audio_dir.mkdir(parents=True, exist_ok=True)
        self.records_path = self.root / "records.jsonl"
        self._lock = threading.Lock()
        self._entries: dict[int, dict] = {}
        if self.records_path.exists():
            with open(self.records_path) as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        record = json.loads(line)
                        self._entries[record["entry_id"]] = record
        self._next_id = max(self._entries, default=0) + 1

    def create(self, text: str, waveform: Waveform, analysis: dict) -> dict:
        with self._lock:
            entry_id = self._next_id
            self._next_id += 1
            audio_ref = f"audio/{entry_id:06d}.wav"
            audio_path = self.root / audio_ref
            with open(audio_path, "wb") as fh:
                fh.write(wav_bytes(waveform))
                fh.flush()
                os.fsync(fh.fileno())
            record = {
                "entry_id": entry_id,
                "created_at": datetime.now(timezone.utc).isoformat(),
                "text": text,
                "audio_ref": audio_ref,
                **analysis,
            }
            with open(self.records_path, "a") as fh:
                fh.write(json.dumps(record) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._entries[entry_id] = record
        return record

    def get(self, entry_id: int) -> dict:
        try:
            return self._entries[entry_id]
        except KeyError:
            raise KeyError(f"no entry {entry_id}") from None

    def audio_path(self, entry_id: int) -> Path:
        return self.root / self.get(entry_id)["audio_ref"]

    def list_newest_first(self, limit: int | None = None) -> list[dict]:
        entries = sorted(self._entries.values(),
                         key=lambda r: (r["created_at"], r["entry_id"]),
                         reverse=True)
        if limit is not None:
            entries = entries[:max(limit, 0)]
        return entries

    def __len__(self) -> int:
        return len(self._entries)


def entry_view(record: dict) -> dict:
    return {k: record[k] for k in ENTRY_FIELDS}


def list_view(record: dict) -> dict:
    return {k: record[k] for k in LIST_FIELDS}


def create_app(config: ServiceConfig) -> FastAPI:
    """FastAPI application bound to one store and one checkpoint."""
    app = FastAPI(title="dissonance journal service")
    store = EntryStore(config.store_dir)
    try:
        analyzer = Analyzer(config.checkpoint_path, config.threshold)
        analyzer_error = None
    except AnalyzerUnavailable as exc:
        analyzer = None
        analyzer_error = str(exc)
    app.state.store = store
    app.state.analyzer = analyzer
    app.state.config = config

    def require_analyzer() -> Analyzer:
        if analyzer is None:
            raise AnalyzerUnavailable(analyzer_error)
        return analyzer

    @app.exception_handler(AnalyzerUnavailable)
    async def _unavailable(_, exc):
        return JSONResponse(status_code=503, content={"detail": str(exc)})

    @app.exception_handler(MalformedWav)
    async def _malformed(_, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "entries": len(store),
                "checkpoint_loaded": analyzer is not None}

    @app.get("/prompts")
    async def prompts():
        return {"threshold": config.threshold, "prompts": config.prompts}

    @app.post("/entries", status_code=201)
    async def create_entry(text: str = Form(...), audio: UploadFile = File(...)):
        active = require_analyzer()
        payload = await audio.read()
        waveform = read_wav_bytes(payload)
        try:
            analysis = active.analyze(text, waveform)
        except ValueError as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        record = store.create(text.strip(), waveform, analysis)
        return entry_view(record)

    @app.get("/entries")
    async def list_entries(limit: int | None = None):
        return [list_view(r) for r in store.list_newest_first(limit)]

    @app.get("/entries/{entry_id}")
    async def get_entry(entry_id: int):
        try:
            return entry_view(store.get(entry_id))
        except KeyError as exc:
            return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.get("/entries/{entry_id}/audio")
    async def get_audio(entry_id: int):
        try:
            path = store.audio_path(entry_id)
        except KeyError as exc:
            return JSONResponse(status_code=404, content={"detail": str(exc)})
        return FileResponse(path, media_type="audio/wav")

    return app


def run_server(config: ServiceConfig) -> None:
    import uvicorn

    host, _, port = config.listen.rpartition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port))
