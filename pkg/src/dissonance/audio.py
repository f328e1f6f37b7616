"""WAV handling: 16 kHz mono PCM16 in, float64 samples out, and back."""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass

import numpy as np

SAMPLE_RATE = 16000


class MalformedWav(ValueError):
    """Raised when bytes are not a 16 kHz mono PCM16 RIFF file."""


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray  # float64 in [-1, 1]
    rate: int = SAMPLE_RATE

    @property
    def duration(self) -> float:
        return len(self.samples) / self.rate


def write_wav(path, waveform: Waveform) -> None:
    pcm = np.clip(waveform.samples, -1.0, 1.0)
    pcm = np.round(pcm * 32767.0).astype(np.int16)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(waveform.rate)
        wf.writeframes(pcm.tobytes())


def wav_bytes(waveform: Waveform) -> bytes:
    buf = io.BytesIO()
    pcm = np.clip(waveform.samples, -1.0, 1.0)
    pcm = np.round(pcm * 32767.0).astype(np.int16)
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(waveform.rate)
        wf.writeframes(pcm.tobytes())
    return buf.getvalue()


def read_wav_bytes(data: bytes) -> Waveform:
    try:
        with wave.open(io.BytesIO(data), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            n = wf.getnframes()
            raw = wf.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise MalformedWav(f"not a readable WAV file: {exc}") from exc
    if channels != 1:
        raise MalformedWav(f"expected mono audio, got {channels} channels")
    if width != 2:
        raise MalformedWav(f"expected 16-bit PCM, got {8 * width}-bit")
    if rate != SAMPLE_RATE:
        raise MalformedWav(f"expected {SAMPLE_RATE} Hz, got {rate}")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32767.0
    return Waveform(samples=samples, rate=rate)


def read_wav(path) -> Waveform:
    with open(path, "rb") as fh:
        return read_wav_bytes(fh.read())
