"""Controlled dissonance corpus: sentences, voices, emotion tags, renderer.

Every sample pairs a journal sentence of known text valence with a rendering
whose prosody carries an independent acoustic valence. Class labels follow
from the two polarities: positive text over negative prosody is Masking (0),
negative text over positive prosody is Coping (1), matching polarities are
Congruent (2).

The renderer is parametric synthesis, not TTS: words become harmonic
syllable tones at a voice-specific base pitch, acoustic valence moves the
pitch level (+/-15 percent), range, energy and speaking rate, and emotion
tags add small perturbations within their valence family. Silence padding,
inter-word pauses, per-clip gain jitter and per-syllable variation make the
clip-level pooled statistics noisy while leaving frame-level structure
clean.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio import SAMPLE_RATE, Waveform, write_wav
from .encoders import NEGATIVE_WORDS, POSITIVE_WORDS, tokenize

LABEL_MASKING = 0
LABEL_COPING = 1
LABEL_CONGRUENT = 2
LABEL_NAMES = {LABEL_MASKING: "masking", LABEL_COPING: "coping", LABEL_CONGRUENT: "congruent"}

POSITIVE_SENTENCES = [
    "Today went well.",
    "I feel great.",
    "Dinner was lovely.",
    "Work felt easy today.",
    "I slept so well.",
    "Such a bright morning.",
    "My run felt smooth.",
    "Everything feels light today.",
    "I am genuinely happy.",
    "Lunch with mom was sweet.",
    "The garden looks lovely.",
    "I feel calm tonight.",
    "We had real fun.",
    "I am proud of myself.",
    "The house feels warm.",
    "My mind is peaceful.",
    "I feel rested today.",
    "Coffee tasted great.",
    "That call went well.",
    "I feel strong again.",
    "The weekend was fun.",
    "I am grateful today.",
    "Class felt easy.",
    "Friends make me glad.",
    "I feel free now.",
    "A kind note arrived.",
    "My heart feels light.",
    "The walk felt gentle.",
    "I am hopeful again.",
    "Things look better now.",
    "Such a nice evening.",
    "I stayed calm all day.",
    "The meeting went smooth.",
    "Baking was pure fun.",
    "I woke up cheerful.",
    "The park felt peaceful.",
    "My team was kind.",
    "I feel alive today.",
    "Reading felt sweet tonight.",
    "The sun feels warm.",
    "I am excited again.",
    "Dance class was great.",
    "I handled it well.",
    "Small wins feel good.",
    "I feel settled and calm.",
    "Tonight I am relaxed.",
    "Progress feels real and good.",
    "My breathing stayed easy.",
    "We laughed, it was nice.",
    "I chose rest and feel better.",
]

NEGATIVE_SENTENCES = [
    "Nothing went right and I feel awful tonight.",
    "I am so tired of carrying this alone.",
    "The whole day felt heavy and pointless.",
    "I keep feeling stuck in the same place.",
    "Everyone left and the house feels empty now.",
    "I am angry about how that meeting ended.",
    "My chest has been tense since this morning.",
    "I said the wrong thing again and regret it.",
    "The news left me appalled and shaking.",
    "I feel drained after another pointless argument.",
    "This week has been one long gray blur.",
    "I am worried about money again tonight.",
    "Dinner alone felt lonely and cold.",
    "I am annoyed with myself for waiting so long.",
    "Every plan I make seems to end up broken.",
    "I feel useless when nobody answers my messages.",
    "The project failed and I feel responsible and sad.",
    "My sleep was bad and the morning felt worse.",
    "I snapped at my sister and feel ashamed.",
    "The silence in this apartment feels hollow.",
    "I am anxious about tomorrow's review meeting.",
    "Rain again and my mood went dark fast.",
    "I feel bitter about being passed over again.",
    "Nobody called and I spent the evening lonely.",
    "The bills keep piling up and I feel stuck.",
    "I am exhausted and the week is not over.",
    "That conversation left a sour taste all day.",
    "I feel numb scrolling through everyone else's updates.",
    "My back hurts and everything feels harder and heavy.",
    "I lost my temper over something small and stupid.",
    "The fridge is empty and so is my patience.",
    "I keep replaying that awful phone call from work.",
    "Another deadline slipped and I feel like failing.",
    "The apartment is cold and the heater is broken.",
    "I am sad about how we left things unsaid.",
    "Today was bad from the first alarm onward.",
    "I feel lost about what to do next year.",
    "My inbox is a wall of angry messages.",
    "The traffic made me tense before work even began.",
    "I am tired and the laundry is still not done.",
    "Everything I cooked tonight turned out wrong.",
    "I feel hollow after saying goodbye at the station.",
    "The doctor visit left me worried and quiet.",
    "I am miserable with this cold that will not end.",
    "My savings plan is broken and I feel behind.",
    "The meeting ran long and my patience wore thin and sour.",
    "I feel ashamed of how messy the kitchen has become.",
    "The commute drained me before the day even started.",
    "I am annoyed that nobody replied to my long email.",
    "This dark weather makes every small task feel pointless.",
]


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: int
    text: str
    valence: str  # "positive" | "negative"


def sentence_pool() -> list[SentenceRecord]:
    pool = [SentenceRecord(i, t, "positive") for i, t in enumerate(POSITIVE_SENTENCES)]
    pool += [SentenceRecord(50 + i, t, "negative") for i, t in enumerate(NEGATIVE_SENTENCES)]
    texts = {r.text for r in pool}
    if len(pool) != 100 or len(texts) != 100:
        raise AssertionError("sentence pool must hold 100 distinct sentences")
    for rec in pool:
        words = set(tokenize(rec.text))
        own = POSITIVE_WORDS if rec.valence == "positive" else NEGATIVE_WORDS
        other = NEGATIVE_WORDS if rec.valence == "positive" else POSITIVE_WORDS
        if not words & own or words & other:
            raise AssertionError(f"sentence {rec.sentence_id} has inconsistent valence markers")
    return pool


@dataclass(frozen=True)
class EmotionTag:
    name: str
    valence: str
    pitch_mul: float    # small within-valence perturbation, <= 1 percent
    rate_mul: float
    energy_db: float
    range_mul: float


NEGATIVE_TAGS = (
    EmotionTag("sad", "negative", 0.995, 0.92, -1.2, 0.7),
    EmotionTag("angry", "negative", 1.006, 1.06, 1.2, 1.25),
    EmotionTag("annoyed", "negative", 1.001, 1.02, 0.5, 1.0),
    EmotionTag("appalled", "negative", 0.998, 0.96, 0.0, 1.1),
)

POSITIVE_TAGS = (
    EmotionTag("happy", "positive", 1.002, 1.03, 0.5, 1.05),
    EmotionTag("excited", "positive", 1.006, 1.08, 1.2, 1.25),
    EmotionTag("cheerful", "positive", 1.000, 1.00, 0.8, 1.1),
    EmotionTag("calm", "positive", 0.995, 0.92, -1.0, 0.8),
)

ALL_TAGS = {t.name: t for t in NEGATIVE_TAGS + POSITIVE_TAGS}


@dataclass(frozen=True)
class Voice:
    name: str
    base_pitch: float
    timbre_seed: int


VOICES = (
    Voice("Jarnathan", 150.0, 11),
    Voice("Juniper", 170.0, 22),
    Voice("Eve", 190.0, 33),
)
VOICE_BY_NAME = {v.name: v for v in VOICES}

# acoustic valence moves the pitch level by exactly 15 percent
_VALENCE_PITCH = {"positive": 1.15, "negative": 0.85}
_VALENCE_RATE = {"positive": 1.12, "negative": 0.88}
_VALENCE_AMP = {"positive": 1.25, "negative": 0.80}
_VALENCE_RANGE = {"positive": 1.2, "negative": 0.5}

_FRICATIVE_STARTS = tuple("sfhctpk")
_SYL_DUR = 0.125
_PAUSE_DUR = 0.085
_LEAD_DUR = 0.14
_TRAIL_DUR = 0.12
_BASE_AMP = 0.30
_DITHER = 2e-4
_ROOM_TONE_AMP = 1.3e-3
MIN_DURATION = 0.5
MAX_DURATION = 10.0


def stable_hash(*parts) -> int:
    h = hashlib.blake2s("|".join(str(p) for p in parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def _syllables(word: str) -> int:
    return 1 if len(word) <= 4 else 2


def _voice_harmonics(voice: Voice) -> np.ndarray:
    r = np.random.default_rng(np.random.SeedSequence((voice.timbre_seed, 41)))
    rolloff = r.uniform(0.9, 1.4)
    amps = np.array([k ** (-rolloff) * (1.0 + 0.25 * r.uniform(-1, 1)) for k in range(1, 6)])
    return amps / amps.sum()


_HARMONICS = {v.name: _voice_harmonics(v) for v in VOICES}


def _room_tone(n: int, rng: np.random.Generator) -> np.ndarray:
    """Low-passed ambience for lead/trail silence; unit RMS."""
    if n <= 0:
        return np.zeros(0)
    white = rng.normal(0.0, 1.0, n + 64)
    a = 0.87
    colored = lfilter([1.0 - a], [1.0, -a], white)[64:]
    rms = np.sqrt((colored * colored).mean()) or 1.0
    return colored / rms


def render_waveform(text: str, voice: Voice, tag: EmotionTag, seed: int) -> Waveform:
    """Render one journal sentence as a 16 kHz clip.

    Deterministic in (text, voice, tag, seed). Gain, pitch and rate jitter
    are drawn from a stream that excludes the tag, so two renderings of the
    same (text, voice, seed) differ only by the tag's prosody. Lead/trail
    ambience is room tone at a per-clip level; inter-word pauses are only
    dither, so their texture differs from the clip edges.
    """
    words = tokenize(text)
    if not words:
        raise ValueError("cannot render empty text")

    # tag-independent per-clip conditions (recording level, speaker day form)
    cond = np.random.default_rng(np.random.SeedSequence((seed, stable_hash(text), voice.timbre_seed, 1)))
    gain = 10.0 ** (cond.uniform(-5.0, 5.0) / 20.0)
    pitch_jitter = 1.0 + cond.uniform(-0.007, 0.007)
    rate_jitter = 1.0 + cond.uniform(-0.08, 0.08)
    room_level = _ROOM_TONE_AMP * cond.uniform(0.5, 1.5)

    pros = np.random.default_rng(np.random.SeedSequence((seed, stable_hash(text), voice.timbre_seed, stable_hash(tag.name), 2)))

    rate = _VALENCE_RATE[tag.valence] * tag.rate_mul * rate_jitter
    pitch0 = voice.base_pitch * _VALENCE_PITCH[tag.valence] * tag.pitch_mul * pitch_jitter
    amp0 = _BASE_AMP * _VALENCE_AMP[tag.valence] * (10.0 ** (tag.energy_db / 20.0)) * gain
    prange = 0.05 * _VALENCE_RANGE[tag.valence] * tag.range_mul
    harmonics = _HARMONICS[voice.name]
    rising = tag.valence == "positive"

    # room-tone edges are wall-clock ambience: they do not scale with rate,
    # and their length varies far more than the speech itself
    lead_n = int(SAMPLE_RATE * pros.uniform(0.05, 0.48))
    pieces = [_room_tone(lead_n, pros) * room_level]
    for wi, word in enumerate(words):
        if wi > 0:
            pieces.append(np.zeros(int(SAMPLE_RATE * _PAUSE_DUR * (1.0 + pros.uniform(-0.6, 0.6)) / rate)))
        if word[0] in _FRICATIVE_STARTS:
            burst = pros.normal(0.0, 1.0, int(SAMPLE_RATE * 0.028)) * amp0 * 0.22
            pieces.append(burst)
        for si in range(_syllables(word)):
            dur = _SYL_DUR * (1.0 + pros.uniform(-0.10, 0.10)) / rate
            n = max(int(SAMPLE_RATE * dur), 64)
            t = np.arange(n) / SAMPLE_RATE
            contour = np.sin(np.pi * (t / dur - 0.5))
            if not rising:
                contour = -contour
            freq = pitch0 * (1.0 + prange * contour)
            if rising:
                freq = freq * (1.0 + 0.012 * np.sin(2 * np.pi * 5.5 * t))
            phase = 2.0 * np.pi * np.cumsum(freq) / SAMPLE_RATE
            tone = np.zeros(n)
            for k, ak in enumerate(harmonics, start=1):
                tone += ak * np.sin(k * phase)
            attack = max(int(0.15 * n), 1)
            decay = max(int(0.25 * n), 1)
            env = np.ones(n)
            env[:attack] = np.linspace(0.0, 1.0, attack)
            env[-decay:] *= np.linspace(1.0, 0.05, decay)
            syl_amp = amp0 * (1.0 + pros.uniform(-0.10, 0.10)) * (1.15 if si == 0 and wi == 0 else 1.0)
            pieces.append(tone * env * syl_amp)
    trail_n = int(SAMPLE_RATE * pros.uniform(0.04, 0.42))
    pieces.append(_room_tone(trail_n, pros) * room_level)

    samples = np.concatenate(pieces)
    if len(samples) < int(SAMPLE_RATE * (MIN_DURATION + 0.02)):
        pad = int(SAMPLE_RATE * (MIN_DURATION + 0.02)) - len(samples)
        samples = np.concatenate([samples, _room_tone(pad, pros) * room_level])
    samples = samples + pros.normal(0.0, _DITHER, len(samples))
    samples = np.clip(samples, -1.0, 1.0)
    wf = Waveform(samples=samples)
    if wf.duration > MAX_DURATION:
        raise ValueError(f"rendered clip exceeds {MAX_DURATION}s: {wf.duration:.2f}s")
    return wf


def derive_label(text_valence: str, acoustic_valence: str) -> int:
    for v in (text_valence, acoustic_valence):
        if v not in ("positive", "negative"):
            raise ValueError(f"unknown valence {v!r}")
    if text_valence == acoustic_valence:
        return LABEL_CONGRUENT
    return LABEL_MASKING if text_valence == "positive" else LABEL_COPING


# ------------------------------------------------------------------ corpus

def build_sample_plan(seed: int) -> list[dict]:
    """Deterministic sample list (no audio yet): 600 per class, 1800 total.

    Masking: 50 positive sentences x 3 voices x 4 negative tags.
    Coping: 50 negative sentences x 3 voices x 4 positive tags.
    Congruent: every sentence x 3 voices x 2 matching-valence tags drawn
    without replacement per sentence-voice pair.
    """
    pool = sentence_pool()
    plan: list[dict] = []

    def push(rec: SentenceRecord, voice: Voice, tag: EmotionTag):
        label = derive_label(rec.valence, tag.valence)
        plan.append({
            "sentence_id": rec.sentence_id,
            "voice": voice.name,
            "emotion_tag": tag.name,
            "text": rec.text,
            "text_valence": rec.valence,
            "acoustic_valence": tag.valence,
            "label": label,
        })

    for rec in pool:
        opposite = NEGATIVE_TAGS if rec.valence == "positive" else POSITIVE_TAGS
        for voice in VOICES:
            for tag in opposite:
                push(rec, voice, tag)

    for rec in pool:
        matching = POSITIVE_TAGS if rec.valence == "positive" else NEGATIVE_TAGS
        for vi, voice in enumerate(VOICES):
            draw = np.random.default_rng(np.random.SeedSequence((seed, 500, rec.sentence_id, vi)))
            for idx in draw.choice(4, size=2, replace=False):
                push(rec, voice, matching[int(idx)])

    plan.sort(key=lambda r: (r["label"], r["sentence_id"], r["voice"], r["emotion_tag"]))
    for i, row in enumerate(plan):
        row["sample_id"] = f"{i:04d}"
        row["audio_path"] = f"wav/{row['sample_id']}.wav"
    return plan


def split_stratified(plan: list[dict], ratios=(0.70, 0.15, 0.15), seed: int = 0) -> None:
    """Assign train/val/test in place, stratified at the sentence level.

    Each sentence carries all of its samples (across classes) into one
    split, which keeps the shared-pool property intact on every split: a
    sentence seen in test contributes both its dissonant and congruent
    renderings there. The 15 percent shares put 7.5 sentences per valence
    into val and test, so one sentence per valence straddles the val/test
    boundary with its samples divided evenly between the two; train never
    shares a sentence with val or test.
    """
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise ValueError("split ratios must be non-negative and sum to 1")
    n_val = 50 * ratios[1]
    n_train = 50 * ratios[0]
    if abs(n_train - round(n_train)) > 1e-9 or abs(2 * n_val - round(2 * n_val)) > 1e-9:
        raise ValueError(f"ratios {ratios} are infeasible for 50 sentences per valence")
    n_train = int(round(n_train))
    straddle = abs(n_val - round(n_val)) > 1e-9
    n_val_whole = int(n_val)

    assign: dict[int, str] = {}
    straddlers: set[int] = set()
    for vi, valence in enumerate(("positive", "negative")):
        ids = sorted({r["sentence_id"] for r in plan if r["text_valence"] == valence})
        order = np.random.default_rng(np.random.SeedSequence((seed, 900, vi))).permutation(ids)
        for k, sid in enumerate(order):
            sid = int(sid)
            if k < n_train:
                assign[sid] = "train"
            elif k < n_train + n_val_whole:
                assign[sid] = "val"
            elif k < n_train + 2 * n_val_whole:
                assign[sid] = "test"
            elif straddle and k == n_train + 2 * n_val_whole:
                straddlers.add(sid)
                assign[sid] = "straddle"
            else:
                assign[sid] = "train"

    # straddler sentences: split each (class, voice) group of samples evenly
    # between val and test, seeded
    groups: dict[tuple, list[dict]] = {}
    for row in plan:
        sid = row["sentence_id"]
        if sid in straddlers:
            groups.setdefault((sid, row["label"], row["voice"]), []).append(row)
        else:
            row["split"] = assign[sid]
    for (sid, label, voice), rows in sorted(groups.items()):
        rows.sort(key=lambda r: r["emotion_tag"])
        ss = np.random.SeedSequence((seed, 901, sid, label, stable_hash(voice)))
        order = np.random.default_rng(ss).permutation(len(rows))
        half = len(rows) // 2
        for j, idx in enumerate(order):
            rows[int(idx)]["split"] = "val" if j < half else "test"


def render_seed_for(corpus_seed: int, sample_id: str) -> int:
    return stable_hash(corpus_seed, sample_id)


def generate_corpus(out_dir, seed: int, dry_run: bool = False) -> list[dict]:
    """Build the full manifest and (unless dry_run) render every WAV."""
    plan = build_sample_plan(seed)
    split_stratified(plan, seed=seed)
    out_dir = Path(out_dir)
    if dry_run:
        return plan
    (out_dir / "wav").mkdir(parents=True, exist_ok=True)
    for row in plan:
        voice = VOICE_BY_NAME[row["voice"]]
        tag = ALL_TAGS[row["emotion_tag"]]
        wf = render_waveform(row["text"], voice, tag, render_seed_for(seed, row["sample_id"]))
        write_wav(out_dir / row["audio_path"], wf)
    write_manifest(plan, out_dir / "manifest.jsonl")
    return plan


MANIFEST_FIELDS = ["sample_id", "sentence_id", "voice", "emotion_tag", "text",
                   "text_valence", "acoustic_valence", "label", "split", "audio_path"]


def write_manifest(plan: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in plan:
            fh.write(json.dumps({k: row[k] for k in MANIFEST_FIELDS}) + "\n")


def read_manifest(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
