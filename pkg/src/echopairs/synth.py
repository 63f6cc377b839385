"""Synthetic meeting corpora with known ground truth.

Speech text is sampled from a Zipfian unigram distribution; cue tokens
("maybe" by default, so the shipped hedges lexicon detects them) are
planted independently per token position.  An optional echo effect
multiplies the sampling weight of every content word from a cue-bearing
sentence by (1 + beta) in *other* speakers' speeches within the chosen
horizon: the rest of the same meeting (intra), the next meeting (inter),
or both.  Everything derives from the seed, so identical configurations
produce byte-identical corpus files.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Meeting, Sentence, Speaker, Speech
from .util import derived_rng


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_meetings: int = 50
    speeches_per_meeting: int = 200
    n_speakers: int = 27
    tokens_per_speech: tuple[int, int] = (100, 300)
    sentence_length: tuple[int, int] = (6, 14)
    vocab_size: int = 5000
    zipf_exponent: float = 1.1
    n_stopwords: int = 20
    cue_probability: float = 0.0
    cue_word: str = "maybe"
    echo_boost: float = 0.0
    echo_horizon: str = "inter"  # "intra" | "inter" | "both"
    boost_stratum: str | None = None  # e.g. "female"

    def __post_init__(self):
        if min(self.n_meetings, self.speeches_per_meeting, self.n_speakers, self.vocab_size) <= 0:
            raise ValueError("all counts must be positive")
        if self.echo_boost < 0:
            raise ValueError("echo_boost must be >= 0")
        if self.echo_horizon not in ("intra", "inter", "both"):
            raise ValueError(f"unknown echo horizon {self.echo_horizon!r}")
        if not 0.0 <= self.cue_probability <= 1.0:
            raise ValueError("cue_probability must lie in [0, 1]")


PROFILES = {
    # Sized so a full validation run stays in the minutes range.
    "small": dict(
        n_meetings=8,
        speeches_per_meeting=40,
        n_speakers=9,
        tokens_per_speech=(60, 120),
        vocab_size=800,
        n_stopwords=12,
    ),
    # Mirrors the observed per-meeting magnitudes of the committee data:
    # ~27 speakers, ~405 speeches, ~37.6k tokens per meeting.
    "paper-scale": dict(
        n_meetings=50,
        speeches_per_meeting=405,
        n_speakers=27,
        tokens_per_speech=(40, 146),
        vocab_size=5000,
    ),
}


def profile(name: str, **overrides) -> SynthConfig:
    if name not in PROFILES:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    params = dict(PROFILES[name])
    params.update(overrides)
    return SynthConfig(**params)


def _roster(n_speakers: int) -> dict[str, Speaker]:
    speakers = {}
    for i in range(n_speakers):
        sid = f"spk{i:02d}"
        speakers[sid] = Speaker(
            id=sid,
            display_name=f"Speaker {i:02d}",
            gender="female" if i % 2 == 1 else "male",
            is_chair=(i == 0),
        )
    return speakers


class _EchoState:
    """Tracks which words currently carry an echo boost.

    A word is boosted for the current speech when at least one *other*
    speaker's active source speech used it in a cue-bearing sentence; the
    boost is (1 + beta) once, regardless of how many sources contributed,
    so heavy-traffic words cannot blow up the distribution.  ``g_*``
    vectors count sources per word; ``p_*`` count each speaker's own
    contribution so self-echo never happens.  Intra sources expire at the
    meeting's end; inter sources collected during meeting m apply
    throughout meeting m + 1.
    """

    def __init__(self, vocab_size: int, boost: float):
        self.v = vocab_size
        self.boost = boost
        self.g_intra = np.zeros(vocab_size, dtype=np.int32)
        self.p_intra: dict[str, np.ndarray] = {}
        self.g_inter_active = np.zeros(vocab_size, dtype=np.int32)
        self.p_inter_active: dict[str, np.ndarray] = {}
        self.g_inter_pending = np.zeros(vocab_size, dtype=np.int32)
        self.p_inter_pending: dict[str, np.ndarray] = {}

    def any_active(self) -> bool:
        return bool(self.g_intra.any() or self.g_inter_active.any())

    def multiplier(self, speaker: str) -> np.ndarray:
        sources = self.g_intra + self.g_inter_active
        for vectors in (self.p_intra, self.p_inter_active):
            own = vectors.get(speaker)
            if own is not None:
                sources = sources - own
        return np.where(sources > 0, 1.0 + self.boost, 1.0)

    def _speaker_vec(self, vectors: dict[str, np.ndarray], speaker: str) -> np.ndarray:
        vec = vectors.get(speaker)
        if vec is None:
            vec = np.zeros(self.v, dtype=np.int32)
            vectors[speaker] = vec
        return vec

    def add_source(self, speaker: str, word_idx: list[int], horizon: str) -> None:
        if not word_idx:
            return
        if horizon in ("intra", "both"):
            self.g_intra[word_idx] += 1
            self._speaker_vec(self.p_intra, speaker)[word_idx] += 1
        if horizon in ("inter", "both"):
            self.g_inter_pending[word_idx] += 1
            self._speaker_vec(self.p_inter_pending, speaker)[word_idx] += 1

    def end_meeting(self) -> None:
        self.g_intra = np.zeros(self.v, dtype=np.int32)
        self.p_intra = {}
        self.g_inter_active = self.g_inter_pending
        self.p_inter_active = self.p_inter_pending
        self.g_inter_pending = np.zeros(self.v, dtype=np.int32)
        self.p_inter_pending = {}


def _zipf_probs(vocab_size: int, exponent: float) -> np.ndarray:
    ranks = np.arange(1, vocab_size + 1, dtype=float)
    weights = ranks ** (-exponent)
    return weights / weights.sum()


def _split_sentences(rng: np.random.Generator, n: int, lo: int, hi: int) -> list[int]:
    lengths = []
    remaining = n
    while remaining > 0:
        length = int(rng.integers(lo, hi + 1))
        lengths.append(min(length, remaining))
        remaining -= lengths[-1]
    return lengths


def generate(config: SynthConfig) -> Corpus:
    """Generate a corpus according to ``config``; deterministic per seed."""
    surfaces = [f"w{i:04d}" for i in range(config.vocab_size)]
    base_probs = _zipf_probs(config.vocab_size, config.zipf_exponent)
    stopwords = set(surfaces[: config.n_stopwords])
    speakers = _roster(config.n_speakers)
    speaker_ids = sorted(speakers)
    tlo, thi = config.tokens_per_speech
    slo, shi = config.sentence_length
    echo = _EchoState(config.vocab_size, config.echo_boost) if config.echo_boost > 0 else None
    start_date = dt.date(1990, 1, 2)

    meetings = []
    for m in range(config.n_meetings):
        rng = derived_rng(config.seed, "meeting", m)
        meeting_id = f"m{m:03d}"
        chosen = [speaker_ids[int(i)] for i in rng.integers(0, config.n_speakers, config.speeches_per_meeting)]
        lengths = [int(n) for n in rng.integers(tlo, thi + 1, config.speeches_per_meeting)]
        if echo is None:
            # Bulk path: one draw per meeting for all speeches' tokens.
            all_tokens = rng.choice(config.vocab_size, size=sum(lengths), p=base_probs)
            cue_mask = (
                rng.random(sum(lengths)) < config.cue_probability
                if config.cue_probability > 0
                else np.zeros(sum(lengths), dtype=bool)
            )
        speeches = []
        offset = 0
        for seq in range(config.speeches_per_meeting):
            speaker, n_tokens = chosen[seq], lengths[seq]
            if echo is None:
                tokens = all_tokens[offset : offset + n_tokens]
                cues = cue_mask[offset : offset + n_tokens]
                offset += n_tokens
            else:
                if echo.any_active():
                    weights = base_probs * echo.multiplier(speaker)
                    weights = weights / weights.sum()
                else:
                    weights = base_probs
                tokens = rng.choice(config.vocab_size, size=n_tokens, p=weights)
                cues = (
                    rng.random(n_tokens) < config.cue_probability
                    if config.cue_probability > 0
                    else np.zeros(n_tokens, dtype=bool)
                )
            words = [config.cue_word if cues[i] else surfaces[tokens[i]] for i in range(n_tokens)]

            sentences = []
            boosted: set[int] = set()
            start = 0
            for s_idx, length in enumerate(_split_sentences(rng, n_tokens, slo, shi)):
                sentences.append(
                    Sentence(index=s_idx, start=start, words=tuple(words[start : start + length]))
                )
                if echo is not None and cues[start : start + length].any():
                    boosted.update(
                        int(t)
                        for i, t in enumerate(tokens[start : start + length])
                        if not cues[start + i] and int(t) >= config.n_stopwords
                    )
                start += length
            speeches.append(
                Speech(speaker_id=speaker, meeting_id=meeting_id, seq=seq, sentences=sentences)
            )
            if echo is not None and boosted:
                if (
                    config.boost_stratum is None
                    or speakers[speaker].gender == config.boost_stratum
                ):
                    echo.add_source(speaker, sorted(boosted), config.echo_horizon)
        if echo is not None:
            echo.end_meeting()
        meetings.append(
            Meeting(id=meeting_id, date=start_date + dt.timedelta(days=45 * m), speeches=speeches)
        )
    return Corpus(meetings=meetings, speakers=speakers, stopwords=stopwords)
