"""Core data model for multi-speaker meeting corpora.

Holds the immutable corpus structures (speakers, speeches, meetings), the
tokenizer shared by every pipeline stage, add-one-smoothed frequency
tables, and the canonical line-delimited corpus file format.
"""
from __future__ import annotations

import datetime as dt
import json
import math
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

FORMAT_VERSION = 1
GENDERS = ("male", "female", "unknown")


class CorpusFormatError(ValueError):
    """Corpus file cannot be parsed; the message names the offending line."""


# Abbreviation protection is case-sensitive on purpose: normalized
# (lowercased) text never matches, so a rewritten corpus re-splits exactly
# at the sentence boundaries the writer emitted.
_ABBREVIATIONS = ("Mrs.", "Mr.", "Ms.", "Dr.", "U.S.")
_PROTECT = ""
_SENTENCE_SPLIT = re.compile(r"(?<=[.?!])\s+")
_STRIP_CHARS = string.punctuation + "‘’“”–—…«»"


@dataclass(frozen=True)
class Speaker:
    id: str
    display_name: str
    gender: str = "unknown"
    is_chair: bool = False


@dataclass(frozen=True)
class Token:
    """A normalized word with its 0-based position within the speech."""

    surface: str
    position: int


@dataclass(frozen=True)
class Sentence:
    """One sentence of a speech.

    ``start`` is the speech-level position of the first word; word
    positions run consecutively across the sentences of a speech.
    """

    index: int
    start: int
    words: tuple[str, ...]

    @property
    def tokens(self) -> list[Token]:
        return [Token(w, self.start + i) for i, w in enumerate(self.words)]


@dataclass
class Speech:
    speaker_id: str
    meeting_id: str
    seq: int
    sentences: list[Sentence]

    def iter_words(self) -> Iterator[str]:
        for sentence in self.sentences:
            yield from sentence.words

    @property
    def n_tokens(self) -> int:
        return sum(len(s.words) for s in self.sentences)

    def word_at(self, position: int) -> str:
        for sentence in self.sentences:
            if sentence.start <= position < sentence.start + len(sentence.words):
                return sentence.words[position - sentence.start]
        raise IndexError(f"no token at position {position}")

    def counts(self) -> Counter:
        return Counter(self.iter_words())


@dataclass
class Meeting:
    id: str
    date: dt.date
    speeches: list[Speech]


@dataclass
class Corpus:
    meetings: list[Meeting]
    speakers: dict[str, Speaker]
    stopwords: set[str] = field(default_factory=set)

    def vocabulary(self) -> set[str]:
        vocab = getattr(self, "_vocab", None)
        if vocab is None:
            vocab = set()
            for meeting in self.meetings:
                for speech in meeting.speeches:
                    vocab.update(speech.iter_words())
            object.__setattr__(self, "_vocab", vocab)
        return vocab

    def vocab_size(self) -> int:
        return len(self.vocabulary())

    def check(self) -> None:
        """Raise ValueError when a structural invariant is violated."""
        last_date = None
        for meeting in self.meetings:
            if last_date is not None and meeting.date < last_date:
                raise ValueError(f"meeting {meeting.id}: dates not non-decreasing")
            last_date = meeting.date
            for i, speech in enumerate(meeting.speeches):
                if speech.seq != i:
                    raise ValueError(
                        f"meeting {meeting.id}: speech seq {speech.seq} at index {i}"
                    )
                if speech.speaker_id not in self.speakers:
                    raise ValueError(
                        f"meeting {meeting.id} seq {speech.seq}: "
                        f"unknown speaker {speech.speaker_id!r}"
                    )


@dataclass(frozen=True)
class FrequencyTable:
    """Word counts with add-one smoothing over a fixed vocabulary size."""

    counts: dict[str, int]
    total: int
    vocab_size: int

    @classmethod
    def from_counts(cls, counts: Counter | dict[str, int], vocab_size: int) -> "FrequencyTable":
        counts = dict(counts)
        return cls(counts=counts, total=sum(counts.values()), vocab_size=vocab_size)

    def log_prob(self, word: str) -> float:
        if self.vocab_size <= 0:
            raise ValueError("vocab_size must be positive")
        return math.log((self.counts.get(word, 0) + 1) / (self.total + self.vocab_size))


def tokenize(raw_text: str) -> list[Sentence]:
    """Split one speech's text into normalized sentences.

    Sentences break on terminal punctuation (. ? !) followed by
    whitespace, except after the small protected abbreviation set.  Words
    are lowercased with leading/trailing punctuation stripped; internal
    hyphens, slashes, and apostrophes survive (so "14-1/2" is one token).
    Empty tokens and empty sentences are dropped.
    """
    if not raw_text or not raw_text.strip():
        return []
    protected = raw_text
    for abbr in _ABBREVIATIONS:
        protected = protected.replace(abbr, abbr.replace(".", _PROTECT))
    sentences: list[Sentence] = []
    position = 0
    for segment in _SENTENCE_SPLIT.split(protected):
        segment = segment.replace(_PROTECT, ".")
        words = []
        for raw in segment.split():
            word = raw.lower().strip(_STRIP_CHARS)
            if word:
                words.append(word)
        if words:
            sentences.append(Sentence(index=len(sentences), start=position, words=tuple(words)))
            position += len(words)
    return sentences


def speech_text(speech: Speech) -> str:
    """Canonical textual form of a speech; tokenizing it recovers the speech."""
    if not speech.sentences:
        return ""
    return ". ".join(" ".join(s.words) for s in speech.sentences) + "."


def summary(corpus: Corpus) -> dict[str, float]:
    """Per-meeting averages: distinct speakers, speeches, tokens."""
    n = len(corpus.meetings)
    if n == 0:
        return {"meetings": 0, "speakers_per_meeting": 0.0, "speeches_per_meeting": 0.0, "tokens_per_meeting": 0.0}
    speakers = sum(len({s.speaker_id for s in m.speeches}) for m in corpus.meetings)
    speeches = sum(len(m.speeches) for m in corpus.meetings)
    tokens = sum(s.n_tokens for m in corpus.meetings for s in m.speeches)
    return {
        "meetings": n,
        "speakers_per_meeting": speakers / n,
        "speeches_per_meeting": speeches / n,
        "tokens_per_meeting": tokens / n,
    }


def _speech_record(corpus: Corpus, meeting: Meeting, speech: Speech) -> dict:
    speaker = corpus.speakers[speech.speaker_id]
    return {
        "meeting_id": meeting.id,
        "date": meeting.date.isoformat(),
        "seq": speech.seq,
        "speaker_id": speaker.id,
        "speaker_name": speaker.display_name,
        "gender": speaker.gender,
        "is_chair": speaker.is_chair,
        "text": speech_text(speech),
    }


def corpus_lines(corpus: Corpus) -> Iterator[str]:
    corpus.check()
    meta = {
        "type": "meta",
        "format_version": FORMAT_VERSION,
        "stopwords": sorted(corpus.stopwords),
    }
    yield json.dumps(meta, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    records = []
    for meeting in corpus.meetings:
        for speech in meeting.speeches:
            records.append((meeting.date.isoformat(), meeting.id, speech.seq, meeting, speech))
    records.sort(key=lambda r: (r[0], r[1], r[2]))
    for _, _, _, meeting, speech in records:
        yield json.dumps(
            _speech_record(corpus, meeting, speech),
            sort_keys=True,
            ensure_ascii=False,
            separators=(",", ":"),
        )


def corpus_to_bytes(corpus: Corpus) -> bytes:
    return ("\n".join(corpus_lines(corpus)) + "\n").encode("utf-8")


def write_corpus(corpus: Corpus, path: str | Path) -> Path:
    path = Path(path)
    path.write_bytes(corpus_to_bytes(corpus))
    return path


def _parse_meta(line: str) -> dict:
    try:
        meta = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"line 1: invalid JSON ({exc})") from None
    if not isinstance(meta, dict) or meta.get("type") != "meta":
        raise CorpusFormatError("line 1: expected the meta record")
    if meta.get("format_version") != FORMAT_VERSION:
        raise CorpusFormatError(
            f"line 1: unsupported format_version {meta.get('format_version')!r}"
        )
    return meta


def read_corpus(path: str | Path) -> Corpus:
    """Parse a canonical corpus file; inverse of :func:`write_corpus`."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CorpusFormatError("line 1: empty file, missing meta record")
    meta = _parse_meta(lines[0])
    stopwords = set(meta.get("stopwords", []))

    meetings: list[Meeting] = []
    speakers: dict[str, Speaker] = {}
    seen_meetings: set[str] = set()
    current: Meeting | None = None
    last_key: tuple[str, str] | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc})") from None
        try:
            meeting_id = rec["meeting_id"]
            date = dt.date.fromisoformat(rec["date"])
            seq = rec["seq"]
            speaker = Speaker(
                id=rec["speaker_id"],
                display_name=rec["speaker_name"],
                gender=rec["gender"],
                is_chair=bool(rec["is_chair"]),
            )
            text = rec["text"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"line {lineno}: bad speech record ({exc})") from None
        if speaker.gender not in GENDERS:
            raise CorpusFormatError(f"line {lineno}: unknown gender {speaker.gender!r}")
        known = speakers.get(speaker.id)
        if known is None:
            speakers[speaker.id] = speaker
        elif known != speaker:
            raise CorpusFormatError(
                f"line {lineno}: speaker {speaker.id!r} conflicts with an earlier record"
            )
        key = (rec["date"], meeting_id)
        if last_key is not None and key < last_key:
            raise CorpusFormatError(f"line {lineno}: records not sorted by (date, meeting_id, seq)")
        if current is None or current.id != meeting_id:
            if meeting_id in seen_meetings:
                raise CorpusFormatError(
                    f"line {lineno}: meeting {meeting_id!r} appears in two separate blocks"
                )
            current = Meeting(id=meeting_id, date=date, speeches=[])
            meetings.append(current)
            seen_meetings.add(meeting_id)
        if seq != len(current.speeches):
            raise CorpusFormatError(
                f"line {lineno}: expected seq {len(current.speeches)}, found {seq}"
            )
        current.speeches.append(
            Speech(
                speaker_id=speaker.id,
                meeting_id=meeting_id,
                seq=seq,
                sentences=tokenize(text),
            )
        )
        last_key = key
    corpus = Corpus(meetings=meetings, speakers=speakers, stopwords=stopwords)
    try:
        corpus.check()
    except ValueError as exc:
        raise CorpusFormatError(str(exc)) from None
    return corpus
