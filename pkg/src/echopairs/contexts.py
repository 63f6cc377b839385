"""Context cue detection: partition each speech's sentences into the set
that contains a cue and the set that does not.

Five context kinds are supported.  ``hedges``, ``contrastive`` and
``second_person`` match a lexicon of words and contiguous phrases;
``superlatives`` is rule-based (``-est`` forms off a blocklist,
``most``/``least`` + content word, ``best``/``worst``); ``random`` marks
each token position as a cue independently with probability ``p`` from a
seeded per-speech substream, which makes it reproducible regardless of
processing order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import data
from .corpus import Sentence, Speech
from .util import derived_rng

KINDS = ("hedges", "superlatives", "contrastive", "second_person", "random")
LEXICON_KINDS = ("hedges", "contrastive", "second_person")


@dataclass(frozen=True)
class ContextSpec:
    """Definition of one context detector.

    ``lexicon`` entries are normalized token tuples of length 1-4 and are
    required for lexicon kinds; ``p`` and ``seed`` are required for the
    random kind and ignored otherwise.  ``most_least`` toggles the
    "most/least + content word" superlative rule; ``blocklist`` and
    ``rule_stopwords`` default to the shipped data files.
    """

    kind: str
    lexicon: frozenset[tuple[str, ...]] | None = None
    p: float | None = None
    seed: int | None = None
    most_least: bool = True
    blocklist: frozenset[str] | None = None
    rule_stopwords: frozenset[str] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown context kind {self.kind!r}")
        if self.kind in LEXICON_KINDS:
            if not self.lexicon:
                raise ValueError(f"{self.kind} context requires a lexicon")
            for entry in self.lexicon:
                if not 1 <= len(entry) <= 4:
                    raise ValueError(f"lexicon entry {entry!r} not 1-4 tokens")
        if self.kind == "random":
            if self.p is None or self.seed is None:
                raise ValueError("random context requires p and seed")
            if not 0.0 <= self.p <= 1.0:
                raise ValueError("p must lie in [0, 1]")


@dataclass(frozen=True)
class ContextPartition:
    meeting_id: str
    seq: int
    in_sentences: frozenset[int]
    out_sentences: frozenset[int]
    cue_tokens: frozenset[tuple[int, int]]  # (sentence index, speech position)

    def swapped(self) -> "ContextPartition":
        """Partition with the in/out labels exchanged (cues unchanged)."""
        return ContextPartition(
            meeting_id=self.meeting_id,
            seq=self.seq,
            in_sentences=self.out_sentences,
            out_sentences=self.in_sentences,
            cue_tokens=self.cue_tokens,
        )


def default_lexicon(kind: str) -> frozenset[tuple[str, ...]]:
    """The shipped lexicon for a lexicon context kind."""
    if kind not in LEXICON_KINDS:
        raise ValueError(f"no default lexicon for kind {kind!r}")
    return data.load_phrases(kind)


def default_context(kind: str, *, p: float | None = None, seed: int | None = None) -> ContextSpec:
    """ContextSpec with the shipped data files for the given kind."""
    if kind in LEXICON_KINDS:
        return ContextSpec(kind=kind, lexicon=default_lexicon(kind))
    if kind == "superlatives":
        return ContextSpec(kind=kind)
    if kind == "random":
        return ContextSpec(kind=kind, p=0.05 if p is None else p, seed=0 if seed is None else seed)
    raise ValueError(f"unknown context kind {kind!r}")


@lru_cache(maxsize=32)
def _lexicon_index(lexicon: frozenset[tuple[str, ...]]) -> dict[str, tuple[tuple[str, ...], ...]]:
    by_first: dict[str, list[tuple[str, ...]]] = {}
    for entry in sorted(lexicon):
        by_first.setdefault(entry[0], []).append(entry)
    return {w: tuple(entries) for w, entries in by_first.items()}


def _lexicon_cues(spec: ContextSpec, sentence: Sentence) -> set[int]:
    """Offsets (within the sentence) of tokens covered by a lexicon match."""
    by_first = _lexicon_index(spec.lexicon)
    cues: set[int] = set()
    words = sentence.words
    for i, word in enumerate(words):
        for entry in by_first.get(word, ()):
            if len(entry) <= len(words) - i and tuple(words[i : i + len(entry)]) == entry:
                cues.update(range(i, i + len(entry)))
    return cues


_IRREGULAR_SUPERLATIVES = frozenset({"best", "worst"})


def _superlative_cues(spec: ContextSpec, sentence: Sentence) -> set[int]:
    blocklist = spec.blocklist if spec.blocklist is not None else data.load_words("superlative_blocklist")
    stopwords = (
        spec.rule_stopwords if spec.rule_stopwords is not None else data.load_words("stopwords")
    )
    cues: set[int] = set()
    words = sentence.words
    for i, word in enumerate(words):
        if word in _IRREGULAR_SUPERLATIVES:
            cues.add(i)
        elif len(word) >= 4 and word.endswith("est") and word not in blocklist:
            cues.add(i)
        elif (
            spec.most_least
            and word in ("most", "least")
            and i + 1 < len(words)
            and words[i + 1] not in stopwords
        ):
            cues.update((i, i + 1))
    return cues


def detect(context: ContextSpec, speech: Speech) -> ContextPartition:
    """Partition the speech's sentences around the context's cues."""
    cue_tokens: set[tuple[int, int]] = set()
    in_sentences: set[int] = set()
    if context.kind == "random":
        rng = derived_rng(context.seed, speech.meeting_id, speech.seq)
        draws = rng.random(speech.n_tokens) < context.p
        for sentence in speech.sentences:
            for offset in range(len(sentence.words)):
                if draws[sentence.start + offset]:
                    cue_tokens.add((sentence.index, sentence.start + offset))
                    in_sentences.add(sentence.index)
    else:
        finder = _superlative_cues if context.kind == "superlatives" else _lexicon_cues
        for sentence in speech.sentences:
            offsets = finder(context, sentence)
            if offsets:
                in_sentences.add(sentence.index)
                cue_tokens.update((sentence.index, sentence.start + o) for o in offsets)
    all_indices = {s.index for s in speech.sentences}
    return ContextPartition(
        meeting_id=speech.meeting_id,
        seq=speech.seq,
        in_sentences=frozenset(in_sentences),
        out_sentences=frozenset(all_indices - in_sentences),
        cue_tokens=frozenset(cue_tokens),
    )
