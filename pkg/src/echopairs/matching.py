"""Matched-pair construction.

For each speech, word types exclusive to the cue-bearing sentences are
paired one-to-one with word types exclusive to the cue-free sentences,
requiring the same prior-frequency bin (smoothed log probability over all
earlier meetings, binned at 0.2) and, by default, the same number of
occurrences within the speech.  Cue tokens and stopwords never enter a
pair.  Pairing is greedy in first-occurrence order, which makes the
output deterministic and mirrors exactly when the sentence labels are
swapped.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .contexts import ContextPartition, ContextSpec, detect
from .corpus import Corpus, FrequencyTable, Speech
from .util import pmap

DEFAULT_BIN_WIDTH = 0.2


@dataclass(frozen=True)
class MatchedPair:
    w_in: str
    w_out: str
    meeting_id: str
    seq: int
    pf_bin: int
    in_speech_count: int


class PastTables:
    """Streaming access to each meeting's strictly-prior frequency table.

    Meetings must be visited in corpus order; the running counter is
    frozen while a meeting is being processed, so per-speech work within
    one meeting can run in parallel.
    """

    def __init__(self, corpus: Corpus):
        self.vocab_size = corpus.vocab_size()
        self._counts: Counter = Counter()
        self._total = 0

    def log_prob(self, word: str) -> float:
        return math.log((self._counts.get(word, 0) + 1) / (self._total + self.vocab_size))

    def table(self) -> FrequencyTable:
        return FrequencyTable(dict(self._counts), self._total, self.vocab_size)

    def absorb(self, speech_counts: Counter) -> None:
        self._counts.update(speech_counts)
        self._total += sum(speech_counts.values())


def past_frequency(corpus: Corpus, speech: Speech, word: str) -> float:
    """Smoothed log probability of ``word`` over all meetings before the
    speech's meeting.  For the first meeting every word sits at the
    smoothing floor."""
    tables = PastTables(corpus)
    for meeting in corpus.meetings:
        if meeting.id == speech.meeting_id:
            return tables.log_prob(word)
        for s in meeting.speeches:
            tables.absorb(s.counts())
    raise ValueError(f"speech's meeting {speech.meeting_id!r} not in corpus")


def pairs_for_speech(
    speech: Speech,
    partition: ContextPartition,
    pf: Callable[[str], float],
    stopwords: frozenset[str] | set[str],
    *,
    counts: Counter | None = None,
    bin_width: float = DEFAULT_BIN_WIDTH,
    inspeech_control: bool = True,
) -> list[MatchedPair]:
    """Matched pairs of one speech given its sentence partition.

    ``pf`` maps a word to its prior-frequency log probability; ``counts``
    may carry a precomputed token counter for the speech.
    """
    if counts is None:
        counts = speech.counts()
    sentences = speech.sentences
    cue_words = {
        sentences[s_idx].words[pos - sentences[s_idx].start]
        for s_idx, pos in partition.cue_tokens
    }

    first_pos: dict[str, int] = {}
    in_flag: dict[str, bool] = {}
    out_flag: dict[str, bool] = {}
    for sentence in speech.sentences:
        is_in = sentence.index in partition.in_sentences
        for offset, word in enumerate(sentence.words):
            if word not in first_pos:
                first_pos[word] = sentence.start + offset
                in_flag[word] = False
                out_flag[word] = False
            if is_in:
                in_flag[word] = True
            else:
                out_flag[word] = True

    groups: dict[tuple, tuple[list[str], list[str]]] = {}
    for word in first_pos:
        if in_flag[word] == out_flag[word]:  # both sides, or neither
            continue
        if word in stopwords or word in cue_words:
            continue
        pf_bin = math.floor(pf(word) / bin_width)
        key = (pf_bin, counts[word]) if inspeech_control else (pf_bin,)
        side = groups.setdefault(key, ([], []))
        side[0 if in_flag[word] else 1].append(word)

    pairs: list[MatchedPair] = []
    for key in sorted(groups):
        ins, outs = groups[key]
        ins.sort(key=first_pos.__getitem__)
        outs.sort(key=first_pos.__getitem__)
        for w_in, w_out in zip(ins, outs):
            pairs.append(
                MatchedPair(
                    w_in=w_in,
                    w_out=w_out,
                    meeting_id=speech.meeting_id,
                    seq=speech.seq,
                    pf_bin=key[0],
                    # Equals the out-word's count too when the in-speech
                    # control is on; informational otherwise.
                    in_speech_count=counts[w_in],
                )
            )
    return pairs


def build_pairs(
    corpus: Corpus,
    context: ContextSpec,
    speech: Speech,
    *,
    bin_width: float = DEFAULT_BIN_WIDTH,
    inspeech_control: bool = True,
) -> list[MatchedPair]:
    """Matched pairs for a single speech (convenience wrapper)."""
    tables = PastTables(corpus)
    for meeting in corpus.meetings:
        if meeting.id == speech.meeting_id:
            break
        for s in meeting.speeches:
            tables.absorb(s.counts())
    else:
        raise ValueError(f"speech's meeting {speech.meeting_id!r} not in corpus")
    partition = detect(context, speech)
    return pairs_for_speech(
        speech,
        partition,
        tables.log_prob,
        corpus.stopwords,
        bin_width=bin_width,
        inspeech_control=inspeech_control,
    )


@dataclass
class PairIndex:
    """All matched pairs of a corpus, keyed by (meeting index, seq)."""

    context_kind: str
    bin_width: float
    inspeech_control: bool
    by_speech: dict[tuple[int, int], list[MatchedPair]] = field(default_factory=dict)

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_speech.values())

    def iter_pairs(self) -> Iterator[MatchedPair]:
        for key in sorted(self.by_speech):
            yield from self.by_speech[key]


def build_all_pairs(
    corpus: Corpus,
    context: ContextSpec,
    *,
    bin_width: float = DEFAULT_BIN_WIDTH,
    inspeech_control: bool = True,
    threads: int = 1,
) -> PairIndex:
    """Matched pairs for every speech of the corpus in one streaming pass."""
    index = PairIndex(
        context_kind=context.kind, bin_width=bin_width, inspeech_control=inspeech_control
    )
    tables = PastTables(corpus)
    for m_idx, meeting in enumerate(corpus.meetings):
        speech_counts = [s.counts() for s in meeting.speeches]

        def work(item: tuple[Speech, Counter]) -> list[MatchedPair]:
            speech, counts = item
            partition = detect(context, speech)
            if not partition.in_sentences or not partition.out_sentences:
                return []
            return pairs_for_speech(
                speech,
                partition,
                tables.log_prob,
                corpus.stopwords,
                counts=counts,
                bin_width=bin_width,
                inspeech_control=inspeech_control,
            )

        results = pmap(work, list(zip(meeting.speeches, speech_counts)), threads)
        for speech, pairs in zip(meeting.speeches, results):
            if pairs:
                index.by_speech[(m_idx, speech.seq)] = pairs
        for counts in speech_counts:
            tables.absorb(counts)
    return index
