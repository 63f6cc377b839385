"""Log-odds-ratio comparison of two word distributions with an
informative Dirichlet prior, used to contrast the vocabulary inside a
context with the vocabulary outside it."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .contexts import ContextSpec, detect
from .corpus import Corpus, FrequencyTable

DEFAULT_ALPHA0 = 500.0


@dataclass(frozen=True)
class LogOddsResult:
    word: str
    delta: float
    variance: float
    z: float


def _safe_log_ratio(num: float, den: float) -> float:
    if num <= 0.0:
        return float("-inf")
    if den <= 0.0:
        return float("inf")
    return math.log(num / den)


def log_odds(
    counts_in: FrequencyTable,
    counts_out: FrequencyTable,
    prior: FrequencyTable,
    alpha0: float = DEFAULT_ALPHA0,
) -> list[LogOddsResult]:
    """Per-word log-odds deltas, sorted by z descending.

    The prior must put mass on every word of the union vocabulary; alpha0
    scales it into pseudo-counts.
    """
    if alpha0 <= 0:
        raise ValueError("alpha0 must be positive")
    vocab = sorted(set(counts_in.counts) | set(counts_out.counts))
    if not vocab:
        return []
    n_in = counts_in.total
    n_out = counts_out.total
    prior_total = prior.total
    results = []
    for word in vocab:
        alpha_w = alpha0 * (prior.counts.get(word, 0) / prior_total) if prior_total else 0.0
        y_in = counts_in.counts.get(word, 0)
        y_out = counts_out.counts.get(word, 0)
        delta = _safe_log_ratio(
            y_in + alpha_w, n_in + alpha0 - y_in - alpha_w
        ) - _safe_log_ratio(y_out + alpha_w, n_out + alpha0 - y_out - alpha_w)
        if y_in + alpha_w > 0 and y_out + alpha_w > 0:
            variance = 1.0 / (y_in + alpha_w) + 1.0 / (y_out + alpha_w)
            z = delta / math.sqrt(variance)
        else:
            variance = float("inf")
            z = 0.0 if delta == 0.0 else math.copysign(float("inf"), delta)
        results.append(LogOddsResult(word=word, delta=delta, variance=variance, z=z))
    results.sort(key=lambda r: (-r.z, r.word))
    return results


def context_tables(
    corpus: Corpus, context: ContextSpec
) -> tuple[FrequencyTable, FrequencyTable, FrequencyTable]:
    """(in-context, out-of-context, whole-corpus prior) count tables.

    Stopwords and the cue tokens themselves are left out of the in/out
    tables so the comparison surfaces the company a context keeps rather
    than its own trigger words.  The prior covers all non-stopword tokens.
    """
    stopwords = corpus.stopwords
    inside: Counter = Counter()
    outside: Counter = Counter()
    prior: Counter = Counter()
    for meeting in corpus.meetings:
        for speech in meeting.speeches:
            partition = detect(context, speech)
            cue_positions = {pos for _, pos in partition.cue_tokens}
            for sentence in speech.sentences:
                bucket = inside if sentence.index in partition.in_sentences else outside
                for offset, word in enumerate(sentence.words):
                    if word in stopwords:
                        continue
                    prior[word] += 1
                    if sentence.start + offset in cue_positions:
                        continue
                    bucket[word] += 1
    vocab_size = max(len(prior), 1)
    return (
        FrequencyTable.from_counts(inside, vocab_size),
        FrequencyTable.from_counts(outside, vocab_size),
        FrequencyTable.from_counts(prior, vocab_size),
    )
