"""Per-horizon echo effects.

For every matched pair of a speech we compare how often the two words are
used by *other* speakers afterwards, either inside windows of later
speeches in the same meeting (intra) or in whole subsequent meetings
(inter).  The per-speech winning rate of the in-context words, macro
averaged over speeches, minus the 0.5 null gives the effect at each
horizon.

Within one pair and horizon both words share the same pool, so the
smoothed log-probability comparison reduces to comparing raw pool counts;
the scoring below relies on that and never takes a logarithm.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field

from .contexts import ContextSpec
from .corpus import Corpus, FrequencyTable, Meeting, Speech
from .matching import DEFAULT_BIN_WIDTH, MatchedPair, PairIndex, build_all_pairs
from .util import pmap

TIE_POLICIES = ("half", "strict")


@dataclass(frozen=True)
class HorizonSpec:
    mode: str  # "intra" | "inter"
    window_size: int = 5
    num_windows: int = 20
    num_meetings: int = 5

    def __post_init__(self):
        if self.mode not in ("intra", "inter"):
            raise ValueError(f"unknown horizon mode {self.mode!r}")
        if min(self.window_size, self.num_windows, self.num_meetings) <= 0:
            raise ValueError("horizon counts must be positive")

    def horizons(self) -> range:
        return range(1, (self.num_windows if self.mode == "intra" else self.num_meetings) + 1)


@dataclass(frozen=True)
class EffectPoint:
    horizon: int
    effect: float  # nan when no speech contributes
    stderr: float
    n_speeches: int


@dataclass(frozen=True)
class EffectCurve:
    context: str
    mode: str
    points: tuple[EffectPoint, ...]
    fit_slope: float
    fit_intercept: float


@dataclass(frozen=True)
class StratumFilter:
    """Speech filter for stratified curves.

    kind "all" | "gender" (chair speeches excluded) | "chair" | "length".
    """

    kind: str = "all"
    gender: str | None = None
    chair: bool | None = None
    length: str | None = None  # "long" | "short"

    @classmethod
    def all(cls) -> "StratumFilter":
        return cls()

    @classmethod
    def for_gender(cls, gender: str) -> "StratumFilter":
        return cls(kind="gender", gender=gender)

    @classmethod
    def for_chair(cls, is_chair: bool) -> "StratumFilter":
        return cls(kind="chair", chair=is_chair)

    @classmethod
    def for_length(cls, which: str) -> "StratumFilter":
        if which not in ("long", "short"):
            raise ValueError("length stratum must be 'long' or 'short'")
        return cls(kind="length", length=which)


@dataclass(frozen=True)
class SpeechMeta:
    speaker_id: str
    gender: str
    is_chair: bool
    n_tokens: int
    n_pairs: int


@dataclass
class RateTable:
    """Per-speech winning rates for every available horizon."""

    mode: str
    horizons: list[int]
    rows: dict[int, list[tuple[int, int, float]]]  # k -> [(meeting idx, seq, rate)]
    meta: dict[tuple[int, int], SpeechMeta]


def _score_half(c_in: int, c_out: int) -> float:
    if c_in > c_out:
        return 1.0
    if c_in < c_out:
        return 0.0
    return 0.5


def _score_strict(c_in: int, c_out: int) -> float:
    return 1.0 if c_in > c_out else 0.0


def future_frequency(
    corpus: Corpus, speech: Speech, word: str, horizon: tuple[str, int]
) -> float | None:
    """Smoothed log probability of ``word`` in other speakers' speeches
    after ``speech`` at the given (mode, k) horizon.

    Returns None when the horizon is unavailable: the intra window would
    extend past the meeting's end, fewer than k meetings follow, or the
    pool is empty once the speaker is excluded.
    """
    mode, k = horizon
    if mode not in ("intra", "inter") or k < 1:
        raise ValueError(f"bad horizon {horizon!r}")
    m_idx = next(
        (i for i, m in enumerate(corpus.meetings) if m.id == speech.meeting_id), None
    )
    if m_idx is None:
        raise ValueError(f"speech's meeting {speech.meeting_id!r} not in corpus")
    if mode == "intra":
        window = 5
        a = speech.seq + (k - 1) * window + 1
        b = speech.seq + k * window
        pool = corpus.meetings[m_idx].speeches[a : b + 1]
        if b >= len(corpus.meetings[m_idx].speeches):
            return None
    else:
        if m_idx + k >= len(corpus.meetings):
            return None
        pool = corpus.meetings[m_idx + k].speeches
    counts: Counter = Counter()
    for s in pool:
        if s.speaker_id != speech.speaker_id:
            counts.update(s.iter_words())
    if not counts:
        return None
    return FrequencyTable.from_counts(counts, corpus.vocab_size()).log_prob(word)


class _WindowStats:
    """Prefix sums and per-word occurrence lists for one meeting's speeches."""

    def __init__(self, meeting: Meeting, query_words: set[str], speakers: set[str]):
        n = len(meeting.speeches)
        self.n = n
        counters = [s.counts() for s in meeting.speeches]
        self.total_prefix = [0] * (n + 1)
        self.speaker_prefix = {sp: [0] * (n + 1) for sp in speakers}
        self.occ: dict[str, tuple[list[int], list[int], list[str]]] = {}
        for i, (speech, counts) in enumerate(zip(meeting.speeches, counters)):
            total = sum(counts.values())
            self.total_prefix[i + 1] = self.total_prefix[i] + total
            for sp, prefix in self.speaker_prefix.items():
                prefix[i + 1] = prefix[i] + (total if speech.speaker_id == sp else 0)
            for word, c in counts.items():
                if word in query_words:
                    seqs, cnts, spks = self.occ.setdefault(word, ([], [], []))
                    seqs.append(i)
                    cnts.append(c)
                    spks.append(speech.speaker_id)

    def window_counts(self, word: str, seq: int, speaker: str, ws: int, kmax: int) -> list[int]:
        """Counts of ``word`` per window after ``seq``, excluding ``speaker``."""
        vec = [0] * kmax
        entry = self.occ.get(word)
        if entry is None:
            return vec
        seqs, cnts, spks = entry
        stop = seq + kmax * ws
        i = bisect_left(seqs, seq + 1)
        while i < len(seqs) and seqs[i] <= stop:
            if spks[i] != speaker:
                vec[(seqs[i] - seq - 1) // ws] += cnts[i]
            i += 1
        return vec

    def pool_total(self, seq: int, speaker: str, ws: int, k: int) -> int:
        a, b = seq + (k - 1) * ws + 1, seq + k * ws
        total = self.total_prefix[b + 1] - self.total_prefix[a]
        prefix = self.speaker_prefix.get(speaker)
        if prefix is not None:
            total -= prefix[b + 1] - prefix[a]
        return total


def _meeting_pairs(pair_index: PairIndex, m_idx: int) -> list[tuple[int, list[MatchedPair]]]:
    return sorted(
        (seq, pairs) for (mi, seq), pairs in pair_index.by_speech.items() if mi == m_idx
    )


def _intra_rates(
    corpus: Corpus, pair_index: PairIndex, spec: HorizonSpec, score, threads: int
) -> dict[int, list[tuple[int, int, float]]]:
    rows: dict[int, list[tuple[int, int, float]]] = {k: [] for k in spec.horizons()}
    ws, num_w = spec.window_size, spec.num_windows
    for m_idx, meeting in enumerate(corpus.meetings):
        plist = _meeting_pairs(pair_index, m_idx)
        if not plist:
            continue
        query = {w for _, pairs in plist for p in pairs for w in (p.w_in, p.w_out)}
        speakers = {meeting.speeches[seq].speaker_id for seq, _ in plist}
        stats = _WindowStats(meeting, query, speakers)

        def work(item: tuple[int, list[MatchedPair]]):
            seq, pairs = item
            speaker = meeting.speeches[seq].speaker_id
            kmax = min(num_w, (stats.n - 1 - seq) // ws)
            if kmax < 1:
                return []
            vecs = {
                w: stats.window_counts(w, seq, speaker, ws, kmax)
                for w in {x for p in pairs for x in (p.w_in, p.w_out)}
            }
            out = []
            for k in range(1, kmax + 1):
                if stats.pool_total(seq, speaker, ws, k) == 0:
                    continue
                scores = [score(vecs[p.w_in][k - 1], vecs[p.w_out][k - 1]) for p in pairs]
                out.append((k, seq, sum(scores) / len(scores)))
            return out

        for result in pmap(work, plist, threads):
            for k, seq, rate in result:
                rows[k].append((m_idx, seq, rate))
    return rows


def _inter_rates(
    corpus: Corpus, pair_index: PairIndex, spec: HorizonSpec, score, threads: int
) -> dict[int, list[tuple[int, int, float]]]:
    rows: dict[int, list[tuple[int, int, float]]] = {k: [] for k in spec.horizons()}
    num_m = spec.num_meetings
    staged: dict[int, list[tuple[int, int, list[MatchedPair]]]] = {}
    for (m_idx, seq), pairs in sorted(pair_index.by_speech.items()):
        for k in range(1, num_m + 1):
            target = m_idx + k
            if target < len(corpus.meetings):
                staged.setdefault(target, []).append((m_idx, seq, pairs))

    for target, sources in sorted(staged.items()):
        meeting = corpus.meetings[target]
        query = {w for _, _, pairs in sources for p in pairs for w in (p.w_in, p.w_out)}
        counts: dict[str, int] = {}
        by_speaker: dict[str, dict[str, int]] = {}
        speaker_totals: dict[str, int] = {}
        meeting_total = 0
        for s in meeting.speeches:
            c = s.counts()
            total = sum(c.values())
            meeting_total += total
            speaker_totals[s.speaker_id] = speaker_totals.get(s.speaker_id, 0) + total
            for word, cnt in c.items():
                if word in query:
                    counts[word] = counts.get(word, 0) + cnt
                    per = by_speaker.setdefault(word, {})
                    per[s.speaker_id] = per.get(s.speaker_id, 0) + cnt

        def work(item: tuple[int, int, list[MatchedPair]]):
            m_idx, seq, pairs = item
            speaker = corpus.meetings[m_idx].speeches[seq].speaker_id
            if meeting_total - speaker_totals.get(speaker, 0) == 0:
                return None
            scores = []
            for p in pairs:
                c_in = counts.get(p.w_in, 0) - by_speaker.get(p.w_in, {}).get(speaker, 0)
                c_out = counts.get(p.w_out, 0) - by_speaker.get(p.w_out, {}).get(speaker, 0)
                scores.append(score(c_in, c_out))
            return (target - m_idx, m_idx, seq, sum(scores) / len(scores))

        for result in pmap(work, sources, threads):
            if result is not None:
                k, m_idx, seq, rate = result
                rows[k].append((m_idx, seq, rate))
    for k in rows:
        rows[k].sort()
    return rows


def speech_rates(
    corpus: Corpus,
    pair_index: PairIndex,
    spec: HorizonSpec,
    *,
    tie_policy: str = "half",
    threads: int = 1,
) -> RateTable:
    """Per-speech winning rates at every horizon of ``spec``."""
    if tie_policy not in TIE_POLICIES:
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    score = _score_half if tie_policy == "half" else _score_strict
    if spec.mode == "intra":
        rows = _intra_rates(corpus, pair_index, spec, score, threads)
    else:
        rows = _inter_rates(corpus, pair_index, spec, score, threads)
    meta = {}
    for (m_idx, seq), pairs in pair_index.by_speech.items():
        speech = corpus.meetings[m_idx].speeches[seq]
        speaker = corpus.speakers[speech.speaker_id]
        meta[(m_idx, seq)] = SpeechMeta(
            speaker_id=speaker.id,
            gender=speaker.gender,
            is_chair=speaker.is_chair,
            n_tokens=speech.n_tokens,
            n_pairs=len(pairs),
        )
    return RateTable(mode=spec.mode, horizons=list(spec.horizons()), rows=rows, meta=meta)


def _length_split(meta: dict[tuple[int, int], SpeechMeta]) -> dict[tuple[int, int], str]:
    """Rank-based median split of pair-bearing speeches by token count.

    Ranking (with a deterministic tiebreak) keeps the two halves within
    one speech of each other even when many counts tie at the median.
    """
    keys = sorted(meta, key=lambda k: (meta[k].n_tokens, k))
    cut = (len(keys) + 1) // 2
    return {k: ("short" if i < cut else "long") for i, k in enumerate(keys)}


def _eligible(
    stratum: StratumFilter,
    meta: dict[tuple[int, int], SpeechMeta],
    length_split: dict[tuple[int, int], str] | None,
) -> set[tuple[int, int]]:
    chosen = set()
    for key, m in meta.items():
        if stratum.kind == "all":
            ok = True
        elif stratum.kind == "gender":
            ok = m.gender == stratum.gender and not m.is_chair
        elif stratum.kind == "chair":
            ok = m.is_chair == stratum.chair
        elif stratum.kind == "length":
            ok = length_split is not None and length_split[key] == stratum.length
        else:
            raise ValueError(f"unknown stratum kind {stratum.kind!r}")
        if ok:
            chosen.add(key)
    return chosen


def _ols(points: list[EffectPoint]) -> tuple[float, float]:
    xy = [(p.horizon, p.effect) for p in points if p.n_speeches > 0 and not math.isnan(p.effect)]
    if len(xy) < 2:
        return (float("nan"), float("nan"))
    n = len(xy)
    mean_x = sum(x for x, _ in xy) / n
    mean_y = sum(y for _, y in xy) / n
    sxx = sum((x - mean_x) ** 2 for x, _ in xy)
    if sxx == 0.0:
        return (float("nan"), float("nan"))
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in xy)
    slope = sxy / sxx
    return (slope, mean_y - slope * mean_x)


def curve_from_rates(
    rates: RateTable, stratum: StratumFilter, context_kind: str
) -> EffectCurve:
    length_split = _length_split(rates.meta) if stratum.kind == "length" else None
    chosen = _eligible(stratum, rates.meta, length_split)
    points = []
    for k in rates.horizons:
        vals = [rate for m_idx, seq, rate in rates.rows[k] if (m_idx, seq) in chosen]
        n = len(vals)
        if n == 0:
            points.append(EffectPoint(horizon=k, effect=float("nan"), stderr=float("nan"), n_speeches=0))
            continue
        mean = sum(vals) / n
        if n > 1:
            var = sum((v - mean) ** 2 for v in vals) / (n - 1)
            stderr = math.sqrt(var) / math.sqrt(n)
        else:
            stderr = 0.0
        points.append(EffectPoint(horizon=k, effect=mean - 0.5, stderr=stderr, n_speeches=n))
    slope, intercept = _ols(points)
    return EffectCurve(
        context=context_kind,
        mode=rates.mode,
        points=tuple(points),
        fit_slope=slope,
        fit_intercept=intercept,
    )


def effect(
    corpus: Corpus,
    context: ContextSpec,
    horizon_spec: HorizonSpec,
    stratum: StratumFilter | None = None,
    *,
    tie_policy: str = "half",
    bin_width: float = DEFAULT_BIN_WIDTH,
    inspeech_control: bool = True,
    threads: int = 1,
) -> EffectCurve:
    """Effect curve for one context, horizon mode, and stratum."""
    pair_index = build_all_pairs(
        corpus, context, bin_width=bin_width, inspeech_control=inspeech_control, threads=threads
    )
    rates = speech_rates(corpus, pair_index, horizon_spec, tie_policy=tie_policy, threads=threads)
    return curve_from_rates(rates, stratum or StratumFilter.all(), context.kind)


STRATA = {
    "female": StratumFilter.for_gender("female"),
    "male": StratumFilter.for_gender("male"),
    "chair": StratumFilter.for_chair(True),
    "nonchair": StratumFilter.for_chair(False),
    "long": StratumFilter.for_length("long"),
    "short": StratumFilter.for_length("short"),
}


def strata_report(
    corpus: Corpus,
    context: ContextSpec,
    horizon_spec: HorizonSpec,
    *,
    tie_policy: str = "half",
    bin_width: float = DEFAULT_BIN_WIDTH,
    inspeech_control: bool = True,
    threads: int = 1,
) -> dict[str, EffectCurve]:
    """Effect curves for the gender, chair, and length strata."""
    pair_index = build_all_pairs(
        corpus, context, bin_width=bin_width, inspeech_control=inspeech_control, threads=threads
    )
    rates = speech_rates(corpus, pair_index, horizon_spec, tie_policy=tie_policy, threads=threads)
    return {name: curve_from_rates(rates, stratum, context.kind) for name, stratum in STRATA.items()}
