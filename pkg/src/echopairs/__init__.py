"""echopairs: speaker- and time-controlled measurement of word echoing
around rhetorical contexts in multi-speaker meeting transcripts."""

__version__ = "0.1.0"

from .contexts import ContextPartition, ContextSpec, default_context, default_lexicon, detect
from .corpus import (
    Corpus,
    FrequencyTable,
    Meeting,
    Sentence,
    Speaker,
    Speech,
    Token,
    read_corpus,
    tokenize,
    write_corpus,
)
from .effects import (
    EffectCurve,
    EffectPoint,
    HorizonSpec,
    StratumFilter,
    effect,
    future_frequency,
    strata_report,
)
from .fightin import LogOddsResult, log_odds
from .ingest import RawTranscript, ingest_directory, parse_transcript
from .matching import MatchedPair, build_all_pairs, build_pairs, past_frequency
from .synth import SynthConfig, generate

__all__ = [
    "ContextPartition",
    "ContextSpec",
    "Corpus",
    "EffectCurve",
    "EffectPoint",
    "FrequencyTable",
    "HorizonSpec",
    "LogOddsResult",
    "MatchedPair",
    "Meeting",
    "RawTranscript",
    "Sentence",
    "Speaker",
    "Speech",
    "StratumFilter",
    "SynthConfig",
    "Token",
    "build_all_pairs",
    "build_pairs",
    "default_context",
    "default_lexicon",
    "detect",
    "effect",
    "future_frequency",
    "generate",
    "ingest_directory",
    "log_odds",
    "parse_transcript",
    "past_frequency",
    "read_corpus",
    "strata_report",
    "tokenize",
    "write_corpus",
]
