"""Command-line interface.

Subcommands: ingest, contexts, pairs, effect, strata, fightin, synth,
validate.  Every run that writes an output file also writes
``<output>.manifest.json`` recording the resolved configuration and the
sha256 of the corpus it consumed, so results stay traceable.

Exit codes: 0 success, 1 usage error, 2 data error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .contexts import KINDS, LEXICON_KINDS, ContextSpec, default_context, detect
from .corpus import (
    Corpus,
    CorpusFormatError,
    corpus_to_bytes,
    read_corpus,
    summary,
    write_corpus,
)
from .effects import (
    STRATA,
    EffectCurve,
    HorizonSpec,
    StratumFilter,
    curve_from_rates,
    speech_rates,
)
from .fightin import DEFAULT_ALPHA0, context_tables, log_odds
from .ingest import TranscriptParseError, ingest_directory
from .matching import DEFAULT_BIN_WIDTH, build_all_pairs
from .synth import PROFILES, SynthConfig, generate, profile

log = logging.getLogger("echopairs")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VALIDATION = 3


class DataError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1 here
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _corpus_hash(path: Path | None, corpus: Corpus | None = None) -> str:
    if path is not None:
        return _sha256(Path(path).read_bytes())
    assert corpus is not None
    return _sha256(corpus_to_bytes(corpus))


def _write_manifest(out: Path, command: str, config: dict, corpus_hash: str | None) -> None:
    manifest = {
        "tool": "echopairs",
        "version": __version__,
        "command": command,
        "config": config,
        "corpus_sha256": corpus_hash,
        "outputs": [out.name],
    }
    Path(str(out) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _config_dict(args: argparse.Namespace) -> dict:
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func",) or callable(value):
            continue
        cfg[key] = str(value) if isinstance(value, Path) else value
    return cfg


def _load_corpus(path: str) -> Corpus:
    try:
        return read_corpus(path)
    except (OSError, CorpusFormatError) as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from None


def _context_from_args(args: argparse.Namespace) -> ContextSpec:
    kind = args.context
    if kind in LEXICON_KINDS and getattr(args, "lexicon", None):
        entries = []
        for line in Path(args.lexicon).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip().lower()
            if line:
                entries.append(tuple(line.split()))
        return ContextSpec(kind=kind, lexicon=frozenset(entries))
    if kind == "random":
        return default_context("random", p=args.p, seed=args.seed)
    return default_context(kind)


def _horizon_from_args(args: argparse.Namespace) -> HorizonSpec:
    if args.mode == "intra":
        return HorizonSpec(mode="intra", window_size=args.window_size, num_windows=args.windows)
    return HorizonSpec(mode="inter", num_meetings=args.horizon)


def _fmt(value: float | int | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return repr(value) if isinstance(value, float) else str(value)


def _curve_rows(curve: EffectCurve, stratum: str | None = None) -> list[dict]:
    rows = []
    for p in curve.points:
        row = {
            "horizon": p.horizon,
            "effect": p.effect,
            "stderr": p.stderr,
            "n_speeches": p.n_speeches,
            "fit_slope": curve.fit_slope,
            "fit_intercept": curve.fit_intercept,
        }
        if stratum is not None:
            row = {"stratum": stratum, **row}
        rows.append(row)
    return rows


def _nan_to_none(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_none(v) for v in obj]
    return obj


def _write_rows(out: Path, rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        out.write_text(json.dumps(_nan_to_none(rows), indent=2) + "\n", encoding="utf-8")
        return
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) if isinstance(v, float) else v for k, v in row.items()})


# --- subcommands -----------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    try:
        result = ingest_directory(args.in_dir, strict=args.strict)
    except TranscriptParseError as exc:
        raise DataError(str(exc)) from None
    out = Path(args.out)
    write_corpus(result.corpus, out)
    stats = summary(result.corpus)
    print(
        f"ingested {stats['meetings']} meetings -> {out} "
        f"({stats['speakers_per_meeting']:.2f} speakers, "
        f"{stats['speeches_per_meeting']:.2f} speeches, "
        f"{stats['tokens_per_meeting']:.2f} tokens per meeting)"
    )
    _write_manifest(out, "ingest", _config_dict(args), _corpus_hash(out))
    if result.skipped:
        print(f"warning: skipped {len(result.skipped)} file(s): {', '.join(result.skipped)}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_contexts(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    context = _context_from_args(args)
    lines = []
    for m_idx, meeting in enumerate(corpus.meetings):
        for speech in meeting.speeches:
            partition = detect(context, speech)
            lines.append(
                json.dumps(
                    {
                        "meeting_id": meeting.id,
                        "seq": speech.seq,
                        "in_sentences": sorted(partition.in_sentences),
                        "out_sentences": sorted(partition.out_sentences),
                        "cue_tokens": sorted(map(list, partition.cue_tokens)),
                    },
                    sort_keys=True,
                )
            )
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        _write_manifest(out, "contexts", _config_dict(args), _corpus_hash(Path(args.corpus)))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_pairs(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    context = _context_from_args(args)
    index = build_all_pairs(
        corpus,
        context,
        bin_width=args.bin_width,
        inspeech_control=not args.no_inspeech_control,
        threads=args.threads,
    )
    out = Path(args.out)
    with out.open("w", encoding="utf-8") as fh:
        for pair in index.iter_pairs():
            fh.write(json.dumps(dataclasses.asdict(pair), sort_keys=True) + "\n")
    print(f"wrote {len(index)} pairs from {len(index.by_speech)} speeches -> {out}")
    _write_manifest(out, "pairs", _config_dict(args), _corpus_hash(Path(args.corpus)))
    return EXIT_OK


def cmd_effect(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    context = _context_from_args(args)
    spec = _horizon_from_args(args)
    index = build_all_pairs(
        corpus,
        context,
        bin_width=args.bin_width,
        inspeech_control=not args.no_inspeech_control,
        threads=args.threads,
    )
    if len(index) == 0:
        raise DataError("no matched pairs found; corpus too small or context never fires")
    rates = speech_rates(corpus, index, spec, tie_policy=args.tie_policy, threads=args.threads)
    stratum = STRATA[args.stratum] if args.stratum != "all" else StratumFilter.all()
    curve = curve_from_rates(rates, stratum, context.kind)
    out = Path(args.out)
    _write_rows(out, _curve_rows(curve), args.format)
    _write_manifest(out, "effect", _config_dict(args), _corpus_hash(Path(args.corpus)))
    print(f"wrote {len(curve.points)} {spec.mode} horizon points -> {out}")
    return EXIT_OK


def cmd_strata(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    context = _context_from_args(args)
    spec = _horizon_from_args(args)
    index = build_all_pairs(
        corpus,
        context,
        bin_width=args.bin_width,
        inspeech_control=not args.no_inspeech_control,
        threads=args.threads,
    )
    if len(index) == 0:
        raise DataError("no matched pairs found; corpus too small or context never fires")
    rates = speech_rates(corpus, index, spec, tie_policy=args.tie_policy, threads=args.threads)
    rows = []
    for name, stratum in STRATA.items():
        rows.extend(_curve_rows(curve_from_rates(rates, stratum, context.kind), stratum=name))
    out = Path(args.out)
    _write_rows(out, rows, args.format)
    _write_manifest(out, "strata", _config_dict(args), _corpus_hash(Path(args.corpus)))
    print(f"wrote {len(STRATA)} strata curves -> {out}")
    return EXIT_OK


def cmd_fightin(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    context = _context_from_args(args)
    counts_in, counts_out, prior = context_tables(corpus, context)
    results = log_odds(counts_in, counts_out, prior, alpha0=args.alpha0)
    if args.top > 0:
        results = results[: args.top] + results[-args.top :] if len(results) > 2 * args.top else results
    rows = [
        {"word": r.word, "delta": r.delta, "variance": r.variance, "z": r.z} for r in results
    ]
    if not rows:
        raise DataError("empty vocabulary; nothing to compare")
    out = Path(args.out)
    _write_rows(out, rows, args.format)
    _write_manifest(out, "fightin", _config_dict(args), _corpus_hash(Path(args.corpus)))
    print(f"wrote {len(rows)} words -> {out}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    overrides = dict(
        seed=args.seed,
        cue_probability=args.cue_probability,
        echo_boost=args.beta,
        echo_horizon=args.echo_horizon,
    )
    if args.boost_stratum:
        overrides["boost_stratum"] = args.boost_stratum
    config = profile(args.profile, **overrides) if args.profile else SynthConfig(**overrides)
    corpus = generate(config)
    out = Path(args.out)
    write_corpus(corpus, out)
    stats = summary(corpus)
    print(
        f"generated {stats['meetings']} meetings -> {out} "
        f"({stats['speeches_per_meeting']:.1f} speeches, "
        f"{stats['tokens_per_meeting']:.1f} tokens per meeting)"
    )
    _write_manifest(out, "synth", _config_dict(args), _corpus_hash(out))
    return EXIT_OK


def run_validation(
    corpus: Corpus,
    p_values: list[float],
    seeds: list[int],
    *,
    bin_width: float = DEFAULT_BIN_WIDTH,
    threads: int = 1,
) -> dict:
    """Random-context calibration: the controlled pipeline should sit at 0.

    For every (p, seed) the random-context effect is computed with and
    without the in-speech frequency control, intra and inter.  Controlled
    points must stay inside the 2*stderr band; the uncontrolled variant is
    expected to drift negative.
    """
    specs = {"intra": HorizonSpec(mode="intra"), "inter": HorizonSpec(mode="inter")}
    variants = []
    controlled_flags: list[bool] = []
    uncontrolled_means: list[float] = []
    for p in p_values:
        for seed in seeds:
            context = default_context("random", p=p, seed=seed)
            for control in (True, False):
                index = build_all_pairs(
                    corpus, context, bin_width=bin_width, inspeech_control=control, threads=threads
                )
                if len(index) == 0:
                    raise DataError(
                        f"no matched pairs for random context p={p}; corpus too small to calibrate"
                    )
                effects_by_mode = {}
                seed_effects = []
                for mode, spec in specs.items():
                    rates = speech_rates(corpus, index, spec, threads=threads)
                    curve = curve_from_rates(rates, StratumFilter.all(), "random")
                    points = []
                    for point in curve.points:
                        ok = (
                            point.n_speeches > 0
                            and abs(point.effect) <= 2 * point.stderr
                        )
                        points.append(
                            {
                                "horizon": point.horizon,
                                "effect": point.effect,
                                "stderr": point.stderr,
                                "n_speeches": point.n_speeches,
                                "pass": bool(ok),
                            }
                        )
                        if point.n_speeches > 0:
                            seed_effects.append(point.effect)
                            if control:
                                controlled_flags.append(ok)
                    effects_by_mode[mode] = points
                mean_effect = sum(seed_effects) / len(seed_effects) if seed_effects else float("nan")
                if not control:
                    uncontrolled_means.append(mean_effect)
                variants.append(
                    {
                        "p": p,
                        "seed": seed,
                        "inspeech_control": control,
                        "mean_effect": mean_effect,
                        "modes": effects_by_mode,
                    }
                )
    pass_rate = sum(controlled_flags) / len(controlled_flags) if controlled_flags else 0.0
    n = len(uncontrolled_means)
    mean_unc = sum(uncontrolled_means) / n if n else float("nan")
    if n > 1:
        var = sum((v - mean_unc) ** 2 for v in uncontrolled_means) / (n - 1)
        z_unc = mean_unc / math.sqrt(var / n) if var > 0 else float("nan")
    else:
        z_unc = float("nan")
    return {
        "variants": variants,
        "controlled_pass_rate": pass_rate,
        "controlled_ok": pass_rate >= 0.9,
        "uncontrolled_mean_effect": mean_unc,
        "uncontrolled_z": z_unc,
    }


def cmd_validate(args: argparse.Namespace) -> int:
    if args.corpus:
        corpus = _load_corpus(args.corpus)
        corpus_hash = _corpus_hash(Path(args.corpus))
    else:
        config = profile(args.profile, seed=args.seed) if args.profile else SynthConfig(seed=args.seed)
        corpus = generate(config)
        corpus_hash = _corpus_hash(None, corpus)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed]
    report = run_validation(
        corpus, args.p, seeds, bin_width=args.bin_width, threads=args.threads
    )
    report["corpus_sha256"] = corpus_hash
    out = Path(args.out)
    out.write_text(json.dumps(_nan_to_none(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(out, "validate", _config_dict(args), corpus_hash)
    print(
        f"controlled pass rate {report['controlled_pass_rate']:.3f}; "
        f"uncontrolled mean effect {report['uncontrolled_mean_effect']:+.4f} "
        f"(z={report['uncontrolled_z']:.2f}) -> {out}"
    )
    return EXIT_OK if report["controlled_ok"] else EXIT_VALIDATION


# --- argument wiring --------------------------------------------------------


def _add_common_analysis_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="canonical corpus file")
    p.add_argument("--context", required=True, choices=KINDS)
    p.add_argument("--lexicon", help="override lexicon file for lexicon contexts")
    p.add_argument("--p", type=float, default=0.05, help="cue probability for the random context")
    p.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH, dest="bin_width")
    p.add_argument(
        "--no-inspeech-control",
        action="store_true",
        dest="no_inspeech_control",
        help="drop the equal in-speech frequency requirement",
    )


def _add_horizon_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", required=True, choices=("intra", "inter"))
    p.add_argument("--windows", type=int, default=20, help="intra: number of windows")
    p.add_argument("--window-size", type=int, default=5, dest="window_size")
    p.add_argument("--horizon", type=int, default=5, help="inter: number of subsequent meetings")
    p.add_argument("--tie-policy", choices=("half", "strict"), default="half", dest="tie_policy")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="echopairs", description=__doc__)
    parser.add_argument("--version", action="version", version=f"echopairs {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="global seed")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--log-level", default="warning", dest="log_level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse raw transcripts into a corpus file")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("contexts", help="dump per-speech context partitions")
    _add_common_analysis_args(p)
    p.add_argument("--dump", action="store_true", help="accepted for compatibility; always dumps")
    p.add_argument("--out")
    p.set_defaults(func=cmd_contexts)

    p = sub.add_parser("pairs", help="emit matched pairs as JSON lines")
    _add_common_analysis_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("effect", help="effect curve for one context")
    _add_common_analysis_args(p)
    _add_horizon_args(p)
    p.add_argument("--stratum", choices=("all",) + tuple(STRATA), default="all")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_effect)

    p = sub.add_parser("strata", help="effect curves for all strata")
    _add_common_analysis_args(p)
    _add_horizon_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("fightin", help="in/out log-odds vocabulary comparison")
    _add_common_analysis_args(p)
    p.add_argument("--alpha0", type=float, default=DEFAULT_ALPHA0)
    p.add_argument("--top", type=int, default=50, help="keep the top/bottom N words by z")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fightin)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--beta", type=float, default=0.0, help="echo boost strength")
    p.add_argument("--cue-probability", type=float, default=0.05, dest="cue_probability")
    p.add_argument("--echo-horizon", choices=("intra", "inter", "both"), default="inter", dest="echo_horizon")
    p.add_argument("--boost-stratum", dest="boost_stratum", help="restrict boosts, e.g. 'female'")
    p.add_argument("--profile", choices=tuple(PROFILES))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="random-context calibration report")
    p.add_argument("--corpus", help="calibrate against an existing corpus file")
    p.add_argument("--profile", choices=tuple(PROFILES), help="synthesize a corpus instead")
    p.add_argument("--p", type=float, action="append", help="cue probability (repeatable; default 0.05)")
    p.add_argument("--seeds", help="comma-separated random-context seeds")
    p.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH, dest="bin_width")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    if args.command == "validate" and not args.p:
        args.p = [0.05]
    if args.command == "validate" and not (args.corpus or args.profile):
        parser.error("validate requires --corpus or --profile")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TranscriptParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
