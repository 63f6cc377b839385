"""Parse raw committee-style transcripts into the canonical corpus model.

Transcripts are plain text with speaker-turn headers at line starts,
``TITLE. NAME.`` (e.g. ``MR. MOSKOW.``, ``CHAIRMAN GREENSPAN.``,
``MS. MINEHAN.``).  Everything under one header up to the next header is
one speech.  Gender comes from the honorific alone; ``is_chair`` is true
for chair titles but never for vice-chair titles.
"""
from __future__ import annotations

import datetime as dt
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import data
from .corpus import Corpus, Meeting, Speaker, Speech, summary, tokenize

log = logging.getLogger(__name__)


class TranscriptParseError(ValueError):
    """A raw transcript cannot be parsed into a meeting."""


@dataclass(frozen=True)
class RawTranscript:
    meeting_date: dt.date
    body: str
    source: str = "<memory>"


# Honorific -> (gender, is_chair).  Vice chair is deliberately non-chair,
# and its gender is left unknown because the honorific alone does not
# carry it.
_KNOWN_TITLES = {
    "MR": ("male", False),
    "MS": ("female", False),
    "MRS": ("female", False),
    "CHAIRMAN": ("male", True),
    "MADAM CHAIR": ("female", True),
    "VICE CHAIRMAN": ("unknown", False),
    "VICE CHAIR": ("unknown", False),
}

_HEADER_RE = re.compile(
    r"^\s*(?P<title>"
    r"VICE\s+CHAIRMAN|VICE\s+CHAIR|MADAM\s+CHAIR|CHAIRMAN|MR|MS|MRS"
    r")\.?\s+(?P<name>[A-Za-z][A-Za-z'\-]+)\.\s*(?P<rest>.*)$",
    re.IGNORECASE,
)
# Header-like lines with an unrecognized all-caps title ("GOVERNOR KELLEY.").
_UNKNOWN_HEADER_RE = re.compile(
    r"^\s*(?P<title>[A-Z][A-Z]+(?:\s+[A-Z][A-Z]+){0,2})\.\s+"
    r"(?P<name>[A-Z][A-Z'\-]+)\.\s*(?P<rest>.*)$"
)
_BRACKET_RE = re.compile(r"\[[^\][]{0,400}\]")
# Lines that look like headers but match neither pattern get logged so
# parser coverage can be audited against new transcript vintages.
_HEADERISH_RE = re.compile(r"^\s*[A-Z][A-Z .'\-]{1,40}\.\s")
# Forms of address ("Mr. Chairman. I move...") are speech, not headers.
_NON_SURNAMES = frozenset({"chairman", "chair"})


def _normalize_surname(name: str) -> str:
    return name.lower().strip("'-")


def _match_header(line: str) -> tuple[str, str, str, bool] | None:
    """Return (title, surname, rest-of-line, known_title) for a header line."""
    m = _HEADER_RE.match(line)
    if m:
        title = re.sub(r"\s+", " ", m.group("title").upper())
        surname = _normalize_surname(m.group("name"))
        if surname in _NON_SURNAMES:
            return None
        return title, surname, m.group("rest"), True
    m = _UNKNOWN_HEADER_RE.match(line)
    if m:
        title = re.sub(r"\s+", " ", m.group("title").upper())
        surname = _normalize_surname(m.group("name"))
        if surname in _NON_SURNAMES or title in _KNOWN_TITLES:
            return None
        return title, surname, m.group("rest"), False
    return None


def parse_transcript(raw: RawTranscript) -> tuple[Meeting, dict[str, Speaker]]:
    """Split one transcript into speeches; returns the meeting and its speakers.

    Raises TranscriptParseError when no speaker header precedes the first
    non-blank text.  Unknown titles keep the speaker with unknown gender
    and log a warning.
    """
    if not raw.body.strip():
        raise TranscriptParseError(f"{raw.source}: empty transcript body")
    meeting_id = raw.meeting_date.strftime("%Y%m%d")
    speakers: dict[str, Speaker] = {}
    speeches: list[Speech] = []
    current: tuple[str, list[str]] | None = None  # (speaker_id, text lines)

    def flush() -> None:
        nonlocal current
        if current is None:
            return
        speaker_id, lines = current
        text = _BRACKET_RE.sub(" ", "\n".join(lines))
        sentences = tokenize(text)
        speeches.append(
            Speech(
                speaker_id=speaker_id,
                meeting_id=meeting_id,
                seq=len(speeches),
                sentences=sentences,
            )
        )
        current = None

    for lineno, line in enumerate(raw.body.splitlines(), start=1):
        header = _match_header(line)
        if header is None:
            if _HEADERISH_RE.match(line):
                log.info("%s: line %d: unmatched header-like line: %s", raw.source, lineno, line.strip()[:60])
            if line.strip() and current is None:
                raise TranscriptParseError(
                    f"{raw.source}: line {lineno}: text before any speaker header"
                )
            if current is not None:
                current[1].append(line)
            continue
        flush()
        title, surname, rest, known = header
        if known:
            gender, is_chair = _KNOWN_TITLES[title]
        else:
            gender, is_chair = "unknown", False
            log.warning("%s: line %d: unknown speaker title %r", raw.source, lineno, title)
        existing = speakers.get(surname)
        if existing is None:
            speakers[surname] = Speaker(
                id=surname,
                display_name=surname.capitalize(),
                gender=gender,
                is_chair=is_chair,
            )
        else:
            speakers[surname] = _merge_speaker(existing, gender, is_chair, raw.source)
        current = (surname, [rest])
    flush()
    if not speeches:
        raise TranscriptParseError(f"{raw.source}: no speaker headers found")
    return Meeting(id=meeting_id, date=raw.meeting_date, speeches=speeches), speakers


def _merge_speaker(existing: Speaker, gender: str, is_chair: bool, source: str) -> Speaker:
    """Reconcile honorific readings of the same surname.

    A speaker observed under a chair title anywhere counts as chair; the
    first definite gender wins and conflicts are logged.
    """
    merged_gender = existing.gender
    if merged_gender == "unknown":
        merged_gender = gender
    elif gender not in ("unknown", merged_gender):
        log.warning("%s: conflicting gender for speaker %r; keeping %r", source, existing.id, merged_gender)
    return Speaker(
        id=existing.id,
        display_name=existing.display_name,
        gender=merged_gender,
        is_chair=existing.is_chair or is_chair,
    )


_DATE_RE = re.compile(r"(\d{8})")


def date_from_filename(path: Path) -> dt.date:
    """Meeting date from a file name carrying YYYYMMDD (e.g. FOMC19770315.txt)."""
    m = _DATE_RE.search(path.name)
    if not m:
        raise TranscriptParseError(f"{path.name}: no YYYYMMDD date in file name")
    try:
        return dt.datetime.strptime(m.group(1), "%Y%m%d").date()
    except ValueError as exc:
        raise TranscriptParseError(f"{path.name}: bad date ({exc})") from None


def read_raw(path: Path) -> RawTranscript:
    """Load a transcript file, sniffing UTF-8 first and falling back to Latin-1."""
    blob = path.read_bytes()
    try:
        body = blob.decode("utf-8")
    except UnicodeDecodeError:
        body = blob.decode("latin-1")
    return RawTranscript(meeting_date=date_from_filename(path), body=body, source=path.name)


@dataclass
class IngestResult:
    corpus: Corpus
    skipped: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.skipped


def ingest_directory(directory: str | Path, *, strict: bool = False) -> IngestResult:
    """Parse every transcript file in a directory into one corpus.

    Meetings are sorted by date; speaker identities unify by normalized
    surname.  A duplicate meeting date is always an error.  Other per-file
    failures are skipped with a warning unless ``strict``.
    """
    directory = Path(directory)
    paths = sorted(p for p in directory.iterdir() if p.is_file())
    if not paths:
        raise TranscriptParseError(f"{directory}: no transcript files")
    parsed: list[tuple[dt.date, Meeting, dict[str, Speaker]]] = []
    skipped: list[str] = []
    for path in paths:
        try:
            raw = read_raw(path)
            meeting, speakers = parse_transcript(raw)
        except TranscriptParseError as exc:
            if strict:
                raise
            log.warning("skipping %s: %s", path.name, exc)
            skipped.append(path.name)
            continue
        parsed.append((raw.meeting_date, meeting, speakers))

    parsed.sort(key=lambda item: item[0])
    seen_dates: dict[dt.date, str] = {}
    meetings: list[Meeting] = []
    all_speakers: dict[str, Speaker] = {}
    for date, meeting, speakers in parsed:
        if date in seen_dates:
            raise TranscriptParseError(
                f"duplicate meeting date {date.isoformat()} "
                f"(meetings {seen_dates[date]} and {meeting.id})"
            )
        seen_dates[date] = meeting.id
        meetings.append(meeting)
        for sid, speaker in speakers.items():
            existing = all_speakers.get(sid)
            if existing is None:
                all_speakers[sid] = speaker
            else:
                all_speakers[sid] = _merge_speaker(
                    existing, speaker.gender, speaker.is_chair, meeting.id
                )
    corpus = Corpus(
        meetings=meetings,
        speakers=all_speakers,
        stopwords=set(data.load_words("stopwords")),
    )
    corpus.check()
    stats = summary(corpus)
    log.info(
        "ingested %d meetings: %.2f speakers, %.2f speeches, %.2f tokens per meeting",
        stats["meetings"],
        stats["speakers_per_meeting"],
        stats["speeches_per_meeting"],
        stats["tokens_per_meeting"],
    )
    return IngestResult(corpus=corpus, skipped=skipped)
