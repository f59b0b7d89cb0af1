"""Document model and parser for transliterated tablet corpora.

The input is a line-oriented plain-text format::

    &P008805            opens a tablet (id = token after "&")
    @obverse            sets the surface for following entries
    @reverse
    # summary           marks the next entry as an explicit summary
    # anything else     comment, ignored
    1. M056~f , 1(N34) 5(N14) 1(N01) 1(N8B)

Entry lines are ``<line_no>. <text tokens> , <numeral tokens>``.  Tokens are
whitespace-separated; ``n(SIGN)`` writes the digit SIGN n times, a bare
digit sign means count 1.  ``X`` and ``...`` are damage tokens.  A first
content line without a comma is treated as the tablet header.

In lenient mode (the default) malformed lines are recorded as warnings and
skipped, and unknown ``@`` annotation lines are ignored, so real corpus
exports with extra markup still parse.  Strict mode aborts on the first
problem.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

DIGIT_NAME_RE = re.compile(r"^N\d+[A-Za-z]*$")
DAMAGE_NAMES = frozenset({"X", "..."})
COUNTED_TOKEN_RE = re.compile(r"^(\d+)\((\S+)\)$")
ENTRY_LINE_RE = re.compile(r"^(\d+)\.\s*(.*)$")


class ParseError(ValueError):
    """Raised for malformed input in strict mode (or hard structural errors)."""

    def __init__(self, message: str, line_no: int | None = None, token: str | None = None):
        detail = message
        if token is not None:
            detail += f" (token {token!r})"
        self.message = detail
        if line_no is not None:
            detail = f"line {line_no}: {detail}"
        super().__init__(detail)
        self.line_no = line_no
        self.token = token


class SignKind(Enum):
    TEXT = "text"
    DIGIT = "digit"
    DAMAGE = "damage"


def sign_kind(name: str) -> SignKind:
    if name in DAMAGE_NAMES:
        return SignKind.DAMAGE
    if DIGIT_NAME_RE.match(name):
        return SignKind.DIGIT
    return SignKind.TEXT


def is_digit_name(name: str) -> bool:
    return bool(DIGIT_NAME_RE.match(name))


@dataclass(frozen=True)
class SignToken:
    """A single transliterated sign. Names are case-sensitive and variant
    suffixes (M056~f vs M056) are preserved verbatim."""

    name: str

    @property
    def kind(self) -> SignKind:
        return sign_kind(self.name)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class DigitRun:
    """``count`` consecutive occurrences of one digit sign."""

    count: int
    sign: SignToken

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"digit run count must be >= 1, got {self.count}")
        if self.sign.kind is not SignKind.DIGIT:
            raise ValueError(f"digit run requires a digit sign, got {self.sign.name!r}")

    def __str__(self) -> str:
        return f"{self.count}({self.sign.name})"


EntryToken = Union[SignToken, DigitRun]


def merge_adjacent_runs(runs: Iterable[DigitRun]) -> tuple[DigitRun, ...]:
    """Merge adjacent runs of the same sign by summing counts (2(N01) 3(N01)
    becomes 5(N01)); order is otherwise preserved."""
    merged: list[DigitRun] = []
    for run in runs:
        if merged and merged[-1].sign == run.sign:
            merged[-1] = DigitRun(merged[-1].count + run.count, run.sign)
        else:
            merged.append(run)
    return tuple(merged)


@dataclass(frozen=True)
class NumeralNotation:
    """A maximal contiguous sequence of digit runs, as written.

    ``location`` is (tablet id, entry line number); ``ordinal`` numbers the
    notation within its entry when an entry holds several.  Adjacent
    duplicate runs are merged on construction.
    """

    runs: tuple[DigitRun, ...]
    damaged: bool = False
    location: tuple[str, int] | None = None
    ordinal: int = 0

    def __post_init__(self) -> None:
        if not self.runs:
            raise ValueError("a numeral notation needs at least one digit run")
        object.__setattr__(self, "runs", merge_adjacent_runs(self.runs))

    def __str__(self) -> str:
        return " ".join(str(run) for run in self.runs)

    @property
    def key(self) -> tuple[str, int, int]:
        tablet_id, line_no = self.location if self.location else ("", -1)
        return (tablet_id, line_no, self.ordinal)

    def sign_names(self) -> tuple[str, ...]:
        return tuple(run.sign.name for run in self.runs)


class Surface(Enum):
    OBVERSE = "obverse"
    REVERSE = "reverse"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Entry:
    """One transliterated line: a text span, then a numeral span.

    ``tokens`` holds both spans in written order; ``comma_index`` is where
    the delimiter fell.  The comma is transparent for sign adjacency (it has
    no counterpart on the tablet).
    """

    line_no: int
    surface: Surface
    tokens: tuple[EntryToken, ...]
    comma_index: int
    summary_annotation: bool = False

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("an entry must contain at least one token")

    @property
    def text(self) -> tuple[SignToken, ...]:
        """Sign tokens of the text span (before the comma)."""
        return tuple(t for t in self.tokens[: self.comma_index] if isinstance(t, SignToken))

    @property
    def text_sign_names(self) -> tuple[str, ...]:
        """Names of TEXT-kind signs anywhere in the entry, in order."""
        return tuple(
            t.name for t in self.tokens if isinstance(t, SignToken) and t.kind is SignKind.TEXT
        )

    @property
    def numeral(self) -> NumeralNotation | None:
        """The notation written in the numeral span, if it is one clean
        sequence of digit runs; None otherwise. Extraction with damage
        flagging is ``extract_numerals``'s job."""
        span = self.tokens[self.comma_index :]
        if span and all(isinstance(t, DigitRun) for t in span):
            return NumeralNotation(tuple(span), damaged=False, location=None)
        return None

    def digit_groups(self) -> list[tuple[int, int, tuple[DigitRun, ...]]]:
        """Maximal contiguous groups of digit runs as (start, end, runs)."""
        groups: list[tuple[int, int, tuple[DigitRun, ...]]] = []
        i = 0
        while i < len(self.tokens):
            if isinstance(self.tokens[i], DigitRun):
                j = i
                while j < len(self.tokens) and isinstance(self.tokens[j], DigitRun):
                    j += 1
                groups.append((i, j, tuple(self.tokens[k] for k in range(i, j))))
                i = j
            else:
                i += 1
        return groups


@dataclass(frozen=True)
class Tablet:
    id: str
    entries: tuple[Entry, ...]
    header: tuple[SignToken, ...] | None = None

    def entry_at(self, line_no: int) -> Entry | None:
        for entry in self.entries:
            if entry.line_no == line_no:
                return entry
        return None


@dataclass(frozen=True)
class ParseWarning:
    line_no: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.message}"


@dataclass(frozen=True)
class Corpus:
    tablets: tuple[Tablet, ...]
    warnings: tuple[ParseWarning, ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for tablet in self.tablets:
            if tablet.id in seen:
                raise ParseError(f"duplicate tablet id {tablet.id!r}")
            seen.add(tablet.id)

    def tablet(self, tablet_id: str) -> Tablet | None:
        for tablet in self.tablets:
            if tablet.id == tablet_id:
                return tablet
        return None


@dataclass(frozen=True)
class NumeralExtraction:
    """Intact notations plus the damage-adjacent ones kept for diagnostics."""

    intact: tuple[NumeralNotation, ...]
    damaged: tuple[NumeralNotation, ...]


def _parse_token(raw: str, line_no: int | None, strict: bool) -> EntryToken:
    counted = COUNTED_TOKEN_RE.match(raw)
    if counted:
        count = int(counted.group(1))
        name = counted.group(2)
        if count < 1:
            raise ParseError("digit count must be positive", line_no, raw)
        if not is_digit_name(name):
            raise ParseError("counted token must name a digit sign", line_no, raw)
        return DigitRun(count, SignToken(name))
    if "(" in raw or ")" in raw:
        raise ParseError("unbalanced or malformed counted token", line_no, raw)
    if raw in DAMAGE_NAMES:
        return SignToken(raw)
    if is_digit_name(raw):
        # bare digit sign: implicit count 1
        return DigitRun(1, SignToken(raw))
    if strict and not raw.startswith("M"):
        raise ParseError("unrecognized sign token", line_no, raw)
    return SignToken(raw)


def _tokenize(side: str, line_no: int | None, strict: bool) -> list[EntryToken]:
    return [_parse_token(raw, line_no, strict) for raw in side.split()]


def parse_notation(token_string: str) -> tuple[DigitRun, ...]:
    """Parse a standalone numeral like ``"1(N45) 2(N14) 7(N01)"``.

    Every token must be a digit run (``n(SIGN)`` or a bare digit sign);
    adjacent duplicates are merged.
    """
    runs: list[DigitRun] = []
    for raw in token_string.split():
        token = _parse_token(raw, None, strict=True)
        if not isinstance(token, DigitRun):
            raise ParseError("expected a digit token in a numeral", token=raw)
        runs.append(token)
    if not runs:
        raise ParseError("empty numeral notation")
    return merge_adjacent_runs(runs)


class _TabletBuilder:
    def __init__(self, tablet_id: str):
        self.id = tablet_id
        self.header: tuple[SignToken, ...] | None = None
        self.entries: list[Entry] = []
        self.surface = Surface.UNKNOWN
        self.last_line_no: dict[Surface, int] = {}
        self.saw_content = False

    def build(self) -> Tablet:
        return Tablet(self.id, tuple(self.entries), self.header)


def parse_corpus(source: str | Iterable[str], strict: bool = False) -> Corpus:
    """Parse one or more tablets from text (or an iterable of lines)."""
    if isinstance(source, str):
        lines: Iterator[str] = iter(io.StringIO(source))
    else:
        lines = iter(source)

    tablets: list[Tablet] = []
    warnings: list[ParseWarning] = []
    seen_ids: set[str] = set()
    current: _TabletBuilder | None = None
    pending_summary = False

    def problem(message: str, line_no: int, token: str | None = None) -> None:
        if strict:
            raise ParseError(message, line_no, token)
        warnings.append(ParseWarning(line_no, message))

    def close_current() -> None:
        nonlocal current
        if current is not None:
            tablets.append(current.build())
            current = None

    for file_line_no, raw_line in enumerate(lines, start=1):
        line = raw_line.strip()
        if not line:
            continue

        if line.startswith("&"):
            close_current()
            tablet_id = line[1:].split()[0] if line[1:].split() else ""
            if not tablet_id:
                raise ParseError("tablet line with empty id", file_line_no)
            if tablet_id in seen_ids:
                raise ParseError(f"duplicate tablet id {tablet_id!r}", file_line_no)
            seen_ids.add(tablet_id)
            current = _TabletBuilder(tablet_id)
            pending_summary = False
            continue

        if line.startswith("#"):
            body = line[1:].strip()
            if body == "summary":
                pending_summary = True
            continue

        if line.startswith("@"):
            pending_summary = False
            if current is None:
                problem("surface marker before any tablet", file_line_no, line)
                continue
            if line == "@obverse":
                current.surface = Surface.OBVERSE
            elif line == "@reverse":
                current.surface = Surface.REVERSE
            elif strict:
                raise ParseError("unknown annotation line", file_line_no, line)
            # lenient: unknown @-annotations from richer exports are skipped
            continue

        if current is None:
            problem("content before any tablet line", file_line_no, line)
            continue

        numbered = ENTRY_LINE_RE.match(line)
        body = numbered.group(2) if numbered else line

        if "," not in body:
            pending_summary = False
            if not current.saw_content:
                # header heuristic: first content line with no comma
                try:
                    tokens = _tokenize(body, file_line_no, strict)
                except ParseError as exc:
                    problem(exc.message, file_line_no)
                    continue
                header_signs = tuple(
                    t if isinstance(t, SignToken) else t.sign for t in tokens
                )
                if not header_signs:
                    problem("empty header line", file_line_no)
                    continue
                current.header = header_signs
                current.saw_content = True
            else:
                problem("entry line missing the text/numeral comma", file_line_no, line)
            continue

        if numbered is None:
            pending_summary = False
            problem("entry line missing its line number", file_line_no, line)
            continue

        entry_line_no = int(numbered.group(1))
        text_side, _, numeral_side = body.partition(",")
        try:
            text_tokens = _tokenize(text_side, file_line_no, strict)
            numeral_tokens = _tokenize(numeral_side, file_line_no, strict)
        except ParseError as exc:
            pending_summary = False
            problem(exc.message, file_line_no)
            continue

        tokens = tuple(text_tokens + numeral_tokens)
        if not tokens:
            pending_summary = False
            problem("entry with empty text and empty numeral", file_line_no, line)
            continue

        last = current.last_line_no.get(current.surface)
        if last is not None and entry_line_no <= last:
            pending_summary = False
            problem(
                f"entry line numbers must increase within a surface "
                f"({entry_line_no} after {last})",
                file_line_no,
            )
            continue

        current.entries.append(
            Entry(
                line_no=entry_line_no,
                surface=current.surface,
                tokens=tokens,
                comma_index=len(text_tokens),
                summary_annotation=pending_summary,
            )
        )
        current.last_line_no[current.surface] = entry_line_no
        current.saw_content = True
        pending_summary = False

    close_current()
    return Corpus(tuple(tablets), tuple(warnings))


def serialize_corpus(corpus: Corpus) -> str:
    """Render a corpus back to the transliteration format.

    The output is canonical: parsing it again yields a structurally
    identical corpus (ignoring warnings).
    """
    out: list[str] = []
    for tablet in corpus.tablets:
        out.append(f"&{tablet.id}")
        if tablet.header:
            out.append(" ".join(sign.name for sign in tablet.header))
        surface = Surface.UNKNOWN
        for entry in tablet.entries:
            if entry.surface is not surface and entry.surface is not Surface.UNKNOWN:
                out.append(f"@{entry.surface.value}")
                surface = entry.surface
            if entry.summary_annotation:
                out.append("# summary")
            text = " ".join(str(t) for t in entry.tokens[: entry.comma_index])
            numeral = " ".join(str(t) for t in entry.tokens[entry.comma_index :])
            out.append(f"{entry.line_no}. {text} , {numeral}".replace("  ", " "))
    return "\n".join(out) + ("\n" if out else "")


def extract_numerals(tablet: Tablet) -> NumeralExtraction:
    """Collect every maximal contiguous digit-run sequence of the tablet.

    Notations immediately adjacent (either side, within their entry) to a
    damage token are flagged damaged and reported separately; together the
    two lists cover every digit run exactly once.
    """
    intact: list[NumeralNotation] = []
    damaged: list[NumeralNotation] = []
    for entry in tablet.entries:
        for ordinal, (start, end, runs) in enumerate(entry.digit_groups()):
            before = entry.tokens[start - 1] if start > 0 else None
            after = entry.tokens[end] if end < len(entry.tokens) else None
            is_damaged = any(
                isinstance(t, SignToken) and t.kind is SignKind.DAMAGE for t in (before, after)
            )
            notation = NumeralNotation(
                runs,
                damaged=is_damaged,
                location=(tablet.id, entry.line_no),
                ordinal=ordinal,
            )
            (damaged if is_damaged else intact).append(notation)
    return NumeralExtraction(tuple(intact), tuple(damaged))


def corpus_numerals(corpus: Corpus) -> list[tuple[Tablet, NumeralNotation]]:
    """All intact notations of the corpus, paired with their tablet."""
    pairs: list[tuple[Tablet, NumeralNotation]] = []
    for tablet in corpus.tablets:
        for notation in extract_numerals(tablet).intact:
            pairs.append((tablet, notation))
    return pairs
