"""Number detection and digit-token rewriting.

Numbers are found with the pattern ``(\\d*\\.)?\\d+`` (leftmost, longest at
each position, non-overlapping) and rewritten into marker-delimited digit
tokens. Five schemes are supported: bare digits, digits wrapped in open/close
markers, and three variants that add a single AGG or PAUSE placeholder per
number. Everything the pattern does not match passes through untouched, so
``round_trip(emit_tokens(detect_numbers(x), s)) == x`` for every input and
scheme.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedSequenceError

NUMBER_PATTERN = re.compile(r"(\d*\.)?\d+")

OPEN_MARKER = "[F]"
CLOSE_MARKER = "[/F]"
AGG_MARKER = "[AGG]"
PAUSE_MARKER = "[PAUSE]"


class TokenScheme(Enum):
    """How a detected number is rewritten into tokens."""

    DIGITS_ONLY = "digits"
    F_DIGITS = "f-digits"
    F_AGG_DIGITS = "f-agg-digits"
    F_DIGITS_AGG = "f-digits-agg"
    F_PAUSE_DIGITS = "f-pause-digits"

    @classmethod
    def from_name(cls, name: str) -> "TokenScheme":
        for scheme in cls:
            if scheme.value == name:
                return scheme
        raise ValueError(f"unknown scheme {name!r}")


class TokenKind(Enum):
    TEXT = "text"
    DIGIT = "digit"
    POINT = "point"
    OPEN = "open"
    CLOSE = "close"
    AGG = "agg"
    PAUSE = "pause"


@dataclass(frozen=True)
class NumberSpan:
    """One detected number: its surface string, e.g. "3.14"."""

    surface: str

    @property
    def characters(self) -> list[str]:
        return list(self.surface)


@dataclass(frozen=True)
class Literal:
    """A stretch of input text containing no detected number."""

    surface: str


Segment = NumberSpan | Literal


@dataclass(frozen=True)
class LexedText:
    """Ordered segmentation of an input string into literals and numbers."""

    segments: tuple[Segment, ...]

    @property
    def spans(self) -> list[NumberSpan]:
        return [s for s in self.segments if isinstance(s, NumberSpan)]

    def surface(self) -> str:
        return "".join(s.surface for s in self.segments)


@dataclass(frozen=True)
class Token:
    """One emitted token. AGG/PAUSE placeholders and digit tokens keep a
    back-reference to the number span they came from."""

    kind: TokenKind
    text: str
    span: NumberSpan | None = field(default=None, compare=False)


def detect_numbers(text: str) -> LexedText:
    """Split *text* into literal and number segments.

    Matches of ``(\\d*\\.)?\\d+`` become number spans; the gaps between them
    become literals. The empty input yields one empty literal segment.
    """
    segments: list[Segment] = []
    pos = 0
    for match in NUMBER_PATTERN.finditer(text):
        if match.start() > pos:
            segments.append(Literal(text[pos : match.start()]))
        segments.append(NumberSpan(match.group()))
        pos = match.end()
    if pos < len(text) or not segments:
        segments.append(Literal(text[pos:]))
    return LexedText(tuple(segments))


def _character_token(char: str, span: NumberSpan) -> Token:
    kind = TokenKind.POINT if char == "." else TokenKind.DIGIT
    return Token(kind, char, span)


def emit_tokens(lexed: LexedText, scheme: TokenScheme) -> list[Token]:
    """Expand a lexed text into a token sequence under *scheme*.

    Each number span becomes single-character digit tokens (the decimal
    point is its own token), wrapped in markers and placeholders per scheme;
    literal segments pass through as single opaque text tokens.
    """
    tokens: list[Token] = []
    for segment in lexed.segments:
        if isinstance(segment, Literal):
            if segment.surface:
                tokens.append(Token(TokenKind.TEXT, segment.surface))
            continue
        chars = [_character_token(c, segment) for c in segment.characters]
        if scheme is TokenScheme.DIGITS_ONLY:
            tokens.extend(chars)
            continue
        tokens.append(Token(TokenKind.OPEN, OPEN_MARKER, segment))
        if scheme is TokenScheme.F_AGG_DIGITS:
            tokens.append(Token(TokenKind.AGG, AGG_MARKER, segment))
        elif scheme is TokenScheme.F_PAUSE_DIGITS:
            tokens.append(Token(TokenKind.PAUSE, PAUSE_MARKER, segment))
        tokens.extend(chars)
        if scheme is TokenScheme.F_DIGITS_AGG:
            tokens.append(Token(TokenKind.AGG, AGG_MARKER, segment))
        tokens.append(Token(TokenKind.CLOSE, CLOSE_MARKER, segment))
    return tokens


def round_trip(tokens: list[Token]) -> str:
    """Reconstruct the original input from an emitted token sequence.

    Markers and placeholders are stripped; digit and text tokens are joined
    in order. Raises MalformedSequenceError on unbalanced markers.
    """
    parts: list[str] = []
    inside = False
    for token in tokens:
        if token.kind is TokenKind.OPEN:
            if inside:
                raise MalformedSequenceError("nested open marker")
            inside = True
        elif token.kind is TokenKind.CLOSE:
            if not inside:
                raise MalformedSequenceError("close marker without open")
            inside = False
        elif token.kind in (TokenKind.DIGIT, TokenKind.POINT, TokenKind.TEXT):
            parts.append(token.text)
    if inside:
        raise MalformedSequenceError("open marker never closed")
    return "".join(parts)


def is_number_string(text: str) -> bool:
    """True when *text* as a whole is one well-formed number."""
    return NUMBER_PATTERN.fullmatch(text) is not None


def tokenize(text: str, scheme: TokenScheme) -> list[Token]:
    """detect_numbers + emit_tokens in one call."""
    return emit_tokens(detect_numbers(text), scheme)
