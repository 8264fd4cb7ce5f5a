"""Heuristic lexing: code / comment / string spans and identifiers.

Languages are described by :class:`LanguageProfile` records loaded from a JSON
file (``data/profiles.json`` by default)::

    {
      "<name>": {
        "extensions": [".c", ".h"],
        "line_comments": ["//"],
        "block_comments": [{"open": "/*", "close": "*/", "nestable": false}],
        "strings": [{"open": "\\"", "close": "\\"", "escape": "\\\\", "multiline": false}],
        "identifiers": "unicode" | "ascii",
        "identifier_extra": "$"
      }
    }

The lexer is a single-pass state machine; each transition is found with one
compiled regex search, so the Python loop runs once per token rather than
once per character.
"""

from __future__ import annotations

import enum
import functools
import itertools
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from ._text import LINE_BREAK_CHARS, TextIndex

DEFAULT_PROFILES = Path(__file__).with_name("data") / "profiles.json"


class ProfileError(ValueError):
    pass


class SpanKind(str, enum.Enum):
    CODE = "Code"
    LINE_COMMENT = "LineComment"
    BLOCK_COMMENT = "BlockComment"
    STRING = "StringLiteral"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class BlockComment:
    open: str
    close: str
    nestable: bool = False


@dataclass(frozen=True)
class StringDelimiter:
    open: str
    close: str
    escape: str | None = "\\"
    multiline: bool = False


@dataclass(frozen=True)
class LanguageProfile:
    name: str
    extensions: tuple = ()
    line_comments: tuple = ()
    block_comments: tuple = ()
    strings: tuple = ()
    identifiers: str = "unicode"
    identifier_extra: str = ""

    def __post_init__(self):
        for tok in self.line_comments:
            _nonempty(self.name, tok)
        for bc in self.block_comments:
            _nonempty(self.name, bc.open)
            _nonempty(self.name, bc.close)
            if bc.open == bc.close or bc.open in bc.close or bc.close in bc.open:
                raise ProfileError(f"{self.name}: block comment markers overlap: "
                                   f"{bc.open!r} / {bc.close!r}")
        for sd in self.strings:
            _nonempty(self.name, sd.open)
            _nonempty(self.name, sd.close)
            if sd.escape is not None and len(sd.escape) != 1:
                raise ProfileError(f"{self.name}: escape must be a single character")
        if self.identifiers not in ("unicode", "ascii"):
            raise ProfileError(f"{self.name}: identifiers must be 'unicode' or 'ascii'")

    @functools.cached_property
    def _lexer(self) -> "_Lexer":
        return _Lexer(self)

    @functools.cached_property
    def identifier_re(self) -> re.Pattern:
        extra = re.escape(self.identifier_extra)
        if self.identifiers == "ascii":
            return re.compile(f"[A-Za-z_{extra}][A-Za-z0-9_{extra}]*")
        return re.compile(f"(?:[^\\W\\d]|[{extra}])[\\w{_mark_class()}{extra}]*"
                          if extra else f"[^\\W\\d][\\w{_mark_class()}]*")


def _nonempty(name, tok):
    if not tok:
        raise ProfileError(f"{name}: empty delimiter")


PLAIN_TEXT = LanguageProfile(name="text")


@functools.lru_cache(maxsize=None)
def _mark_class() -> str:
    """Regex class body for combining marks (Mn, Mc), which ``\\w`` lacks."""
    parts = []
    start = prev = None
    # Marks live in planes 0-1 and the plane-14 variation selectors; skipping
    # the CJK and private-use planes makes this ~8x cheaper at startup.
    for cp in itertools.chain(range(0x20000), range(0xE0000, 0xE1000)):
        if unicodedata.category(chr(cp)) in ("Mn", "Mc"):
            if prev is not None and cp == prev + 1:
                prev = cp
                continue
            if start is not None:
                parts.append((start, prev))
            start = prev = cp
    if start is not None:
        parts.append((start, prev))
    return "".join(re.escape(chr(a)) if a == b else f"{re.escape(chr(a))}-{re.escape(chr(b))}"
                   for a, b in parts)


# -- registry ------------------------------------------------------------

def _profile_from_dict(name: str, d: Mapping) -> LanguageProfile:
    try:
        return LanguageProfile(
            name=name,
            extensions=tuple(e.lower() for e in d.get("extensions", ())),
            line_comments=tuple(d.get("line_comments", ())),
            block_comments=tuple(BlockComment(b["open"], b["close"], bool(b.get("nestable", False)))
                                 for b in d.get("block_comments", ())),
            strings=tuple(StringDelimiter(s["open"], s["close"], s.get("escape"),
                                          bool(s.get("multiline", False)))
                          for s in d.get("strings", ())),
            identifiers=d.get("identifiers", "unicode"),
            identifier_extra=d.get("identifier_extra", ""),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ProfileError(f"{name}: invalid profile definition ({exc})") from None


@dataclass(frozen=True)
class ProfileRegistry:
    profiles: Mapping[str, LanguageProfile] = field(default_factory=dict)

    def __post_init__(self):
        seen = {}
        for p in self.profiles.values():
            for ext in p.extensions:
                if ext in seen:
                    raise ProfileError(f"extension {ext!r} claimed by both {seen[ext]} and {p.name}")
                seen[ext] = p.name
        object.__setattr__(self, "_by_ext", seen)

    def __getitem__(self, name: str) -> LanguageProfile:
        return self.profiles[name]

    def __iter__(self):
        return iter(self.profiles.values())

    def __len__(self):
        return len(self.profiles)

    def names(self) -> list[str]:
        return list(self.profiles)

    def for_path(self, path) -> LanguageProfile | None:
        suffix = Path(path).suffix.lower()
        name = self._by_ext.get(suffix)
        return self.profiles[name] if name else None


def load_profiles(path: str | Path | None = None) -> ProfileRegistry:
    path = Path(path) if path is not None else DEFAULT_PROFILES
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProfileError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ProfileError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ProfileError(f"{path}: top level must be an object")
    return ProfileRegistry({name: _profile_from_dict(name, d) for name, d in raw.items()})


@functools.lru_cache(maxsize=1)
def default_registry() -> ProfileRegistry:
    return load_profiles()


def profile_for_path(registry: ProfileRegistry, path) -> LanguageProfile | None:
    return registry.for_path(path)


# -- span classification -------------------------------------------------

class Span(NamedTuple):
    start: int  # byte offset
    end: int  # byte offset, exclusive
    kind: SpanKind
    line: int
    char_start: int
    char_end: int


_NL_CLASS = re.escape(LINE_BREAK_CHARS)


class _Lexer:
    def __init__(self, profile: LanguageProfile):
        openers = []
        for tok in profile.line_comments:
            openers.append((tok, SpanKind.LINE_COMMENT, None))
        for bc in profile.block_comments:
            openers.append((bc.open, SpanKind.BLOCK_COMMENT, bc))
        for sd in profile.strings:
            openers.append((sd.open, SpanKind.STRING, sd))
        # Longest opener wins when several start at the same offset.
        openers.sort(key=lambda o: -len(o[0]))
        self.groups = {}
        alts = []
        for i, (tok, kind, spec) in enumerate(openers):
            self.groups[f"g{i}"] = (kind, spec)
            alts.append(f"(?P<g{i}>{re.escape(tok)})")
        self.opener = re.compile("|".join(alts)) if alts else None
        self.to_eol = re.compile(f"[^{_NL_CLASS}]*")
        self.string_body = {sd: self._string_body(sd) for sd in profile.strings}
        self.nested = {bc: re.compile(f"{re.escape(bc.open)}|{re.escape(bc.close)}")
                       for bc in profile.block_comments if bc.nestable}

    @staticmethod
    def _string_body(sd: StringDelimiter) -> re.Pattern:
        nl = "" if sd.multiline else _NL_CLASS
        esc = re.escape(sd.escape) if sd.escape else ""
        escaped = f"{esc}[\\s\\S]|" if esc else ""
        if len(sd.close) == 1:
            body = f"(?:{escaped}[^{esc}{re.escape(sd.close)}{nl}])*"
        else:
            other = f"[^{esc}{nl}]" if (esc or nl) else "[\\s\\S]"
            body = f"(?:{escaped}(?!{re.escape(sd.close)}){other})*"
        return re.compile(body)

    def string_end(self, sd: StringDelimiter, text: str, pos: int) -> int:
        p = self.string_body[sd].match(text, pos).end()
        if text.startswith(sd.close, p):
            return p + len(sd.close)
        if p < len(text) and text[p] in LINE_BREAK_CHARS and not sd.multiline:
            return p
        # Unterminated: runs to EOF (a trailing lone escape included).
        return len(text)

    def block_end(self, bc: BlockComment, text: str, pos: int) -> int:
        if not bc.nestable:
            i = text.find(bc.close, pos)
            return len(text) if i < 0 else i + len(bc.close)
        depth = 1
        pat = self.nested[bc]
        while True:
            m = pat.search(text, pos)
            if m is None:
                return len(text)
            pos = m.end()
            if m.group() == bc.open:
                depth += 1
            else:
                depth -= 1
                if depth == 0:
                    return pos

    def raw_spans(self, text: str) -> list[tuple[SpanKind, int, int]]:
        n = len(text)
        out = []
        pos = 0
        if self.opener is None:
            return [(SpanKind.CODE, 0, n)] if n else []
        search = self.opener.search
        while pos < n:
            m = search(text, pos)
            if m is None:
                out.append((SpanKind.CODE, pos, n))
                break
            start = m.start()
            if start > pos:
                out.append((SpanKind.CODE, pos, start))
            kind, spec = self.groups[m.lastgroup]
            p = m.end()
            if kind is SpanKind.LINE_COMMENT:
                end = self.to_eol.match(text, p).end()
            elif kind is SpanKind.BLOCK_COMMENT:
                end = self.block_end(spec, text, p)
            else:
                end = self.string_end(spec, text, p)
            out.append((kind, start, end))
            pos = end
        return out


def classify_spans(text: str, profile: LanguageProfile | None = None,
                   index: TextIndex | None = None) -> list[Span]:
    """Partition ``text`` into ordered, non-overlapping, covering spans."""
    profile = profile or PLAIN_TEXT
    index = index or TextIndex(text)
    raw = profile._lexer.raw_spans(text)
    if not raw:
        return []
    bounds = np.array([(a, b) for _, a, b in raw], dtype=np.int64)
    cum = index.cum
    byte_bounds = (bounds if cum is None else cum[bounds]).tolist()
    lines = np.searchsorted(index.line_starts, bounds[:, 0], side="right").tolist()
    return [Span(bb[0], bb[1], kind, line, a, b)
            for (kind, a, b), bb, line in zip(raw, byte_bounds, lines)]


# -- identifiers -----------------------------------------------------------

@dataclass(frozen=True)
class IdentifierOccurrence:
    text: str
    path: str
    line: int
    column: int
    byte_offset: int
    char_offset: int = 0


def code_slices(text: str, profile: LanguageProfile, spans: list[Span] | None = None
                ) -> Iterable[tuple[int, int]]:
    if spans is not None:
        return [(s.char_start, s.char_end) for s in spans if s.kind is SpanKind.CODE]
    return [(a, b) for kind, a, b in (profile or PLAIN_TEXT)._lexer.raw_spans(text)
            if kind is SpanKind.CODE]


def extract_identifiers(text: str, profile: LanguageProfile | None = None, tables=None,
                        path: str = "", index: TextIndex | None = None
                        ) -> list[IdentifierOccurrence]:
    """Identifiers in Code spans, maximal munch, in document order.

    ``tables`` is accepted for interface symmetry with the detectors; the
    identifier classes come from the profile.
    """
    profile = profile or PLAIN_TEXT
    index = index or TextIndex(text)
    finditer = profile.identifier_re.finditer
    out = []
    for a, b in code_slices(text, profile):
        for m in finditer(text, a, b):
            s = m.start()
            line, col = index.line_col(s)
            out.append(IdentifierOccurrence(m.group(), path, line, col, index.byte_offset(s), s))
    return out
