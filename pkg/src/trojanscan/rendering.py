"""Make hidden characters visible: escapes, deceptive previews, sanitizing.

Escape tokens look like ``⟦U+202E RLO⟧``: the code point in 4-6 hex digits
plus the Unicode abbreviation when one exists. Whenever a visualization
contains tokens, literal ``⟦``/``⟧`` in the input are escaped too, so a token
in the output always came from the renderer.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Iterable

from ._text import split_lines
from .bidi import engine
from .bidi import _kernels
from .tables import BidiClass, UnicodeTables

OPEN_MARK = "⟦"
CLOSE_MARK = "⟧"
RED = "\x1b[31m"
RESET = "\x1b[0m"

_ISOLATE_CONTROLS = {0x2066, 0x2067, 0x2068, 0x2069}


@dataclass(frozen=True)
class RenderStyle:
    open: str = OPEN_MARK
    close: str = CLOSE_MARK
    template: str = "U+{cp:04X}"
    names: bool = True
    color: bool = False
    strip: bool = False


DEFAULT_STYLE = RenderStyle()


def escape_cp(cp: int, tables: UnicodeTables | None = None, style: RenderStyle = DEFAULT_STYLE,
              color: bool | None = None) -> str:
    body = style.template.format(cp=cp)
    if style.names and tables is not None:
        name = tables.aliases.get(cp)
        if name:
            body = f"{body} {name}"
    token = f"{style.open}{body}{style.close}"
    if style.color if color is None else color:
        token = f"{RED}{token}{RESET}"
    return token


def escape_all(text: str, cps: Iterable[int] | None, tables: UnicodeTables | None = None,
               style: RenderStyle = DEFAULT_STYLE) -> str:
    """Escape every char whose code point is in ``cps`` (plus the marker brackets)."""
    targets = set(cps or ())
    targets.update(map(ord, style.open + style.close))
    if not any(ord(ch) in targets for ch in text):
        return text
    return "".join(escape_cp(ord(ch), tables, style) if ord(ch) in targets else ch for ch in text)


_REPLACE_RULES = {"BIDI_UNTERMINATED", "BIDI_CONTROL_PRESENT", "BIDI_IN_CODE",
                  "INVISIBLE_IN_CODE", "INVISIBLE_IN_LITERAL", "TERMINATOR_SPOOF"}


def visualize(text: str, findings, style: RenderStyle = DEFAULT_STYLE,
              tables: UnicodeTables | None = None) -> str:
    """Rewrite ``text`` so every flagged code point is shown as an escape token.

    Bidi and invisible characters are replaced; homoglyph characters are kept
    and annotated with a trailing token.
    """
    replace: dict[int, int] = {}
    annotate: dict[int, int] = {}
    for f in findings:
        offending = set(f.codepoints)
        lo = f.char_offset
        hi = min(len(text), lo + f.char_length)
        for i in range(lo, hi):
            cp = ord(text[i])
            if cp not in offending:
                continue
            if str(f.rule) in _REPLACE_RULES:
                replace[i] = cp
            elif cp >= 0x80:
                annotate[i] = cp
    if not replace and not annotate:
        return text
    marks = {style.open, style.close}
    out = []
    for i, ch in enumerate(text):
        if i in replace:
            out.append(escape_cp(replace[i], tables, style))
        elif ch in marks:
            out.append(escape_cp(ord(ch), tables, style))
        else:
            out.append(ch)
            if i in annotate:
                out.append(escape_cp(annotate[i], tables, style))
    return "".join(out)


def preview_line(tables: UnicodeTables, line: str) -> str:
    """Visible text of one line in display order, controls dropped."""
    if line.isascii():
        return line
    cps = engine._as_array(line)
    cls, bkey, btype = engine.prepare(tables, cps)
    levels = cls.copy()
    _kernels.resolve(cls, bkey, btype, int(engine.Direction.LTR), levels)
    order = _kernels.visual_order(cls, levels, 0, len(line))
    return "".join(line[i] for i in order if ord(line[i]) not in _ISOLATE_CONTROLS)


def render_preview(text: str, tables: UnicodeTables) -> str:
    """What a UAX #9 viewer shows, line by line: the possibly deceptive view."""
    if text.isascii():
        return text
    out = []
    for start, end, brk in split_lines(text):
        out.append(preview_line(tables, text[start:end]))
        out.append(text[end:brk])
    return "".join(out)


def flagged_class(tables: UnicodeTables, allow: Iterable[int] = ()) -> re.Pattern:
    cps = (set(tables.bidi_control_set) | set(tables.invisible_set)) - set(allow)
    from .tables import _char_class

    return re.compile(f"[{_char_class(cps)}]")


def sanitize(text: str, policy=None, style: RenderStyle = DEFAULT_STYLE, *,
             tables: UnicodeTables | None = None, profile=None) -> str:
    """Neutralize bidi controls and invisible characters.

    Escape mode (default) writes tokens inside comments and strings and
    deletes the characters from code; ``style.strip`` deletes them everywhere.
    """
    from .lexing import SpanKind, classify_spans
    from .tables import load_tables

    tables = tables or load_tables()
    if text.isascii():
        return text
    allow = policy.allow_codepoints if policy is not None else ()
    pat = flagged_class(tables, allow)
    if not pat.search(text):
        return text
    if style.strip:
        return pat.sub("", text)
    spans = classify_spans(text, profile)
    starts = [s.char_start for s in spans]
    plain = RenderStyle(style.open, style.close, style.template, style.names, False, False)

    def repl(m):
        i = m.start()
        span = spans[bisect.bisect_right(starts, i) - 1]
        if span.kind is SpanKind.CODE:
            return ""
        return escape_cp(ord(m.group()), tables, plain)

    return pat.sub(repl, text)


def removed_by_bidi(tables: UnicodeTables, cp: int) -> bool:
    return tables.bidi_class(cp) in (BidiClass.BN, BidiClass.LRE, BidiClass.RLE, BidiClass.LRO,
                                     BidiClass.RLO, BidiClass.PDF)
