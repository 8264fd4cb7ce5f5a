"""Line and byte-offset bookkeeping shared by the lexer and detectors."""

from __future__ import annotations

import bisect
import re

import numpy as np

# Line terminators: CRLF first so it is consumed as one break.
LINE_BREAK = r"\r\n|[\n\r\x85\u2028\u2029]"
LINE_BREAK_RE = re.compile(LINE_BREAK)
LINE_BREAK_CHARS = "\n\r\x85\u2028\u2029"
_OTHER_BREAKS = re.compile("[\r\x85\u2028\u2029]")


def split_lines(text: str) -> list[tuple[int, int, int]]:
    """(start, end, end_with_break) char offsets for every line; never empty."""
    out = []
    pos = 0
    for m in LINE_BREAK_RE.finditer(text):
        out.append((pos, m.start(), m.end()))
        pos = m.end()
    out.append((pos, len(text), len(text)))
    return out


class TextIndex:
    """Maps char offsets to 1-based (line, column) and UTF-8 byte offsets."""

    def __init__(self, text: str):
        self.text = text
        if _OTHER_BREAKS.search(text):
            self.line_starts = [0] + [m.end() for m in LINE_BREAK_RE.finditer(text)]
        else:
            # LF-only text: find the breaks in C rather than one match object each.
            cps = np.frombuffer(text.encode("utf-32-le", "surrogatepass"), dtype=np.uint32)
            self.line_starts = [0] + (np.flatnonzero(cps == 10) + 1).tolist()
        self._cum = None

    def line_of(self, idx: int) -> int:
        return bisect.bisect_right(self.line_starts, idx)

    def line_col(self, idx: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.line_starts, idx)
        return line, idx - self.line_starts[line - 1] + 1

    def line_bounds(self, line: int) -> tuple[int, int]:
        """Char range of ``line`` without its terminator."""
        start = self.line_starts[line - 1]
        if line < len(self.line_starts):
            end = self.line_starts[line] - 1
            if end > start and self.text[end] == "\n" and self.text[end - 1] == "\r":
                end -= 1
        else:
            end = len(self.text)
        return start, end

    @property
    def cum(self) -> np.ndarray | None:
        """Cumulative UTF-8 offsets, or None when chars and bytes coincide."""
        if self._cum is None:
            self._cum = False if self.text.isascii() else utf8_offsets(self.text)
        return None if self._cum is False else self._cum

    def byte_offset(self, idx: int) -> int:
        cum = self.cum
        return idx if cum is None else int(cum[idx])


def utf8_offsets(text: str) -> np.ndarray:
    """Cumulative UTF-8 byte offset of every char position (len(text) + 1 entries)."""
    cps = np.frombuffer(text.encode("utf-32-le", "surrogatepass"), dtype=np.uint32)
    widths = 1 + (cps >= 0x80).astype(np.int64) + (cps >= 0x800) + (cps >= 0x10000)
    out = np.zeros(len(cps) + 1, dtype=np.int64)
    np.cumsum(widths, out=out[1:])
    return out
