"""Trojan Source rules over classified spans and identifiers.

Rule ids, severities and CVE tags are public identifiers: reports and
baselines depend on them, so they never change meaning.
"""

from __future__ import annotations

import bisect
import enum
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ._text import TextIndex
from .lexing import (PLAIN_TEXT, IdentifierOccurrence, LanguageProfile, Span, SpanKind,
                     classify_spans, code_slices)
from .rendering import escape_all
from .tables import BIDI_CONTROLS, UnicodeTables, _char_class

CVE_BIDI = "CVE-2021-42574"
CVE_HOMOGLYPH = "CVE-2021-42694"
PREVIEW_WIDTH = 120


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"

    def __str__(self):
        return self.value

    @property
    def rank(self) -> int:
        return _RANK[self]


_RANK = {Severity.INFO: 0, Severity.WARNING: 1, Severity.ERROR: 2}


class Rule(str, enum.Enum):
    BIDI_UNTERMINATED = "BIDI_UNTERMINATED"
    BIDI_CONTROL_PRESENT = "BIDI_CONTROL_PRESENT"
    BIDI_IN_CODE = "BIDI_IN_CODE"
    INVISIBLE_IN_CODE = "INVISIBLE_IN_CODE"
    INVISIBLE_IN_LITERAL = "INVISIBLE_IN_LITERAL"
    TERMINATOR_SPOOF = "TERMINATOR_SPOOF"
    CONFUSABLE_IDENTIFIERS = "CONFUSABLE_IDENTIFIERS"
    MIXED_SCRIPT_IDENTIFIER = "MIXED_SCRIPT_IDENTIFIER"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RuleInfo:
    rule: Rule
    cve: str | None
    severity: Severity
    summary: str
    guidance: str


RULES: Mapping[Rule, RuleInfo] = {r.rule: r for r in (
    RuleInfo(Rule.BIDI_UNTERMINATED, CVE_BIDI, Severity.ERROR,
             "Bidi embedding, override or isolate left open at the end of a comment or string",
             "The open control reorders the code that follows the token. Remove the control "
             "or close it inside the same token."),
    RuleInfo(Rule.BIDI_CONTROL_PRESENT, CVE_BIDI, Severity.WARNING,
             "Balanced bidi controls inside a comment or string",
             "Legitimate in right-to-left prose; confirm the rendered text matches the encoded "
             "text."),
    RuleInfo(Rule.BIDI_IN_CODE, CVE_BIDI, Severity.ERROR,
             "Bidi control character outside any comment or string",
             "No language needs these between tokens. Delete it."),
    RuleInfo(Rule.INVISIBLE_IN_CODE, None, Severity.ERROR,
             "Invisible character outside any comment or string",
             "It can split or merge tokens without a visible trace. Delete it."),
    RuleInfo(Rule.INVISIBLE_IN_LITERAL, None, Severity.WARNING,
             "Invisible character inside a comment or string",
             "Some payloads need these (joiners in scripts, variation selectors). Prefer an "
             "explicit escape sequence."),
    RuleInfo(Rule.TERMINATOR_SPOOF, None, Severity.ERROR,
             "Apparent block-comment terminator broken up by invisible characters",
             "The comment does not end where it appears to; code shown after it is commented "
             "out."),
    RuleInfo(Rule.CONFUSABLE_IDENTIFIERS, CVE_HOMOGLYPH, Severity.ERROR,
             "Distinct identifiers that render identically (same confusable skeleton)",
             "Rename one of them, or allowlist the pair if both are intentional."),
    RuleInfo(Rule.MIXED_SCRIPT_IDENTIFIER, CVE_HOMOGLYPH, Severity.WARNING,
             "Identifier mixing letters from several scripts",
             "Usually a lookalike letter from another alphabet. Retype the identifier."),
)}

BIDI_RULES = frozenset({Rule.BIDI_UNTERMINATED, Rule.BIDI_CONTROL_PRESENT, Rule.BIDI_IN_CODE})
INVISIBLE_RULES = frozenset({Rule.INVISIBLE_IN_CODE, Rule.INVISIBLE_IN_LITERAL,
                             Rule.TERMINATOR_SPOOF})
HOMOGLYPH_RULES = frozenset({Rule.CONFUSABLE_IDENTIFIERS, Rule.MIXED_SCRIPT_IDENTIFIER})


class PolicyError(ValueError):
    pass


MODES = ("strict", "default", "permissive")


@dataclass(frozen=True)
class Policy:
    mode: str = "default"
    overrides: Mapping[str, str] = field(default_factory=dict)
    allow_codepoints: frozenset = frozenset()
    allow_identifier_pairs: frozenset = frozenset()
    mixed_script_check: bool = True
    casefold: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise PolicyError(f"unknown mode {self.mode!r} (expected one of {', '.join(MODES)})")
        norm = {}
        for rule, sev in dict(self.overrides).items():
            try:
                norm[Rule(str(rule))] = Severity(str(sev))
            except ValueError:
                raise PolicyError(f"bad severity override {rule}={sev}") from None
        object.__setattr__(self, "overrides", norm)
        object.__setattr__(self, "allow_codepoints", frozenset(self.allow_codepoints))
        object.__setattr__(self, "allow_identifier_pairs",
                           frozenset(frozenset(p) for p in self.allow_identifier_pairs))

    def severity(self, rule: Rule) -> Severity | None:
        """Effective severity, or None when the mode suppresses the rule."""
        if self.mode == "permissive" and rule in (Rule.BIDI_CONTROL_PRESENT, Rule.BIDI_IN_CODE):
            return None
        if rule in self.overrides:
            return self.overrides[rule]
        sev = RULES[rule].severity
        if self.mode == "strict" and sev is Severity.WARNING:
            return Severity.ERROR
        return sev

    def pair_allowed(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.allow_identifier_pairs


DEFAULT_POLICY = Policy()


@dataclass(frozen=True)
class Finding:
    rule: Rule
    severity: Severity
    path: str
    line: int
    column: int
    byte_offset: int
    length: int  # UTF-8 bytes
    codepoints: tuple
    message: str
    preview: str = ""
    char_offset: int = 0
    char_length: int = 0

    @property
    def cve(self) -> str | None:
        return RULES[self.rule].cve

    def sort_key(self):
        return (self.path, self.line, self.column, self.rule.value, self.byte_offset,
                self.codepoints)

    def location(self):
        return (self.rule, self.path, self.line, self.column)


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    path: str
    message: str


@dataclass
class ScanReport:
    path: str = ""
    findings: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    tables_version: str = ""
    profile: str = ""
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        self.findings = sorted(self.findings, key=Finding.sort_key)
        self.counts = dict(sorted(Counter(str(f.rule) for f in self.findings).items()))


# -- evidence -----------------------------------------------------------------

class _Unit:
    """Per-text helpers shared by the detectors."""

    def __init__(self, text: str, tables: UnicodeTables, path: str = "",
                 index: TextIndex | None = None):
        self.text = text
        self.tables = tables
        self.path = path
        self.index = index or TextIndex(text)
        self._suspects = None

    def suspects(self):
        if self._suspects is None:
            self._suspects = set(self.tables.bidi_control_set) | set(self.tables.invisible_set)
        return self._suspects

    def preview(self, start: int, end: int) -> str:
        line = self.index.line_of(start)
        lo, hi = self.index.line_bounds(line)
        if hi - lo > PREVIEW_WIDTH:
            lo = max(lo, start - PREVIEW_WIDTH // 3)
            hi = min(hi, max(end, lo) + PREVIEW_WIDTH // 2)
        excerpt = self.text[lo:hi].strip(" \t")
        return escape_all(excerpt, self.suspects(), self.tables)

    def finding(self, rule: Rule, severity: Severity, start: int, end: int, cps: Iterable[int],
                message: str) -> Finding:
        line, col = self.index.line_col(start)
        b0 = self.index.byte_offset(start)
        return Finding(rule, severity, self.path, line, col, b0, self.index.byte_offset(end) - b0,
                       tuple(cps), message, self.preview(start, end), start, end - start)


def _hex(cps: Iterable[int]) -> str:
    return " ".join(f"U+{cp:04X}" for cp in cps)


def _named(tables: UnicodeTables, cps: Iterable[int]) -> str:
    parts = []
    for cp in cps:
        name = tables.aliases.get(cp)
        parts.append(f"U+{cp:04X} {name}" if name else f"U+{cp:04X}")
    return ", ".join(parts)


def _span_locator(spans: list[Span]):
    starts = [s.char_start for s in spans]

    def locate(i: int) -> int:
        return bisect.bisect_right(starts, i) - 1

    return locate


def _fast_clean(text: str) -> bool:
    """ASCII text cannot trigger any rule; detectors return early on it."""
    return text.isascii()


def _skip_bom(text: str, i: int) -> bool:
    return i == 0 and text.startswith("﻿")


# -- bidi -----------------------------------------------------------------

_BIDI_RE = re.compile(f"[{_char_class(BIDI_CONTROLS)}]")
_EMBED_OPEN = {0x202A, 0x202B, 0x202D, 0x202E}
_ISOLATE_OPEN = {0x2066, 0x2067, 0x2068}
_PDF, _PDI = 0x202C, 0x2069


def bidi_stack_balanced(cps: Iterable[int]) -> bool:
    """Simulate the explicit embedding/isolate stack; True if nothing is left open.

    Stray terminators are ignored, as the display algorithm ignores them.
    """
    stack: list[str] = []
    for cp in cps:
        if cp in _EMBED_OPEN:
            stack.append("e")
        elif cp in _ISOLATE_OPEN:
            stack.append("i")
        elif cp == _PDF:
            if stack and stack[-1] == "e":
                stack.pop()
        elif cp == _PDI and "i" in stack:
            while stack.pop() != "i":
                pass
    return not stack


def detect_bidi(text: str, spans: list[Span], tables: UnicodeTables,
                policy: Policy = DEFAULT_POLICY, *, path: str = "",
                index: TextIndex | None = None, _unit: _Unit | None = None) -> list[Finding]:
    """Bidi controls, judged per comment/string token.

    The embedding stack is simulated over each token's controls, and also
    reset at every line break: a control still open at the end of a line
    reorders that line on screen even if the token closes it later.
    """
    if _fast_clean(text):
        return []
    unit = _unit or _Unit(text, tables, path, index)
    allow = policy.allow_codepoints
    locate = _span_locator(spans)
    groups: dict[tuple[int, int], list[int]] = defaultdict(list)
    out = []
    for m in _BIDI_RE.finditer(text):
        i = m.start()
        cp = ord(m.group())
        if cp in allow:
            continue
        si = locate(i)
        if spans[si].kind is SpanKind.CODE:
            sev = policy.severity(Rule.BIDI_IN_CODE)
            if sev is not None:
                out.append(unit.finding(Rule.BIDI_IN_CODE, sev, i, i + 1, (cp,),
                                        f"bidi control {_named(tables, (cp,))} in code"))
        else:
            groups[(si, unit.index.line_of(i))].append(i)
    for (si, _line), pos in groups.items():
        cps = [ord(text[i]) for i in pos]
        kind = spans[si].kind
        where = "comment" if kind is not SpanKind.STRING else "string literal"
        if bidi_stack_balanced(cps):
            rule = Rule.BIDI_CONTROL_PRESENT
            msg = f"balanced bidi controls in {where}: {_named(tables, cps)}"
        else:
            rule = Rule.BIDI_UNTERMINATED
            msg = (f"unterminated bidi control in {where} reorders the rest of the line: "
                   f"{_named(tables, cps)}")
        sev = policy.severity(rule)
        if sev is not None:
            out.append(unit.finding(rule, sev, pos[0], pos[-1] + 1, cps, msg))
    return out


# -- invisibles ------------------------------------------------------------

def _invisible_runs(text: str, tables: UnicodeTables, allow) -> Iterable[tuple[int, int]]:
    pat = _invisible_re(tables)
    for m in pat.finditer(text):
        a, b = m.span()
        if _skip_bom(text, a):
            a += 1
        run_start = None
        for i in range(a, b):
            if ord(text[i]) in allow:
                if run_start is not None:
                    yield run_start, i
                    run_start = None
            elif run_start is None:
                run_start = i
        if run_start is not None:
            yield run_start, b


_INV_CACHE: dict[int, re.Pattern] = {}


def _invisible_re(tables: UnicodeTables) -> re.Pattern:
    pat = _INV_CACHE.get(id(tables))
    if pat is None:
        pat = _INV_CACHE[id(tables)] = re.compile(f"[{tables.invisible_class}]+")
    return pat


def detect_invisible(text: str, spans: list[Span], tables: UnicodeTables,
                     policy: Policy = DEFAULT_POLICY, *, path: str = "",
                     index: TextIndex | None = None, _unit: _Unit | None = None) -> list[Finding]:
    """One finding per run of adjacent invisible characters."""
    if _fast_clean(text):
        return []
    unit = _unit or _Unit(text, tables, path, index)
    locate = _span_locator(spans)
    out = []
    for a, b in _invisible_runs(text, tables, policy.allow_codepoints):
        cps = [ord(c) for c in text[a:b]]
        if spans[locate(a)].kind is SpanKind.CODE:
            rule, where = Rule.INVISIBLE_IN_CODE, "code"
        else:
            rule, where = Rule.INVISIBLE_IN_LITERAL, "comment or string"
        sev = policy.severity(rule)
        if sev is not None:
            out.append(unit.finding(rule, sev, a, b, cps,
                                    f"invisible character in {where}: {_named(tables, cps)}"))
    return out


# -- terminator spoofing ---------------------------------------------------

def _spoof_patterns(profile: LanguageProfile, tables: UnicodeTables) -> list[re.Pattern]:
    inv = f"[{tables.invisible_class}]*"
    return [re.compile(inv.join(re.escape(c) for c in bc.close))
            for bc in profile.block_comments if len(bc.close) > 1]


def detect_terminator_spoof(text: str, profile: LanguageProfile | None, tables: UnicodeTables,
                            policy: Policy = DEFAULT_POLICY, *, spans: list[Span] | None = None,
                            path: str = "", index: TextIndex | None = None,
                            _unit: _Unit | None = None) -> list[Finding]:
    """Block-comment closers broken up by invisibles, inside block comments."""
    profile = profile or PLAIN_TEXT
    if _fast_clean(text) or not profile.block_comments:
        return []
    unit = _unit or _Unit(text, tables, path, index)
    if spans is None:
        spans = classify_spans(text, profile, unit.index)
    sev = policy.severity(Rule.TERMINATOR_SPOOF)
    pats = _spoof_patterns(profile, tables)
    allow = policy.allow_codepoints
    out = []
    for span in spans:
        if span.kind is not SpanKind.BLOCK_COMMENT:
            continue
        for pat in pats:
            for m in pat.finditer(text, span.char_start, span.char_end):
                a, b = m.span()
                hidden = [ord(c) for c in text[a:b] if tables.is_invisible(ord(c))]
                if not hidden or all(cp in allow for cp in hidden):
                    continue
                closer = "".join(c for c in m.group() if not tables.is_invisible(ord(c)))
                out.append(unit.finding(
                    Rule.TERMINATOR_SPOOF, sev, a, b, hidden,
                    f"'{closer}' split by {_named(tables, hidden)} does not close the comment"))
    return out


# -- homoglyphs --------------------------------------------------------------

# Scripts that commonly mix within one writing system count as one.
_AUGMENTED = {
    "Han": frozenset({"Han", "Jpan", "Kore", "Hanb"}),
    "Hiragana": frozenset({"Jpan"}),
    "Katakana": frozenset({"Jpan"}),
    "Hangul": frozenset({"Kore"}),
    "Bopomofo": frozenset({"Hanb"}),
}
_NEUTRAL_SCRIPTS = {"Common", "Inherited", "Unknown"}


def identifier_scripts(tables: UnicodeTables, ident: str) -> Counter:
    return Counter(s for s in map(tables.script_of, map(ord, ident)) if s not in _NEUTRAL_SCRIPTS)


def is_mixed_script(tables: UnicodeTables, ident: str) -> bool:
    if ident.isascii():
        return False
    scripts = identifier_scripts(tables, ident)
    if len(scripts) < 2:
        return False
    common = None
    for s in scripts:
        sets = _AUGMENTED.get(s, frozenset({s}))
        common = sets if common is None else common & sets
        if not common:
            return True
    return False


def _minority_script_cps(tables: UnicodeTables, ident: str) -> list[int]:
    scripts = identifier_scripts(tables, ident)
    main = max(sorted(scripts), key=lambda s: scripts[s])
    main_set = _AUGMENTED.get(main, frozenset({main}))
    out = []
    for c in ident:
        s = tables.script_of(ord(c))
        if s in _NEUTRAL_SCRIPTS:
            continue
        if not (_AUGMENTED.get(s, frozenset({s})) & main_set):
            out.append(ord(c))
    return out


def _display(s: str) -> str:
    if s.isascii():
        return f"'{s}'"
    esc = "".join(c if c.isascii() else f"\\u{{{ord(c):04X}}}" for c in s)
    return f"'{s}' ({esc})"


def _offending(spelling: str) -> tuple:
    return tuple(ord(c) for c in spelling if not c.isascii())


def confusable_groups(spellings: Mapping[str, int], tables: UnicodeTables,
                      casefold: bool = False) -> dict[str, list[str]]:
    """Skeleton -> distinct spellings, for groups with two or more spellings and at
    least one non-ASCII member. ``spellings`` maps spelling -> occurrence count."""
    groups: dict[str, list[str]] = defaultdict(list)
    for s in spellings:
        if not s.isascii():
            groups[tables.skeleton(s, casefold)].append(s)
    if not groups:
        return {}
    for s in spellings:
        if s.isascii():
            k = tables.skeleton(s, casefold) if casefold else s
            if k in groups:
                groups[k].append(s)
    return {k: sorted(v) for k, v in groups.items() if len(v) > 1}


def flagged_spellings(spellings: Mapping[str, int], tables: UnicodeTables,
                      policy: Policy = DEFAULT_POLICY) -> dict[str, tuple[list[str], str]]:
    """Spelling -> (counterparts, skeleton) for every suspect spelling.

    Suspects are the non-majority spellings (all of them on a tie). An
    all-ASCII spelling is never a suspect: it carries no confusable code
    point, and ASCII-only files must stay finding-free. When that leaves a
    group without suspects, its non-ASCII spellings are reported instead.
    """
    out = {}
    for skel, members in confusable_groups(spellings, tables, policy.casefold).items():
        top = max(spellings[m] for m in members)
        leaders = [m for m in members if spellings[m] == top]
        suspects = members if len(leaders) > 1 else [m for m in members if m not in leaders]
        suspects = [m for m in suspects if not m.isascii()]
        if not suspects:
            suspects = [m for m in members if not m.isascii()]
        for s in suspects:
            others = [m for m in members if m != s and not policy.pair_allowed(s, m)]
            if others:
                out[s] = (others, skel)
    return out


def detect_homoglyphs(identifiers: list[IdentifierOccurrence], tables: UnicodeTables,
                      policy: Policy = DEFAULT_POLICY) -> list[Finding]:
    counts = Counter(o.text for o in identifiers)
    flagged = flagged_spellings(counts, tables, policy)
    mixed = set()
    if policy.mixed_script_check:
        mixed = {s for s in counts if is_mixed_script(tables, s)}
    if not flagged and not mixed:
        return []
    return [f for o in identifiers
            for f in homoglyph_findings_for(o, flagged, mixed, tables, policy)]


def homoglyph_findings_for(o: IdentifierOccurrence, flagged, mixed, tables: UnicodeTables,
                           policy: Policy, line_text: str | None = None) -> list[Finding]:
    out = []
    length = len(o.text.encode("utf-8"))
    preview = line_text if line_text is not None else o.text
    preview = escape_all(preview.strip(" \t"), set(tables.bidi_control_set) |
                         set(tables.invisible_set), tables)
    if o.text in flagged:
        others, skel = flagged[o.text]
        sev = policy.severity(Rule.CONFUSABLE_IDENTIFIERS)
        msg = (f"identifier {_display(o.text)} is confusable with "
               f"{', '.join(_display(x) for x in others)} (skeleton '{skel}')")
        out.append(Finding(Rule.CONFUSABLE_IDENTIFIERS, sev, o.path, o.line, o.column,
                           o.byte_offset, length, _offending(o.text), msg, preview,
                           o.char_offset, len(o.text)))
    if o.text in mixed:
        sev = policy.severity(Rule.MIXED_SCRIPT_IDENTIFIER)
        scripts = sorted(identifier_scripts(tables, o.text))
        msg = f"identifier {_display(o.text)} mixes scripts: {', '.join(scripts)}"
        out.append(Finding(Rule.MIXED_SCRIPT_IDENTIFIER, sev, o.path, o.line, o.column,
                           o.byte_offset, length, tuple(_minority_script_cps(tables, o.text)),
                           msg, preview, o.char_offset, len(o.text)))
    return out


def identifier_counts(text: str, profile: LanguageProfile | None, spans=None) -> Counter:
    """Spelling -> occurrences over the Code spans of ``text``."""
    profile = profile or PLAIN_TEXT
    # A newline never belongs to an identifier, so joining keeps slice boundaries.
    code = "\n".join(text[a:b] for a, b in code_slices(text, profile, spans))
    return Counter(profile.identifier_re.findall(code))


def occurrences_of(text: str, profile: LanguageProfile | None, spellings, path: str = "",
                   index: TextIndex | None = None, spans=None) -> list[IdentifierOccurrence]:
    """Occurrences of the given spellings only (cheap when the set is small)."""
    profile = profile or PLAIN_TEXT
    if not spellings:
        return []
    index = index or TextIndex(text)
    out = []
    for a, b in code_slices(text, profile, spans):
        for m in profile.identifier_re.finditer(text, a, b):
            if m.group() in spellings:
                s = m.start()
                line, col = index.line_col(s)
                out.append(IdentifierOccurrence(m.group(), path, line, col,
                                                index.byte_offset(s), s))
    return out


def homoglyph_findings(text: str, profile: LanguageProfile | None, tables: UnicodeTables,
                       policy: Policy, counts: Mapping[str, int], flagged, path: str = "",
                       index: TextIndex | None = None, spans=None) -> list[Finding]:
    """Findings in one text given session-wide (or unit-wide) verdicts."""
    mixed = set()
    if policy.mixed_script_check:
        mixed = {s for s in counts if not s.isascii() and is_mixed_script(tables, s)}
    wanted = set(flagged) | mixed
    if not wanted:
        return []
    index = index or TextIndex(text)
    out = []
    for o in occurrences_of(text, profile, wanted, path, index, spans):
        lo, hi = index.line_bounds(o.line)
        out.extend(homoglyph_findings_for(o, flagged, mixed, tables, policy, text[lo:hi]))
    return out


# -- orchestration -------------------------------------------------------------

def _drop_covered(findings: list[Finding]) -> list[Finding]:
    """INVISIBLE_IN_LITERAL inside a TERMINATOR_SPOOF site is the same event."""
    spoofs = [(f.char_offset, f.char_offset + f.char_length)
              for f in findings if f.rule is Rule.TERMINATOR_SPOOF]
    if not spoofs:
        return findings
    return [f for f in findings
            if not (f.rule is Rule.INVISIBLE_IN_LITERAL and
                    any(a <= f.char_offset and f.char_offset + f.char_length <= b
                        for a, b in spoofs))]


def decode(data: bytes, path: str = "") -> tuple[str, list[Diagnostic]]:
    try:
        return data.decode("utf-8"), []
    except UnicodeDecodeError as exc:
        text = data.decode("utf-8", errors="replace")
        return text, [Diagnostic(Severity.INFO, path,
                                 f"invalid UTF-8 at byte {exc.start}; scanned with "
                                 f"U+FFFD replacements")]


def scan_unit(text: str | bytes, profile: LanguageProfile | None, tables: UnicodeTables,
              policy: Policy = DEFAULT_POLICY, path: str = "", *, homoglyphs: bool = True,
              spans: list | None = None) -> ScanReport:
    """Run every detector over one text. ``bytes`` input is decoded leniently.

    ``spans`` may carry a precomputed ``classify_spans(text, profile)``.
    """
    diagnostics = []
    if isinstance(text, (bytes, bytearray)):
        text, diagnostics = decode(bytes(text), path)
    profile = profile or PLAIN_TEXT
    report = ScanReport(path, [], {}, tables.version, profile.name, diagnostics)
    if _fast_clean(text):
        return report
    unit = _Unit(text, tables, path)
    if spans is None:
        spans = classify_spans(text, profile, unit.index)
    findings = detect_bidi(text, spans, tables, policy, _unit=unit)
    findings += detect_invisible(text, spans, tables, policy, _unit=unit)
    findings += detect_terminator_spoof(text, profile, tables, policy, spans=spans, _unit=unit)
    if homoglyphs:
        counts = identifier_counts(text, profile, spans)
        flagged = flagged_spellings(counts, tables, policy)
        findings += homoglyph_findings(text, profile, tables, policy, counts, flagged, path,
                                       unit.index, spans)
    return ScanReport(path, _drop_covered(findings), {}, tables.version, profile.name,
                      diagnostics)
