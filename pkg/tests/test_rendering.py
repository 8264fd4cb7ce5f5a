import re

from hypothesis import given, settings, strategies as st

from trojanscan.detection import scan_unit
from trojanscan.lexing import default_registry
from trojanscan.rendering import (RenderStyle, escape_all, escape_cp, render_preview, sanitize,
                                  visualize)
from trojanscan.tables import load_tables

RLO, LRI, PDI, ZWSP = "‮", "⁦", "⁩", "​"


def test_escape_tokens(tables):
    assert escape_cp(0x202E, tables) == "⟦U+202E RLO⟧"
    assert escape_cp(0x200B, tables) == "⟦U+200B ZWSP⟧"
    assert escape_cp(0x200B) == "⟦U+200B⟧"
    assert escape_cp(0x202E, tables, RenderStyle(color=True)).startswith("\x1b[31m")


def test_escape_all_escapes_markers(tables):
    assert escape_all("a⟦b", [], tables) == "a⟦U+27E6⟧b"
    assert escape_all("plain", [0x200B], tables) == "plain"


def test_visualize_replaces_controls(tables, registry, fig1_text):
    findings = scan_unit(fig1_text, registry["c"], tables).findings
    shown = visualize(fig1_text, findings, tables=tables)
    assert "⟦U+202E RLO⟧" in shown and "⟦U+2066 LRI⟧" in shown
    assert not any(ord(c) in tables.bidi_control_set for c in shown)


def test_visualize_annotates_homoglyphs(tables, registry):
    text = "рrint(1)\nprint(2)\nprint(3)\n"
    findings = scan_unit(text, registry["python"], tables).findings
    shown = visualize(text, findings, tables=tables)
    assert shown.startswith("р⟦U+0440⟧rint(1)")


def test_visualize_identity_without_findings(tables):
    text = "x = '⟦not a token⟧'"
    assert visualize(text, [], tables=tables) == text


def test_visualize_escapes_literal_brackets_when_acting(tables, registry):
    text = f"// ⟦{ZWSP}⟧\n"
    findings = scan_unit(text, registry["c"], tables).findings
    shown = visualize(text, findings, tables=tables)
    assert "⟦U+27E6⟧⟦U+200B ZWSP⟧⟦U+27E7⟧" in shown


def test_preview_override():
    t = load_tables()
    assert render_preview("a‮bc", t) == "acb"


def test_preview_fig1_matches_fig2(tables, fig1_text, fig2_text):
    shown = render_preview(fig1_text, tables)
    norm = lambda s: [line.rstrip() for line in s.splitlines()]
    assert norm(shown) == norm(fig2_text)
    assert not any(ord(c) in tables.bidi_control_set for c in shown)


def test_preview_keeps_line_breaks(tables):
    text = f"a{RLO}bc\r\nx{LRI}y{PDI}\n"
    assert render_preview(text, tables) == "acb\r\nxy\n"


def test_strip_removes_exactly_the_invisibles(tables, registry):
    text = f"int a{ZWSP}b{ZWSP}c{ZWSP} = 1;"
    out = sanitize(text, style=RenderStyle(strip=True), tables=tables, profile=registry["c"])
    assert len(out) == len(text) - 3 and out == "int abc = 1;"


def test_escape_mode_tokens_in_comments_deletes_in_code(tables, registry):
    text = f"x{RLO} = 1; // a{RLO}b"
    out = sanitize(text, tables=tables, profile=registry["c"])
    assert out == "x = 1; // a⟦U+202E RLO⟧b"


def test_sanitize_allowlist(tables, registry):
    from trojanscan.detection import Policy

    text = f"a{ZWSP}b"
    assert sanitize(text, Policy(allow_codepoints={0x200B}), tables=tables,
                    profile=registry["c"]) == text


def test_sanitize_ascii_untouched(tables, registry):
    assert sanitize("a = 1;", tables=tables, profile=registry["c"]) == "a = 1;"
    assert sanitize("é ⟦x⟧", tables=tables, profile=registry["c"]) == "é ⟦x⟧"


_pieces = st.sampled_from(list("ab ;\n\"/*") + ["//", "/*", "*/", RLO, LRI, PDI, ZWSP, "⁠", "é",
                                                 "⟦", "⟧", "א"])


@settings(max_examples=300, deadline=None)
@given(st.lists(_pieces, max_size=50).map("".join),
       st.sampled_from(["c", "python", "rust"]), st.booleans())
def test_sanitize_idempotent(text, name, strip):
    t, p = load_tables(), default_registry()[name]
    style = RenderStyle(strip=strip)
    once = sanitize(text, style=style, tables=t, profile=p)
    assert sanitize(once, style=style, tables=t, profile=p) == once


_TOKEN = re.compile(r"⟦U\+([0-9A-F]{4,6})(?: [^⟧]*)?⟧")


def _decode(shown, flagged):
    """Invert visualize: replacement tokens become their char, annotations vanish."""
    out = []
    pos = 0
    for m in _TOKEN.finditer(shown):
        out.append(shown[pos:m.start()])
        cp = int(m.group(1), 16)
        if cp in flagged or chr(cp) in "⟦⟧":
            out.append(chr(cp))
        else:
            assert out and out[-1].endswith(chr(cp))
        pos = m.end()
    out.append(shown[pos:])
    return "".join(out)


@settings(max_examples=300, deadline=None)
@given(st.lists(_pieces, max_size=50).map("".join), st.sampled_from(["c", "python"]))
def test_visualize_is_non_destructive(text, name):
    t, p = load_tables(), default_registry()[name]
    findings = scan_unit(text, p, t).findings
    shown = visualize(text, findings, tables=t)
    flagged = set(t.bidi_control_set) | set(t.invisible_set)
    assert _decode(shown, flagged) == text
