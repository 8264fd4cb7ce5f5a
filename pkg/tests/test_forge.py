import json

import pytest

from conftest import DATA
from trojanscan.detection import Severity, scan_unit
from trojanscan.forge import (EXPECTED_RULE, MANIFEST_NAME, VARIANTS, ForgeError, ForgeSpec, forge,
                              forge_corpus, read_manifest, seeded_corpus, trojan_spelling)
from trojanscan.lexing import SpanKind, classify_spans, load_profiles
from trojanscan.rendering import render_preview, sanitize

ZWSP = "​"


def test_golden_c_sample(tables, registry):
    text = forge(ForgeSpec("stretched_string", "c"), tables, registry)
    golden = (DATA / "fig1.c").read_text(encoding="utf-8")
    assert text == "// trojanscan-forge: variant=stretched_string profile=c kind=sample\n" + golden


def test_trojan_spelling(tables):
    assert trojan_spelling("print", tables) == "рrint"
    assert tables.skeleton("рrint") == "print"
    with pytest.raises(ForgeError, match="zz_9"):
        trojan_spelling("zz_9", tables)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory, tables, registry):
    out = tmp_path_factory.mktemp("forged")
    return out, forge_corpus(out, tables=tables, registry=registry)


def test_corpus_shape(corpus):
    out, entries = corpus
    samples = [e for e in entries if e.kind == "sample"]
    controls = [e for e in entries if e.kind == "control"]
    skipped = [e for e in entries if e.kind == "skipped"]
    assert len(samples) == len(controls) == 17
    assert [(e.variant, e.profile) for e in skipped] == [("comment_spoof", "python")]
    assert "block comment" in skipped[0].reason
    assert read_manifest(out / MANIFEST_NAME) == entries
    for e in samples + controls:
        assert (out / e.path).is_file()


def test_roundtrip(corpus, tables, registry):
    out, entries = corpus
    for e in entries:
        if e.kind == "skipped":
            continue
        text = (out / e.path).read_text(encoding="utf-8")
        report = scan_unit(text, registry[e.profile], tables, path=e.path)
        if e.kind == "control":
            assert report.findings == [], e.path
            continue
        expected = [f for f in report.findings if str(f.rule) == e.expected_rule]
        assert expected, (e.path, report.findings)
        rank = min(f.severity.rank for f in expected)
        assert rank >= Severity.WARNING.rank
        # Anything else reported must be a lower-severity companion.
        for f in report.findings:
            assert str(f.rule) == e.expected_rule or f.severity.rank < rank, (e.path, f)
        if e.variant == "comment_spoof":
            assert len(report.findings) == 1


def _without_invisibles(text, tables):
    return "".join(c for c in text if ord(c) not in tables.invisible_set)


def test_deception_witness(corpus, tables, registry):
    out, entries = corpus
    for e in entries:
        if e.kind != "sample":
            continue
        sample = (out / e.path).read_text(encoding="utf-8")
        profile = registry[e.profile]
        control_path = e.path.replace(f"{e.variant}.", f"{e.variant}.control.")
        control = (out / control_path).read_text(encoding="utf-8")
        if e.variant == "stretched_string":
            # On screen the comment appears outside the string, as in the control;
            # the compiler sees it inside the string.
            tok = profile.line_comments[0]
            comment = f"{tok} Check if admin"
            shown = render_preview(sample, tables)
            line = next(l for l in shown.splitlines() if comment in l)
            assert line.rstrip().endswith(comment) and comment not in line.split('"')[1]
            spans = classify_spans(sample, profile)
            at = sample.index("Check if admin")
            kind = next(s.kind for s in spans if s.char_start <= at < s.char_end)
            assert kind is SpanKind.STRING
        elif e.variant == "homoglyph_function":
            idents = {w for w in sample.replace("(", " ").split() if tables.skeleton(w) == "print"}
            assert idents == {"print", "рrint"}
        else:
            # The invisible keeps the guard inside the comment; a reader sees it as code.
            at = sample.index(ZWSP) + 3
            kind = lambda text, i: next(s.kind for s in classify_spans(text, profile)
                                        if s.char_start <= i < s.char_end)
            assert kind(sample, at) is SpanKind.BLOCK_COMMENT
            visible = _without_invisibles(sample, tables)
            assert kind(visible, at - 1) is SpanKind.CODE
            assert ZWSP not in control
        # The deception is real on screen, and sanitizing removes it.
        if e.variant != "homoglyph_function":
            assert render_preview(sample, tables) != sample
            clean = sanitize(sample, tables=tables, profile=profile)
            assert render_preview(clean, tables) == clean


def test_unknown_variant(tables, registry):
    with pytest.raises(ForgeError, match="unknown variant"):
        forge(ForgeSpec("zalgo", "c"), tables, registry)
    with pytest.raises(ForgeError, match="unknown profile"):
        forge(ForgeSpec("comment_spoof", "cobol"), tables, registry)


def test_ascii_identifier_profile(tmp_path, tables):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"asc": {"extensions": [".asc"], "line_comments": ["--"],
                                     "strings": [{"open": "'", "close": "'"}],
                                     "identifiers": "ascii"}}), encoding="utf-8")
    reg = load_profiles(p)
    with pytest.raises(ForgeError, match="Unicode identifiers"):
        forge(ForgeSpec("homoglyph_function", "asc"), tables, reg)
    with pytest.raises(ForgeError, match="block comment"):
        forge(ForgeSpec("comment_spoof", "asc"), tables, reg)
    assert forge(ForgeSpec("stretched_string", "asc"), tables, reg).startswith("-- trojanscan-forge")


def test_unwritable_output(tmp_path, tables, registry):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ForgeError, match="cannot write"):
        forge_corpus(blocker / "sub", ["c"], tables, registry)


def test_empty_profile_list(tmp_path, tables, registry):
    assert forge_corpus(tmp_path, [], tables, registry) == []
    assert (tmp_path / MANIFEST_NAME).read_text() == ""


def test_expected_rules_cover_variants():
    assert set(EXPECTED_RULE) == set(VARIANTS)


def test_seeded_corpus_is_reproducible(tmp_path, tables, registry):
    a = seeded_corpus(tmp_path / "a", n_files=40, n_attacks=3, seed=5, mean_size=500,
                      tables=tables, registry=registry)
    b = seeded_corpus(tmp_path / "b", n_files=40, n_attacks=3, seed=5, mean_size=500,
                      tables=tables, registry=registry)
    assert a.planted == b.planted and a.unicode_files == b.unicode_files
    assert len(a.planted) == 3 and set(a.planted) <= a.unicode_files
    for rel in a.files:
        assert (a.root / rel).read_bytes() == (b.root / rel).read_bytes()
