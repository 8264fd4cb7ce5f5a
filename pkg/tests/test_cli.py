import builtins
import json
import shutil

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA
from trojanscan.cli import report as rep
from trojanscan.cli.main import main
from trojanscan.cli.scan import (ConfigError, ScanConfig, SessionSummary, bidi_prefilter,
                                 prefilter, walk_and_scan)

RLO, LRI, PDI, ZWSP = "‮", "⁦", "⁩", "​"


@pytest.mark.parametrize("data, expected", [
    (b"int main() {}", False),
    (b"", False),
    ("// é".encode(), True),
    (RLO.encode(), True),
    (b"\xff", True),
])
def test_prefilter_examples(data, expected):
    assert prefilter(data) is expected


def test_bidi_prefilter():
    assert bidi_prefilter(f"a{RLO}".encode()) and bidi_prefilter(f"{PDI}".encode())
    assert not bidi_prefilter("é ü ZWSP​".encode())


@settings(max_examples=500)
@given(st.text(max_size=40))
def test_prefilter_never_drops_flaggable_text(text):
    data = text.encode("utf-8", "surrogatepass")
    if any(ord(c) >= 0x80 for c in text):
        assert prefilter(data)
    if any(0x202A <= ord(c) <= 0x202E or 0x2066 <= ord(c) <= 0x2069 for c in text):
        assert bidi_prefilter(data)


@pytest.fixture
def fig1_dir(tmp_path):
    shutil.copy(DATA / "fig1.c", tmp_path / "fig1.c")
    (tmp_path / "clean.c").write_text("int x;\n", encoding="utf-8")
    return tmp_path


def scan(tmp_path, **kw):
    return walk_and_scan(ScanConfig(paths=(str(tmp_path),), **kw))


def test_fig1_directory_exit_1(fig1_dir, capsys):
    assert main(["scan", str(fig1_dir), "--color", "never"]) == 1
    out = capsys.readouterr().out
    assert "fig1.c:6:" in out and "BIDI_UNTERMINATED" in out and "CVE-2021-42574" in out
    assert "docs/rules.md#bidi_unterminated" in out
    assert "exit status 1" in out


def test_empty_directory_exit_0(tmp_path, capsys):
    assert main(["scan", str(tmp_path)]) == 0
    assert "no findings in 0 files" in capsys.readouterr().out


def test_missing_path_exit_2(tmp_path, capsys):
    assert main(["scan", str(tmp_path / "nope")]) == 2


def test_unreadable_file_exit_2(fig1_dir, monkeypatch):
    real_open = builtins.open

    def fake_open(path, *a, **kw):
        if str(path).endswith("clean.c"):
            raise PermissionError(13, "Permission denied")
        return real_open(path, *a, **kw)

    monkeypatch.setattr(builtins, "open", fake_open)
    summary = scan(fig1_dir)
    assert summary.exit_code == 2
    assert any("cannot read" in d.message for d in summary.diagnostics)
    assert [str(f.rule) for f in summary.findings] == ["BIDI_UNTERMINATED"]


def _three_findings(tmp_path):
    tmp_path.mkdir()
    (tmp_path / "a.c").write_text(f"int a{ZWSP};\n// {LRI}x{PDI}\nint b{ZWSP};\n", encoding="utf-8")
    return tmp_path


def test_baseline_flow(tmp_path):
    src = _three_findings(tmp_path / "src")
    bl = tmp_path / "base.txt"
    first = walk_and_scan(ScanConfig(paths=(str(src),), write_baseline=str(bl)))
    assert len(first.findings) == 3
    assert rep.write_baseline(first, bl) == 3
    again = walk_and_scan(ScanConfig(paths=(str(src),)))
    assert len(again.findings) == 3
    quiet = walk_and_scan(ScanConfig(paths=(str(src),), baseline=str(bl)))
    assert quiet.findings == [] and len(quiet.suppressed) == 3 and quiet.exit_code == 0
    # Unrelated edits shift lines but do not resurrect findings.
    (src / "a.c").write_text("\n\n" + (src / "a.c").read_text(encoding="utf-8"), encoding="utf-8")
    assert walk_and_scan(ScanConfig(paths=(str(src),), baseline=str(bl))).findings == []


def test_baseline_distinguishes_duplicates(tmp_path):
    (tmp_path / "a.c").write_text(f"int a{ZWSP};\nint a{ZWSP};\n", encoding="utf-8")
    fps = rep.fingerprints(scan(tmp_path).findings)
    assert len(set(fps)) == 2


def test_empty_baseline(tmp_path):
    bl = tmp_path / "b.txt"
    assert rep.write_baseline(SessionSummary(), bl) == 0
    assert bl.read_text(encoding="utf-8") == ""
    assert rep.load_baseline(bl) == set()


def test_bad_baseline_rejected(tmp_path):
    bl = tmp_path / "b.txt"
    bl.write_text("not-a-fingerprint\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        rep.load_baseline(bl)


def test_lines_fields(fig1_dir):
    out = rep.emit_report(scan(fig1_dir), "lines").decode()
    records = [json.loads(l) for l in out.splitlines()]
    assert len(records) == 1
    assert list(records[0]) == ["rule", "cve", "severity", "path", "line", "col", "byte_offset",
                                "length", "codepoints", "message", "preview"]
    r = records[0]
    assert r["codepoints"] == ["U+202E", "U+2066", "U+2069", "U+2066"] and r["line"] == 6


def test_sarif_validates(fig1_dir, tmp_path):
    schema = json.loads((DATA / "sarif-2.1.0-rtm.5.json").read_text(encoding="utf-8"))
    (fig1_dir / "h.py").write_text("рrint(1)\nprint(2)\nprint(3)\n", encoding="utf-8")
    bl = tmp_path / "bl.txt"
    first = scan(fig1_dir)
    rep.write_baseline(SessionSummary(findings=first.findings[:1]), bl)
    summary = scan(fig1_dir, baseline=str(bl))
    doc = json.loads(rep.emit_report(summary, "sarif"))
    jsonschema.validate(doc, schema)
    run = doc["runs"][0]
    assert doc["version"] == "2.1.0"
    assert {r["id"] for r in run["tool"]["driver"]["rules"]} >= {"BIDI_UNTERMINATED"}
    assert any("suppressions" in r for r in run["results"])
    assert all(r["partialFingerprints"] for r in run["results"])


def test_jobs_do_not_change_output(tmp_path):
    for i in range(12):
        body = f"int v{i}{ZWSP} = {i};\n" if i % 3 == 0 else f"int v{i} = {i};\n"
        (tmp_path / f"f{i:02d}.c").write_text(body, encoding="utf-8")
    (tmp_path / "p.py").write_text("рrint(1)\n", encoding="utf-8")
    (tmp_path / "q.py").write_text("print(1)\nprint(2)\n", encoding="utf-8")
    one = rep.emit_report(scan(tmp_path, jobs=1), "lines")
    four = rep.emit_report(scan(tmp_path, jobs=4), "lines")
    assert one == four and one


def test_session_homoglyph_across_files(tmp_path):
    (tmp_path / "lib.py").write_text("def print_it():\n    print(1)\n    print(2)\n", encoding="utf-8")
    (tmp_path / "evil.py").write_text("рrint('x')\n", encoding="utf-8")
    summary = scan(tmp_path)
    found = [f for f in summary.findings if str(f.rule) == "CONFUSABLE_IDENTIFIERS"]
    assert [f.path.rsplit("/", 1)[-1] for f in found] == ["evil.py"]
    assert "print" in found[0].message
    # The ASCII file is prefiltered away and never reported.
    assert not any(f.path.endswith("lib.py") for f in summary.findings)
    assert summary.scanned_paths == [str(tmp_path / "evil.py")]


def test_human_no_findings_and_no_color(tmp_path, capsys, monkeypatch):
    (tmp_path / "a.c").write_text("int x;\n", encoding="utf-8")
    monkeypatch.setenv("NO_COLOR", "1")
    assert main(["scan", str(tmp_path), "--color", "auto"]) == 0
    out = capsys.readouterr().out
    assert "no findings in 1 files" in out and "\x1b[" not in out


def test_color_always(fig1_dir, capsys):
    main(["scan", str(fig1_dir), "--color", "always"])
    assert "\x1b[" in capsys.readouterr().out


def test_unknown_format_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["scan", str(tmp_path), "--format", "xml"])
    assert exc.value.code == 2
    with pytest.raises(ConfigError):
        ScanConfig(paths=("x",), format="xml")


def test_unknown_lang_exits_2(tmp_path, capsys):
    assert main(["scan", str(tmp_path), "--lang", "cobol"]) == 2
    assert "cobol" in capsys.readouterr().err


def test_hidden_and_vendor_dirs(tmp_path):
    for d in (".git", "node_modules", "src"):
        (tmp_path / d).mkdir()
        (tmp_path / d / "x.c").write_text(f"int a{ZWSP};\n", encoding="utf-8")
    assert [f.path for f in scan(tmp_path).findings] == [str(tmp_path / "src" / "x.c")]
    assert len(scan(tmp_path, all_files=True).findings) == 3
    assert scan(tmp_path, exclude=("src/*",)).findings == []


def test_no_prefilter_scans_everything(tmp_path):
    (tmp_path / "a.c").write_text("int x;\n", encoding="utf-8")
    (tmp_path / "b.c").write_text(f"int y{ZWSP};\n", encoding="utf-8")
    on, off = scan(tmp_path), scan(tmp_path, use_prefilter=False)
    assert on.files_scanned == 1 and off.files_scanned == 2
    assert rep.emit_report(on, "lines") == rep.emit_report(off, "lines")
    assert 0 < on.selectivity < 1


def test_bidi_only(tmp_path):
    (tmp_path / "a.c").write_text(f"int y{ZWSP};\n// {RLO}x\n", encoding="utf-8")
    rules = [str(f.rule) for f in scan(tmp_path, bidi_only=True).findings]
    assert rules == ["BIDI_UNTERMINATED"]


def test_output_file(fig1_dir, tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["scan", str(fig1_dir), "--format", "lines", "-o", str(out)]) == 1
    assert json.loads(out.read_text(encoding="utf-8"))["rule"] == "BIDI_UNTERMINATED"


def test_sanitize_command(fig1_dir, tmp_path):
    out = tmp_path / "clean"
    assert main(["sanitize", str(fig1_dir), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["clean.c", "fig1.c"]
    assert main(["scan", str(out)]) == 0
    text = (out / "fig1.c").read_text(encoding="utf-8")
    assert "⟦U+202E RLO⟧" in text


def test_sanitize_in_place_preserves_bad_bytes(tmp_path):
    f = tmp_path / "a.c"
    f.write_bytes(b"int a\xe2\x80\x8b; // \xff\n")
    assert main(["sanitize", str(f), "--in-place", "--strip"]) == 0
    assert f.read_bytes() == b"int a; // \xff\n"


def test_sanitize_needs_destination(tmp_path):
    assert main(["sanitize", str(tmp_path)]) == 2


def test_preview_command(tmp_path, capsys):
    f = tmp_path / "a.c"
    f.write_text(f"// a{RLO}bc\n", encoding="utf-8")
    assert main(["preview", str(f)]) == 0
    assert capsys.readouterr().out == "// acb\n"
    assert main(["preview", str(f), "--escape"]) == 0
    assert "⟦U+202E RLO⟧" in capsys.readouterr().out


def test_forge_command(tmp_path, capsys):
    assert main(["forge", "--out", str(tmp_path), "--profile", "python"]) == 0
    out = capsys.readouterr().out
    assert "wrote 2 samples and 2 controls" in out and "skipped comment_spoof" in out
    assert main(["scan", str(tmp_path), "--format", "lines"]) == 1
    assert main(["forge", "--out", str(tmp_path), "--profile", "cobol"]) == 2


def test_rules_command(capsys):
    assert main(["rules", "--markdown"]) == 0
    out = capsys.readouterr().out
    assert out == (DATA.parent.parent / "docs" / "rules.md").read_text(encoding="utf-8")


def test_bad_allow_codepoint(tmp_path):
    with pytest.raises(SystemExit):
        main(["scan", str(tmp_path), "--allow-codepoint", "zzz"])


def test_allow_codepoint(tmp_path):
    (tmp_path / "a.c").write_text(f"int y{ZWSP};\n", encoding="utf-8")
    assert main(["scan", str(tmp_path), "--allow-codepoint", "U+200B"]) == 0
