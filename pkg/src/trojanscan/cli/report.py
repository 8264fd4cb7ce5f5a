"""Report formats (human, lines, SARIF) and baseline fingerprints."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from pathlib import Path
from urllib.parse import quote

from .. import __version__
from ..detection import RULES, Finding, Rule, Severity
from ..rendering import RED, RESET
from .scan import FORMATS, ConfigError, SessionSummary

DOCS = "docs/rules.md"
SARIF_SCHEMA = "https://json.schemastore.org/sarif-2.1.0.json"
TOOL_NAME = "trojanscan"
_SARIF_LEVEL = {Severity.ERROR: "error", Severity.WARNING: "warning", Severity.INFO: "note"}
_WS = re.compile(r"\s+")


def doc_link(rule) -> str:
    return f"{DOCS}#{str(rule).lower()}"


def hex_codepoints(cps) -> list[str]:
    return [f"U+{cp:04X}" for cp in cps]


# -- baseline ------------------------------------------------------------------

def _context(f: Finding) -> str:
    return _WS.sub(" ", f.preview).strip()


def fingerprints(findings: list[Finding]) -> list[str]:
    """Stable hash per finding: rule, path, code points and normalized context line.

    Line numbers are left out so unrelated edits above a finding keep it
    suppressed; repeated identical findings get an ordinal to stay distinct.
    """
    seen: Counter = Counter()
    out = [""] * len(findings)
    for i in sorted(range(len(findings)), key=lambda i: findings[i].sort_key()):
        f = findings[i]
        key = "\0".join((str(f.rule), f.path, " ".join(hex_codepoints(f.codepoints)),
                         _context(f)))
        n = seen[key]
        seen[key] += 1
        out[i] = hashlib.sha256(f"{key}\0{n}".encode("utf-8")).hexdigest()
    return out


def write_baseline(summary: SessionSummary, path: str | Path) -> int:
    fps = sorted(fingerprints(summary.findings + summary.suppressed))
    try:
        Path(path).write_text("".join(fp + "\n" for fp in fps), encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write baseline {path}: {exc.strerror or exc}") from None
    return len(fps)


def load_baseline(path: str | Path) -> set[str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read baseline {path}: {exc.strerror or exc}") from None
    out = set()
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not re.fullmatch(r"[0-9a-f]{64}", line):
            raise ConfigError(f"{path}:{n}: not a fingerprint: {line[:40]!r}")
        out.add(line)
    return out


# -- formats -------------------------------------------------------------------

def _paint(s: str, color: bool) -> str:
    return f"{RED}{s}{RESET}" if color else s


def emit_human(summary: SessionSummary, color: bool = False) -> str:
    out = []
    n = len(summary.findings)
    sev = Counter(str(f.severity) for f in summary.findings)
    if n:
        parts = ", ".join(f"{sev[s]} {s}{'s' if sev[s] != 1 else ''}"
                          for s in ("error", "warning", "info") if sev[s])
        out.append(_paint(f"WARNING: {n} finding{'s' if n != 1 else ''} ({parts})", color)
                   + f" in {summary.files_total} files")
    else:
        out.append(f"no findings in {summary.files_total} files")
    for f in summary.findings:
        cve = f" [{f.cve}]" if f.cve else ""
        out.append(f"{f.path}:{f.line}:{f.column}: {_paint(str(f.severity), color)} "
                   f"{f.rule}{cve}: {f.message}")
        out.append(f"  > {f.preview}")
        out.append(f"  see {doc_link(f.rule)}")
    for d in summary.diagnostics:
        out.append(f"{d.path}: {d.severity}: {d.message}")
    pct = 100.0 * summary.selectivity
    out.append(f"prefilter: {summary.files_scanned}/{summary.files_total} files "
               f"({pct:.1f}%) scanned in full")
    if summary.suppressed:
        out.append(f"baseline: {len(summary.suppressed)} suppressed")
    out.append(f"exit status {summary.exit_code}")
    return "\n".join(out) + "\n"


def finding_record(f: Finding) -> dict:
    return {
        "rule": str(f.rule),
        "cve": f.cve,
        "severity": str(f.severity),
        "path": f.path,
        "line": f.line,
        "col": f.column,
        "byte_offset": f.byte_offset,
        "length": f.length,
        "codepoints": hex_codepoints(f.codepoints),
        "message": f.message,
        "preview": f.preview,
    }


def emit_lines(summary: SessionSummary) -> str:
    return "".join(json.dumps(finding_record(f), ensure_ascii=False) + "\n"
                   for f in summary.findings)


def sarif_rules() -> list[dict]:
    out = []
    for info in RULES.values():
        rule = {
            "id": str(info.rule),
            "name": "".join(w.capitalize() for w in str(info.rule).split("_")),
            "shortDescription": {"text": info.summary},
            "fullDescription": {"text": f"{info.summary}. {info.guidance}"},
            "help": {"text": f"{info.guidance} See {doc_link(info.rule)}."},
            "defaultConfiguration": {"level": _SARIF_LEVEL[info.severity]},
            "properties": {"tags": ["security"] + ([info.cve] if info.cve else [])},
        }
        out.append(rule)
    return out


def _sarif_result(f: Finding, index: dict, fp: str, suppressed: bool) -> dict:
    res = {
        "ruleId": str(f.rule),
        "ruleIndex": index[f.rule],
        "level": _SARIF_LEVEL[f.severity],
        "message": {"text": f.message},
        "locations": [{
            "physicalLocation": {
                "artifactLocation": {"uri": quote(f.path)},
                "region": {
                    "startLine": f.line,
                    "startColumn": f.column,
                    "byteOffset": f.byte_offset,
                    "byteLength": f.length,
                    "snippet": {"text": f.preview},
                },
            },
        }],
        "partialFingerprints": {"trojanscan/v1": fp},
        "properties": {"codepoints": hex_codepoints(f.codepoints)},
    }
    if f.cve:
        res["properties"]["cve"] = f.cve
    if suppressed:
        res["suppressions"] = [{"kind": "external", "justification": "baseline"}]
    return res


def emit_sarif(summary: SessionSummary) -> str:
    index = {r: i for i, r in enumerate(RULES)}
    everything = summary.findings + summary.suppressed
    n_active = len(summary.findings)
    results = [_sarif_result(f, index, fp, i >= n_active)
               for i, (f, fp) in enumerate(zip(everything, fingerprints(everything)))]
    notes = [{"level": "error" if d.severity is Severity.ERROR else "note",
              "message": {"text": f"{d.path}: {d.message}"}} for d in summary.diagnostics]
    doc = {
        "$schema": SARIF_SCHEMA,
        "version": "2.1.0",
        "runs": [{
            "tool": {"driver": {
                "name": TOOL_NAME,
                "version": __version__,
                "rules": sarif_rules(),
                "properties": {"unicodeVersion": summary.tables_version,
                               "confusablesVersion": summary.confusables_version},
            }},
            "invocations": [{
                "executionSuccessful": not summary.operational_error,
                "exitCode": summary.exit_code,
                "toolExecutionNotifications": notes,
            }],
            "columnKind": "unicodeCodePoints",
            "results": results,
            "properties": {"filesTotal": summary.files_total,
                           "filesScanned": summary.files_scanned},
        }],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def emit_report(summary: SessionSummary, fmt: str, color: bool = False) -> bytes:
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r} (expected one of {', '.join(FORMATS)})")
    if fmt == "human":
        text = emit_human(summary, color)
    elif fmt == "lines":
        text = emit_lines(summary)
    else:
        text = emit_sarif(summary)
    return text.encode("utf-8")


def rules_reference(markdown: bool = False) -> str:
    if not markdown:
        rows = [f"{str(i.rule):<26} {i.cve or '-':<15} {i.severity!s:<8} {i.summary}"
                for i in RULES.values()]
        return "\n".join([f"{'RULE':<26} {'CVE':<15} {'SEVERITY':<8} SUMMARY"] + rows) + "\n"
    out = ["# Rule reference", "",
           "Rule ids, default severities and CVE tags are stable identifiers used by every "
           "report format and by baseline fingerprints.", "",
           "| Rule | CVE | Default severity |", "|---|---|---|"]
    out += [f"| [{i.rule}](#{str(i.rule).lower()}) | {i.cve or '-'} | {i.severity} |"
            for i in RULES.values()]
    for i in RULES.values():
        out += ["", f"## {i.rule}", "", f"- CVE: {i.cve or 'none'}",
                f"- Default severity: {i.severity}", "", f"{i.summary}.", "", i.guidance]
    return "\n".join(out) + "\n"


__all__ = ["emit_report", "write_baseline", "load_baseline", "fingerprints", "rules_reference",
           "Rule"]
